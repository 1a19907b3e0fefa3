#include "misspec/records.hpp"

#include <istream>
#include <json.hpp>
#include <ostream>

namespace misspec {

using nlohmann::json;

namespace {

GeneratorKind kind_from_tag(const std::string& tag) {
  if (tag == "literal") return GeneratorKind::LiteralH;
  if (tag == "pedagogic") return GeneratorKind::PedagogicH;
  if (tag == "action-mixture") return GeneratorKind::ActionMixture;
  if (tag == "demo-mixture") return GeneratorKind::DemoMixture;
  throw std::invalid_argument("unknown generator '" + tag + "'");
}

}  // namespace

Generator parse_generator(const std::string& tag, double param) { return {kind_from_tag(tag), param}; }

std::string to_json_line(const Demonstration& demo) {
  json j;
  j["grid_id"] = demo.grid_id;
  j["true_reward"] = demo.true_reward;
  j["generator"] = demo.generator.tag();
  j["alpha"] = demo.generator.kind == GeneratorKind::ActionMixture ? json(demo.generator.param) : json(nullptr);
  j["p_demo"] = demo.generator.kind == GeneratorKind::DemoMixture ? json(demo.generator.param) : json(nullptr);
  j["resolved"] = Generator{demo.resolved, 0.0}.tag();
  j["seed"] = demo.seed;
  if (!demo.individual.empty()) j["individual"] = demo.individual;
  json steps = json::array();
  for (const DemoStep& s : demo.steps) steps.push_back({s.cell.row, s.cell.col, std::string(1, action_char(s.action))});
  j["steps"] = std::move(steps);
  return j.dump();
}

Demonstration demonstration_from_json(const std::string& line) {
  const json j = json::parse(line);
  Demonstration d;
  d.grid_id = j.at("grid_id").get<std::string>();
  d.true_reward = RewardHypothesis(j.at("true_reward").get<int>()).index();
  d.generator.kind = kind_from_tag(j.at("generator").get<std::string>());
  if (d.generator.kind == GeneratorKind::ActionMixture) d.generator.param = j.at("alpha").get<double>();
  if (d.generator.kind == GeneratorKind::DemoMixture) d.generator.param = j.at("p_demo").get<double>();
  d.resolved = j.contains("resolved") ? kind_from_tag(j["resolved"].get<std::string>()) : d.generator.kind;
  d.seed = j.value("seed", std::uint64_t{0});
  d.individual = j.value("individual", std::string{});
  for (const json& s : j.at("steps")) {
    const std::string a = s.at(2).get<std::string>();
    if (a.size() != 1) throw std::invalid_argument("bad action '" + a + "'");
    d.steps.push_back({{s.at(0).get<int>(), s.at(1).get<int>()}, action_from_char(a[0])});
  }
  return d;
}

void write_demonstrations(std::ostream& out, const std::vector<Demonstration>& demos) {
  for (const Demonstration& d : demos) out << to_json_line(d) << '\n';
}

std::vector<Demonstration> read_demonstrations(std::istream& in) {
  std::vector<Demonstration> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(demonstration_from_json(line));
  }
  return out;
}

}  // namespace misspec
