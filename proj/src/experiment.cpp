#include "misspec/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace misspec {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::optional<double> human_alpha(const Generator& g) {
  if (g.kind == GeneratorKind::ActionMixture || g.kind == GeneratorKind::DemoMixture) return g.param;
  return std::nullopt;
}

}  // namespace

void ExperimentConfig::validate() const {
  params.validate();
  if (grid_paths.empty()) throw std::invalid_argument("at least one grid is required");
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (resamples < 1) throw std::invalid_argument("resamples must be at least 1");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be at least 1");
  if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must lie in (0, 1]");
}

std::vector<std::string> default_grid_paths() {
  const std::string dir = MISSPEC_DATA_DIR "/grids/";
  return {dir + "three_color_a.grid", dir + "three_color_b.grid", dir + "three_color_c.grid"};
}

std::string grid_id_from_path(const std::string& path) { return std::filesystem::path(path).stem().string(); }

ModelSet load_models(const ExperimentConfig& cfg) {
  cfg.validate();
  ModelSet models(cfg.params);
  for (const std::string& path : cfg.grid_paths) {
    const std::string id = grid_id_from_path(path);
    if (models.contains(id)) throw std::invalid_argument("duplicate grid id '" + id + "'");
    models.add(id, load_grid_file(path).with_discount(cfg.discount).with_max_steps(cfg.max_steps));
  }
  return models;
}

TrialDraw draw_trial(std::uint64_t master_seed, int trial, std::size_t n_grids) {
  std::uint64_t state = mix_seed(master_seed, static_cast<std::uint64_t>(trial));
  TrialDraw d;
  d.grid = static_cast<std::size_t>(splitmix64(state) % n_grids);
  d.true_reward = static_cast<int>(splitmix64(state) % kNumHypotheses);
  d.demo_seed = splitmix64(state);
  return d;
}

std::vector<AccuracyCell> run_matrix(const ExperimentConfig& cfg, const ModelSet& models,
                                     const std::vector<Generator>& humans, double robot_alpha) {
  cfg.validate();
  const std::vector<std::string> ids = [&] {
    std::vector<std::string> out;
    for (const std::string& p : cfg.grid_paths) out.push_back(grid_id_from_path(p));
    return out;
  }();
  bool needs_pedagogic = false;
  for (RobotKind r : cfg.robots) needs_pedagogic |= r != RobotKind::Literal;

  std::vector<AccuracyCell> cells;
  for (const Generator& human : humans) {
    std::vector<std::vector<double>> outcomes(cfg.robots.size());
    for (int i = 0; i < cfg.trials; ++i) {
      const TrialDraw draw = draw_trial(cfg.seed, i, ids.size());
      const std::string& id = ids[draw.grid];
      const HumanModels& m = models.at(id);
      const Demonstration demo = sample_demonstration(m, id, RewardHypothesis(draw.true_reward), human, draw.demo_seed);
      const DemoLikelihoods lk = demo_likelihoods(demo, m, needs_pedagogic);
      for (std::size_t k = 0; k < cfg.robots.size(); ++k) {
        const int guess = infer(lk, cfg.robots[k], robot_alpha).mode();
        outcomes[k].push_back(guess == draw.true_reward ? 1.0 : 0.0);
      }
    }
    for (std::size_t k = 0; k < cfg.robots.size(); ++k) {
      AccuracyCell cell;
      cell.human = human.tag();
      cell.robot = robot_tag(cfg.robots[k]);
      cell.alpha = human_alpha(human);
      cell.n = cfg.trials;
      for (double o : outcomes[k]) cell.correct += static_cast<int>(o);
      cell.accuracy = static_cast<double>(cell.correct) / cell.n;
      cell.seed = cfg.seed;
      const std::uint64_t boot_seed =
          mix_seed(cfg.seed, fnv1a(cell.human + "|" + cell.robot + "|" + (cell.alpha ? fmt(*cell.alpha) : "")));
      cell.ci = bootstrap_ci(outcomes[k], 0.95, cfg.resamples, boot_seed);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<AccuracyCell> run_matrix(const ExperimentConfig& cfg, const ModelSet& models) {
  return run_matrix(cfg, models, cfg.humans, cfg.params.alpha);
}

std::vector<AccuracyCell> run_mixture_sweep(const ExperimentConfig& cfg, const ModelSet& models, MixtureKind kind,
                                            const std::vector<double>& values) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("sweep values must lie in [0, 1]");
  }
  std::vector<AccuracyCell> out;
  for (double v : values) {
    const Generator human = kind == MixtureKind::Action ? Generator::action_mixture(v) : Generator::demo_mixture(v);
    auto cells = run_matrix(cfg, models, {human}, v);
    out.insert(out.end(), cells.begin(), cells.end());
  }
  return out;
}

std::vector<Demonstration> generate_demonstrations(const ExperimentConfig& cfg, const ModelSet& models,
                                                   const Generator& generator, int n, std::uint64_t seed,
                                                   const std::string& individual) {
  cfg.validate();
  std::vector<Demonstration> out;
  out.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) {
    const TrialDraw draw = draw_trial(seed, i, cfg.grid_paths.size());
    const std::string id = grid_id_from_path(cfg.grid_paths[draw.grid]);
    Demonstration d = sample_demonstration(models.at(id), id, RewardHypothesis(draw.true_reward), generator, draw.demo_seed);
    d.individual = individual;
    out.push_back(std::move(d));
  }
  return out;
}

std::map<std::string, std::vector<Demonstration>> generate_population(const ExperimentConfig& cfg,
                                                                      const ModelSet& models, double p_pedagogic,
                                                                      int individuals, int per_individual,
                                                                      std::uint64_t seed) {
  if (!(p_pedagogic >= 0.0 && p_pedagogic <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  std::map<std::string, std::vector<Demonstration>> out;
  std::uint64_t coin = mix_seed(seed, fnv1a("population"));
  char name[32];
  for (int i = 0; i < individuals; ++i) {
    std::snprintf(name, sizeof name, "h%04d", i);
    const Generator g = uniform01(coin) < p_pedagogic ? Generator::pedagogic() : Generator::literal();
    out[name] = generate_demonstrations(cfg, models, g, per_individual, mix_seed(seed, static_cast<std::uint64_t>(i)), name);
  }
  return out;
}

const AccuracyCell& find_cell(const std::vector<AccuracyCell>& cells, const std::string& human,
                              const std::string& robot, std::optional<double> alpha) {
  for (const AccuracyCell& c : cells) {
    if (c.human != human || c.robot != robot) continue;
    if (alpha.has_value() != c.alpha.has_value()) continue;
    if (alpha && std::abs(*alpha - *c.alpha) > 1e-12) continue;
    return c;
  }
  throw std::out_of_range("no cell for human=" + human + " robot=" + robot);
}

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyCell>& cells) {
  out << "human,robot,alpha,accuracy,ci_lo,ci_hi,n,seed\n";
  for (const AccuracyCell& c : cells) {
    out << c.human << ',' << c.robot << ',' << (c.alpha ? fmt(*c.alpha, "%.4f") : "") << ',' << fmt(c.accuracy) << ','
        << fmt(c.ci.lo) << ',' << fmt(c.ci.hi) << ',' << c.n << ',' << c.seed << '\n';
  }
}

void write_manifest(std::ostream& out, const ExperimentConfig& cfg, const std::string& command) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["seed"] = cfg.seed;
  j["grids"] = cfg.grid_paths;
  j["tau_l"] = cfg.params.tau_literal;
  j["tau_p"] = cfg.params.tau_pedagogic;
  j["kappa"] = cfg.params.kappa;
  j["alpha"] = cfg.params.alpha;
  j["plan_horizon"] = cfg.params.plan_horizon;
  j["lookahead"] = cfg.params.lookahead;
  j["discount"] = cfg.discount;
  j["max_steps"] = cfg.max_steps;
  j["trials"] = cfg.trials;
  j["resamples"] = cfg.resamples;
  std::vector<std::string> robots, humans;
  for (RobotKind r : cfg.robots) robots.push_back(robot_tag(r));
  for (const Generator& h : cfg.humans) humans.push_back(h.tag());
  j["robots"] = robots;
  j["humans"] = humans;
  j["nll_normalization"] = "per-demonstration mean";
  out << j.dump(2) << '\n';
}

TheoryReport run_theory_check(int n_games, int max_types, int max_signals, std::uint64_t seed, double beta) {
  TheoryReport rep;
  rep.games = std::max(n_games, 0);
  rep.min_slack = n_games > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  for (int i = 0; i < n_games; ++i) {
    const std::uint64_t game_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    const coop::RandomInstance inst = coop::random_instance(game_seed, max_types, max_signals);
    const coop::Hierarchy h = coop::build_hierarchy(inst.game, inst.h0, 1, beta);
    const coop::RankingReport r = coop::verify_ranking(inst.game, h);
    if (r.holds) {
      ++rep.passes;
    } else {
      rep.violations.push_back(game_seed);
    }
    if (r.ped_lit - r.lit_lit > coop::kRankingSlack) ++rep.strict_improvements;
    rep.min_slack = std::min(rep.min_slack, r.min_slack);
  }
  return rep;
}

void write_theory_report(std::ostream& out, const TheoryReport& rep) {
  out << "games " << rep.games << "\npasses " << rep.passes << "\nviolations " << rep.violations.size()
      << "\nmin_slack " << fmt(rep.min_slack, "%.3e") << "\nstrict_improvements " << rep.strict_improvements << '\n';
  for (std::uint64_t s : rep.violations) out << "violation_seed " << s << '\n';
}

CiSolveReport run_ci_sweep(int n_instances, int max_types, int max_signals, std::uint64_t seed, int max_iter,
                           double tol) {
  CiSolveReport rep;
  for (int i = 0; i < n_instances; ++i) {
    const coop::RandomInstance inst =
        coop::random_instance(mix_seed(seed, static_cast<std::uint64_t>(i)), max_types, max_signals);
    const std::vector<double> prior(static_cast<std::size_t>(inst.game.n_types()), 1.0 / inst.game.n_types());
    const coop::FixedPointResult fp = coop::ci_fixed_point(inst.h0, prior, max_iter, tol);
    const coop::Residuals res = coop::ci_residuals(fp.teacher, fp.learner, prior);
    ++rep.instances;
    rep.converged += fp.converged ? 1 : 0;
    rep.max_iterations = std::max(rep.max_iterations, fp.iterations);
    rep.max_learner_residual = std::max(rep.max_learner_residual, res.learner);
    rep.max_teacher_residual = std::max(rep.max_teacher_residual, res.teacher);
  }
  return rep;
}

LikelihoodReport run_likelihood_demo() {
  const lik::Fixture f = lik::claim2_fixture();
  LikelihoodReport rep;
  rep.pred_m1 = lik::predictive_likelihood_exact(f.m1, f.dataset);
  rep.pred_m2 = lik::predictive_likelihood_exact(f.m2, f.dataset);
  rep.inf_m1 = lik::inferential_likelihood_exact(f.m1, f.dataset);
  rep.inf_m2 = lik::inferential_likelihood_exact(f.m2, f.dataset);
  rep.printed_inf_m2 = lik::kPrintedInferentialM2;
  rep.pred_m1_float = lik::predictive_likelihood(f.m1, f.dataset);
  rep.pred_m2_float = lik::predictive_likelihood(f.m2, f.dataset);
  rep.inf_m1_float = lik::inferential_likelihood(f.m1, f.dataset);
  rep.inf_m2_float = lik::inferential_likelihood(f.m2, f.dataset);
  rep.reversal = lik::is_reversal(f.m1, f.m2, f.dataset);
  return rep;
}

void write_likelihood_report(std::ostream& out, const LikelihoodReport& rep) {
  auto q = [](const lik::Rational& r) { return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator()); };
  out << "predictive_m1 " << q(rep.pred_m1) << " (" << fmt(rep.pred_m1_float, "%.12e") << ")\n"
      << "predictive_m2 " << q(rep.pred_m2) << " (" << fmt(rep.pred_m2_float, "%.12e") << ")\n"
      << "inferential_m1 " << q(rep.inf_m1) << " (" << fmt(rep.inf_m1_float, "%.12e") << ")\n"
      << "inferential_m2 " << q(rep.inf_m2) << " (" << fmt(rep.inf_m2_float, "%.12e") << ")\n"
      << "inferential_m2_printed " << q(rep.printed_inf_m2) << " (disagrees with the listed dataset)\n"
      << "verdict " << (rep.reversal ? "reversal confirmed" : "no reversal") << '\n';
}

}  // namespace misspec
