#include <doctest.h>

#include <cmath>
#include <vector>

#include "misspec/estimation.hpp"
#include "oracles.hpp"

using namespace misspec;

namespace {

HumanParams small_params() {
  HumanParams p;
  p.plan_horizon = 4;
  p.lookahead = 4;
  return p;
}

std::vector<Demonstration> sample_many(const ModelSet& set, const std::string& id, const Generator& gen, int n,
                                       std::uint64_t seed) {
  std::vector<Demonstration> out;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t s = mix_seed(seed, static_cast<std::uint64_t>(i));
    std::uint64_t state = s;
    const int r = static_cast<int>(splitmix64(state) % kNumHypotheses);
    out.push_back(sample_demonstration(set.at(id), id, RewardHypothesis(r), gen, s));
  }
  return out;
}

}  // namespace

TEST_CASE("demo log-likelihood by hand") {
  SUBCASE("single step from a cell with four equal actions") {
    HumanParams flat;
    flat.tau_literal = 1e12;
    ModelSet hot(flat);
    hot.add("g", load_grid("...\n.S.\n..G"));
    Demonstration d{"g", 0, Generator::literal(), GeneratorKind::LiteralH, 0, "", {{{1, 1}, Action::North}}};
    CHECK(demo_loglik(d, Generator::literal(), hot.at("g")) == doctest::Approx(std::log(0.25)).epsilon(1e-9));
  }

  SUBCASE("five steps on a 3x3 grid equal the product of oracle probabilities") {
    ModelSet set(small_params());
    const GridWorld g = load_grid("S.o\npc.\n..G");
    set.add("g", g);
    const std::vector<int> actions = {2, 1, 3, 1, 2};  // E S W S E
    Demonstration d{"g", 5, Generator::literal(), GeneratorKind::LiteralH, 0, "", {}};
    Cell s = g.start();
    for (int a : actions) {
      d.steps.push_back({s, kActions[static_cast<std::size_t>(a)]});
      s = oracle::move(g, s, a);
    }
    const HumanModels& m = set.at("g");
    double lit = 0.0, ped = 0.0;
    oracle::Vec8 b;
    b.fill(0.125);
    s = g.start();
    for (std::size_t t = 0; t < actions.size(); ++t) {
      lit += std::log(oracle::literal_lik(m.literal(), s, actions[t])[5]);
      const int h = std::max(1, 4 - static_cast<int>(t));
      ped += std::log(oracle::pedagogic_probs(m.literal(), 5, m.params().kappa, m.params().tau_pedagogic, s, b, h)[actions[t]]);
      b = oracle::literal_step(m.literal(), b, s, actions[t]);
      s = oracle::move(g, s, actions[t]);
    }
    CHECK(demo_loglik(d, Generator::literal(), m) == doctest::Approx(lit).epsilon(1e-9));
    CHECK(demo_loglik(d, Generator::pedagogic(), m) == doctest::Approx(ped).epsilon(1e-9));
    CHECK(demo_loglik(d, Generator::action_mixture(0.0), m) == demo_loglik(d, Generator::literal(), m));
    CHECK(demo_loglik(d, Generator::action_mixture(1.0), m) == demo_loglik(d, Generator::pedagogic(), m));

    const StepLogProbs p = step_probabilities(d, m);
    CHECK(mixture_loglik(p, 0.0) == doctest::Approx(lit).epsilon(1e-12));
    CHECK(mixture_loglik(p, 0.3) == doctest::Approx(demo_loglik(d, Generator::action_mixture(0.3), m)).epsilon(1e-12));
    CHECK_THROWS_AS(demo_loglik(d, Generator::demo_mixture(0.5), m), std::invalid_argument);
  }
}

TEST_CASE("fit_alpha recovers pure generators") {
  ModelSet set(small_params());
  set.add("a", load_grid_file("data/grids/three_color_a.grid"));
  for (double truth : {0.0, 1.0}) {
    const auto demos = sample_many(set, "a", Generator::action_mixture(truth), 80, 17);
    const FitResult fit = fit_alpha(demos, set, 0.05, false);
    REQUIRE(fit.alphas.size() == 21);
    CHECK(std::abs(fit.alpha_hat - truth) <= 0.15);

    double lit = 0.0, ped = 0.0;
    for (const auto& d : demos) {
      lit -= demo_loglik(d, Generator::literal(), set.at("a"));
      ped -= demo_loglik(d, Generator::pedagogic(), set.at("a"));
    }
    CHECK(std::abs(fit.mean_nll.front() - lit / 80) <= 1e-9);
    CHECK(std::abs(fit.mean_nll.back() - ped / 80) <= 1e-9);
  }
}

TEST_CASE("fit_alpha edge cases") {
  HumanParams p = small_params();
  p.tau_literal = 1e12;
  p.tau_pedagogic = 1e12;
  ModelSet set(p);
  set.add("g", load_grid("...\n.S.\n..G"));
  // Both models uniform: every alpha fits equally well and the smallest wins.
  Demonstration d{"g", 0, Generator::literal(), GeneratorKind::LiteralH, 0, "x", {{{1, 1}, Action::North}}};
  const std::vector<Demonstration> one{d};
  const FitResult fit = fit_alpha(one, set, 0.25, true);
  CHECK(fit.alpha_hat == 0.0);
  CHECK(fit.per_individual.at("x") == 0.0);

  CHECK_THROWS_AS(fit_alpha(std::span<const Demonstration>{}, set, 0.05, false), std::invalid_argument);
  CHECK_THROWS_AS(fit_alpha(one, set, 0.3, false), std::invalid_argument);
  CHECK_THROWS_AS(fit_alpha(one, set, 0.0, false), std::invalid_argument);
}

TEST_CASE("model comparison") {
  ModelSet set(small_params());
  set.add("a", load_grid_file("data/grids/three_color_a.grid"));

  SUBCASE("a literal population is classified literal") {
    std::map<std::string, std::vector<Demonstration>> people;
    for (int i = 0; i < 20; ++i) people["p" + std::to_string(i)] = sample_many(set, "a", Generator::literal(), 8, 100 + i);
    const ComparisonResult res = model_comparison(people, set);
    CHECK(res.individuals == 20);
    CHECK(res.literal_fraction >= 0.8);
    CHECK(res.literal_fraction + res.pedagogic_fraction == doctest::Approx(1.0));
  }

  SUBCASE("ties go to literal") {
    HumanParams p = small_params();
    p.tau_literal = 1e12;
    p.tau_pedagogic = 1e12;
    ModelSet flat(p);
    flat.add("g", load_grid("...\n.S.\n..G"));
    std::map<std::string, std::vector<Demonstration>> people;
    people["x"] = {Demonstration{"g", 0, Generator::literal(), GeneratorKind::LiteralH, 0, "x", {{{1, 1}, Action::North}}}};
    CHECK(model_comparison(people, flat).literal_fraction == 1.0);
  }

  SUBCASE("a mixed population is split in proportion") {
    std::map<std::string, std::vector<Demonstration>> people;
    std::uint64_t coin = 99;
    int pedagogic = 0;
    for (int i = 0; i < 60; ++i) {
      const bool ped = uniform01(coin) < 0.7;
      pedagogic += ped ? 1 : 0;
      people["p" + std::to_string(i)] =
          sample_many(set, "a", ped ? Generator::pedagogic() : Generator::literal(), 10, 500 + i);
    }
    const ComparisonResult res = model_comparison(people, set);
    CHECK(std::abs(res.pedagogic_fraction - 0.7) <= 0.15);
    CHECK(std::abs(res.pedagogic_fraction - pedagogic / 60.0) <= 0.1);
  }
}

TEST_CASE("bootstrap intervals") {
  const std::vector<double> ones(50, 1.0), zeros(50, 0.0);
  auto a = bootstrap_ci(ones, 0.95, 2000, 1);
  CHECK(a.point == 1.0);
  CHECK(a.lo == 1.0);
  CHECK(a.hi == 1.0);
  auto z = bootstrap_ci(zeros, 0.95, 2000, 1);
  CHECK(z.lo == 0.0);
  CHECK(z.hi == 0.0);

  std::uint64_t state = 1;
  std::vector<double> coin(500);
  for (double& v : coin) v = uniform01(state) < 0.5 ? 1.0 : 0.0;
  const auto ci = bootstrap_ci(coin, 0.95, 10000, 1);
  const double expected = 2 * 1.96 * std::sqrt(0.25 / 500);
  CHECK(ci.hi - ci.lo == doctest::Approx(expected).epsilon(0.2));
  CHECK(ci.lo <= ci.point);
  CHECK(ci.point <= ci.hi);

  const auto again = bootstrap_ci(coin, 0.95, 10000, 1);
  CHECK(again.lo == ci.lo);
  CHECK(again.hi == ci.hi);

  std::vector<double> bigger;
  for (int k = 0; k < 4; ++k) bigger.insert(bigger.end(), coin.begin(), coin.end());
  const auto wide = bootstrap_ci(std::span<const double>(coin).first(100), 0.95, 4000, 2);
  const auto narrow = bootstrap_ci(bigger, 0.95, 4000, 2);
  CHECK(narrow.hi - narrow.lo < wide.hi - wide.lo);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::uint64_t s = seed;
    std::vector<double> skew(12);
    for (double& v : skew) v = uniform01(s) < 0.05 ? 1.0 : 0.0;
    const auto c = bootstrap_ci(skew, 0.95, 500, seed);
    CHECK(c.lo <= c.point);
    CHECK(c.point <= c.hi);
  }

  CHECK_THROWS(bootstrap_ci(std::span<const double>{}, 0.95, 100, 0));
  CHECK_THROWS(bootstrap_ci(ones, 1.0, 100, 0));
}
