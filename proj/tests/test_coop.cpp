#include <doctest.h>

#include <cmath>
#include <sstream>

#include "misspec/agents.hpp"
#include "misspec/coop.hpp"
#include "oracles.hpp"

using namespace misspec::coop;

namespace {

Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

CommonPayoffGame accuracy_game(int types) {
  CommonPayoffGame g;
  g.prior.assign(static_cast<std::size_t>(types), 1.0 / types);
  g.payoff = Matrix(types, types);
  for (int t = 0; t < types; ++t) g.payoff(t, t) = 1.0;
  return g;
}

// Payoff recomputed from the definition, independently of coop::payoff.
double direct_payoff(const CommonPayoffGame& g, const TeacherPolicy& h, const LearnerPolicy& r) {
  double u = 0.0;
  for (int d = 0; d < h.n_signals(); ++d) {
    for (int t = 0; t < h.n_types(); ++t) u += g.prior[t] * h.rows(t, d) * g.payoff(t, r.guess[d]);
  }
  return u;
}

}  // namespace

TEST_CASE("ci_fixed_point examples") {
  SUBCASE("diagonal teacher is already a fixed point") {
    const TeacherPolicy h0{from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})};
    const auto fp = ci_fixed_point(h0, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 100, 1e-12);
    CHECK(fp.converged);
    CHECK(fp.iterations == 1);
    for (int t = 0; t < 3; ++t) {
      for (int d = 0; d < 3; ++d) CHECK(fp.teacher.rows(t, d) == h0.rows(t, d));
    }
  }
  SUBCASE("uniform teacher stays uniform") {
    const TeacherPolicy h0{Matrix(4, 4, 0.25)};
    const auto fp = ci_fixed_point(h0, {0.25, 0.25, 0.25, 0.25}, 100, 1e-12);
    CHECK(fp.converged);
    for (int t = 0; t < 4; ++t) {
      for (int d = 0; d < 4; ++d) {
        CHECK(fp.teacher.rows(t, d) == doctest::Approx(0.25));
        CHECK(fp.learner.posterior(d, t) == doctest::Approx(0.25));
      }
    }
  }
  SUBCASE("random 2x3 teacher converges and satisfies both equations") {
    std::uint64_t state = 7;
    TeacherPolicy h0{Matrix(2, 3)};
    for (int t = 0; t < 2; ++t) {
      double z = 0;
      for (int d = 0; d < 3; ++d) z += h0.rows(t, d) = 0.01 + misspec::uniform01(state);
      for (int d = 0; d < 3; ++d) h0.rows(t, d) /= z;
    }
    const double tol = 1e-11;
    const auto fp = ci_fixed_point(h0, {0.5, 0.5}, 10000, tol);
    REQUIRE(fp.converged);
    const Residuals res = ci_residuals(fp.teacher, fp.learner, {0.5, 0.5});
    CHECK(res.learner < 1e-9);
    CHECK(res.teacher < 1e-9);
    CHECK(res.teacher < 10 * tol);
    for (double c : fp.changes) CHECK(std::isfinite(c));
  }
  SUBCASE("a signal nobody sends is degenerate") {
    const TeacherPolicy h0{from_rows({{1, 0}, {1, 0}})};
    CHECK_THROWS_AS(ci_fixed_point(h0, {0.5, 0.5}, 10, 1e-9), DegenerateDistribution);
  }
}

TEST_CASE("fixed point converges on random instances") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const RandomInstance inst = random_instance(seed, 6, 6);
    const auto fp = ci_fixed_point(inst.h0, inst.game.prior, 10000, 1e-10);
    CHECK(fp.converged);
    const Residuals res = ci_residuals(fp.teacher, fp.learner, inst.game.prior);
    CHECK(res.learner < 1e-9);
    CHECK(res.teacher < 1e-9);
  }
}

TEST_CASE("literal teacher") {
  const TeacherPolicy flat = literal_teacher(Matrix(2, 3, 4.0));
  for (int d = 0; d < 3; ++d) CHECK(flat.rows(1, d) == doctest::Approx(1.0 / 3));

  const TeacherPolicy sharp = literal_teacher(from_rows({{50, 0}, {0, 50}}));
  CHECK(sharp.rows(0, 0) > 1 - 1e-12);
  CHECK(sharp.rows(1, 1) > 1 - 1e-12);

  const TeacherPolicy h = literal_teacher(from_rows({{1, 0}, {0, 2}}));
  CHECK(h.rows(0, 0) == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0)).epsilon(1e-14));
  CHECK(h.rows(1, 1) == doctest::Approx(std::exp(2.0) / (1.0 + std::exp(2.0))).epsilon(1e-14));
}

TEST_CASE("pedagogic teacher") {
  LearnerPolicy uniform{Matrix(3, 2, 0.5), {0, 0, 0}};
  for (PedagogicMode mode : {PedagogicMode::Proportional, PedagogicMode::Exponential}) {
    const TeacherPolicy h = pedagogic_teacher(uniform, mode);
    for (int d = 0; d < 3; ++d) CHECK(h.rows(0, d) == doctest::Approx(1.0 / 3));
  }

  // Signals 0 and 1 identify type 0, signal 2 identifies type 1.
  LearnerPolicy det{from_rows({{1, 0}, {1, 0}, {0, 1}}), {0, 0, 1}};
  const TeacherPolicy prop = pedagogic_teacher(det, PedagogicMode::Proportional);
  CHECK(prop.rows(0, 0) == doctest::Approx(0.5));
  CHECK(prop.rows(0, 2) == 0.0);
  CHECK(prop.rows(1, 2) == 1.0);

  LearnerPolicy r0{from_rows({{0.7, 0.3}, {0.2, 0.8}}), {0, 1}};
  const TeacherPolicy ex = pedagogic_teacher(r0, PedagogicMode::Exponential);
  const double e07 = std::exp(0.7), e02 = std::exp(0.2), e03 = std::exp(0.3), e08 = std::exp(0.8);
  CHECK(ex.rows(0, 0) == doctest::Approx(e07 / (e07 + e02)).epsilon(1e-14));
  CHECK(ex.rows(1, 1) == doctest::Approx(e08 / (e03 + e08)).epsilon(1e-14));
}

TEST_CASE("best response") {
  const CommonPayoffGame acc = accuracy_game(3);
  const TeacherPolicy sep{from_rows({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}})};
  const LearnerPolicy r = best_response(acc, sep);
  CHECK(r.guess == std::vector<int>{2, 0, 1});
  CHECK(payoff(acc, sep, r) == doctest::Approx(1.0));

  CommonPayoffGame skew = accuracy_game(3);
  skew.prior = {0.2, 0.5, 0.3};
  const LearnerPolicy flat = best_response(skew, TeacherPolicy{Matrix(3, 4, 0.25)});
  for (int g : flat.guess) CHECK(g == 1);

  // Unused signal falls back to the prior.
  const LearnerPolicy unused = best_response(skew, TeacherPolicy{from_rows({{1, 0}, {1, 0}, {1, 0}})});
  CHECK(unused.posterior(1, 1) == doctest::Approx(0.5));

  // Ties go to the lowest index.
  const LearnerPolicy tie = best_response(accuracy_game(2), TeacherPolicy{Matrix(2, 2, 0.5)});
  CHECK(tie.guess == std::vector<int>{0, 0});
}

TEST_CASE("best response dominates every deterministic learner") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    const RandomInstance inst = random_instance(seed, 5, 6);
    const LearnerPolicy br = best_response(inst.game, inst.h0);
    CHECK(payoff(inst.game, inst.h0, br) >= oracle::best_deterministic_payoff(inst.game, inst.h0) - 1e-12);
  }
}

TEST_CASE("improving response") {
  const RandomInstance inst = random_instance(3, 5, 6);
  const LearnerPolicy r = best_response(inst.game, inst.h0);
  const TeacherPolicy same = improving_response(inst.game, inst.h0, r, 0.0);
  for (int t = 0; t < inst.h0.n_types(); ++t) {
    for (int d = 0; d < inst.h0.n_signals(); ++d) CHECK(same.rows(t, d) == doctest::Approx(inst.h0.rows(t, d)));
  }
  const TeacherPolicy better = improving_response(inst.game, inst.h0, r, 2.0);
  CHECK(payoff(inst.game, better, r) >= payoff(inst.game, inst.h0, r));
  better.validate();

  const CommonPayoffGame acc = accuracy_game(2);
  const TeacherPolicy sep{from_rows({{1, 0}, {0, 1}})};
  const LearnerPolicy rs = best_response(acc, sep);
  const TeacherPolicy kept = improving_response(acc, sep, rs, 3.0);
  CHECK(kept.rows(0, 0) == 1.0);
  CHECK(payoff(acc, kept, rs) == 1.0);
}

TEST_CASE("hierarchy payoffs") {
  const RandomInstance one = random_instance(1, 4, 4);
  const Hierarchy h1 = build_hierarchy(one.game, one.h0, 1, 1.0);
  CHECK(h1.levels.size() == 2);

  const RandomInstance inst = random_instance(5, 5, 6);
  const Hierarchy h = build_hierarchy(inst.game, inst.h0, 3, 1.0);
  REQUIRE(h.levels.size() == 4);
  for (std::size_t k = 0; k < h.levels.size(); ++k) {
    CHECK(h.levels[k].payoff == doctest::Approx(direct_payoff(inst.game, h.levels[k].teacher, h.levels[k].learner)).epsilon(1e-14));
    if (k > 0) CHECK(h.levels[k].payoff >= h.levels[k - 1].payoff - 1e-12);
  }
  CHECK_THROWS_AS(build_hierarchy(inst.game, inst.h0, 0, 1.0), std::invalid_argument);
}

TEST_CASE("ranking chain") {
  SUBCASE("already optimal teacher gives equal payoffs") {
    const CommonPayoffGame acc = accuracy_game(3);
    const TeacherPolicy sep{from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})};
    const RankingReport rep = verify_ranking(acc, build_hierarchy(acc, sep, 1, 2.0));
    CHECK(rep.holds);
    CHECK(rep.ped_ped == rep.lit_ped);
    CHECK(rep.min_slack == 0.0);
  }
  SUBCASE("grass/pavement game has a strict improving step") {
    // Type 0: grass fine, type 1: grass costly. Signal 0: walk on grass, signal 1: pavement.
    const CommonPayoffGame acc = accuracy_game(2);
    const TeacherPolicy h0 = literal_teacher(from_rows({{0, 0}, {-2, 0}}));
    const RankingReport rep = verify_ranking(acc, build_hierarchy(acc, h0, 1, 1.0));
    CHECK(rep.holds);
    CHECK(rep.ped_lit > rep.lit_lit + 1e-6);
  }
  SUBCASE("holds on 1000 random games with recomputed payoffs") {
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const RandomInstance inst = random_instance(misspec::mix_seed(77, seed), 5, 6);
      const Hierarchy h = build_hierarchy(inst.game, inst.h0, 1, 1.0);
      const Level& l0 = h.levels[0];
      const Level& l1 = h.levels[1];
      const double u11 = direct_payoff(inst.game, l1.teacher, l1.learner);
      const double u10 = direct_payoff(inst.game, l1.teacher, l0.learner);
      const double u00 = direct_payoff(inst.game, l0.teacher, l0.learner);
      const double u01 = direct_payoff(inst.game, l0.teacher, l1.learner);
      const bool chain = u11 >= u10 - 1e-12 && u10 >= u00 - 1e-12 && u00 >= u01 - 1e-12;
      const RankingReport rep = verify_ranking(inst.game, h);
      CHECK(rep.holds == chain);
      violations += chain ? 0 : 1;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("instance text round trip") {
  const RandomInstance inst = random_instance(9, 4, 5);
  std::stringstream buf;
  write_instance(buf, inst);
  const RandomInstance back = read_instance(buf);
  REQUIRE(back.h0.n_types() == inst.h0.n_types());
  REQUIRE(back.h0.n_signals() == inst.h0.n_signals());
  for (int t = 0; t < inst.h0.n_types(); ++t) {
    CHECK(back.game.prior[t] == inst.game.prior[t]);
    for (int d = 0; d < inst.h0.n_signals(); ++d) CHECK(back.h0.rows(t, d) == inst.h0.rows(t, d));
  }
}
