#include <doctest.h>

#include <cmath>

#include "misspec/grid.hpp"
#include "oracles.hpp"

using namespace misspec;

TEST_CASE("load_grid parses the smallest legal grid") {
  const GridWorld g = load_grid("SG");
  CHECK(g.height() == 1);
  CHECK(g.width() == 2);
  CHECK(g.start() == Cell{0, 0});
  CHECK(g.goal() == Cell{0, 1});
}

TEST_CASE("load_grid reads colored rows") {
  const GridWorld g = load_grid("S.G\nooo\n");
  CHECK(g.height() == 2);
  CHECK(g.width() == 3);
  for (int c = 0; c < 3; ++c) CHECK(g.tile({1, c}) == TileKind::Orange);
  CHECK(g.tile({0, 1}) == TileKind::Neutral);
  CHECK(g.to_text() == "S.G\nooo\n");
}

TEST_CASE("load_grid rejects malformed input") {
  auto kind_of = [](const char* text) {
    try {
      load_grid(text);
    } catch (const GridError& e) {
      return e.kind();
    }
    FAIL("expected GridError");
    return GridError::Kind::Io;
  };
  CHECK(kind_of("SGG") == GridError::Kind::DuplicateGoal);
  CHECK(kind_of("SS.G") == GridError::Kind::DuplicateStart);
  CHECK(kind_of("S..") == GridError::Kind::MissingGoal);
  CHECK(kind_of("..G") == GridError::Kind::MissingStart);
  CHECK(kind_of("S.G\noo") == GridError::Kind::NonRectangular);
  CHECK(kind_of("S?G") == GridError::Kind::UnknownChar);
}

TEST_CASE("step moves, bumps and terminates") {
  const GridWorld sg = load_grid("SG");
  auto r = step(sg, {0, 0}, Action::East);
  CHECK(r.next == Cell{0, 1});
  CHECK(r.done);
  r = step(sg, {0, 0}, Action::West);
  CHECK(r.next == Cell{0, 0});
  CHECK_FALSE(r.done);

  const GridWorld open = load_grid("...\n.S.\n..G");
  CHECK(step(open, {1, 1}, Action::North).next == Cell{0, 1});
  CHECK(step(open, {1, 1}, Action::South).next == Cell{2, 1});

  const GridWorld walled = load_grid("S#G\n...");
  CHECK(step(walled, {0, 0}, Action::East).next == Cell{0, 0});
}

TEST_CASE("reward hypotheses encode colors by bit") {
  for (int i = 0; i < kNumHypotheses; ++i) {
    const RewardHypothesis r(i);
    CHECK(r.dangerous(TileKind::Orange) == bool(i & 1));
    CHECK(r.dangerous(TileKind::Purple) == bool(i & 2));
    CHECK(r.dangerous(TileKind::Cyan) == bool(i & 4));
    CHECK(r.tile_value(TileKind::Goal) == 10.0);
    CHECK(r.tile_value(TileKind::Neutral) == 0.0);
  }
  CHECK_THROWS_AS(RewardHypothesis(8), std::out_of_range);

  const GridWorld g = load_grid("S.G\nooo");
  CHECK(reward_of(g, RewardHypothesis(0), {0, 1}, Action::East, {0, 2}) == 10.0);
  CHECK(reward_of(g, RewardHypothesis(1), {0, 0}, Action::South, {1, 0}) == -2.0);
  CHECK(reward_of(g, RewardHypothesis(6), {0, 0}, Action::South, {1, 0}) == 0.0);
  CHECK(reward_of(g, RewardHypothesis(1), {0, 0}, Action::East, {0, 1}) == 0.0);
}

TEST_CASE("hypothesis 0 is zero everywhere except the goal") {
  const GridWorld g = load_grid("S.op\nc#.G");
  const RewardHypothesis r(0);
  for (int idx = 0; idx < g.num_cells(); ++idx) {
    const Cell c = g.cell(idx);
    if (g.is_wall(c)) continue;
    CHECK(r.tile_value(g.tile(c)) == (c == g.goal() ? 10.0 : 0.0));
  }
}

TEST_CASE("q_values one- and two-step backups") {
  const GridWorld sg = load_grid("SG");
  const QTable q1 = q_values(sg, RewardHypothesis(0), 1);
  CHECK(q1(0, Action::East, 1) == 10.0);
  CHECK(q1(0, Action::West, 1) == 0.0);

  const GridWorld chain = load_grid("S.G").with_discount(1.0);
  const QTable q2 = q_values(chain, RewardHypothesis(0), 2);
  CHECK(q2(0, Action::East, 2) == 10.0);
  // Goal is absorbing with zero value.
  for (Action a : kActions) CHECK(q2(chain.index(chain.goal()), a, 2) == 0.0);
}

TEST_CASE("finite-horizon Q equals exhaustive enumeration on a mixed 4x4 grid") {
  const GridWorld g = load_grid("S.op\nc#o.\n.pc.\no..G").with_discount(0.9);
  for (int hyp : {0, 3, 5, 7}) {
    const QTable q = q_values(g, RewardHypothesis(hyp), 6);
    for (int idx = 0; idx < g.num_cells(); ++idx) {
      const Cell s = g.cell(idx);
      if (g.is_wall(s) || s == g.goal()) continue;
      for (int a = 0; a < 4; ++a) {
        CHECK(q(idx, kActions[a], 6) == doctest::Approx(oracle::best_return(g, hyp, s, a, 6)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("finite Q is monotone in h for non-negative rewards and approaches the converged Q") {
  const GridWorld g = load_grid("S.op\n..o.\n.pcG").with_discount(0.9);
  const RewardHypothesis r(0);
  const QTable fin = q_values(g, r, 30);
  const QTable inf = q_values(g, r, 0, 1e-12);
  for (int idx = 0; idx < g.num_cells(); ++idx) {
    if (g.cell(idx) == g.goal()) continue;
    for (Action a : kActions) {
      for (int h = 2; h <= 30; ++h) CHECK(fin(idx, a, h) >= fin(idx, a, h - 1) - 1e-12);
      for (int h : {1, 5, 10, 30}) {
        CHECK(std::abs(fin(idx, a, h) - inf(idx, a)) <= std::pow(0.9, h) * 10.0 / (1 - 0.9) + 1e-9);
      }
    }
  }
}

TEST_CASE("converged Q satisfies the Bellman equation") {
  const GridWorld g = load_grid("S.oo.\n.pp.G\n..cc.");
  for (int hyp = 0; hyp < kNumHypotheses; ++hyp) {
    const RewardHypothesis r(hyp);
    const QTable q = q_values(g, r, 0, 1e-10);
    for (int idx = 0; idx < g.num_cells(); ++idx) {
      const Cell s = g.cell(idx);
      if (s == g.goal()) continue;
      for (Action a : kActions) {
        const auto [n, done] = step(g, s, a);
        const double target = reward_of(g, r, s, a, n) + (done ? 0.0 : g.discount() * q.max_value(g.index(n)));
        CHECK(q(idx, a) == doctest::Approx(target).epsilon(1e-8));
      }
    }
  }
}
