#include "misspec/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace misspec {

Belief Belief::uniform() {
  HypothesisVector p;
  p.fill(1.0 / kNumHypotheses);
  return Belief(p);
}

Belief Belief::from_weights(const HypothesisVector& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DegenerateBelief("belief weight negative or not finite");
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateBelief("posterior has zero total mass");
  HypothesisVector p;
  for (int i = 0; i < kNumHypotheses; ++i) p[static_cast<std::size_t>(i)] = weights[static_cast<std::size_t>(i)] / total;
  return Belief(p);
}

int Belief::mode() const {
  int best = 0;
  for (int i = 1; i < kNumHypotheses; ++i) {
    if (probs_[static_cast<std::size_t>(i)] > probs_[static_cast<std::size_t>(best)]) best = i;
  }
  return best;
}

void HumanParams::validate() const {
  if (!(tau_literal > 0.0) || !(tau_pedagogic > 0.0)) throw std::invalid_argument("temperatures must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (plan_horizon < 1) throw std::invalid_argument("plan_horizon must be at least 1");
  if (lookahead < 1) throw std::invalid_argument("lookahead must be at least 1");
  if (!(belief_quantum > 0.0)) throw std::invalid_argument("belief_quantum must be positive");
}

ActionDist softmax(const ActionDist& q, double tau) {
  const double top = *std::max_element(q.begin(), q.end());
  ActionDist p;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((q[i] - top) / tau);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

ActionDist literal_policy(const QTable& q, int cell_index, double tau) {
  ActionDist values;
  for (Action a : kActions) values[static_cast<std::size_t>(a)] = q(cell_index, a);
  return softmax(values, tau);
}

// Undiscounted grids have no converged infinite-horizon Q; the literal model then uses the
// finite-horizon table at the full episode length.
LiteralModel::LiteralModel(const GridWorld& g, double tau_literal, double tol)
    : grid_(g), tau_(tau_literal) {
  if (!(tau_literal > 0.0)) throw std::invalid_argument("tau_literal must be positive");
  const int horizon = g.discount() < 1.0 ? 0 : g.max_steps();
  q_.reserve(kNumHypotheses);
  for (int r = 0; r < kNumHypotheses; ++r) q_.push_back(q_values(g, RewardHypothesis(r), horizon, tol));

  likelihood_.resize(static_cast<std::size_t>(g.num_cells() * kNumActions));
  for (int idx = 0; idx < g.num_cells(); ++idx) {
    for (int r = 0; r < kNumHypotheses; ++r) {
      const ActionDist p = policy(r, g.cell(idx));
      for (Action a : kActions) {
        likelihood_[static_cast<std::size_t>(idx * kNumActions + static_cast<int>(a))]
                   [static_cast<std::size_t>(r)] = p[static_cast<std::size_t>(a)];
      }
    }
  }
}

ActionDist LiteralModel::policy(int hypothesis, Cell s) const {
  const QTable& table = q(hypothesis);
  ActionDist values;
  for (Action a : kActions) values[static_cast<std::size_t>(a)] = table(grid_.index(s), a, table.horizon());
  return softmax(values, tau_);
}

const HypothesisVector& LiteralModel::likelihood(Cell s, Action a) const {
  return likelihood_[static_cast<std::size_t>(grid_.index(s) * kNumActions + static_cast<int>(a))];
}

namespace {

void check_transition(const GridWorld& g, Cell s, Action a, Cell next) {
  if (!g.in_bounds(s) || g.is_wall(s)) throw TrajectoryError("observed state is not a free cell");
  if (!(step(g, s, a).next == next)) throw TrajectoryError("observed successor inconsistent with dynamics");
}

Belief bayes(const Belief& b, const HypothesisVector& likelihood) {
  HypothesisVector w;
  for (int r = 0; r < kNumHypotheses; ++r) w[static_cast<std::size_t>(r)] = b[r] * likelihood[static_cast<std::size_t>(r)];
  return Belief::from_weights(w);
}

constexpr std::size_t kMemoLimit = 1u << 20;

}  // namespace

Belief literal_belief_update(const Belief& b, const LiteralModel& lit, Cell s, Action a, Cell next) {
  check_transition(lit.grid(), s, a, next);
  return bayes(b, lit.likelihood(s, a));
}

std::size_t PedagogicPlanner::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(k.cell),
                             (static_cast<std::uint64_t>(k.remaining) << 16) ^ static_cast<std::uint64_t>(k.depth));
  for (std::int64_t v : k.belief) h = mix_seed(h, static_cast<std::uint64_t>(v));
  return static_cast<std::size_t>(h);
}

PedagogicPlanner::PedagogicPlanner(std::shared_ptr<const LiteralModel> lit, int hypothesis, HumanParams params)
    : lit_(std::move(lit)), hypothesis_(hypothesis), params_(params),
      base_(q_values(lit_->grid(), RewardHypothesis(hypothesis), params.plan_horizon)) {
  params_.validate();
}

ActionDist PedagogicPlanner::q(Cell s, const Belief& b, int remaining) const {
  if (remaining < 1) throw std::invalid_argument("remaining horizon must be at least 1");
  ActionDist out{};
  if (s == lit_->grid().goal()) return out;
  const int depth = std::min(params_.lookahead, remaining);
  for (Action a : kActions) out[static_cast<std::size_t>(a)] = q_action(s, b, remaining, depth, a);
  return out;
}

double PedagogicPlanner::value(Cell s, const Belief& b, int remaining) const {
  if (remaining < 1 || s == lit_->grid().goal()) return 0.0;
  return node_value(s, b, remaining, std::min(params_.lookahead, remaining));
}

double PedagogicPlanner::q_action(Cell s, const Belief& b, int remaining, int depth, Action a) const {
  const GridWorld& g = lit_->grid();
  const RewardHypothesis r(hypothesis_);
  const auto [next, done] = step(g, s, a);
  const Belief updated = bayes(b, lit_->likelihood(s, a));
  const double shaped = reward_of(g, r, s, a, next) + params_.kappa * (updated[hypothesis_] - b[hypothesis_]);
  if (done || remaining == 1) return shaped;
  const double continuation = depth == 1 ? base_.max_value(g.index(next), remaining - 1)
                                         : node_value(next, updated, remaining - 1, depth - 1);
  return shaped + g.discount() * continuation;
}

double PedagogicPlanner::node_value(Cell s, const Belief& b, int remaining, int depth) const {
  Key key{lit_->grid().index(s), remaining, std::min(depth, remaining), {}};
  for (int i = 0; i < kNumHypotheses; ++i) {
    key.belief[static_cast<std::size_t>(i)] = std::llround(b[i] / params_.belief_quantum);
  }
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  double best = q_action(s, b, remaining, key.depth, kActions[0]);
  for (int i = 1; i < kNumActions; ++i) best = std::max(best, q_action(s, b, remaining, key.depth, kActions[i]));
  if (memo_.size() >= kMemoLimit) memo_.clear();
  memo_.emplace(key, best);
  return best;
}

PedagogicPlanner pedagogic_q(std::shared_ptr<const LiteralModel> lit, const RewardHypothesis& r,
                             const HumanParams& params) {
  return PedagogicPlanner(std::move(lit), r.index(), params);
}

ActionDist pedagogic_policy(const PedagogicPlanner& planner, Cell s, const Belief& b, int remaining, double tau) {
  return softmax(planner.q(s, b, remaining), tau);
}

ActionDist mixture_policy(const ActionDist& literal, const ActionDist& pedagogic, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (alpha == 0.0) return literal;
  if (alpha == 1.0) return pedagogic;
  ActionDist out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * pedagogic[i] + (1.0 - alpha) * literal[i];
  return out;
}

int remaining_horizon(const HumanParams& params, int t) { return std::max(1, params.plan_horizon - t); }

HumanModels::HumanModels(const GridWorld& g, const HumanParams& params)
    : lit_(std::make_shared<const LiteralModel>(g, params.tau_literal)), params_(params) {
  params_.validate();
  planners_.reserve(kNumHypotheses);
  for (int r = 0; r < kNumHypotheses; ++r) planners_.push_back(pedagogic_q(lit_, RewardHypothesis(r), params_));
}

ActionDist HumanModels::pedagogic_policy(int hypothesis, Cell s, const Belief& literal_belief, int t) const {
  return misspec::pedagogic_policy(planner(hypothesis), s, literal_belief, remaining_horizon(params_, t),
                                   params_.tau_pedagogic);
}

ActionDist HumanModels::mixture_policy(int hypothesis, Cell s, const Belief& literal_belief, int t) const {
  return misspec::mixture_policy(literal_policy(hypothesis, s), pedagogic_policy(hypothesis, s, literal_belief, t),
                                 params_.alpha);
}

Belief pedagogic_belief_update(const Belief& b, const HumanModels& models, const StepContext& ctx) {
  check_transition(models.grid(), ctx.s, ctx.a, ctx.next);
  HypothesisVector lk;
  for (int r = 0; r < kNumHypotheses; ++r) {
    lk[static_cast<std::size_t>(r)] =
        models.pedagogic_policy(r, ctx.s, ctx.literal_belief, ctx.t)[static_cast<std::size_t>(ctx.a)];
  }
  return bayes(b, lk);
}

Belief mixture_belief_update(const Belief& b, const HumanModels& models, const StepContext& ctx, double alpha) {
  check_transition(models.grid(), ctx.s, ctx.a, ctx.next);
  HypothesisVector lk;
  for (int r = 0; r < kNumHypotheses; ++r) {
    const ActionDist mixed = misspec::mixture_policy(models.literal_policy(r, ctx.s),
                                                     models.pedagogic_policy(r, ctx.s, ctx.literal_belief, ctx.t),
                                                     alpha);
    lk[static_cast<std::size_t>(r)] = mixed[static_cast<std::size_t>(ctx.a)];
  }
  return bayes(b, lk);
}

std::string Generator::tag() const {
  switch (kind) {
    case GeneratorKind::LiteralH: return "literal";
    case GeneratorKind::PedagogicH: return "pedagogic";
    case GeneratorKind::ActionMixture: return "action-mixture";
    case GeneratorKind::DemoMixture: return "demo-mixture";
  }
  return "unknown";
}

std::vector<StepContext> step_contexts(const Demonstration& demo, const HumanModels& models) {
  const GridWorld& g = models.grid();
  if (static_cast<int>(demo.steps.size()) > g.max_steps()) throw TrajectoryError("demonstration longer than max_steps");
  std::vector<StepContext> out;
  out.reserve(demo.steps.size());
  Belief literal = Belief::uniform();
  Cell expected = g.start();
  for (std::size_t t = 0; t < demo.steps.size(); ++t) {
    const DemoStep& st = demo.steps[t];
    if (!(st.cell == expected)) throw TrajectoryError("step " + std::to_string(t) + " does not continue the trajectory");
    if (st.cell == g.goal()) throw TrajectoryError("demonstration continues after reaching the goal");
    const Cell next = step(g, st.cell, st.action).next;
    out.push_back({st.cell, st.action, next, static_cast<int>(t), literal});
    literal = literal_belief_update(literal, models.literal(), st.cell, st.action, next);
    expected = next;
  }
  return out;
}

Demonstration sample_demonstration(const HumanModels& models, const std::string& grid_id, const RewardHypothesis& r,
                                   const Generator& generator, std::uint64_t seed) {
  const GridWorld& g = models.grid();
  std::uint64_t state = seed;
  Demonstration demo;
  demo.grid_id = grid_id;
  demo.true_reward = r.index();
  demo.generator = generator;
  demo.seed = seed;

  GeneratorKind kind = generator.kind;
  if (kind == GeneratorKind::DemoMixture) {
    if (!(generator.param >= 0.0 && generator.param <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
    // Separate stream so the per-step draws match the pure model that was chosen.
    std::uint64_t coin = mix_seed(seed, 0x636f696eULL);
    kind = uniform01(coin) < generator.param ? GeneratorKind::PedagogicH : GeneratorKind::LiteralH;
  }
  if (kind == GeneratorKind::ActionMixture) {
    if (!(generator.param >= 0.0 && generator.param <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (generator.param == 0.0) kind = GeneratorKind::LiteralH;
    if (generator.param == 1.0) kind = GeneratorKind::PedagogicH;
  }
  demo.resolved = generator.kind == GeneratorKind::DemoMixture ? kind : generator.kind;

  Belief literal = Belief::uniform();
  Cell s = g.start();
  for (int t = 0; t < g.max_steps(); ++t) {
    ActionDist p;
    switch (kind) {
      case GeneratorKind::LiteralH: p = models.literal_policy(r.index(), s); break;
      case GeneratorKind::PedagogicH: p = models.pedagogic_policy(r.index(), s, literal, t); break;
      default:
        p = misspec::mixture_policy(models.literal_policy(r.index(), s),
                                    models.pedagogic_policy(r.index(), s, literal, t), generator.param);
        break;
    }
    const Action a = kActions[static_cast<std::size_t>(sample_index(p, state))];
    demo.steps.push_back({s, a});
    const auto [next, done] = step(g, s, a);
    literal = literal_belief_update(literal, models.literal(), s, a, next);
    s = next;
    if (done) break;
  }
  return demo;
}

DemoLikelihoods demo_likelihoods(const Demonstration& demo, const HumanModels& models, bool with_pedagogic) {
  DemoLikelihoods out;
  for (const StepContext& ctx : step_contexts(demo, models)) {
    out.literal.push_back(models.literal().likelihood(ctx.s, ctx.a));
    if (!with_pedagogic) continue;
    HypothesisVector ped;
    for (int r = 0; r < kNumHypotheses; ++r) {
      ped[static_cast<std::size_t>(r)] =
          models.pedagogic_policy(r, ctx.s, ctx.literal_belief, ctx.t)[static_cast<std::size_t>(ctx.a)];
    }
    out.pedagogic.push_back(ped);
  }
  return out;
}

std::string robot_tag(RobotKind k) {
  switch (k) {
    case RobotKind::Literal: return "literal";
    case RobotKind::Pedagogic: return "pedagogic";
    case RobotKind::Mixture: return "mixture";
  }
  return "unknown";
}

Belief infer(const DemoLikelihoods& lk, RobotKind robot, double alpha) {
  if (robot != RobotKind::Literal && lk.pedagogic.size() != lk.literal.size()) {
    throw std::invalid_argument("pedagogic likelihoods were not computed");
  }
  Belief b = Belief::uniform();
  for (std::size_t t = 0; t < lk.literal.size(); ++t) {
    switch (robot) {
      case RobotKind::Literal: b = bayes(b, lk.literal[t]); break;
      case RobotKind::Pedagogic: b = bayes(b, lk.pedagogic[t]); break;
      case RobotKind::Mixture: {
        HypothesisVector mixed;
        for (std::size_t r = 0; r < mixed.size(); ++r) {
          mixed[r] = alpha * lk.pedagogic[t][r] + (1.0 - alpha) * lk.literal[t][r];
        }
        b = bayes(b, mixed);
        break;
      }
    }
  }
  return b;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t state = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
  return splitmix64(state);
}

double uniform01(std::uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

int sample_index(std::span<const double> probs, std::uint64_t& state) {
  const double u = uniform01(state);
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace misspec
