#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "misspec/grid.hpp"

namespace misspec {

using ActionDist = std::array<double, kNumActions>;
using HypothesisVector = std::array<double, kNumHypotheses>;

/// Probability vector over the eight reward hypotheses.
class Belief {
 public:
  static Belief uniform();
  /// Normalizes `weights`; throws DegenerateBelief when they sum to zero.
  static Belief from_weights(const HypothesisVector& weights);

  double operator[](int i) const { return probs_[static_cast<std::size_t>(i)]; }
  const HypothesisVector& probs() const { return probs_; }
  /// Highest-probability hypothesis; ties go to the lowest index.
  int mode() const;

 private:
  explicit Belief(const HypothesisVector& p) : probs_(p) {}
  HypothesisVector probs_;
};

class DegenerateBelief : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct HumanParams {
  double tau_literal = 1.0;
  double tau_pedagogic = 1.0;
  double kappa = 5.0;
  double alpha = 0.5;
  int plan_horizon = 20;
  /// Depth of exact belief-augmented lookahead. Beyond it the planner falls back to the
  /// base-reward finite-horizon value. Planning is exact whenever plan_horizon <= lookahead.
  int lookahead = 5;
  /// Memo key resolution for beliefs.
  double belief_quantum = 1e-9;

  void validate() const;
};

/// Boltzmann distribution over four action values, max-subtracted.
ActionDist softmax(const ActionDist& q, double tau);

ActionDist literal_policy(const QTable& q, int cell_index, double tau);

/// Literal-human quantities shared by every hypothesis on one grid: converged Q per
/// hypothesis and the per-(cell, action) likelihood vector H_L(a | s, r) over all r.
class LiteralModel {
 public:
  LiteralModel(const GridWorld& g, double tau_literal, double tol = 1e-8);

  const GridWorld& grid() const { return grid_; }
  double tau() const { return tau_; }
  const QTable& q(int hypothesis) const { return q_[static_cast<std::size_t>(hypothesis)]; }
  ActionDist policy(int hypothesis, Cell s) const;
  const HypothesisVector& likelihood(Cell s, Action a) const;

 private:
  GridWorld grid_;
  double tau_;
  std::vector<QTable> q_;
  std::vector<HypothesisVector> likelihood_;
};

/// Bayes update assuming a literal human. `next` must be the successor of (s, a).
Belief literal_belief_update(const Belief& b, const LiteralModel& lit, Cell s, Action a, Cell next);

/// Optimal Q under the shaped reward r + kappa * (literal-robot belief gain on r),
/// over the augmented state (cell, literal-robot belief, remaining horizon).
class PedagogicPlanner {
 public:
  PedagogicPlanner(std::shared_ptr<const LiteralModel> lit, int hypothesis, HumanParams params);

  int hypothesis() const { return hypothesis_; }
  const HumanParams& params() const { return params_; }
  ActionDist q(Cell s, const Belief& b, int remaining) const;
  double value(Cell s, const Belief& b, int remaining) const;
  std::size_t memo_size() const { return memo_.size(); }

 private:
  struct Key {
    int cell;
    int remaining;
    int depth;
    std::array<std::int64_t, kNumHypotheses> belief;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  double q_action(Cell s, const Belief& b, int remaining, int depth, Action a) const;
  double node_value(Cell s, const Belief& b, int remaining, int depth) const;

  std::shared_ptr<const LiteralModel> lit_;
  int hypothesis_;
  HumanParams params_;
  QTable base_;
  mutable std::unordered_map<Key, double, KeyHash> memo_;
};

/// Builds the augmented Q function for hypothesis r.
PedagogicPlanner pedagogic_q(std::shared_ptr<const LiteralModel> lit, const RewardHypothesis& r,
                             const HumanParams& params);

ActionDist pedagogic_policy(const PedagogicPlanner& planner, Cell s, const Belief& b, int remaining,
                            double tau);

ActionDist mixture_policy(const ActionDist& literal, const ActionDist& pedagogic, double alpha);

/// Remaining planning horizon at demonstration step t.
int remaining_horizon(const HumanParams& params, int t);

/// Literal and pedagogic human models for one grid and parameter set.
/// Not thread-safe: planners memoize internally.
class HumanModels {
 public:
  HumanModels(const GridWorld& g, const HumanParams& params);

  const GridWorld& grid() const { return lit_->grid(); }
  const HumanParams& params() const { return params_; }
  const LiteralModel& literal() const { return *lit_; }
  const PedagogicPlanner& planner(int hypothesis) const {
    return planners_[static_cast<std::size_t>(hypothesis)];
  }

  ActionDist literal_policy(int hypothesis, Cell s) const { return lit_->policy(hypothesis, s); }
  ActionDist pedagogic_policy(int hypothesis, Cell s, const Belief& literal_belief, int t) const;
  ActionDist mixture_policy(int hypothesis, Cell s, const Belief& literal_belief, int t) const;

 private:
  std::shared_ptr<const LiteralModel> lit_;
  HumanParams params_;
  std::vector<PedagogicPlanner> planners_;
};

/// One observed transition together with the literal-robot belief before it and its index.
struct StepContext {
  Cell s;
  Action a;
  Cell next;
  int t;
  Belief literal_belief;
};

Belief pedagogic_belief_update(const Belief& b, const HumanModels& models, const StepContext& ctx);
Belief mixture_belief_update(const Belief& b, const HumanModels& models, const StepContext& ctx,
                             double alpha);

enum class GeneratorKind { LiteralH, PedagogicH, ActionMixture, DemoMixture };

struct Generator {
  GeneratorKind kind = GeneratorKind::LiteralH;
  /// alpha for ActionMixture, p for DemoMixture, unused otherwise.
  double param = 0.0;

  static Generator literal() { return {GeneratorKind::LiteralH, 0.0}; }
  static Generator pedagogic() { return {GeneratorKind::PedagogicH, 0.0}; }
  static Generator action_mixture(double alpha) { return {GeneratorKind::ActionMixture, alpha}; }
  static Generator demo_mixture(double p) { return {GeneratorKind::DemoMixture, p}; }
  std::string tag() const;
};

struct DemoStep {
  Cell cell;
  Action action;
};

struct Demonstration {
  std::string grid_id;
  int true_reward = 0;
  Generator generator;
  /// Policy actually used for the episode; differs from `generator` only for DemoMixture.
  GeneratorKind resolved = GeneratorKind::LiteralH;
  std::uint64_t seed = 0;
  /// Optional demonstrator id used to group demonstrations per individual.
  std::string individual;
  std::vector<DemoStep> steps;
};

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-step contexts for a demonstration, validated against the grid dynamics.
std::vector<StepContext> step_contexts(const Demonstration& demo, const HumanModels& models);

Demonstration sample_demonstration(const HumanModels& models, const std::string& grid_id,
                                   const RewardHypothesis& r, const Generator& generator,
                                   std::uint64_t seed);

/// Per-step likelihood vectors over all hypotheses for the observed actions.
struct DemoLikelihoods {
  std::vector<HypothesisVector> literal;
  std::vector<HypothesisVector> pedagogic;
};

DemoLikelihoods demo_likelihoods(const Demonstration& demo, const HumanModels& models, bool with_pedagogic = true);

enum class RobotKind { Literal, Pedagogic, Mixture };
std::string robot_tag(RobotKind k);

/// Posterior after the whole demonstration from a uniform prior.
Belief infer(const DemoLikelihoods& lk, RobotKind robot, double alpha = 0.5);

/// Deterministic uniform double in [0, 1) from a 64-bit generator.
double uniform01(std::uint64_t& state);
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
int sample_index(std::span<const double> probs, std::uint64_t& state);

}  // namespace misspec
