#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "misspec/agents.hpp"

namespace misspec {

/// HumanModels keyed by grid id, shared by everything that scores demonstrations.
class ModelSet {
 public:
  explicit ModelSet(HumanParams params) : params_(params) { params_.validate(); }

  const HumanParams& params() const { return params_; }
  void add(const std::string& grid_id, const GridWorld& g);
  const HumanModels& at(const std::string& grid_id) const;
  bool contains(const std::string& grid_id) const { return models_.count(grid_id) != 0; }
  std::vector<std::string> ids() const;

 private:
  HumanParams params_;
  std::map<std::string, std::unique_ptr<HumanModels>> models_;
};

/// Log-probabilities of the observed actions under the true reward, per step, for the two pure models.
struct StepLogProbs {
  std::vector<double> literal;
  std::vector<double> pedagogic;
};

StepLogProbs step_probabilities(const Demonstration& demo, const HumanModels& models);

/// Sum over steps of log P_model(a_t | s_t, true reward, history).
double demo_loglik(const Demonstration& demo, const Generator& model, const HumanModels& models);

/// Same quantity from precomputed per-step probabilities; `alpha` selects the action mixture.
double mixture_loglik(const StepLogProbs& probs, double alpha);

struct FitResult {
  double alpha_hat = 0.0;
  std::vector<double> alphas;
  /// Mean negative log-likelihood per demonstration at each grid point.
  std::vector<double> mean_nll;
  std::map<std::string, double> per_individual;
};

/// Grid search over alpha in {0, step, ..., 1}; ties go to the smaller alpha.
FitResult fit_alpha(std::span<const Demonstration> demos, const ModelSet& models, double grid_step,
                    bool per_individual);

struct ComparisonResult {
  int individuals = 0;
  double literal_fraction = 0.0;
  double pedagogic_fraction = 0.0;
  /// Per individual: total log-likelihood under the literal and pedagogic models.
  std::map<std::string, std::pair<double, double>> logliks;
};

/// Per individual, which pure model gives the higher total log-likelihood (ties go to literal).
ComparisonResult model_comparison(const std::map<std::string, std::vector<Demonstration>>& individuals,
                                  const ModelSet& models);

struct BootstrapCI {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  int resamples = 0;
};

/// Percentile bootstrap of the mean.
BootstrapCI bootstrap_ci(std::span<const double> samples, double level = 0.95, int resamples = 10000,
                         std::uint64_t seed = 0);

}  // namespace misspec
