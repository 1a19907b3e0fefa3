#include "misspec/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace misspec {

void ModelSet::add(const std::string& grid_id, const GridWorld& g) {
  models_[grid_id] = std::make_unique<HumanModels>(g, params_);
}

const HumanModels& ModelSet::at(const std::string& grid_id) const {
  auto it = models_.find(grid_id);
  if (it == models_.end()) throw std::out_of_range("no grid registered under id '" + grid_id + "'");
  return *it->second;
}

std::vector<std::string> ModelSet::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : models_) out.push_back(id);
  return out;
}

StepLogProbs step_probabilities(const Demonstration& demo, const HumanModels& models) {
  StepLogProbs out;
  const int r = demo.true_reward;
  for (const StepContext& ctx : step_contexts(demo, models)) {
    const auto a = static_cast<std::size_t>(ctx.a);
    out.literal.push_back(models.literal_policy(r, ctx.s)[a]);
    out.pedagogic.push_back(models.pedagogic_policy(r, ctx.s, ctx.literal_belief, ctx.t)[a]);
  }
  return out;
}

double mixture_loglik(const StepLogProbs& probs, double alpha) {
  double total = 0.0;
  for (std::size_t t = 0; t < probs.literal.size(); ++t) {
    const double p = alpha == 0.0   ? probs.literal[t]
                     : alpha == 1.0 ? probs.pedagogic[t]
                                    : alpha * probs.pedagogic[t] + (1.0 - alpha) * probs.literal[t];
    total += std::log(p);
  }
  return total;
}

double demo_loglik(const Demonstration& demo, const Generator& model, const HumanModels& models) {
  const int r = demo.true_reward;
  double total = 0.0;
  for (const StepContext& ctx : step_contexts(demo, models)) {
    ActionDist p;
    switch (model.kind) {
      case GeneratorKind::LiteralH: p = models.literal_policy(r, ctx.s); break;
      case GeneratorKind::PedagogicH: p = models.pedagogic_policy(r, ctx.s, ctx.literal_belief, ctx.t); break;
      case GeneratorKind::ActionMixture:
        p = misspec::mixture_policy(models.literal_policy(r, ctx.s),
                                    models.pedagogic_policy(r, ctx.s, ctx.literal_belief, ctx.t), model.param);
        break;
      case GeneratorKind::DemoMixture:
        throw std::invalid_argument("demo_loglik scores per-step models; use a pure model or action mixture");
    }
    total += std::log(p[static_cast<std::size_t>(ctx.a)]);
  }
  return total;
}

namespace {

std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0) || step > 1.0) throw std::invalid_argument("grid_step must lie in (0, 1]");
  const long n = std::lround(1.0 / step);
  if (std::abs(static_cast<double>(n) * step - 1.0) > 1e-9) throw std::invalid_argument("grid_step must divide 1 evenly");
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(static_cast<double>(i) / static_cast<double>(n));
  return out;
}

std::size_t argmin_first(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

}  // namespace

FitResult fit_alpha(std::span<const Demonstration> demos, const ModelSet& models, double grid_step, bool per_individual) {
  if (demos.empty()) throw std::invalid_argument("fit_alpha needs at least one demonstration");
  FitResult out;
  out.alphas = alpha_grid(grid_step);

  std::vector<StepLogProbs> probs;
  probs.reserve(demos.size());
  for (const Demonstration& d : demos) probs.push_back(step_probabilities(d, models.at(d.grid_id)));

  std::vector<std::vector<double>> ll(demos.size(), std::vector<double>(out.alphas.size()));
  for (std::size_t i = 0; i < demos.size(); ++i) {
    for (std::size_t k = 0; k < out.alphas.size(); ++k) ll[i][k] = mixture_loglik(probs[i], out.alphas[k]);
  }

  out.mean_nll.assign(out.alphas.size(), 0.0);
  for (std::size_t k = 0; k < out.alphas.size(); ++k) {
    for (std::size_t i = 0; i < demos.size(); ++i) out.mean_nll[k] -= ll[i][k];
    out.mean_nll[k] /= static_cast<double>(demos.size());
  }
  out.alpha_hat = out.alphas[argmin_first(out.mean_nll)];

  if (per_individual) {
    std::map<std::string, std::vector<double>> nll;
    for (std::size_t i = 0; i < demos.size(); ++i) {
      auto& curve = nll.try_emplace(demos[i].individual, out.alphas.size(), 0.0).first->second;
      for (std::size_t k = 0; k < out.alphas.size(); ++k) curve[k] -= ll[i][k];
    }
    for (const auto& [id, curve] : nll) out.per_individual[id] = out.alphas[argmin_first(curve)];
  }
  return out;
}

ComparisonResult model_comparison(const std::map<std::string, std::vector<Demonstration>>& individuals,
                                  const ModelSet& models) {
  ComparisonResult out;
  int literal_better = 0;
  for (const auto& [id, demos] : individuals) {
    if (demos.empty()) throw std::invalid_argument("individual '" + id + "' has no demonstrations");
    double lit = 0.0, ped = 0.0;
    for (const Demonstration& d : demos) {
      const StepLogProbs p = step_probabilities(d, models.at(d.grid_id));
      lit += mixture_loglik(p, 0.0);
      ped += mixture_loglik(p, 1.0);
    }
    out.logliks[id] = {lit, ped};
    if (lit >= ped) ++literal_better;
  }
  out.individuals = static_cast<int>(individuals.size());
  if (out.individuals > 0) {
    out.literal_fraction = static_cast<double>(literal_better) / out.individuals;
    out.pedagogic_fraction = 1.0 - out.literal_fraction;
  }
  return out;
}

namespace {

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapCI bootstrap_ci(std::span<const double> samples, double level, int resamples, std::uint64_t seed) {
  if (samples.empty()) throw std::invalid_argument("bootstrap_ci needs at least one sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (resamples < 1) throw std::invalid_argument("resamples must be positive");

  const std::size_t n = samples.size();
  BootstrapCI ci;
  ci.level = level;
  ci.resamples = resamples;
  ci.point = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);

  std::uint64_t state = seed;
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (double& m : means) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += samples[static_cast<std::size_t>(uniform01(state) * static_cast<double>(n))];
    }
    m = total / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  ci.lo = std::min(quantile(means, tail), ci.point);
  ci.hi = std::max(quantile(means, 1.0 - tail), ci.point);
  return ci;
}

}  // namespace misspec
