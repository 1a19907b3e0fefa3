#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace misspec::lik {

using Rational = boost::rational<std::int64_t>;

/// m(x | theta) as one row per latent value. Entries are exact rationals so the same table can be
/// evaluated in floating point or exactly.
struct PredictiveModel {
  std::vector<std::vector<Rational>> table;

  int n_latent() const { return static_cast<int>(table.size()); }
  int n_obs() const { return table.empty() ? 0 : static_cast<int>(table.front().size()); }
  double prob(int theta, int x) const { return boost::rational_cast<double>(table[static_cast<std::size_t>(theta)][static_cast<std::size_t>(x)]); }
  void validate() const;
};

struct LabeledDataset {
  /// (theta, x) pairs.
  std::vector<std::pair<int, int>> items;
  std::vector<Rational> prior;

  void validate(const PredictiveModel& m) const;
};

class UndefinedPosterior : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Product over items of m(x_i | theta_i).
double predictive_likelihood(const PredictiveModel& m, const LabeledDataset& d);
/// Log form; -inf when some item has zero probability.
double predictive_log_likelihood(const PredictiveModel& m, const LabeledDataset& d);
Rational predictive_likelihood_exact(const PredictiveModel& m, const LabeledDataset& d);

/// Product over items of the Bayes posterior of theta_i given x_i.
double inferential_likelihood(const PredictiveModel& m, const LabeledDataset& d);
double inferential_log_likelihood(const PredictiveModel& m, const LabeledDataset& d);
Rational inferential_likelihood_exact(const PredictiveModel& m, const LabeledDataset& d);

struct Fixture {
  PredictiveModel m1;
  PredictiveModel m2;
  LabeledDataset dataset;
};

/// Two 2x3 tables and the nine-item dataset on which predictive and inferential likelihood disagree.
Fixture claim2_fixture();

/// The commonly quoted value of the m2 inferential likelihood; it disagrees with the dataset and is kept for reporting.
inline const Rational kPrintedInferentialM2 = Rational(1, 3) * Rational(8, 27);

/// L_X(m1) > L_X(m2) and L_Theta(m1) < L_Theta(m2), evaluated exactly.
bool is_reversal(const PredictiveModel& m1, const PredictiveModel& m2, const LabeledDataset& d);

/// Random search over models whose rows lie on the 1/3 lattice and random datasets of 3 to 12 items.
/// Returns every candidate triple that exhibits a reversal.
std::vector<Fixture> search_reversal(int n_types, int n_obs, int n_candidates, std::uint64_t seed);

Rational parse_rational(const std::string& text);
/// One row per line, whitespace-separated entries; fractions like "2/3" are allowed.
PredictiveModel read_model(std::istream& in);
/// "prior p1 p2 ..." then one "theta x" pair per line (zero-based indices).
LabeledDataset read_dataset(std::istream& in);
void write_model(std::ostream& out, const PredictiveModel& m);

}  // namespace misspec::lik
