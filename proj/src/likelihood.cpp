#include "misspec/likelihood.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "misspec/agents.hpp"

namespace misspec::lik {

void PredictiveModel::validate() const {
  if (table.empty()) throw std::invalid_argument("model has no rows");
  for (const auto& row : table) {
    if (row.size() != table.front().size() || row.empty()) throw std::invalid_argument("model rows differ in length");
    Rational total = 0;
    for (const Rational& p : row) {
      if (p < Rational(0)) throw std::invalid_argument("model has a negative entry");
      total += p;
    }
    if (total != Rational(1)) throw std::invalid_argument("model row does not sum to 1");
  }
}

void LabeledDataset::validate(const PredictiveModel& m) const {
  if (static_cast<int>(prior.size()) != m.n_latent()) throw std::invalid_argument("prior size does not match model");
  Rational total = 0;
  for (const Rational& p : prior) {
    if (p < Rational(0)) throw std::invalid_argument("prior has a negative entry");
    total += p;
  }
  if (total != Rational(1)) throw std::invalid_argument("prior does not sum to 1");
  for (const auto& [theta, x] : items) {
    if (theta < 0 || theta >= m.n_latent() || x < 0 || x >= m.n_obs()) throw std::invalid_argument("dataset index out of range");
  }
}

namespace {

double evidence(const PredictiveModel& m, const LabeledDataset& d, int x) {
  double e = 0.0;
  for (int t = 0; t < m.n_latent(); ++t) e += m.prob(t, x) * boost::rational_cast<double>(d.prior[static_cast<std::size_t>(t)]);
  return e;
}

}  // namespace

double predictive_likelihood(const PredictiveModel& m, const LabeledDataset& d) {
  d.validate(m);
  double out = 1.0;
  for (const auto& [theta, x] : d.items) out *= m.prob(theta, x);
  return out;
}

double predictive_log_likelihood(const PredictiveModel& m, const LabeledDataset& d) {
  d.validate(m);
  double out = 0.0;
  for (const auto& [theta, x] : d.items) out += std::log(m.prob(theta, x));
  return out;
}

Rational predictive_likelihood_exact(const PredictiveModel& m, const LabeledDataset& d) {
  d.validate(m);
  Rational out = 1;
  for (const auto& [theta, x] : d.items) out *= m.table[static_cast<std::size_t>(theta)][static_cast<std::size_t>(x)];
  return out;
}

double inferential_likelihood(const PredictiveModel& m, const LabeledDataset& d) {
  d.validate(m);
  double out = 1.0;
  for (const auto& [theta, x] : d.items) {
    const double e = evidence(m, d, x);
    if (!(e > 0.0)) throw UndefinedPosterior("observation " + std::to_string(x) + " has zero evidence");
    out *= m.prob(theta, x) * boost::rational_cast<double>(d.prior[static_cast<std::size_t>(theta)]) / e;
  }
  return out;
}

double inferential_log_likelihood(const PredictiveModel& m, const LabeledDataset& d) {
  d.validate(m);
  double out = 0.0;
  for (const auto& [theta, x] : d.items) {
    const double e = evidence(m, d, x);
    if (!(e > 0.0)) throw UndefinedPosterior("observation " + std::to_string(x) + " has zero evidence");
    out += std::log(m.prob(theta, x)) + std::log(boost::rational_cast<double>(d.prior[static_cast<std::size_t>(theta)])) -
           std::log(e);
  }
  return out;
}

Rational inferential_likelihood_exact(const PredictiveModel& m, const LabeledDataset& d) {
  d.validate(m);
  Rational out = 1;
  for (const auto& [theta, x] : d.items) {
    Rational e = 0;
    for (int t = 0; t < m.n_latent(); ++t) e += m.table[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)] * d.prior[static_cast<std::size_t>(t)];
    if (e == Rational(0)) throw UndefinedPosterior("observation " + std::to_string(x) + " has zero evidence");
    out *= m.table[static_cast<std::size_t>(theta)][static_cast<std::size_t>(x)] * d.prior[static_cast<std::size_t>(theta)] / e;
  }
  return out;
}

Fixture claim2_fixture() {
  const Rational third(1, 3), two_thirds(2, 3), zero(0);
  Fixture f;
  f.m1.table = {{two_thirds, third, zero}, {zero, third, two_thirds}};
  f.m2.table = {{two_thirds, third, zero}, {zero, two_thirds, third}};
  f.dataset.prior = {Rational(1, 2), Rational(1, 2)};
  f.dataset.items = {{0, 0}, {0, 0}, {0, 1}, {1, 1}, {1, 1}, {1, 2}, {1, 2}, {1, 2}, {1, 2}};
  return f;
}

bool is_reversal(const PredictiveModel& m1, const PredictiveModel& m2, const LabeledDataset& d) {
  try {
    return predictive_likelihood_exact(m1, d) > predictive_likelihood_exact(m2, d) &&
           inferential_likelihood_exact(m1, d) < inferential_likelihood_exact(m2, d);
  } catch (const UndefinedPosterior&) {
    return false;
  }
}

namespace {

// All rows with entries k/3, k >= 0, summing to 1.
void lattice_rows(int n_obs, int remaining, std::vector<Rational>& prefix, std::vector<std::vector<Rational>>& out) {
  if (static_cast<int>(prefix.size()) == n_obs - 1) {
    prefix.emplace_back(remaining, 3);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    prefix.emplace_back(k, 3);
    lattice_rows(n_obs, remaining - k, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Fixture> search_reversal(int n_types, int n_obs, int n_candidates, std::uint64_t seed) {
  if (n_types < 1 || n_types > 3 || n_obs < 1 || n_obs > 4) throw std::invalid_argument("search space too large");
  std::vector<Fixture> found;
  if (n_candidates <= 0) return found;

  std::vector<std::vector<Rational>> rows;
  std::vector<Rational> prefix;
  lattice_rows(n_obs, 3, prefix, rows);

  std::uint64_t state = seed;
  auto pick = [&](std::uint64_t n) { return static_cast<int>(splitmix64(state) % n); };
  auto random_model = [&] {
    PredictiveModel m;
    for (int t = 0; t < n_types; ++t) m.table.push_back(rows[static_cast<std::size_t>(pick(rows.size()))]);
    return m;
  };

  for (int c = 0; c < n_candidates; ++c) {
    Fixture f{random_model(), random_model(), {}};
    f.dataset.prior.assign(static_cast<std::size_t>(n_types), Rational(1, n_types));
    const int n_items = 3 + pick(10);
    for (int i = 0; i < n_items; ++i) f.dataset.items.emplace_back(pick(static_cast<std::uint64_t>(n_types)), pick(static_cast<std::uint64_t>(n_obs)));
    if (is_reversal(f.m1, f.m2, f.dataset)) found.push_back(std::move(f));
  }
  return found;
}

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(std::stoll(text));
    // Decimal literal: exact value of the written digits.
    const std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    std::int64_t denom = 1;
    for (std::size_t i = dot + 1; i < text.size(); ++i) denom *= 10;
    return Rational(std::stoll(digits), denom);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse number '" + text + "'");
  }
}

PredictiveModel read_model(std::istream& in) {
  PredictiveModel m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<Rational> row;
    std::string tok;
    while (ls >> tok) {
      if (tok[0] == '#') break;
      row.push_back(parse_rational(tok));
    }
    if (!row.empty()) m.table.push_back(std::move(row));
  }
  m.validate();
  return m;
}

LabeledDataset read_dataset(std::istream& in) {
  LabeledDataset d;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first[0] == '#') continue;
    if (first == "prior") {
      std::string tok;
      while (ls >> tok) d.prior.push_back(parse_rational(tok));
      continue;
    }
    int x = 0;
    if (!(ls >> x)) throw std::invalid_argument("dataset line needs 'theta x'");
    d.items.emplace_back(std::stoi(first), x);
  }
  return d;
}

void write_model(std::ostream& out, const PredictiveModel& m) {
  for (const auto& row : m.table) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i].numerator() << '/' << row[i].denominator();
    out << '\n';
  }
}

}  // namespace misspec::lik
