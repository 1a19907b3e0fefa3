#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace misspec::coop {

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int r, int c) const { return data_[idx(r, c)]; }
  double& operator()(int r, int c) { return data_[idx(r, c)]; }

 private:
  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c); }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

class DegenerateDistribution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Types are the hidden rewards, signals the demonstrations; payoff(type, guess).
struct CommonPayoffGame {
  std::vector<double> prior;
  Matrix payoff;

  int n_types() const { return static_cast<int>(prior.size()); }
  void validate() const;
};

/// p^H(d | r): one row per type, one column per signal.
struct TeacherPolicy {
  Matrix rows;
  int n_types() const { return rows.rows(); }
  int n_signals() const { return rows.cols(); }
  void validate(double tol = 1e-9) const;
};

/// p^R(r | d) stored as posterior(signal, type), plus the deterministic guess per signal.
struct LearnerPolicy {
  Matrix posterior;
  std::vector<int> guess;
};

/// Expected payoff when the teacher draws signals from `h` and the learner answers with its guesses.
double payoff(const CommonPayoffGame& game, const TeacherPolicy& h, const LearnerPolicy& r);

struct FixedPointResult {
  TeacherPolicy teacher;
  LearnerPolicy learner;
  int iterations = 0;
  bool converged = false;
  std::vector<double> changes;
};

/// Alternating normalization: learner columns from prior-weighted teacher rows, teacher rows
/// from learner columns, until the teacher's sup-norm change drops below tol.
FixedPointResult ci_fixed_point(const TeacherPolicy& h0, const std::vector<double>& prior, int max_iter, double tol);

/// Max absolute deviation of (h, r) from the learner and teacher normalization equations.
struct Residuals {
  double learner = 0.0;
  double teacher = 0.0;
};
Residuals ci_residuals(const TeacherPolicy& h, const LearnerPolicy& r, const std::vector<double>& prior);

TeacherPolicy literal_teacher(const Matrix& signal_scores);

enum class PedagogicMode { Proportional, Exponential };
TeacherPolicy pedagogic_teacher(const LearnerPolicy& r0, PedagogicMode mode);

LearnerPolicy best_response(const CommonPayoffGame& game, const TeacherPolicy& h);

TeacherPolicy improving_response(const CommonPayoffGame& game, const TeacherPolicy& h, const LearnerPolicy& r,
                                 double beta);

struct Level {
  TeacherPolicy teacher;
  LearnerPolicy learner;
  double payoff = 0.0;
};

struct Hierarchy {
  std::vector<Level> levels;
};

Hierarchy build_hierarchy(const CommonPayoffGame& game, const TeacherPolicy& h0, int depth, double beta);

struct RankingReport {
  double ped_ped = 0.0;  // U(H1, R1)
  double ped_lit = 0.0;  // U(H1, R0)
  double lit_lit = 0.0;  // U(H0, R0)
  double lit_ped = 0.0;  // U(H0, R1)
  bool holds = false;
  /// Smallest of the three consecutive differences.
  double min_slack = 0.0;
};

inline constexpr double kRankingSlack = 1e-12;

RankingReport verify_ranking(const CommonPayoffGame& game, const Hierarchy& hierarchy);

struct RandomInstance {
  CommonPayoffGame game;
  TeacherPolicy h0;
};

/// Seeded random game: types in [2, max_types], signals in [2, max_signals], positive prior,
/// unit diagonal payoff with off-diagonal entries in [0, 0.5), positive teacher rows.
RandomInstance random_instance(std::uint64_t seed, int max_types, int max_signals);

/// Text form: "types N", "signals M", "prior ...", "payoff" + N rows, "teacher" + N rows.
void write_instance(std::ostream& out, const RandomInstance& inst);
RandomInstance read_instance(std::istream& in);

}  // namespace misspec::coop
