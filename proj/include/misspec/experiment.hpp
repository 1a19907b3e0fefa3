#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "misspec/agents.hpp"
#include "misspec/coop.hpp"
#include "misspec/estimation.hpp"
#include "misspec/likelihood.hpp"

namespace misspec {

inline constexpr const char* kVersion = "0.3.0";

struct ExperimentConfig {
  std::vector<std::string> grid_paths;
  HumanParams params;
  double discount = 0.99;
  int max_steps = 20;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<RobotKind> robots{RobotKind::Literal, RobotKind::Pedagogic};
  std::vector<Generator> humans{Generator::literal(), Generator::pedagogic()};
  int resamples = 10000;
  std::string out_dir;

  void validate() const;
};

/// The three bundled three-color grids, used when no grid is given.
std::vector<std::string> default_grid_paths();

/// Grid id is the file name without directory and extension.
std::string grid_id_from_path(const std::string& path);

/// Loads every configured grid (with the configured discount and episode length) into a ModelSet.
/// Fails before any trial runs if a grid is missing or invalid.
ModelSet load_models(const ExperimentConfig& cfg);

struct AccuracyCell {
  std::string human;
  std::string robot;
  std::optional<double> alpha;
  int correct = 0;
  int n = 0;
  double accuracy = 0.0;
  BootstrapCI ci;
  std::uint64_t seed = 0;
};

/// What a single trial draws: grid, true reward and demonstration seed. Shared by every human model,
/// so cells for different humans see the same tasks and mixture endpoints reproduce pure models.
struct TrialDraw {
  std::size_t grid = 0;
  int true_reward = 0;
  std::uint64_t demo_seed = 0;
};
TrialDraw draw_trial(std::uint64_t master_seed, int trial, std::size_t n_grids);

/// One cell per (human, robot). `robot_alpha` is the mixture robot's assumed alpha.
std::vector<AccuracyCell> run_matrix(const ExperimentConfig& cfg, const ModelSet& models,
                                     const std::vector<Generator>& humans, double robot_alpha);
std::vector<AccuracyCell> run_matrix(const ExperimentConfig& cfg, const ModelSet& models);

enum class MixtureKind { Demonstration, Action };

/// One matrix slice per sweep value; the mixture robot (when configured) assumes the generating value.
std::vector<AccuracyCell> run_mixture_sweep(const ExperimentConfig& cfg, const ModelSet& models, MixtureKind kind,
                                            const std::vector<double>& values);

const AccuracyCell& find_cell(const std::vector<AccuracyCell>& cells, const std::string& human,
                              const std::string& robot, std::optional<double> alpha = std::nullopt);

/// `n` demonstrations from `generator`; demo i draws its grid, true reward and seed like trial i of a matrix run.
std::vector<Demonstration> generate_demonstrations(const ExperimentConfig& cfg, const ModelSet& models,
                                                   const Generator& generator, int n, std::uint64_t seed,
                                                   const std::string& individual = "");

/// Individuals that are each pedagogic with probability `p_pedagogic` (literal otherwise), each giving
/// `per_individual` demonstrations.
std::map<std::string, std::vector<Demonstration>> generate_population(const ExperimentConfig& cfg,
                                                                      const ModelSet& models, double p_pedagogic,
                                                                      int individuals, int per_individual,
                                                                      std::uint64_t seed);

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyCell>& cells);
void write_manifest(std::ostream& out, const ExperimentConfig& cfg, const std::string& command);

struct TheoryReport {
  int games = 0;
  int passes = 0;
  std::vector<std::uint64_t> violations;
  double min_slack = 0.0;
  /// Games whose middle inequality (the improving step) is strict.
  int strict_improvements = 0;
};

TheoryReport run_theory_check(int n_games, int max_types, int max_signals, std::uint64_t seed, double beta = 1.0);
void write_theory_report(std::ostream& out, const TheoryReport& rep);

struct CiSolveReport {
  int instances = 0;
  int converged = 0;
  int max_iterations = 0;
  double max_learner_residual = 0.0;
  double max_teacher_residual = 0.0;
};

/// Runs the fixed-point solver on seeded random teacher matrices with a uniform prior.
CiSolveReport run_ci_sweep(int n_instances, int max_types, int max_signals, std::uint64_t seed, int max_iter,
                           double tol);

struct LikelihoodReport {
  lik::Rational pred_m1, pred_m2, inf_m1, inf_m2;
  lik::Rational printed_inf_m2;
  double pred_m1_float = 0, pred_m2_float = 0, inf_m1_float = 0, inf_m2_float = 0;
  bool reversal = false;
};

LikelihoodReport run_likelihood_demo();
void write_likelihood_report(std::ostream& out, const LikelihoodReport& rep);

}  // namespace misspec
