#include "misspec/coop.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "misspec/agents.hpp"

namespace misspec::coop {

namespace {

void check_distribution(const std::vector<double>& p, double tol, const char* what) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(what) + " has a negative entry");
    total += x;
  }
  if (std::abs(total - 1.0) > tol) throw std::invalid_argument(std::string(what) + " does not sum to 1");
}

// Learner columns: posterior(d, r) proportional to prior(r) h(d | r).
Matrix learner_from_teacher(const Matrix& h, const std::vector<double>& prior) {
  Matrix post(h.cols(), h.rows());
  for (int d = 0; d < h.cols(); ++d) {
    double total = 0.0;
    for (int r = 0; r < h.rows(); ++r) total += prior[static_cast<std::size_t>(r)] * h(r, d);
    if (!(total > 0.0)) throw DegenerateDistribution("signal " + std::to_string(d) + " has zero mass");
    for (int r = 0; r < h.rows(); ++r) post(d, r) = prior[static_cast<std::size_t>(r)] * h(r, d) / total;
  }
  return post;
}

// Teacher rows: h(d | r) proportional to posterior(d, r).
Matrix teacher_from_learner(const Matrix& post) {
  Matrix h(post.cols(), post.rows());
  for (int r = 0; r < post.cols(); ++r) {
    double total = 0.0;
    for (int d = 0; d < post.rows(); ++d) total += post(d, r);
    if (!(total > 0.0)) throw DegenerateDistribution("type " + std::to_string(r) + " has zero mass");
    for (int d = 0; d < post.rows(); ++d) h(r, d) = post(d, r) / total;
  }
  return h;
}

std::vector<int> mode_guesses(const Matrix& post) {
  std::vector<int> guess(static_cast<std::size_t>(post.rows()), 0);
  for (int d = 0; d < post.rows(); ++d) {
    int best = 0;
    for (int r = 1; r < post.cols(); ++r) {
      if (post(d, r) > post(d, best)) best = r;
    }
    guess[static_cast<std::size_t>(d)] = best;
  }
  return guess;
}

}  // namespace

void CommonPayoffGame::validate() const {
  if (prior.empty()) throw std::invalid_argument("game needs at least one type");
  check_distribution(prior, 1e-9, "prior");
  if (payoff.rows() != n_types() || payoff.cols() != n_types()) throw std::invalid_argument("payoff must be types x types");
  for (int i = 0; i < payoff.rows(); ++i) {
    for (int j = 0; j < payoff.cols(); ++j) {
      if (!std::isfinite(payoff(i, j))) throw std::invalid_argument("payoff must be finite");
    }
  }
}

void TeacherPolicy::validate(double tol) const {
  for (int r = 0; r < rows.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(rows.cols()));
    for (int d = 0; d < rows.cols(); ++d) row[static_cast<std::size_t>(d)] = rows(r, d);
    check_distribution(row, tol, "teacher row");
  }
}

double payoff(const CommonPayoffGame& game, const TeacherPolicy& h, const LearnerPolicy& r) {
  double u = 0.0;
  for (int t = 0; t < h.n_types(); ++t) {
    double inner = 0.0;
    for (int d = 0; d < h.n_signals(); ++d) inner += h.rows(t, d) * game.payoff(t, r.guess[static_cast<std::size_t>(d)]);
    u += game.prior[static_cast<std::size_t>(t)] * inner;
  }
  return u;
}

FixedPointResult ci_fixed_point(const TeacherPolicy& h0, const std::vector<double>& prior, int max_iter, double tol) {
  if (max_iter < 1) throw std::invalid_argument("max_iter must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (static_cast<int>(prior.size()) != h0.n_types()) throw std::invalid_argument("prior size mismatch");
  h0.validate();

  FixedPointResult out;
  Matrix h = h0.rows;
  for (int it = 1; it <= max_iter; ++it) {
    const Matrix post = learner_from_teacher(h, prior);
    const Matrix next = teacher_from_learner(post);
    double change = 0.0;
    for (int r = 0; r < h.rows(); ++r) {
      for (int d = 0; d < h.cols(); ++d) change = std::max(change, std::abs(next(r, d) - h(r, d)));
    }
    out.changes.push_back(change);
    out.iterations = it;
    h = next;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  out.teacher.rows = h;
  out.learner.posterior = learner_from_teacher(h, prior);
  out.learner.guess = mode_guesses(out.learner.posterior);
  return out;
}

Residuals ci_residuals(const TeacherPolicy& h, const LearnerPolicy& r, const std::vector<double>& prior) {
  Residuals res;
  const Matrix post = learner_from_teacher(h.rows, prior);
  const Matrix teacher = teacher_from_learner(r.posterior);
  for (int t = 0; t < h.n_types(); ++t) {
    for (int d = 0; d < h.n_signals(); ++d) {
      res.learner = std::max(res.learner, std::abs(post(d, t) - r.posterior(d, t)));
      res.teacher = std::max(res.teacher, std::abs(teacher(t, d) - h.rows(t, d)));
    }
  }
  return res;
}

TeacherPolicy literal_teacher(const Matrix& signal_scores) {
  TeacherPolicy h{Matrix(signal_scores.rows(), signal_scores.cols())};
  for (int t = 0; t < signal_scores.rows(); ++t) {
    double top = -INFINITY;
    for (int d = 0; d < signal_scores.cols(); ++d) {
      if (!std::isfinite(signal_scores(t, d))) throw std::invalid_argument("signal scores must be finite");
      top = std::max(top, signal_scores(t, d));
    }
    double total = 0.0;
    for (int d = 0; d < signal_scores.cols(); ++d) total += h.rows(t, d) = std::exp(signal_scores(t, d) - top);
    for (int d = 0; d < signal_scores.cols(); ++d) h.rows(t, d) /= total;
  }
  return h;
}

TeacherPolicy pedagogic_teacher(const LearnerPolicy& r0, PedagogicMode mode) {
  const Matrix& post = r0.posterior;
  Matrix transformed(post.rows(), post.cols());
  for (int d = 0; d < post.rows(); ++d) {
    for (int t = 0; t < post.cols(); ++t) {
      transformed(d, t) = mode == PedagogicMode::Exponential ? std::exp(post(d, t)) : post(d, t);
    }
  }
  return TeacherPolicy{teacher_from_learner(transformed)};
}

LearnerPolicy best_response(const CommonPayoffGame& game, const TeacherPolicy& h) {
  game.validate();
  if (h.n_types() != game.n_types()) throw std::invalid_argument("teacher/game type count mismatch");
  LearnerPolicy out{Matrix(h.n_signals(), h.n_types()), std::vector<int>(static_cast<std::size_t>(h.n_signals()), 0)};
  for (int d = 0; d < h.n_signals(); ++d) {
    double total = 0.0;
    for (int t = 0; t < h.n_types(); ++t) total += game.prior[static_cast<std::size_t>(t)] * h.rows(t, d);
    for (int t = 0; t < h.n_types(); ++t) {
      out.posterior(d, t) = total > 0.0 ? game.prior[static_cast<std::size_t>(t)] * h.rows(t, d) / total
                                        : game.prior[static_cast<std::size_t>(t)];
    }
    int best = 0;
    double best_value = -INFINITY;
    for (int guess = 0; guess < h.n_types(); ++guess) {
      double v = 0.0;
      for (int t = 0; t < h.n_types(); ++t) v += out.posterior(d, t) * game.payoff(t, guess);
      if (v > best_value) {
        best_value = v;
        best = guess;
      }
    }
    out.guess[static_cast<std::size_t>(d)] = best;
  }
  return out;
}

TeacherPolicy improving_response(const CommonPayoffGame& game, const TeacherPolicy& h, const LearnerPolicy& r,
                                 double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  TeacherPolicy candidate{Matrix(h.n_types(), h.n_signals())};
  for (int t = 0; t < h.n_types(); ++t) {
    double total = 0.0;
    for (int d = 0; d < h.n_signals(); ++d) {
      const double value = game.payoff(t, r.guess[static_cast<std::size_t>(d)]);
      total += candidate.rows(t, d) = h.rows(t, d) * std::exp(beta * value);
    }
    for (int d = 0; d < h.n_signals(); ++d) candidate.rows(t, d) /= total;
  }
  if (payoff(game, candidate, r) >= payoff(game, h, r) - 1e-12) return candidate;
  return h;
}

Hierarchy build_hierarchy(const CommonPayoffGame& game, const TeacherPolicy& h0, int depth, double beta) {
  if (depth < 1) throw std::invalid_argument("depth must be at least 1");
  Hierarchy out;
  TeacherPolicy h = h0;
  for (int k = 0; k <= depth; ++k) {
    LearnerPolicy r = best_response(game, h);
    const double u = payoff(game, h, r);
    TeacherPolicy next = k < depth ? improving_response(game, h, r, beta) : TeacherPolicy{};
    out.levels.push_back({std::move(h), std::move(r), u});
    h = std::move(next);
  }
  return out;
}

RankingReport verify_ranking(const CommonPayoffGame& game, const Hierarchy& hierarchy) {
  if (hierarchy.levels.size() < 2) throw std::invalid_argument("hierarchy needs at least two levels");
  const Level& lit = hierarchy.levels[0];
  const Level& ped = hierarchy.levels[1];
  RankingReport rep;
  rep.ped_ped = payoff(game, ped.teacher, ped.learner);
  rep.ped_lit = payoff(game, ped.teacher, lit.learner);
  rep.lit_lit = payoff(game, lit.teacher, lit.learner);
  rep.lit_ped = payoff(game, lit.teacher, ped.learner);
  rep.min_slack = std::min({rep.ped_ped - rep.ped_lit, rep.ped_lit - rep.lit_lit, rep.lit_lit - rep.lit_ped});
  rep.holds = rep.min_slack >= -kRankingSlack;
  return rep;
}

RandomInstance random_instance(std::uint64_t seed, int max_types, int max_signals) {
  if (max_types < 2 || max_signals < 2) throw std::invalid_argument("random games need at least 2 types and signals");
  std::uint64_t state = seed;
  const int types = 2 + static_cast<int>(splitmix64(state) % static_cast<std::uint64_t>(max_types - 1));
  const int signals = 2 + static_cast<int>(splitmix64(state) % static_cast<std::uint64_t>(max_signals - 1));
  auto positive = [&] { return 1e-3 + uniform01(state); };

  RandomInstance inst;
  double total = 0.0;
  for (int t = 0; t < types; ++t) total += inst.game.prior.emplace_back(positive());
  for (double& p : inst.game.prior) p /= total;

  inst.game.payoff = Matrix(types, types);
  for (int t = 0; t < types; ++t) {
    for (int g = 0; g < types; ++g) inst.game.payoff(t, g) = t == g ? 1.0 : 0.5 * uniform01(state);
  }

  inst.h0.rows = Matrix(types, signals);
  for (int t = 0; t < types; ++t) {
    double row = 0.0;
    for (int d = 0; d < signals; ++d) row += inst.h0.rows(t, d) = positive();
    for (int d = 0; d < signals; ++d) inst.h0.rows(t, d) /= row;
  }
  return inst;
}

void write_instance(std::ostream& out, const RandomInstance& inst) {
  const int types = inst.game.n_types();
  const int signals = inst.h0.n_signals();
  out.precision(17);
  out << "types " << types << "\nsignals " << signals << "\nprior";
  for (double p : inst.game.prior) out << ' ' << p;
  out << "\npayoff\n";
  for (int t = 0; t < types; ++t) {
    for (int g = 0; g < types; ++g) out << (g ? " " : "") << inst.game.payoff(t, g);
    out << '\n';
  }
  out << "teacher\n";
  for (int t = 0; t < types; ++t) {
    for (int d = 0; d < signals; ++d) out << (d ? " " : "") << inst.h0.rows(t, d);
    out << '\n';
  }
}

RandomInstance read_instance(std::istream& in) {
  RandomInstance inst;
  int types = 0, signals = 0;
  std::string word;
  auto read_matrix = [&](int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        if (!(in >> m(i, j))) throw std::invalid_argument("truncated matrix in game file");
      }
    }
    return m;
  };
  while (in >> word) {
    if (word == "types") {
      in >> types;
    } else if (word == "signals") {
      in >> signals;
    } else if (word == "prior") {
      inst.game.prior.resize(static_cast<std::size_t>(types));
      for (double& p : inst.game.prior) {
        if (!(in >> p)) throw std::invalid_argument("truncated prior in game file");
      }
    } else if (word == "payoff") {
      inst.game.payoff = read_matrix(types, types);
    } else if (word == "teacher") {
      inst.h0.rows = read_matrix(types, signals);
    } else {
      throw std::invalid_argument("unknown game file keyword '" + word + "'");
    }
  }
  if (types < 1 || signals < 1) throw std::invalid_argument("game file must declare types and signals");
  if (inst.game.prior.empty()) inst.game.prior.assign(static_cast<std::size_t>(types), 1.0 / types);
  if (inst.game.payoff.rows() == 0) {
    inst.game.payoff = Matrix(types, types);
    for (int t = 0; t < types; ++t) inst.game.payoff(t, t) = 1.0;
  }
  if (inst.h0.rows.rows() == 0) throw std::invalid_argument("game file needs a teacher block");
  inst.game.validate();
  inst.h0.validate();
  return inst;
}

}  // namespace misspec::coop
