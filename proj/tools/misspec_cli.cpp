#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "misspec/experiment.hpp"
#include "misspec/records.hpp"

using namespace misspec;
namespace fs = std::filesystem;

namespace {

struct Options {
  ExperimentConfig cfg;
  double p_demo = 0.5;
  std::string format = "csv";
  std::vector<std::string> robots{"literal", "pedagogic"};
  std::vector<std::string> humans{"literal", "pedagogic"};
};

RobotKind parse_robot(const std::string& s) {
  if (s == "literal") return RobotKind::Literal;
  if (s == "pedagogic") return RobotKind::Pedagogic;
  if (s == "mixture") return RobotKind::Mixture;
  throw std::invalid_argument("unknown robot '" + s + "' (literal, pedagogic, mixture)");
}

void finish_config(Options& o) {
  o.cfg.robots.clear();
  for (const auto& r : o.robots) o.cfg.robots.push_back(parse_robot(r));
  o.cfg.humans.clear();
  for (const auto& h : o.humans) {
    o.cfg.humans.push_back(parse_generator(h, h == "demo-mixture" ? o.p_demo : o.cfg.params.alpha));
  }
  o.cfg.validate();
}

// Writes `body` to <out>/<name> when --out is set, else to stdout.
void emit(const ExperimentConfig& cfg, const std::string& name, const std::string& body) {
  if (cfg.out_dir.empty()) {
    std::cout << body;
    return;
  }
  fs::create_directories(cfg.out_dir);
  std::ofstream f(fs::path(cfg.out_dir) / name);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(cfg.out_dir) / name).string());
  f << body;
}

void emit_manifest(const ExperimentConfig& cfg, const std::string& command) {
  if (cfg.out_dir.empty()) return;
  std::ostringstream m;
  write_manifest(m, cfg, command);
  emit(cfg, "run_manifest.json", m.str());
}

std::vector<Demonstration> read_demo_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_demonstrations(in);
}

std::string demos_jsonl(const std::vector<Demonstration>& demos) {
  std::ostringstream s;
  write_demonstrations(s, demos);
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Literal vs pedagogic reward inference experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  ExperimentConfig& cfg = o.cfg;
  HumanParams& hp = cfg.params;
  app.add_option("--grid", cfg.grid_paths, "grid files (default: the bundled three-color grids)");
  app.add_option("--tau-l", hp.tau_literal, "literal human temperature")->capture_default_str();
  app.add_option("--tau-p", hp.tau_pedagogic, "pedagogic human temperature")->capture_default_str();
  app.add_option("--kappa", hp.kappa, "weight on the literal robot's belief gain")->capture_default_str();
  app.add_option("--alpha", hp.alpha, "action-mixture weight on the pedagogic policy")->capture_default_str();
  app.add_option("--p-demo", o.p_demo, "demonstration-mixture probability of a pedagogic episode")->capture_default_str();
  app.add_option("--plan-horizon", hp.plan_horizon)->capture_default_str();
  app.add_option("--lookahead", hp.lookahead, "exact belief lookahead depth of the pedagogic planner")->capture_default_str();
  app.add_option("--discount", cfg.discount)->capture_default_str();
  app.add_option("--max-steps", cfg.max_steps)->capture_default_str();
  app.add_option("--trials", cfg.trials)->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--resamples", cfg.resamples, "bootstrap resamples")->capture_default_str();
  app.add_option("--robots", o.robots, "literal, pedagogic, mixture")->delimiter(',');
  app.add_option("--humans", o.humans, "literal, pedagogic, action-mixture, demo-mixture")->delimiter(',');
  app.add_option("--out", cfg.out_dir, "output directory (stdout when omitted)");
  app.add_option("--format", o.format)->check(CLI::IsMember({"csv"}))->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "human x robot accuracy matrix");

  auto* sweep = app.add_subcommand("sweep", "accuracy over a mixture sweep");
  std::string sweep_kind = "demonstration";
  std::vector<double> sweep_values{0.0, 0.25, 0.5, 0.75, 1.0};
  sweep->add_option("--kind", sweep_kind)->check(CLI::IsMember({"demonstration", "action"}))->capture_default_str();
  sweep->add_option("--values", sweep_values)->delimiter(',');

  auto* fit = app.add_subcommand("fit-alpha", "grid-search MLE of the action-mixture weight");
  std::string demo_path;
  int n_demos = 200;
  double grid_step = 0.01;
  bool per_individual = false;
  fit->add_option("--demos", demo_path, "JSONL demonstrations; generated from --alpha when omitted");
  fit->add_option("--n-demos", n_demos)->capture_default_str();
  fit->add_option("--step", grid_step)->capture_default_str();
  fit->add_flag("--per-individual", per_individual);

  auto* compare = app.add_subcommand("compare-models", "per-individual literal vs pedagogic comparison");
  int individuals = 60, per_person = 10;
  compare->add_option("--demos", demo_path, "JSONL demonstrations grouped by 'individual'");
  compare->add_option("--individuals", individuals)->capture_default_str();
  compare->add_option("--per-individual", per_person)->capture_default_str();

  auto* ranking = app.add_subcommand("verify-ranking", "payoff ranking over random common-payoff games");
  int games = 1000, max_types = 5, max_signals = 6;
  double beta = 1.0;
  ranking->add_option("--games", games)->capture_default_str();
  ranking->add_option("--max-types", max_types)->capture_default_str();
  ranking->add_option("--max-signals", max_signals)->capture_default_str();
  ranking->add_option("--beta", beta)->capture_default_str();

  auto* ci = app.add_subcommand("ci-solve", "cooperative-inference fixed point");
  int instances = 100, ci_types = 6, ci_signals = 6, max_iter = 10000;
  double tol = 1e-10;
  std::string instance_path;
  ci->add_option("--instances", instances)->capture_default_str();
  ci->add_option("--max-types", ci_types)->capture_default_str();
  ci->add_option("--max-signals", ci_signals)->capture_default_str();
  ci->add_option("--max-iter", max_iter)->capture_default_str();
  ci->add_option("--tol", tol)->capture_default_str();
  ci->add_option("--instance", instance_path, "solve one instance file instead of a random sweep");

  auto* claim2 = app.add_subcommand("claim2", "predictive vs inferential likelihood on the two-model fixture");
  std::string model1, model2, dataset;
  claim2->add_option("--model1", model1);
  claim2->add_option("--model2", model2);
  claim2->add_option("--dataset", dataset);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto ensure_grids = [&] {
      if (cfg.grid_paths.empty()) cfg.grid_paths = default_grid_paths();
    };

    if (simulate->parsed()) {
      ensure_grids();
      finish_config(o);
      const ModelSet models = load_models(cfg);
      std::ostringstream csv;
      write_accuracy_csv(csv, run_matrix(cfg, models));
      emit(cfg, "accuracy.csv", csv.str());
      emit_manifest(cfg, "simulate");
      return 0;
    }

    if (sweep->parsed()) {
      ensure_grids();
      finish_config(o);
      const ModelSet models = load_models(cfg);
      const MixtureKind kind = sweep_kind == "action" ? MixtureKind::Action : MixtureKind::Demonstration;
      std::ostringstream csv;
      write_accuracy_csv(csv, run_mixture_sweep(cfg, models, kind, sweep_values));
      emit(cfg, "sweep.csv", csv.str());
      emit_manifest(cfg, "sweep " + sweep_kind);
      return 0;
    }

    if (fit->parsed()) {
      ensure_grids();
      finish_config(o);
      const ModelSet models = load_models(cfg);
      std::vector<Demonstration> demos;
      if (demo_path.empty()) {
        demos = generate_demonstrations(cfg, models, Generator::action_mixture(hp.alpha), n_demos, cfg.seed);
        if (!cfg.out_dir.empty()) emit(cfg, "demos.jsonl", demos_jsonl(demos));
      } else {
        demos = read_demo_file(demo_path);
      }
      const FitResult r = fit_alpha(demos, models, grid_step, per_individual);
      std::ostringstream csv;
      csv << "alpha,mean_nll\n";
      for (std::size_t k = 0; k < r.alphas.size(); ++k) {
        char line[64];
        std::snprintf(line, sizeof line, "%.4f,%.12f\n", r.alphas[k], r.mean_nll[k]);
        csv << line;
      }
      emit(cfg, "alpha_curve.csv", csv.str());
      if (per_individual) {
        std::ostringstream ind;
        ind << "individual,alpha_hat\n";
        for (const auto& [id, a] : r.per_individual) ind << id << ',' << a << '\n';
        emit(cfg, "alpha_individuals.csv", ind.str());
      }
      emit_manifest(cfg, "fit-alpha");
      std::cerr << "alpha_hat " << r.alpha_hat << " (" << demos.size() << " demonstrations)\n";
      return 0;
    }

    if (compare->parsed()) {
      ensure_grids();
      finish_config(o);
      const ModelSet models = load_models(cfg);
      std::map<std::string, std::vector<Demonstration>> people;
      if (demo_path.empty()) {
        people = generate_population(cfg, models, o.p_demo, individuals, per_person, cfg.seed);
        if (!cfg.out_dir.empty()) {
          std::vector<Demonstration> all;
          for (const auto& [_, ds] : people) all.insert(all.end(), ds.begin(), ds.end());
          emit(cfg, "demos.jsonl", demos_jsonl(all));
        }
      } else {
        for (Demonstration& d : read_demo_file(demo_path)) people[d.individual].push_back(std::move(d));
      }
      const ComparisonResult r = model_comparison(people, models);
      std::ostringstream csv;
      csv << "individual,loglik_literal,loglik_pedagogic,better\n";
      for (const auto& [id, ll] : r.logliks) {
        char line[160];
        std::snprintf(line, sizeof line, "%s,%.9f,%.9f,%s\n", id.c_str(), ll.first, ll.second,
                      ll.first >= ll.second ? "literal" : "pedagogic");
        csv << line;
      }
      emit(cfg, "comparison.csv", csv.str());
      emit_manifest(cfg, "compare-models");
      std::cerr << "individuals " << r.individuals << " literal_fraction " << r.literal_fraction
                << " pedagogic_fraction " << r.pedagogic_fraction << '\n';
      return 0;
    }

    if (ranking->parsed()) {
      const TheoryReport rep = run_theory_check(games, max_types, max_signals, cfg.seed, beta);
      std::ostringstream s;
      write_theory_report(s, rep);
      emit(cfg, "ranking.txt", s.str());
      if (!cfg.out_dir.empty()) std::cout << s.str();
      return rep.violations.empty() ? 0 : 1;
    }

    if (ci->parsed()) {
      std::ostringstream s;
      bool ok = true;
      if (!instance_path.empty()) {
        std::ifstream in(instance_path);
        if (!in) throw std::runtime_error("cannot open " + instance_path);
        const coop::RandomInstance inst = coop::read_instance(in);
        const coop::FixedPointResult fp = coop::ci_fixed_point(inst.h0, inst.game.prior, max_iter, tol);
        const coop::Residuals res = coop::ci_residuals(fp.teacher, fp.learner, inst.game.prior);
        s << "converged " << (fp.converged ? "yes" : "no") << "\niterations " << fp.iterations << "\nlearner_residual "
          << res.learner << "\nteacher_residual " << res.teacher << "\nteacher\n";
        for (int t = 0; t < fp.teacher.n_types(); ++t) {
          for (int d = 0; d < fp.teacher.n_signals(); ++d) s << (d ? " " : "") << fp.teacher.rows(t, d);
          s << '\n';
        }
        ok = fp.converged;
      } else {
        const CiSolveReport rep = run_ci_sweep(instances, ci_types, ci_signals, cfg.seed, max_iter, tol);
        s << "instances " << rep.instances << "\nconverged " << rep.converged << "\nmax_iterations "
          << rep.max_iterations << "\nmax_learner_residual " << rep.max_learner_residual
          << "\nmax_teacher_residual " << rep.max_teacher_residual << '\n';
        ok = rep.converged == rep.instances;
      }
      emit(cfg, "ci_solve.txt", s.str());
      if (!cfg.out_dir.empty()) std::cout << s.str();
      return ok ? 0 : 1;
    }

    if (claim2->parsed()) {
      std::ostringstream s;
      bool reversal = false;
      if (model1.empty() && model2.empty() && dataset.empty()) {
        const LikelihoodReport rep = run_likelihood_demo();
        write_likelihood_report(s, rep);
        reversal = rep.reversal;
      } else {
        if (model1.empty() || model2.empty() || dataset.empty()) {
          throw std::invalid_argument("--model1, --model2 and --dataset go together");
        }
        std::ifstream f1(model1), f2(model2), fd(dataset);
        if (!f1 || !f2 || !fd) throw std::runtime_error("cannot open model or dataset file");
        const lik::PredictiveModel m1 = lik::read_model(f1), m2 = lik::read_model(f2);
        const lik::LabeledDataset d = lik::read_dataset(fd);
        auto q = [](const lik::Rational& r) { return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator()); };
        s << "predictive_m1 " << q(lik::predictive_likelihood_exact(m1, d)) << "\npredictive_m2 "
          << q(lik::predictive_likelihood_exact(m2, d)) << "\ninferential_m1 " << q(lik::inferential_likelihood_exact(m1, d))
          << "\ninferential_m2 " << q(lik::inferential_likelihood_exact(m2, d)) << '\n';
        reversal = lik::is_reversal(m1, m2, d);
        s << "verdict " << (reversal ? "reversal confirmed" : "no reversal") << '\n';
      }
      emit(cfg, "claim2.txt", s.str());
      if (!cfg.out_dir.empty()) std::cout << s.str();
      return reversal ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
