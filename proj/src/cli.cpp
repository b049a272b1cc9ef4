// SPDX-License-Identifier: MIT
#include "gdlm/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gdlm/io.hpp"
#include "gdlm/partition.hpp"
#include "gdlm/sim.hpp"

namespace gdlm::cli {

namespace {

using nlohmann::json;

// Values from a --config JSON file become injected flags right after the
// subcommand name; command-line flags come later and win (TakeLast).
void apply_json_config(std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      break;
    }
  }
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open config " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw io::ParseError("config " + path + " is not a JSON object", 0);
  std::vector<std::string> injected;
  for (const auto& [key, value] : j.items()) {
    std::string text;
    if (value.is_string())
      text = value.get<std::string>();
    else if (value.is_boolean())
      text = value.get<bool>() ? "true" : "false";
    else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        text += (i ? "," : "") + value[i].dump();
    } else
      text = value.dump();
    injected.push_back("--" + key + "=" + text);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
}

struct Report {
  json j;
  std::string path;

  Report(const std::string& command, std::uint64_t seed) {
    j["command"] = command;
    j["seed"] = seed;
    j["params"] = json::object();
    j["metrics"] = json::object();
    j["partition_reports"] = json::array();
  }

  void emit() const {
    if (path.empty()) {
      std::cout << j.dump() << '\n';
    } else {
      std::ofstream out(path);
      if (!out) throw io::IoError("cannot open " + path + " for writing");
      out << j.dump(2) << '\n';
    }
  }
};

json partition_reports_json(const FitResult& fit) {
  json arr = json::array();
  for (std::size_t q = 0; q < fit.reports.size(); ++q) {
    const MatchReport& rep = fit.reports[q];
    json entry;
    entry["partition"] = q;
    entry["converged"] = q < fit.converged.size() ? fit.converged[q] : false;
    entry["objective"] = q < fit.objectives.size() ? fit.objectives[q] : 0.0;
    entry["match_valid"] = rep.valid;
    entry["match_repaired"] = rep.repaired;
    entry["match_score"] = rep.score;
    if (rep.permutation) entry["psi"] = rep.permutation->psi;
    arr.push_back(std::move(entry));
  }
  return arr;
}

void echo_seed(std::uint64_t seed) { std::printf("seed=%" PRIu64 "\n", seed); }

std::vector<int> contiguous_thirds(int p, int which) {
  const int a = p / 3, b = (2 * p) / 3;
  std::vector<int> out;
  const int lo = which == 0 ? 0 : (which == 1 ? a : b);
  const int hi = which == 0 ? a : (which == 1 ? b : p);
  for (int v = lo; v < hi; ++v) out.push_back(v);
  return out;
}

struct FitFlags {
  std::uint64_t seed = 0;
  int k = 0;
  double alpha0 = 0.0;
  int partitions = 0;  // 0 = auto
  std::vector<int> anchors_j, anchors_s, anchors_t;
  int max_iters = 500;
  double rel_tol = 1e-6;
  double epsilon = 1e-10;
  int restarts = 3;
  std::string matcher = "procrustes";
  int workers = 0;
  bool strict = false;
};

void add_fit_flags(CLI::App* sub, FitFlags& f, bool need_model) {
  if (need_model) {
    sub->add_option("--k", f.k, "number of hidden components")->required();
    sub->add_option("--alpha0", f.alpha0, "Dirichlet concentration total")->required();
    sub->add_option("--partitions", f.partitions, "partition count (0 = auto)");
  }
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--anchors-j", f.anchors_j, "mode-1 anchor variables")->delimiter(',');
  sub->add_option("--anchors-s", f.anchors_s, "mode-2 anchor variables")->delimiter(',');
  sub->add_option("--anchors-t", f.anchors_t, "mode-3 anchor variables")->delimiter(',');
  sub->add_option("--max-iters", f.max_iters, "factorization sweep cap");
  sub->add_option("--rel-tol", f.rel_tol, "relative-change stopping tolerance");
  sub->add_option("--epsilon", f.epsilon, "multiplicative-update guard");
  sub->add_option("--restarts", f.restarts, "random restarts per partition");
  sub->add_option("--matcher", f.matcher, "column matcher")
      ->check(CLI::IsMember({"procrustes", "smallest-angle"}));
  sub->add_option("--workers", f.workers, "concurrent partition fits (0 = all cores)");
  sub->add_flag("--strict", f.strict, "exit 4 when any partition fails to converge");
}

FitOptions make_fit_options(const FitFlags& f) {
  FitOptions opts;
  opts.factorize.max_iters = f.max_iters;
  opts.factorize.rel_tol = f.rel_tol;
  opts.factorize.epsilon = f.epsilon;
  opts.factorize.seed = f.seed;
  opts.matcher = f.matcher == "procrustes" ? Matcher::procrustes : Matcher::smallest_angle;
  opts.restarts = f.restarts;
  opts.workers = f.workers;
  return opts;
}

PartitionPlan make_plan(const Dataset& data, const FitFlags& f) {
  std::array<std::vector<int>, 3> anchors;
  if (f.anchors_j.empty() && f.anchors_s.empty() && f.anchors_t.empty()) {
    anchors = default_anchor_sets(data.p, f.k, data.categories);
  } else {
    if (f.anchors_j.empty() || f.anchors_s.empty() || f.anchors_t.empty())
      throw std::invalid_argument("all three anchor sets must be given together");
    anchors = {f.anchors_j, f.anchors_s, f.anchors_t};
  }
  const int r = f.partitions > 0
                    ? f.partitions
                    : default_partition_count(data.p, f.k, data.categories, anchors);
  return build_partition_plan(data.p, f.k, data.categories, anchors, r, f.seed);
}

int cmd_simulate(const SimConfig& cfg, const std::string& out_data,
                 const std::string& out_model, Report& report) {
  echo_seed(cfg.seed);
  const ModelParams truth = sample_model(cfg);
  Dataset data = simulate_dataset(truth, cfg);
  if (cfg.delta > 0.0) data = contaminate(data, cfg.delta, cfg.seed);
  io::save_dataset_csv(data, out_data);
  io::save_model_json(truth, out_model);
  report.j["params"] = {{"p", cfg.p},     {"k", cfg.k},         {"d", cfg.d},
                        {"n", cfg.n},     {"alpha_h", cfg.alpha_h},
                        {"delta", cfg.delta}, {"out_data", out_data},
                        {"out_model", out_model}};
  std::printf("wrote %s and %s\n", out_data.c_str(), out_model.c_str());
  report.emit();
  return kExitOk;
}

int cmd_fit(const std::string& data_path, const FitFlags& f, const std::string& out_model,
            Report& report) {
  echo_seed(f.seed);
  const Dataset data = io::load_dataset_csv(data_path);
  const PartitionPlan plan = make_plan(data, f);
  const FitOptions opts = make_fit_options(f);
  const FitResult fit = fit_partitioned(data, f.k, f.alpha0, plan, opts);
  io::save_model_json(fit, out_model);
  if (fit.anchor_rank_warning)
    std::fprintf(stderr, "warning: stacked anchor factor is numerically rank-deficient\n");

  bool all_converged = true;
  for (bool c : fit.converged) all_converged = all_converged && c;
  report.j["params"] = {{"data", data_path},   {"k", f.k},
                        {"alpha0", f.alpha0},  {"partitions", plan.r()},
                        {"matcher", f.matcher}, {"restarts", f.restarts},
                        {"workers", f.workers}, {"out_model", out_model}};
  report.j["metrics"]["converged"] = all_converged;
  report.j["partition_reports"] = partition_reports_json(fit);
  std::printf("fit %d partitions, converged=%s\n", plan.r(), all_converged ? "true" : "false");
  report.emit();
  if (f.strict && !all_converged) {
    std::fprintf(stderr, "error: category=solver partition factorization did not converge\n");
    return kExitSolver;
  }
  return kExitOk;
}

int cmd_eval(const std::string& est_path, const std::string& truth_path, Report& report,
             std::uint64_t seed) {
  echo_seed(seed);
  const ModelParams est = io::load_model_json(est_path);
  const ModelParams truth = io::load_model_json(truth_path);
  const double rmse = rmse_aligned(est, truth);
  report.j["params"] = {{"est", est_path}, {"truth", truth_path}};
  report.j["metrics"]["rmse"] = rmse;
  std::printf("rmse=%.17g\n", rmse);
  report.emit();
  return kExitOk;
}

int cmd_negfrac(const std::string& data_path, double alpha0, std::vector<int> vj,
                std::vector<int> vs, std::vector<int> vt, Report& report,
                std::uint64_t seed) {
  echo_seed(seed);
  const Dataset data = io::load_dataset_csv(data_path);
  if (vj.empty() && vs.empty() && vt.empty()) {
    if (data.p < 3)
      throw std::invalid_argument("negfrac needs at least three variables");
    vj = contiguous_thirds(data.p, 0);
    vs = contiguous_thirds(data.p, 1);
    vt = contiguous_thirds(data.p, 2);
  }
  const Tensor3 block = block_tensor(data, vj, vs, vt, alpha0);
  const double frac = negative_fraction(block);
  report.j["params"] = {{"data", data_path}, {"alpha0", alpha0}};
  report.j["metrics"]["negative_fraction"] = frac;
  std::printf("negative_fraction=%.17g\n", frac);
  report.emit();
  return kExitOk;
}

int cmd_bench(const SimConfig& cfg, const FitFlags& f, const std::vector<int>& partition_counts,
              int reps, Report& report) {
  echo_seed(cfg.seed);
  const ModelParams truth = sample_model(cfg);
  const Dataset data = simulate_dataset(truth, cfg);
  FitFlags flags = f;
  json runtimes = json::array();
  for (int r : partition_counts) {
    flags.partitions = r;
    flags.k = cfg.k;
    flags.alpha0 = cfg.alpha_h * cfg.k;
    const PartitionPlan plan = make_plan(data, flags);
    const FitOptions opts = make_fit_options(flags);
    std::vector<double> seconds;
    for (int rep = 0; rep < reps; ++rep) {
      const auto t0 = std::chrono::steady_clock::now();
      const FitResult fit = fit_partitioned(data, cfg.k, flags.alpha0, plan, opts);
      const auto t1 = std::chrono::steady_clock::now();
      (void)fit;
      seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::vector<double> sorted = seconds;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    std::printf("partitions=%d median_seconds=%.6f\n", r, median);
    runtimes.push_back({{"partitions", r}, {"seconds", seconds}, {"median", median}});
  }
  report.j["params"] = {{"p", cfg.p}, {"k", cfg.k}, {"d", cfg.d}, {"n", cfg.n},
                        {"reps", reps}, {"workers", f.workers}};
  report.j["metrics"]["runtimes"] = runtimes;
  report.emit();
  return kExitOk;
}

}  // namespace

int run(std::vector<std::string> args) {
  try {
    apply_json_config(args);

    CLI::App app{"Mixed membership model learning via partitioned moment-tensor factorization"};
    app.require_subcommand(1);
    app.option_defaults()->take_last();

    std::string report_path, config_path;

    // simulate
    SimConfig sim_cfg;
    std::vector<double> theta_prior;
    std::string out_data, out_model;
    CLI::App* sim = app.add_subcommand("simulate", "draw a model and dataset");
    sim->option_defaults()->take_last();
    sim->add_option("--p", sim_cfg.p, "variables");
    sim->add_option("--k", sim_cfg.k, "hidden components");
    sim->add_option("--d", sim_cfg.d, "categories per variable");
    sim->add_option("--n", sim_cfg.n, "observations");
    sim->add_option("--alpha-h", sim_cfg.alpha_h, "per-component concentration");
    sim->add_option("--theta-prior", theta_prior, "Dirichlet prior for theta columns")
        ->delimiter(',');
    sim->add_option("--delta", sim_cfg.delta, "contamination fraction");
    sim->add_option("--seed", sim_cfg.seed, "RNG seed");
    sim->add_option("--out-data", out_data, "dataset CSV path")->required();
    sim->add_option("--out-model", out_model, "truth model JSON path")->required();
    sim->add_option("--report", report_path, "report JSON path");
    sim->add_option("--config", config_path, "JSON config with flag defaults");

    // fit
    FitFlags fit_flags;
    std::string fit_data, fit_out;
    CLI::App* fit = app.add_subcommand("fit", "estimate parameters from a dataset");
    fit->option_defaults()->take_last();
    fit->add_option("--data", fit_data, "dataset CSV path")->required();
    add_fit_flags(fit, fit_flags, true);
    fit->add_option("--out-model", fit_out, "output model JSON path")->required();
    fit->add_option("--report", report_path, "report JSON path");
    fit->add_option("--config", config_path, "JSON config with flag defaults");

    // eval
    std::string est_path, truth_path;
    std::uint64_t eval_seed = 0;
    CLI::App* eval = app.add_subcommand("eval", "aligned RMSE between two models");
    eval->option_defaults()->take_last();
    eval->add_option("--est", est_path, "estimated model JSON")->required();
    eval->add_option("--truth", truth_path, "ground-truth model JSON")->required();
    eval->add_option("--seed", eval_seed, "RNG seed (echoed only)");
    eval->add_option("--report", report_path, "report JSON path");
    eval->add_option("--config", config_path, "JSON config with flag defaults");

    // negfrac
    std::string nf_data;
    double nf_alpha0 = 0.0;
    std::uint64_t nf_seed = 0;
    std::vector<int> nf_j, nf_s, nf_t;
    CLI::App* nf = app.add_subcommand("negfrac", "negative-entry fraction of a block estimator");
    nf->option_defaults()->take_last();
    nf->add_option("--data", nf_data, "dataset CSV path")->required();
    nf->add_option("--alpha0", nf_alpha0, "Dirichlet concentration total")->required();
    nf->add_option("--vars-j", nf_j, "mode-1 variables")->delimiter(',');
    nf->add_option("--vars-s", nf_s, "mode-2 variables")->delimiter(',');
    nf->add_option("--vars-t", nf_t, "mode-3 variables")->delimiter(',');
    nf->add_option("--seed", nf_seed, "RNG seed (echoed only)");
    nf->add_option("--report", report_path, "report JSON path");
    nf->add_option("--config", config_path, "JSON config with flag defaults");

    // bench
    SimConfig bench_cfg;
    FitFlags bench_flags;
    std::vector<int> bench_partitions;
    int bench_reps = 3;
    CLI::App* bench = app.add_subcommand("bench", "runtime across partition counts");
    bench->option_defaults()->take_last();
    bench->add_option("--p", bench_cfg.p, "variables");
    bench->add_option("--k", bench_cfg.k, "hidden components");
    bench->add_option("--d", bench_cfg.d, "categories per variable");
    bench->add_option("--n", bench_cfg.n, "observations");
    bench->add_option("--alpha-h", bench_cfg.alpha_h, "per-component concentration");
    bench->add_option("--partitions", bench_partitions, "partition counts to sweep")
        ->delimiter(',')
        ->required();
    bench->add_option("--reps", bench_reps, "repetitions per setting");
    add_fit_flags(bench, bench_flags, false);
    bench->add_option("--report", report_path, "report JSON path");
    bench->add_option("--config", config_path, "JSON config with flag defaults");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (sim->parsed()) {
      if (!theta_prior.empty())
        sim_cfg.theta_prior = Eigen::Map<VectorXd>(theta_prior.data(), theta_prior.size());
      Report report("simulate", sim_cfg.seed);
      report.path = report_path;
      return cmd_simulate(sim_cfg, out_data, out_model, report);
    }
    if (fit->parsed()) {
      Report report("fit", fit_flags.seed);
      report.path = report_path;
      return cmd_fit(fit_data, fit_flags, fit_out, report);
    }
    if (eval->parsed()) {
      Report report("eval", eval_seed);
      report.path = report_path;
      return cmd_eval(est_path, truth_path, report, eval_seed);
    }
    if (nf->parsed()) {
      Report report("negfrac", nf_seed);
      report.path = report_path;
      return cmd_negfrac(nf_data, nf_alpha0, nf_j, nf_s, nf_t, report, nf_seed);
    }
    if (bench->parsed()) {
      bench_cfg.seed = bench_flags.seed;
      if (bench_flags.workers == 0) bench_flags.workers = 1;
      Report report("bench", bench_cfg.seed);
      report.path = report_path;
      return cmd_bench(bench_cfg, bench_flags, bench_partitions, bench_reps, report);
    }
    return kExitArgs;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << e.what() << '\n';
      return kExitOk;
    }
    std::fprintf(stderr, "error: category=args %s\n", e.what());
    return kExitArgs;
  } catch (const io::ParseError& e) {
    std::fprintf(stderr, "error: category=parse %s\n", e.what());
    return kExitParse;
  } catch (const io::IoError& e) {
    std::fprintf(stderr, "error: category=io %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: category=args %s\n", e.what());
    return kExitArgs;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: category=solver %s\n", e.what());
    return kExitSolver;
  }
}

}  // namespace gdlm::cli
