#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bbsreg/datagen.hpp"
#include "bbsreg/eval.hpp"
#include "bbsreg/io.hpp"
#include "bbsreg/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bbsreg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;

EmbeddingKind parse_embedding(const std::string& text) {
  if (text == "identity") return EmbeddingKind::identity();
  if (text == "local") return EmbeddingKind::local_geometry();
  if (text.rfind("local:", 0) == 0) {
    int k = 0;
    try {
      k = std::stoi(text.substr(6));
    } catch (const std::exception&) {
      fail(Errc::InvalidArgument, "bad neighbor count in '" + text + "'");
    }
    return EmbeddingKind::local_geometry(k);
  }
  fail(Errc::InvalidArgument,
       "embedding must be identity or local:k, got '" + text + "'");
}

RegistrationReport run_method(const std::string& method, const PointCloud& p,
                              const PointCloud& q, const PipelineConfig& cfg) {
  if (method == "deepbbs") return register_deepbbs(p, q, cfg);
  if (method == "deepbbs-pp") return register_deepbbs_pp(p, q, cfg);
  if (method == "spatial-only") return register_spatial_only(p, q, cfg);
  if (method == "icp") return register_icp(p, q, cfg);
  fail(Errc::InvalidArgument, "unknown method '" + method + "'");
}

unsigned thread_budget() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("BBSREG_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 0) {
      fail(Errc::InvalidArgument, "BBSREG_THREADS must be a nonnegative integer");
    }
    if (parsed > 0) return std::min<unsigned>(hw, static_cast<unsigned>(parsed));
  }
  return hw;  // 0 or unset: auto
}

// Runs fn(i) for i in [0, jobs) on up to thread_budget() threads. Each job
// writes only its own output slot, so results are order-independent.
void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned threads =
      std::min<unsigned>(thread_budget(), static_cast<unsigned>(std::max<std::size_t>(jobs, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct RegisterOptions {
  std::string source;
  std::string target;
  std::string method = "deepbbs-pp";
  std::string embedding = "identity";
  double xi = 0.4;
  double t0 = 1.0;
  double t_decay = 0.5;
  double conv_deg = 0.4;
  int max_iters = 20;
  std::string out_transform;
  std::string out_report;
  std::uint64_t seed = 0;
};

PipelineConfig make_config(const RegisterOptions& opt) {
  PipelineConfig cfg;
  cfg.embedding = parse_embedding(opt.embedding);
  cfg.xi = opt.xi;
  cfg.t_initial = opt.t0;
  cfg.t_decay = opt.t_decay;
  cfg.convergence_deg = opt.conv_deg;
  cfg.fine_tune_convergence_deg = opt.conv_deg;
  cfg.max_iters = opt.max_iters;
  return cfg;
}

std::string report_text(const RegisterOptions& opt, const PointCloud& p,
                        const PointCloud& q, const RegistrationReport& rep) {
  std::ostringstream out;
  out.precision(17);
  out << "method = " << opt.method << "\n";
  out << "source = " << opt.source << " (" << p.size() << " points)\n";
  out << "target = " << opt.target << " (" << q.size() << " points)\n";
  out << "embedding = " << opt.embedding << "\n";
  out << "seed = " << opt.seed << "\n";
  out << "converged = " << (rep.converged ? "true" : "false") << "\n";
  out << "iterations = " << rep.iterations.size() << "\n";
  out << "estimate_rotation_deg = " << rotation_angle_deg(rep.estimate.rotation)
      << "\n";
  out << "estimate_translation_norm = " << rep.estimate.translation.norm() << "\n";
  out << "# iter\tstage\ttemperature\trotation_step_deg\n";
  for (std::size_t i = 0; i < rep.iterations.size(); ++i) {
    const IterationRecord& it = rep.iterations[i];
    out << (i + 1) << '\t' << stage_name(it.stage) << '\t' << it.temperature
        << '\t' << it.rotation_step_deg << "\n";
  }
  return out.str();
}

int cmd_register(const RegisterOptions& opt) {
  const PointCloud p = read_cloud(opt.source);
  const PointCloud q = read_cloud(opt.target);
  const PipelineConfig cfg = make_config(opt);
  const RegistrationReport rep = run_method(opt.method, p, q, cfg);

  if (!opt.out_transform.empty()) write_transform(rep.estimate, opt.out_transform);
  if (!opt.out_report.empty()) {
    atomic_write_text(opt.out_report, report_text(opt, p, q, rep));
  }
  std::cout << "converged = " << (rep.converged ? "true" : "false")
            << ", iterations = " << rep.iterations.size() << "\n";
  return rep.converged ? kExitOk : kExitNoConvergence;
}

std::vector<fs::path> list_cloud_files(const std::string& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) {
    fail(Errc::IoError, "not a directory: " + dir);
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".xyz" || ext == ".ply" || ext == ".off" || ext == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(Errc::IoError, "no cloud files in " + dir);
  return files;
}

struct BenchmarkOptions {
  std::string dataset_dir;
  std::string spec_path;
  std::vector<std::string> methods;
  int trials = 10;
  std::string out_table;
};

struct TrialResult {
  std::string label;
  PairErrors errors;
  bool converged = false;
};

int cmd_benchmark(const BenchmarkOptions& opt) {
  const BenchmarkSpec spec = read_benchmark_spec(opt.spec_path);
  const auto files = list_cloud_files(opt.dataset_dir);
  std::vector<PointCloud> sources;
  sources.reserve(files.size());
  for (const auto& f : files) sources.push_back(read_cloud(f.string()));

  std::vector<std::string> methods = opt.methods;
  if (methods.empty()) methods = {"deepbbs-pp"};
  for (const auto& m : methods) {
    if (m != "deepbbs" && m != "deepbbs-pp" && m != "spatial-only" && m != "icp") {
      fail(Errc::InvalidArgument, "unknown method '" + m + "'");
    }
  }
  if (opt.trials < 1) fail(Errc::InvalidArgument, "trials must be positive");

  struct Cell {
    double rot_deg = 0.0;
    double trans_frac = 0.0;
  };
  std::vector<Cell> cells;
  if (spec.sweeps()) {
    for (double r : spec.rotation_grid_deg) {
      for (double t : spec.translation_grid_frac) cells.push_back({r, t});
    }
  } else {
    cells.push_back({});
  }

  const std::size_t pair_count = cells.size() * static_cast<std::size_t>(opt.trials);
  std::vector<RegistrationPair> pairs;
  pairs.reserve(pair_count);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int t = 0; t < opt.trials; ++t) {
      const std::size_t idx = c * static_cast<std::size_t>(opt.trials) +
                              static_cast<std::size_t>(t);
      ExperimentSpec one = spec.base;
      one.seed = mix_seed(spec.base.seed, idx);
      const PointCloud& source = sources[idx % sources.size()];
      pairs.push_back(spec.sweeps()
                          ? make_pair_magnitude(source, one, cells[c].rot_deg,
                                                cells[c].trans_frac)
                          : make_pair(source, one));
    }
  }

  PipelineConfig cfg;  // defaults; benchmark sweeps method, not config
  std::ostringstream table;
  table.precision(17);
  table << "trial\tmethod\trot_deg\ttrans_frac\tconverged"
        << "\trot_err_x_deg\trot_err_y_deg\trot_err_z_deg"
        << "\ttrans_err_x\ttrans_err_y\ttrans_err_z\tchordal_deg\tmte\n";

  std::ostringstream summary;
  summary.precision(17);

  for (const std::string& method : methods) {
    std::vector<TrialResult> results(pair_count);
    std::vector<SuccessTrial> grid_trials;
    std::vector<RegistrationReport> reports(pair_count);

    parallel_for(pair_count, [&](std::size_t i) {
      reports[i] = run_method(method, pairs[i].p, pairs[i].q, cfg);
    });

    for (std::size_t i = 0; i < pair_count; ++i) {
      const std::size_t c = i / static_cast<std::size_t>(opt.trials);
      results[i].errors = transform_errors(reports[i].estimate, pairs[i].gt);
      results[i].converged = reports[i].converged;
      table << (i % static_cast<std::size_t>(opt.trials)) << '\t' << method << '\t'
            << cells[c].rot_deg << '\t' << cells[c].trans_frac << '\t'
            << (results[i].converged ? 1 : 0) << '\t'
            << results[i].errors.rot_err_deg.x() << '\t'
            << results[i].errors.rot_err_deg.y() << '\t'
            << results[i].errors.rot_err_deg.z() << '\t'
            << results[i].errors.trans_err.x() << '\t'
            << results[i].errors.trans_err.y() << '\t'
            << results[i].errors.trans_err.z() << '\t'
            << results[i].errors.chordal_deg << '\t' << results[i].errors.mte
            << '\n';
      if (spec.sweeps()) {
        grid_trials.push_back({cells[c].rot_deg, cells[c].trans_frac, pairs[i].p,
                               pairs[i].gt, reports[i].estimate});
      }
    }

    std::vector<PairErrors> errors;
    errors.reserve(pair_count);
    for (const auto& r : results) errors.push_back(r.errors);
    write_metric_report(summary, aggregate(errors), method + ".");

    if (spec.sweeps()) {
      const SuccessGrid grid = success_grid(grid_trials, spec.success_threshold);
      std::ostringstream gout;
      gout.precision(17);
      gout << "rot_deg";
      for (double t : grid.translation_fracs) gout << '\t' << t;
      gout << '\n';
      for (std::size_t r = 0; r < grid.rotations_deg.size(); ++r) {
        gout << grid.rotations_deg[r];
        for (Eigen::Index ci = 0; ci < grid.cells.cols(); ++ci) {
          gout << '\t' << grid.cells(static_cast<Eigen::Index>(r), ci);
        }
        gout << '\n';
      }
      fs::path grid_path(opt.out_table);
      grid_path.replace_extension(".grid." + method + ".tsv");
      atomic_write_text(grid_path.string(), gout.str());
      std::cout << "success grid (" << method << ") -> " << grid_path.string()
                << "\n";
    }
  }

  atomic_write_text(opt.out_table, table.str());
  std::cout << summary.str();
  return kExitOk;
}

struct DatagenOptions {
  std::string source;
  std::string spec_path;
  std::string out_dir;
  int pairs = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_datagen(const DatagenOptions& opt) {
  ExperimentSpec spec = read_experiment_spec(opt.spec_path);
  if (opt.seed_set) spec.seed = opt.seed;
  if (opt.pairs < 1) fail(Errc::InvalidArgument, "pairs must be positive");
  const PointCloud source = read_cloud(opt.source);
  fs::create_directories(opt.out_dir);

  for (int i = 0; i < opt.pairs; ++i) {
    ExperimentSpec one = spec;
    one.seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
    const RegistrationPair pair = make_pair(source, one);
    char name[32];
    std::snprintf(name, sizeof(name), "pair_%04d", i);
    const fs::path base = fs::path(opt.out_dir) / name;
    write_cloud(pair.p, base.string() + "_p.xyz", CloudFormat::Xyz);
    write_cloud(pair.q, base.string() + "_q.xyz", CloudFormat::Xyz);
    write_transform(pair.gt, base.string() + "_gt.txt");
  }
  std::cout << "wrote " << opt.pairs << " pair(s) to " << opt.out_dir << "\n";
  return kExitOk;
}

struct EvalOptions {
  std::string gt;
  std::string est;
  std::string out_report;
  std::string out_table;
};

int cmd_eval(const EvalOptions& opt) {
  std::vector<std::string> labels;
  std::vector<PairErrors> errors;

  if (fs::is_directory(opt.gt)) {
    if (!fs::is_directory(opt.est)) {
      fail(Errc::IoError, "--gt is a directory but --est is not");
    }
    std::vector<fs::path> gt_files;
    for (const auto& entry : fs::directory_iterator(opt.gt)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        gt_files.push_back(entry.path());
      }
    }
    std::sort(gt_files.begin(), gt_files.end());
    if (gt_files.empty()) fail(Errc::IoError, "no transform files in " + opt.gt);
    for (const auto& gt_file : gt_files) {
      const fs::path est_file = fs::path(opt.est) / gt_file.filename();
      if (!fs::exists(est_file)) {
        fail(Errc::IoError, "missing estimate for " + gt_file.filename().string());
      }
      labels.push_back(gt_file.filename().string());
      errors.push_back(
          transform_errors(read_transform(est_file.string()),
                           read_transform(gt_file.string())));
    }
  } else {
    labels.push_back("pair");
    errors.push_back(transform_errors(read_transform(opt.est),
                                      read_transform(opt.gt)));
  }

  const MetricSummary summary = aggregate(errors);
  std::ostringstream report;
  write_metric_report(report, summary);
  std::cout << report.str();
  if (!opt.out_report.empty()) atomic_write_text(opt.out_report, report.str());
  if (!opt.out_table.empty()) {
    std::ostringstream table;
    write_pair_table(table, labels, errors);
    atomic_write_text(opt.out_table, table.str());
  }
  return kExitOk;
}

struct DumpOptions {
  std::string source;
  std::string target;
  std::string embedding = "identity";
  double xi = 0.4;
  double temperature = 1.0;
  std::string out_dir;
};

int cmd_bbs_dump(const DumpOptions& opt) {
  const PointCloud p = read_cloud(opt.source);
  const PointCloud q = read_cloud(opt.target);
  const SoftMatch sm =
      match_pass(p, q, parse_embedding(opt.embedding), opt.xi, opt.temperature);
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  write_matrix(sm.b_tilde, (dir / "b_tilde.txt").string());
  write_matrix(sm.pi_tilde, (dir / "pi_tilde.txt").string());
  write_matrix(sm.gamma, (dir / "gamma.txt").string());
  write_cloud(sm.q_hat, (dir / "q_hat.xyz").string(), CloudFormat::Xyz);
  std::ostringstream meta;
  meta.precision(17);
  meta << "alpha = " << sm.alpha << "\n";
  meta << "temperature = " << sm.temperature << "\n";
  meta << "rows = " << sm.b_tilde.rows() << "\n";
  meta << "cols = " << sm.b_tilde.cols() << "\n";
  atomic_write_text((dir / "meta.txt").string(), meta.str());
  std::cout << "alpha = " << sm.alpha << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best-buddies point-cloud registration toolkit"};
  app.require_subcommand(1);

  RegisterOptions reg;
  CLI::App* reg_cmd = app.add_subcommand("register", "Align two point clouds");
  reg_cmd->add_option("--source", reg.source, "Moving cloud file")->required();
  reg_cmd->add_option("--target", reg.target, "Fixed cloud file")->required();
  reg_cmd->add_option("--method", reg.method,
                      "deepbbs|deepbbs-pp|icp|spatial-only");
  reg_cmd->add_option("--embedding", reg.embedding, "identity|local:k");
  reg_cmd->add_option("--xi", reg.xi, "alpha scale factor");
  reg_cmd->add_option("--t0", reg.t0, "initial temperature");
  reg_cmd->add_option("--t-decay", reg.t_decay, "temperature decay per iteration");
  reg_cmd->add_option("--conv-deg", reg.conv_deg, "rotation-step convergence threshold");
  reg_cmd->add_option("--max-iters", reg.max_iters, "iteration cap per stage");
  reg_cmd->add_option("--out-transform", reg.out_transform, "estimated transform file");
  reg_cmd->add_option("--out-report", reg.out_report, "human-readable run report");
  reg_cmd->add_option("--seed", reg.seed, "recorded in the report");

  BenchmarkOptions bench;
  CLI::App* bench_cmd =
      app.add_subcommand("benchmark", "Generate pairs and score methods");
  bench_cmd->add_option("--dataset-dir", bench.dataset_dir, "directory of cloud files")
      ->required();
  bench_cmd->add_option("--spec", bench.spec_path, "experiment spec file")->required();
  bench_cmd->add_option("--methods", bench.methods, "methods to run")
      ->delimiter(',');
  bench_cmd->add_option("--trials", bench.trials, "trials per configuration");
  bench_cmd->add_option("--out-table", bench.out_table, "per-pair TSV output")
      ->required();

  DatagenOptions gen;
  CLI::App* gen_cmd = app.add_subcommand("datagen", "Write synthetic pairs");
  gen_cmd->add_option("--source", gen.source, "source cloud file")->required();
  gen_cmd->add_option("--spec", gen.spec_path, "experiment spec file")->required();
  gen_cmd->add_option("--out-dir", gen.out_dir, "output directory")->required();
  gen_cmd->add_option("--pairs", gen.pairs, "number of pairs");
  gen_cmd->add_option("--seed", gen.seed, "override the spec seed")
      ->each([&](const std::string&) { gen.seed_set = true; });

  EvalOptions ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Re-score stored transforms");
  eval_cmd->add_option("--gt", ev.gt, "ground-truth transform file or directory")
      ->required();
  eval_cmd->add_option("--est", ev.est, "estimated transform file or directory")
      ->required();
  eval_cmd->add_option("--out-report", ev.out_report, "key=value metric report");
  eval_cmd->add_option("--out-table", ev.out_table, "per-pair TSV output");

  DumpOptions dump;
  CLI::App* dump_cmd =
      app.add_subcommand("bbs-dump", "Write matching matrices for one pair");
  dump_cmd->add_option("--source", dump.source, "P cloud file")->required();
  dump_cmd->add_option("--target", dump.target, "Q cloud file")->required();
  dump_cmd->add_option("--embedding", dump.embedding, "identity|local:k");
  dump_cmd->add_option("--xi", dump.xi, "alpha scale factor");
  dump_cmd->add_option("--temperature", dump.temperature, "gamma temperature");
  dump_cmd->add_option("--out-dir", dump.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (reg_cmd->parsed()) return cmd_register(reg);
    if (bench_cmd->parsed()) return cmd_benchmark(bench);
    if (gen_cmd->parsed()) return cmd_datagen(gen);
    if (eval_cmd->parsed()) return cmd_eval(ev);
    if (dump_cmd->parsed()) return cmd_bbs_dump(dump);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
