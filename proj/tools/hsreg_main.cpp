// Command-line interface: simulate / fit / replicate / coverage /
// multisplit / preprocess. Exit codes: 0 success, 2 I/O failure,
// 3 configuration error, 4 numeric failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsreg/csv.hpp"
#include "hsreg/experiment.hpp"
#include "hsreg/gibbs.hpp"
#include "hsreg/inference.hpp"
#include "hsreg/model.hpp"
#include "hsreg/simulate.hpp"
#include "hsreg/version.hpp"

namespace fs = std::filesystem;
using namespace hsreg;

namespace {

// Flat key=value config file; values behave as if typed right after the
// subcommand, so explicit command-line flags override them.
std::vector<std::string> splice_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
    } else {
      continue;
    }
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    std::vector<std::string> spliced;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw config_error("config line is not key=value: " + line);
      }
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      if (value == "true") {
        spliced.push_back("--" + key);
      } else {
        spliced.push_back("--" + key + "=" + value);
      }
    }
    args.insert(args.begin() + i, spliced.begin(), spliced.end());
    break;
  }
  return args;
}

struct CommonOpts {
  std::string method = "rbhs";
  std::uint64_t seed = 1;
  std::size_t iters = 10000;
  std::size_t burnin = 0;  // 0 -> iters/2
  std::size_t thin = 1;
  double level = 0.95;
  unsigned threads = 0;  // 0 -> HS_THREADS or hardware
  std::string out_dir = "out";
  double sigma2_beta0 = 100.0, e = 1.0, f = 1.0, c = 1.0, d = 1.0;
};

struct DesignOpts {
  std::size_t n = 100, p = 200;
  std::string corr = "ar1";
  double rho = 0.5;
  int error_kind = 1;
  bool heteroscedastic = false;
  std::string scheme = "selection";
  std::size_t signals = 15;
  bool random_positions = false;
  bool mixture_sd = false;
  double intercept = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t replicate_id = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  auto take_last = [](CLI::Option* opt) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };
  take_last(cmd->add_option("--method", o.method, "one of rbhs, rbhs+, rbrhs, bhs, bhs+, brhs"));
  take_last(cmd->add_option("--seed", o.seed, "master RNG seed"));
  take_last(cmd->add_option("--iters", o.iters, "MCMC iterations"));
  take_last(cmd->add_option("--burnin", o.burnin, "burn-in sweeps (default iters/2)"));
  take_last(cmd->add_option("--thin", o.thin, "thinning interval"));
  take_last(cmd->add_option("--level", o.level, "credible level"));
  take_last(cmd->add_option("--threads", o.threads, "worker threads (default HS_THREADS or hardware)"));
  take_last(cmd->add_option("--out", o.out_dir, "output directory"));
  take_last(cmd->add_option("--sigma2-beta0", o.sigma2_beta0, "intercept prior variance"));
  take_last(cmd->add_option("--hyper-e", o.e, "tau/sigma2 prior shape"));
  take_last(cmd->add_option("--hyper-f", o.f, "tau/sigma2 prior rate-or-scale"));
  take_last(cmd->add_option("--hyper-c", o.c, "b2 prior shape numerator"));
  take_last(cmd->add_option("--hyper-d", o.d, "b2 prior scale numerator"));
}

void add_design(CLI::App* cmd, DesignOpts& o) {
  auto take_last = [](CLI::Option* opt) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  };
  take_last(cmd->add_option("--n", o.n, "sample size"));
  take_last(cmd->add_option("--p", o.p, "number of predictors"));
  take_last(cmd->add_option("--corr", o.corr, "ar1 or banded"));
  take_last(cmd->add_option("--rho", o.rho, "correlation parameter"));
  take_last(cmd->add_option("--error", o.error_kind, "error law 1..5"));
  cmd->add_flag("--heteroscedastic", o.heteroscedastic, "scale errors by (1 + x_i2)");
  take_last(cmd->add_option("--scheme", o.scheme, "selection or inference"));
  take_last(cmd->add_option("--signals", o.signals, "nonzero count for the selection scheme"));
  cmd->add_flag("--random-positions", o.random_positions, "place signals at random positions");
  cmd->add_flag("--mixture-sd", o.mixture_sd, "read the contaminated component's 3 as an sd");
  take_last(cmd->add_option("--intercept", o.intercept, "override the scheme's intercept"));
  take_last(cmd->add_option("--replicate-id", o.replicate_id, "replicate index for dataset generation"));
}

SamplerSpec make_spec(const CommonOpts& o) {
  const MethodName m = method_from_string(o.method);
  SamplerSpec spec;
  spec.likelihood = m.likelihood;
  spec.prior = m.prior;
  spec.n_iter = o.iters;
  spec.burn_in = o.burnin == 0 ? o.iters / 2 : o.burnin;
  spec.thin = o.thin;
  spec.seed = o.seed;
  spec.hyper.sigma2_beta0 = o.sigma2_beta0;
  spec.hyper.e = o.e;
  spec.hyper.f = o.f;
  spec.hyper.c = o.c;
  spec.hyper.d = o.d;
  spec.validate();
  if (!(o.level > 0.0) || !(o.level < 1.0)) {
    throw config_error("level must lie in (0, 1)");
  }
  return spec;
}

SimDesign make_design(const DesignOpts& o) {
  SimDesign d;
  d.n = o.n;
  d.p = o.p;
  if (o.corr == "ar1") d.corr = CorrKind::AR1;
  else if (o.corr == "banded") d.corr = CorrKind::Banded;
  else throw config_error("corr must be ar1 or banded");
  d.rho = o.rho;
  d.error_kind = o.error_kind;
  d.heteroscedastic = o.heteroscedastic;
  if (o.scheme == "selection") d.scheme = CoeffScheme::Selection15;
  else if (o.scheme == "inference") d.scheme = CoeffScheme::Inference3;
  else throw config_error("scheme must be selection or inference");
  d.num_nonzero = o.signals;
  d.random_positions = o.random_positions;
  d.mixture_scale = o.mixture_sd ? MixtureScale::StdDev : MixtureScale::Variance;
  if (!std::isnan(o.intercept)) d.intercept = o.intercept;
  d.replicate_id = o.replicate_id;
  d.validate();
  return d;
}

std::map<std::string, std::string> manifest_common(const CommonOpts& o,
                                                   const SamplerSpec& spec) {
  return {
      {"method", o.method},
      {"seed", std::to_string(o.seed)},
      {"iters", std::to_string(spec.n_iter)},
      {"burnin", std::to_string(spec.burn_in)},
      {"thin", std::to_string(spec.thin)},
      {"level", format_double(o.level)},
  };
}

fs::path ensure_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory: " + out_dir);
  return dir;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_simulate(const CommonOpts& common, const DesignOpts& design_opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const SimDesign design = make_design(design_opts);
  const SimulatedData sim = gen_dataset(design, common.seed);
  const fs::path dir = ensure_out_dir(common.out_dir);

  write_dataset_csv((dir / "dataset.csv").string(), sim.data);
  std::ofstream truth(dir / "truth.csv");
  if (!truth) throw io_error("cannot write truth file");
  truth << "term,value,nonzero\n";
  truth << "intercept," << format_double(sim.truth.beta0) << ",\n";
  for (std::size_t j = 0; j < design.p; ++j) {
    truth << "x" << (j + 1) << ',' << format_double(sim.truth.beta[j]) << ','
          << (sim.truth.nonzero[j] ? 1 : 0) << "\n";
  }

  write_manifest((dir / "manifest.txt").string(), "simulate",
                 {{"seed", std::to_string(common.seed)},
                  {"n", std::to_string(design.n)},
                  {"p", std::to_string(design.p)},
                  {"error", std::to_string(design.error_kind)},
                  {"replicate_id", std::to_string(design.replicate_id)}},
                 std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int cmd_fit(const CommonOpts& common, const DesignOpts& design_opts,
            const std::string& data_path, std::size_t chains, bool save_draws,
            bool standardize) {
  const auto t0 = std::chrono::steady_clock::now();
  const SamplerSpec spec = make_spec(common);
  const Dataset data = data_path.empty()
                           ? gen_dataset(make_design(design_opts), common.seed).data
                           : read_dataset_csv(data_path);
  FitOptions opts;
  opts.chains = chains;
  opts.level = common.level;
  opts.standardize_x = standardize;
  opts.threads = resolve_threads(common.threads);
  const FitResult fit = fit_dataset(spec, data, opts);
  const fs::path dir = ensure_out_dir(common.out_dir);

  std::ofstream summary(dir / "summary.csv");
  if (!summary) throw io_error("cannot write summary file");
  summary << "term,median,lo,hi,selected";
  if (chains >= 2) summary << ",psrf";
  summary << "\n";
  summary << "intercept," << format_double(fit.beta0_median) << ",,,";
  if (chains >= 2) summary << ",";
  summary << "\n";
  for (std::size_t j = 0; j < data.p(); ++j) {
    summary << "x" << (j + 1) << ',' << format_double(fit.beta_median[j]) << ','
            << format_double(fit.intervals[j].lo) << ','
            << format_double(fit.intervals[j].hi) << ','
            << (fit.selected[j] ? 1 : 0);
    if (chains >= 2) summary << ',' << format_double(fit.psrf_beta[j]);
    summary << "\n";
  }
  summary.close();

  if (save_draws) {
    std::ofstream draws(dir / "draws.csv");
    if (!draws) throw io_error("cannot write draws file");
    draws << "beta0";
    for (std::size_t j = 0; j < data.p(); ++j) draws << ",x" << (j + 1);
    draws << "\n";
    for (std::size_t i = 0; i < fit.pooled.m(); ++i) {
      draws << format_double(fit.pooled.beta0[i]);
      for (std::size_t j = 0; j < data.p(); ++j) {
        draws << ',' << format_double(fit.pooled.beta(i, j));
      }
      draws << "\n";
    }
  }

  auto manifest = manifest_common(common, spec);
  manifest["data"] = data_path.empty() ? "<simulated>" : data_path;
  manifest["chains"] = std::to_string(chains);
  manifest["n"] = std::to_string(data.n());
  manifest["p"] = std::to_string(data.p());
  write_manifest((dir / "manifest.txt").string(), "fit", manifest,
                 std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int cmd_replicate(const CommonOpts& common, const DesignOpts& design_opts,
                  std::size_t replicates) {
  const auto t0 = std::chrono::steady_clock::now();
  const SamplerSpec spec = make_spec(common);
  const SimDesign design = make_design(design_opts);
  const ReplicateSummary summary = run_replicates(
      spec, design, replicates, common.level, resolve_threads(common.threads));
  const fs::path dir = ensure_out_dir(common.out_dir);

  std::ofstream metrics(dir / "metrics.csv");
  if (!metrics) throw io_error("cannot write metrics file");
  metrics << "replicate,tp,fp,fn,tn,f1,mcc,l1\n";
  for (const auto& row : summary.rows) {
    metrics << row.replicate << ',' << row.tp << ',' << row.fp << ',' << row.fn
            << ',' << row.tn << ',' << format_double(row.f1) << ','
            << format_double(row.mcc) << ',' << format_double(row.l1) << "\n";
  }
  metrics << "mean," << format_double(summary.means[0]) << ','
          << format_double(summary.means[1]) << ",,,"
          << format_double(summary.means[2]) << ','
          << format_double(summary.means[3]) << ','
          << format_double(summary.means[4]) << "\n";
  metrics << "sd," << format_double(summary.sds[0]) << ','
          << format_double(summary.sds[1]) << ",,,"
          << format_double(summary.sds[2]) << ','
          << format_double(summary.sds[3]) << ','
          << format_double(summary.sds[4]) << "\n";
  metrics.close();

  auto manifest = manifest_common(common, spec);
  manifest["replicates"] = std::to_string(replicates);
  manifest["n"] = std::to_string(design.n);
  manifest["p"] = std::to_string(design.p);
  manifest["error"] = std::to_string(design.error_kind);
  write_manifest((dir / "manifest.txt").string(), "replicate", manifest,
                 std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int cmd_coverage(const CommonOpts& common, const DesignOpts& design_opts,
                 std::size_t replicates) {
  const auto t0 = std::chrono::steady_clock::now();
  const SamplerSpec spec = make_spec(common);
  DesignOpts forced = design_opts;
  forced.scheme = "inference";
  const SimDesign design = make_design(forced);
  const CoverageSummary summary = run_coverage(
      spec, design, replicates, common.level, resolve_threads(common.threads));
  const fs::path dir = ensure_out_dir(common.out_dir);

  std::ofstream cov(dir / "coverage.csv");
  if (!cov) throw io_error("cannot write coverage file");
  cov << "block,term,coverage,avg_length\n";
  for (std::size_t j = 0; j < summary.nonzero_coverage.size(); ++j) {
    cov << "nonzero,beta" << (j + 1) << ','
        << format_double(summary.nonzero_coverage[j]) << ','
        << format_double(summary.nonzero_length[j]) << "\n";
  }
  cov << "zero,pooled," << format_double(summary.zero_coverage) << ','
      << format_double(summary.zero_length_pooled) << "\n";
  cov << "zero,percoef_mean,," << format_double(summary.zero_length_percoef)
      << "\n";
  cov.close();

  auto manifest = manifest_common(common, spec);
  manifest["replicates"] = std::to_string(replicates);
  manifest["n"] = std::to_string(design.n);
  manifest["p"] = std::to_string(design.p);
  manifest["error"] = std::to_string(design.error_kind);
  write_manifest((dir / "manifest.txt").string(), "coverage", manifest,
                 std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int cmd_multisplit(const CommonOpts& common, const std::string& data_path,
                   std::size_t train_count, std::size_t n_splits,
                   bool standardize) {
  const auto t0 = std::chrono::steady_clock::now();
  const SamplerSpec spec = make_spec(common);
  const Dataset data = read_dataset_csv(data_path);
  const MultisplitSummary summary =
      run_multisplit(spec, data, train_count, n_splits, common.level,
                     resolve_threads(common.threads), standardize);
  const fs::path dir = ensure_out_dir(common.out_dir);

  std::ofstream splits(dir / "splits.csv");
  if (!splits) throw io_error("cannot write splits file");
  splits << "split,model_size,mad\n";
  for (const auto& row : summary.rows) {
    splits << row.split << ',' << row.model_size << ','
           << format_double(row.mad_value) << "\n";
  }
  splits << "mean," << format_double(summary.size_mean) << ','
         << format_double(summary.mad_mean) << "\n";
  splits << "sd," << format_double(summary.size_sd) << ','
         << format_double(summary.mad_sd) << "\n";
  splits.close();

  auto manifest = manifest_common(common, spec);
  manifest["data"] = data_path;
  manifest["train"] = std::to_string(train_count);
  manifest["splits"] = std::to_string(n_splits);
  write_manifest((dir / "manifest.txt").string(), "multisplit", manifest,
                 std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count());
  return 0;
}

int cmd_preprocess(const std::string& matrix_path, const std::string& out_dir,
                   const PreprocessOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  const FeatureMatrix fm = read_feature_matrix_csv(matrix_path);
  const PreprocessResult result = preprocess_matrix(fm, opts);
  const fs::path dir = ensure_out_dir(out_dir);

  write_feature_matrix_csv((dir / "filtered.csv").string(), result.filtered);
  std::ofstream stages(dir / "stages.csv");
  if (!stages) throw io_error("cannot write stages file");
  stages << "stage,features\n";
  stages << "input," << result.input_count << "\n";
  stages << "max_percentile," << result.after_max_filter << "\n";
  stages << "min_range," << result.after_range_filter << "\n";
  stages << "top_cv," << result.after_top_k << "\n";
  stages.close();

  write_manifest((dir / "manifest.txt").string(), "preprocess",
                 {{"matrix", matrix_path},
                  {"percentile", format_double(opts.max_percentile)},
                  {"min_range", format_double(opts.min_range)},
                  {"top_k", std::to_string(opts.top_k)}},
                 std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs samplers for robust and non-robust Bayesian regression "
               "with the horseshoe family of priors"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOpts common;
  DesignOpts design;

  auto* sim = app.add_subcommand("simulate", "export a synthetic dataset");
  add_common(sim, common);
  add_design(sim, design);

  auto* fit = app.add_subcommand("fit", "fit one dataset");
  std::string data_path;
  std::size_t chains = 1;
  bool save_draws = false;
  bool standardize = false;
  add_common(fit, common);
  add_design(fit, design);
  fit->add_option("--data", data_path,
                  "dataset CSV (first column y); omit to fit a simulated design")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fit->add_option("--chains", chains, "parallel chains pooled for inference")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  fit->add_flag("--save-draws", save_draws, "also write retained draws");
  fit->add_flag("--standardize", standardize, "standardize predictor columns");

  auto* rep = app.add_subcommand("replicate", "selection metrics over replicates");
  std::size_t replicates = 100;
  add_common(rep, common);
  add_design(rep, design);
  rep->add_option("--replicates", replicates, "replicate count")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* cov = app.add_subcommand("coverage", "coverage study (inference scheme)");
  add_common(cov, common);
  add_design(cov, design);
  cov->add_option("--replicates", replicates, "replicate count")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* ms = app.add_subcommand("multisplit", "multi-split prediction study");
  std::size_t train_count = 80, n_splits = 50;
  add_common(ms, common);
  ms->add_option("--data", data_path, "dataset CSV")->required();
  ms->add_option("--train", train_count, "training rows per split")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  ms->add_option("--splits", n_splits, "number of random splits")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  ms->add_flag("--standardize", standardize, "standardize predictor columns");

  auto* pre = app.add_subcommand("preprocess", "filter an expression matrix");
  std::string matrix_path, pre_out = "out";
  PreprocessOptions pre_opts;
  pre->add_option("--matrix", matrix_path, "feature-by-sample CSV")->required();
  pre->add_option("--out", pre_out, "output directory")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  pre->add_option("--percentile", pre_opts.max_percentile, "max-expression percentile filter")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  pre->add_option("--min-range", pre_opts.min_range, "minimum expression range")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  pre->add_option("--top-k", pre_opts.top_k, "features kept after CV ranking")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  try {
    const std::vector<std::string> args = splice_config_args(argc, argv);
    // CLI11 parses reversed argv
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (sim->parsed()) return cmd_simulate(common, design);
    if (fit->parsed()) return cmd_fit(common, design, data_path, chains, save_draws, standardize);
    if (rep->parsed()) return cmd_replicate(common, design, replicates);
    if (cov->parsed()) return cmd_coverage(common, design, replicates);
    if (ms->parsed()) return cmd_multisplit(common, data_path, train_count, n_splits, standardize);
    if (pre->parsed()) return cmd_preprocess(matrix_path, pre_out, pre_opts);
    std::cerr << "no subcommand given\n";
    return 3;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const numeric_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
