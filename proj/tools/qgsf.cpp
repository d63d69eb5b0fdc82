// qgsf: command-line driver for the q-Gaussian SF optimizers.
//
//   qgsf run <config.json> [--workers N] [--seed S] [--output FILE] [--timing] [--table]
//   qgsf single --q Q --beta B --gamma G --algo gqsf2 --preset two_node --seed S
//   qgsf sample --q Q --dim N --count C [--seed S]
//   qgsf moments --q Q --dim N [--draws D] [--seed S]
//
// Exit codes: 0 success, 2 configuration error, 3 some cell or run diverged.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qgsf/bench.hpp"
#include "qgsf/qgaussian.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitDiverged = 3;

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

int cmd_run(const std::string& path, std::optional<std::size_t> workers,
            std::optional<std::uint64_t> seed, const std::string& output, bool timing,
            bool table) {
  qgsf::ExperimentConfig cfg = qgsf::load_experiment_config(path);
  if (workers) cfg.workers = *workers;
  if (seed) cfg.base_seed = *seed;
  cfg.validate();
  const auto results = qgsf::run_experiment(cfg);

  if (output.empty()) {
    qgsf::emit_csv(results, std::cout, {timing});
  } else {
    std::ofstream out(output);
    if (!out) throw qgsf::ConfigError("cannot open output file '" + output + "'");
    qgsf::emit_csv(results, out, {timing});
  }
  if (table || !output.empty()) qgsf::emit_table(results, output.empty() ? std::cerr : std::cout);

  for (const auto& c : results)
    if (c.failures > 0) return kExitDiverged;
  return 0;
}

int cmd_single(double q, double beta, double gamma, const std::string& algo,
               const std::string& preset, std::uint64_t seed, std::uint64_t M, std::uint64_t L,
               std::uint64_t stride, bool crn) {
  qgsf::ExperimentConfig cfg;
  auto sys = qgsf::preset_by_name(preset);
  if (!sys) throw qgsf::ConfigError("unknown preset '" + preset + "'");
  cfg.system = *sys;
  cfg.algorithms = {qgsf::parse_algorithm(algo)};
  cfg.q_grid = {{q, ""}};
  cfg.beta_grid = {beta};
  cfg.gamma = gamma;
  cfg.M = M;
  cfg.L = L;
  cfg.replications = 1;
  cfg.base_seed = seed;
  cfg.common_random_numbers = crn;
  cfg.validate();

  qgsf::RunOptions options;
  options.trajectory_stride = stride;
  qgsf::RunResult r;
  try {
    r = qgsf::run_replication(cfg, cfg.algorithms.front(), q, beta,
                              qgsf::replication_stream(seed, 0, 0), options);
  } catch (const qgsf::RunError& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kExitDiverged;
  }
  std::cout << "distance," << fmt(*r.distance) << '\n';
  std::cout << "n";
  for (std::size_t i = 0; i < r.theta_final.size(); ++i) std::cout << ",theta" << i + 1;
  std::cout << ",distance\n";
  for (const auto& point : r.trajectory) {
    std::cout << point.n;
    for (double v : point.theta) std::cout << ',' << fmt(v);
    std::cout << ',' << fmt(point.distance) << '\n';
  }
  return 0;
}

int cmd_sample(double q, std::size_t dim, std::uint64_t count, std::uint64_t seed) {
  qgsf::RngStream stream(seed, qgsf::derive_stream_id({seed, 0x5A3D1E}));
  for (std::size_t i = 0; i < dim; ++i) std::cout << (i ? "," : "") << "eta" << i + 1;
  std::cout << ",rho\n";
  for (std::uint64_t k = 0; k < count; ++k) {
    const qgsf::Perturbation p = qgsf::sample_standard(q, dim, stream);
    for (std::size_t i = 0; i < dim; ++i) std::cout << (i ? "," : "") << fmt(p.eta[i], "%.17g");
    std::cout << ',' << fmt(p.rho, "%.17g") << '\n';
  }
  return 0;
}

int cmd_moments(double q, std::size_t dim, std::uint64_t draws, std::uint64_t seed) {
  qgsf::RngStream stream(seed, qgsf::derive_stream_id({seed, 0x303E47}));
  const auto rows = qgsf::moment_verification_grid(q, dim, draws, stream);
  std::cout << "rho_power,powers,analytic,mc_mean,mc_std_error,z\n";
  for (const auto& r : rows) {
    std::string powers;
    for (unsigned p : r.spec.powers) powers += (powers.empty() ? "" : " ") + std::to_string(p);
    std::cout << r.spec.rho_power << ',' << powers << ',';
    if (r.exists) {
      std::cout << fmt(r.analytic) << ',' << fmt(r.mc_mean) << ',' << fmt(r.mc_std_error) << ','
                << fmt(r.mc_std_error > 0 ? (r.mc_mean - r.analytic) / r.mc_std_error : 0.0,
                       "%.3f")
                << '\n';
    } else {
      std::cout << "does-not-exist," << fmt(r.mc_mean) << ',' << fmt(r.mc_std_error) << ",\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-Gaussian smoothed-functional optimization toolkit"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment grid from a JSON config");
  std::string config_path, output;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> run_seed;
  bool timing = false, table = false;
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--workers", workers, "Concurrent replications");
  run->add_option("--seed", run_seed, "Override base_seed");
  run->add_option("--output", output, "Write CSV here instead of stdout");
  run->add_flag("--timing", timing, "Fill the seconds column with wall time");
  run->add_flag("--table", table, "Also print the mean±std table");

  auto* single = app.add_subcommand("single", "One optimization run with trajectory output");
  double q = 0.8, beta = 0.005, gamma = 0.75;
  std::string algo = "gqsf2", preset = "two_node";
  std::uint64_t seed = 1, M = 10000, L = 100, stride = 100;
  bool crn = false;
  single->add_option("--q", q, "q parameter")->capture_default_str();
  single->add_option("--beta", beta, "Smoothing scale")->capture_default_str();
  single->add_option("--gamma", gamma, "Fast step exponent")->capture_default_str();
  single->add_option("--algo", algo, "gqsf1 or gqsf2")->capture_default_str();
  single->add_option("--preset", preset, "two_node or four_node")->capture_default_str();
  single->add_option("--seed", seed, "Seed")->capture_default_str();
  single->add_option("--M", M, "Outer iterations")->capture_default_str();
  single->add_option("--L", L, "Inner iterations")->capture_default_str();
  single->add_option("--stride", stride, "Trajectory sampling stride")->capture_default_str();
  single->add_flag("--crn", crn, "Common random numbers for the two Gq-SF2 simulations");

  auto* sample = app.add_subcommand("sample", "Dump standard q-Gaussian draws as CSV");
  std::size_t dim = 1;
  std::uint64_t count = 1000;
  sample->add_option("--q", q, "q parameter")->required();
  sample->add_option("--dim", dim, "Dimension")->required();
  sample->add_option("--count", count, "Number of draws")->capture_default_str();
  sample->add_option("--seed", seed, "Seed")->capture_default_str();

  auto* moments = app.add_subcommand("moments", "Analytic vs Monte-Carlo moment grid");
  std::uint64_t draws = 1000000;
  moments->add_option("--q", q, "q parameter")->required();
  moments->add_option("--dim", dim, "Dimension")->required();
  moments->add_option("--draws", draws, "Monte-Carlo draws")->capture_default_str();
  moments->add_option("--seed", seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, workers, run_seed, output, timing, table);
    if (*single) return cmd_single(q, beta, gamma, algo, preset, seed, M, L, stride, crn);
    if (*sample) return cmd_sample(q, dim, count, seed);
    if (*moments) return cmd_moments(q, dim, draws, seed);
  } catch (const qgsf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return 0;
}
