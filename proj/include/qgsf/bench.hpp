#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgsf/optimizer.hpp"
#include "qgsf/queueing.hpp"

namespace qgsf {

enum class Algorithm { GqSF1, GqSF2 };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& name);  // "gqsf1" / "gqsf2"

/// A grid value of q. `alias` keeps the symbolic name ("gaussian", "cauchy")
/// when the value came from one.
struct QValue {
  double value;
  std::string alias;
};

/// q = 1 + 2/(N+1), the multivariate Cauchy member of the family.
double cauchy_q(std::size_t dim);

/// Bad experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::vector<Algorithm> algorithms{Algorithm::GqSF2};
  std::vector<QValue> q_grid;
  std::vector<double> beta_grid;
  double gamma = 0.75;
  std::uint64_t M = 10000;
  std::uint64_t L = 100;
  std::uint64_t replications = 20;
  std::uint64_t base_seed = 0;
  SystemPreset system = preset_two_node();
  /// Drive both Gq-SF2 simulations from the same random streams.
  bool common_random_numbers = false;
  std::size_t workers = 1;

  /// Throws ConfigError when any value violates a module constraint.
  void validate() const;
  std::size_t cell_count() const noexcept;
};

/// Parse the JSON config schema. Throws ConfigError.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct CellResult {
  Algorithm algorithm;
  QValue q;
  double beta;
  double gamma;
  std::uint64_t M;
  std::uint64_t L;
  std::uint64_t replications;
  std::vector<double> distances;  // completed runs, by replication index
  std::size_t failures = 0;
  double mean_distance = 0.0;
  double std_distance = 0.0;  // sample standard deviation
  double seconds = 0.0;
};

/// The stream of replication r of cell i: (base_seed, derive_stream_id({base_seed, i, r})).
RngStream replication_stream(std::uint64_t base_seed, std::size_t cell, std::uint64_t replication);

/// One optimization run of the configured system. Throws RunError on failure.
RunResult run_replication(const ExperimentConfig& config, Algorithm algorithm, double q,
                          double beta, const RngStream& stream, const RunOptions& options = {});

/// All cells in grid order (algorithm, then q, then beta).
std::vector<CellResult> run_experiment(const ExperimentConfig& config);

struct CsvOptions {
  /// When false the seconds column is written as 0 so output is byte-reproducible.
  bool include_timing = false;
};

void emit_csv(const std::vector<CellResult>& results, std::ostream& out,
              const CsvOptions& options = {});

/// q rows by beta columns of "mean±std", one block per (algorithm, gamma).
void emit_table(const std::vector<CellResult>& results, std::ostream& out);

/// One line of the analytic-moment check printed by `qgsf moments`.
struct MomentCheck {
  MomentSpec spec;
  bool exists;
  double analytic;
  double mc_mean;
  double mc_std_error;
};

std::vector<MomentCheck> moment_verification_grid(double q, std::size_t dim, std::size_t draws,
                                                  RngStream& stream);

}  // namespace qgsf
