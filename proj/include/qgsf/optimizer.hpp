#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgsf/qgaussian.hpp"
#include "qgsf/rng.hpp"

namespace qgsf {

/// The compact feasible box C = prod_i [lower_i, upper_i].
class BoxConstraint {
public:
  BoxConstraint(std::vector<double> lower, std::vector<double> upper);

  /// [lower, upper]^dim
  static BoxConstraint uniform(std::size_t dim, double lower, double upper);

  std::size_t dim() const noexcept { return lower_.size(); }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  bool contains(std::span<const double> x) const;

private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

/// Component-wise clamp onto the box.
std::vector<double> project(std::span<const double> x, const BoxConstraint& box);

struct StepSizes {
  double a;  // slow (parameter) step
  double b;  // fast (gradient-average) step
};

/// a(n) = 1/n, b(n) = 1/n^gamma with gamma in (0.5, 1), indexed from n = 1.
class StepSchedule {
public:
  explicit StepSchedule(double gamma);
  double gamma() const noexcept { return gamma_; }

private:
  double gamma_;
};

/// Throws std::invalid_argument for n == 0.
StepSizes step_sizes(const StepSchedule& schedule, std::uint64_t n);

/**
 * A simulated system driven by a control parameter.
 *
 * step() advances the underlying process by one observation under the given
 * parameter and returns the single-stage cost h(Y) >= 0. Internal state
 * persists across calls; the optimizer never resets it.
 */
class Simulator {
public:
  virtual ~Simulator() = default;
  virtual double step(std::span<const double> control) = 0;
};

/// Slow iterate theta(n) and fast iterate Z as seen after an outer iteration.
struct TwoTimescaleState {
  std::vector<double> theta;
  std::vector<double> z;
  std::uint64_t outer_index = 0;
  std::uint64_t inner_index = 0;
};

struct TrajectoryPoint {
  std::uint64_t n;
  std::vector<double> theta;
  double distance;  // NaN without a target
};

struct RunResult {
  std::vector<double> theta_final;
  std::optional<double> distance;
  std::vector<TrajectoryPoint> trajectory;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

struct RunOptions {
  /// theta-bar; enables RunResult::distance and trajectory distances.
  std::optional<std::vector<double>> target;
  /// Record theta(n) every `trajectory_stride` outer iterations (0 = off).
  std::uint64_t trajectory_stride = 0;
  double divergence_limit = 1e12;
  /// Called with theta(n+1) and Z((n+1)L) after every outer iteration.
  std::function<void(const TwoTimescaleState&)> on_outer_step;
};

struct LoopSettings {
  std::uint64_t outer_iterations;  // M
  std::uint64_t inner_iterations;  // L
};

/// Failure inside an optimization run, tagged with where it happened.
class RunError : public std::runtime_error {
public:
  RunError(const std::string& what, std::uint64_t n, std::uint64_t m, std::uint64_t seed,
           std::uint64_t stream_id);
  std::uint64_t outer_index() const noexcept { return n_; }
  std::uint64_t inner_index() const noexcept { return m_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
  std::uint64_t n_, m_, seed_, stream_id_;
};

/// |Z_i| exceeded RunOptions::divergence_limit.
class DivergenceError : public RunError {
public:
  using RunError::RunError;
};

/// One-simulation q-Gaussian SF two-timescale gradient descent.
RunResult run_gqsf1(Simulator& sim, const QKernel& kernel, const BoxConstraint& box,
                    const StepSchedule& schedule, LoopSettings loop,
                    std::span<const double> theta0, RngStream& stream,
                    const RunOptions& options = {});

/// Two-simulation variant driving `sim_plus` at theta + beta eta and
/// `sim_minus` at theta - beta eta.
RunResult run_gqsf2(Simulator& sim_plus, Simulator& sim_minus, const QKernel& kernel,
                    const BoxConstraint& box, const StepSchedule& schedule, LoopSettings loop,
                    std::span<const double> theta0, RngStream& stream,
                    const RunOptions& options = {});

double euclidean_distance(std::span<const double> a, std::span<const double> b);

}  // namespace qgsf
