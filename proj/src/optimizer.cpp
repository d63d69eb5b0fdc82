#include "qgsf/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qgsf/smoothing.hpp"

namespace qgsf {

BoxConstraint::BoxConstraint(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.empty() || lower_.size() != upper_.size())
    throw std::invalid_argument("BoxConstraint: bounds must be non-empty and of equal length");
  for (std::size_t i = 0; i < lower_.size(); ++i)
    if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i]))
      throw std::invalid_argument("BoxConstraint: need finite lower < upper in every coordinate");
}

BoxConstraint BoxConstraint::uniform(std::size_t dim, double lower, double upper) {
  return BoxConstraint(std::vector<double>(dim, lower), std::vector<double>(dim, upper));
}

bool BoxConstraint::contains(std::span<const double> x) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
  return true;
}

std::vector<double> project(std::span<const double> x, const BoxConstraint& box) {
  if (x.size() != box.dim()) throw std::invalid_argument("project: dimension mismatch");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = std::clamp(x[i], box.lower()[i], box.upper()[i]);
  return out;
}

StepSchedule::StepSchedule(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.5 && gamma < 1.0))
    throw std::invalid_argument("StepSchedule: gamma must lie strictly inside (0.5, 1)");
}

StepSizes step_sizes(const StepSchedule& schedule, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("step_sizes: schedule is indexed from n = 1");
  const double nd = static_cast<double>(n);
  return {1.0 / nd, std::pow(nd, -schedule.gamma())};
}

RunError::RunError(const std::string& what, std::uint64_t n, std::uint64_t m, std::uint64_t seed,
                   std::uint64_t stream_id)
    : std::runtime_error(what + " (outer n=" + std::to_string(n) + ", inner m=" +
                         std::to_string(m) + ", seed=" + std::to_string(seed) +
                         ", stream=" + std::to_string(stream_id) + ")"),
      n_(n), m_(m), seed_(seed), stream_id_(stream_id) {}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("euclidean_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

namespace {

enum class Variant { OneSided, TwoSided };

void validate(const QKernel& kernel, const BoxConstraint& box, LoopSettings loop,
              std::span<const double> theta0, const RunOptions& options) {
  if (kernel.dim() != box.dim() || theta0.size() != box.dim())
    throw std::invalid_argument("optimizer: kernel, box and theta0 dimensions must agree");
  if (loop.outer_iterations == 0 || loop.inner_iterations == 0)
    throw std::invalid_argument("optimizer: M and L must be at least 1");
  if (!box.contains(theta0)) throw std::invalid_argument("optimizer: theta0 must lie in the box");
  if (options.target && options.target->size() != box.dim())
    throw std::invalid_argument("optimizer: target dimension mismatch");
}

double distance_or_nan(std::span<const double> theta, const RunOptions& options) {
  return options.target ? euclidean_distance(theta, *options.target)
                        : std::numeric_limits<double>::quiet_NaN();
}

RunResult run_two_timescale(Variant variant, Simulator& sim_plus, Simulator* sim_minus,
                            const QKernel& kernel, const BoxConstraint& box,
                            const StepSchedule& schedule, LoopSettings loop,
                            std::span<const double> theta0, RngStream& stream,
                            const RunOptions& options) {
  validate(kernel, box, loop, theta0, options);
  const auto started = std::chrono::steady_clock::now();
  const std::size_t dim = kernel.dim();

  TwoTimescaleState state;
  state.theta.assign(theta0.begin(), theta0.end());
  state.z.assign(dim, 0.0);

  RunResult result;
  result.seed = stream.seed();
  result.stream_id = stream.stream_id();
  const bool record = options.trajectory_stride > 0;
  if (record) result.trajectory.push_back({0, state.theta, distance_or_nan(state.theta, options)});

  std::vector<double> shifted(dim);
  std::vector<double> control_plus, control_minus;
  for (std::uint64_t n = 0; n < loop.outer_iterations; ++n) {
    state.outer_index = n;
    const Perturbation eta = sample_standard(kernel.q(), dim, stream);
    const StepSizes steps = step_sizes(schedule, n + 1);

    for (std::size_t i = 0; i < dim; ++i) shifted[i] = state.theta[i] + kernel.beta() * eta.eta[i];
    control_plus = project(shifted, box);
    if (variant == Variant::TwoSided) {
      for (std::size_t i = 0; i < dim; ++i)
        shifted[i] = state.theta[i] - kernel.beta() * eta.eta[i];
      control_minus = project(shifted, box);
    }

    // theta(n+1) is driven by Z(nL), the value entering this outer iteration.
    const std::vector<double> z_entering = state.z;
    for (std::uint64_t m = 0; m < loop.inner_iterations; ++m) {
      state.inner_index = m;
      std::vector<double> term;
      try {
        const double h_plus = sim_plus.step(control_plus);
        if (variant == Variant::OneSided) {
          term = sf_term_one({eta, h_plus}, kernel);
        } else {
          const double h_minus = sim_minus->step(control_minus);
          term = sf_term_two({eta, h_plus, h_minus}, kernel);
        }
      } catch (const RunError&) {
        throw;
      } catch (const std::exception& e) {
        throw RunError(std::string("simulation step failed: ") + e.what(), n, m, result.seed,
                       result.stream_id);
      }
      for (std::size_t i = 0; i < dim; ++i) {
        state.z[i] = (1.0 - steps.b) * state.z[i] + steps.b * term[i];
        if (!(std::abs(state.z[i]) <= options.divergence_limit))
          throw DivergenceError("gradient estimate Z diverged", n, m, result.seed,
                                result.stream_id);
      }
    }

    for (std::size_t i = 0; i < dim; ++i) shifted[i] = state.theta[i] - steps.a * z_entering[i];
    state.theta = project(shifted, box);

    if (options.on_outer_step) options.on_outer_step(state);
    if (record && ((n + 1) % options.trajectory_stride == 0 || n + 1 == loop.outer_iterations))
      result.trajectory.push_back({n + 1, state.theta, distance_or_nan(state.theta, options)});
  }

  result.theta_final = state.theta;
  if (options.target) result.distance = euclidean_distance(state.theta, *options.target);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace

RunResult run_gqsf1(Simulator& sim, const QKernel& kernel, const BoxConstraint& box,
                    const StepSchedule& schedule, LoopSettings loop,
                    std::span<const double> theta0, RngStream& stream,
                    const RunOptions& options) {
  return run_two_timescale(Variant::OneSided, sim, nullptr, kernel, box, schedule, loop, theta0,
                           stream, options);
}

RunResult run_gqsf2(Simulator& sim_plus, Simulator& sim_minus, const QKernel& kernel,
                    const BoxConstraint& box, const StepSchedule& schedule, LoopSettings loop,
                    std::span<const double> theta0, RngStream& stream,
                    const RunOptions& options) {
  return run_two_timescale(Variant::TwoSided, sim_plus, &sim_minus, kernel, box, schedule, loop,
                           theta0, stream, options);
}

}  // namespace qgsf
