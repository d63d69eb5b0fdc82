#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qgsf/qgaussian.hpp"
#include "qgsf/rng.hpp"

namespace qgsf {

/// One cost observation taken at theta + beta * eta.
struct GradientSampleOne {
  const Perturbation& eta;
  double cost;
};

/// Paired observations at theta + beta * eta and theta - beta * eta.
struct GradientSampleTwo {
  const Perturbation& eta;
  double cost_plus;
  double cost_minus;
};

/// 2 eta h / (beta (N+2-Nq) rho(eta)). At q == 1 this is eta h / beta.
std::vector<double> sf_term_one(const GradientSampleOne& sample, const QKernel& kernel);

/// eta (h+ - h-) / (beta (N+2-Nq) rho(eta)). At q == 1 this is eta (h+ - h-) / (2 beta).
std::vector<double> sf_term_two(const GradientSampleTwo& sample, const QKernel& kernel);

using Objective = std::function<double(std::span<const double>)>;

/// Monte-Carlo estimate of E[f(theta - beta eta)].
double smoothed_value(const Objective& f, std::span<const double> theta, const QKernel& kernel,
                      std::size_t n_samples, RngStream& stream);

/// Sample mean and standard error per coordinate of a vector-valued estimator.
struct MonteCarloEstimate {
  std::vector<double> mean;
  std::vector<double> std_error;
};

/// Average of sf_term_one with cost f(theta + beta eta).
MonteCarloEstimate smoothed_gradient_mc(const Objective& f, std::span<const double> theta,
                                        const QKernel& kernel, std::size_t n_samples,
                                        RngStream& stream);

/// Average of sf_term_two with costs f(theta +/- beta eta).
MonteCarloEstimate smoothed_gradient_two_mc(const Objective& f, std::span<const double> theta,
                                            const QKernel& kernel, std::size_t n_samples,
                                            RngStream& stream);

}  // namespace qgsf
