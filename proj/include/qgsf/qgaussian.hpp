#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qgsf/rng.hpp"

namespace qgsf {

/// Smallest distance kept from the upper limit 1 + 2/N of the q range.
inline constexpr double kQBoundaryGuard = 1e-9;

/// 1 + 2/N, the supremum of admissible q in dimension N.
double q_upper_limit(std::size_t dim);

/// Throws std::domain_error unless q < 1 + 2/N - kQBoundaryGuard and dim >= 1.
void check_q_domain(double q, std::size_t dim);

/**
 * The multivariate q-Gaussian used as a smoothing kernel: zero q-mean,
 * q-covariance beta^2 I in dimension N. q == 1 selects the ordinary Gaussian.
 */
class QKernel {
public:
  QKernel(double q, double beta, std::size_t dim);

  double q() const noexcept { return q_; }
  double beta() const noexcept { return beta_; }
  std::size_t dim() const noexcept { return dim_; }
  bool is_gaussian() const noexcept { return q_ == 1.0; }

  /// N + 2 - N q; positive on the whole admissible range.
  double shape_factor() const noexcept;

private:
  double q_;
  double beta_;
  std::size_t dim_;
};

/// K_{q,N}; for q == 1 the Gaussian constant (2 pi)^{N/2}.
double normalizing_constant(double q, std::size_t dim);
double log_normalizing_constant(double q, std::size_t dim);

/// G_{q, beta^2 I}(x), zero outside the support when q < 1.
double density(std::span<const double> x, const QKernel& kernel);

/// rho(eta) = 1 - (1-q)/(N+2-Nq) * |eta|^2; exactly 1 when q == 1.
double rho(std::span<const double> eta, double q, std::size_t dim);

/// Strict membership in the support: the open ellipsoid for q < 1, all of R^N otherwise.
bool support_contains(std::span<const double> x, const QKernel& kernel);

/// A standard (unit q-variance) q-Gaussian draw with its rho factor.
struct Perturbation {
  std::vector<double> eta;
  double rho = 1.0;
};

/// Chi-squared mixture sampler for the standard N-variate q-Gaussian.
/// At q == 1 it returns N standard normals and consumes no chi-squared draw.
Perturbation sample_standard(double q, std::size_t dim, RngStream& stream);

/// mean + beta * Y with Y a standard draw.
std::vector<double> sample(const QKernel& kernel, std::span<const double> mean,
                           RngStream& stream);

/// Selects E[ prod_i X_i^{powers[i]} / rho(X)^{rho_power} ].
struct MomentSpec {
  unsigned rho_power = 0;
  std::vector<unsigned> powers;
};

/// Thrown when the requested moment is infinite for the given (q, N).
class MomentDoesNotExist : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

bool moment_exists(const MomentSpec& spec, double q, std::size_t dim);

/// Closed-form moment of a standard q-Gaussian vector. Odd powers give 0;
/// q == 1 gives the product of independent Gaussian moments.
double analytic_moment(const MomentSpec& spec, double q, std::size_t dim);

}  // namespace qgsf
