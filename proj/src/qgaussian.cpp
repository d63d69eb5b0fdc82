#include "qgsf/qgaussian.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qgsf {

namespace {

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

double shape_factor(double q, std::size_t dim) {
  const double n = static_cast<double>(dim);
  return n + 2.0 - n * q;
}

}  // namespace

double q_upper_limit(std::size_t dim) { return 1.0 + 2.0 / static_cast<double>(dim); }

void check_q_domain(double q, std::size_t dim) {
  if (dim == 0) throw std::domain_error("q-Gaussian: dimension must be at least 1");
  if (!std::isfinite(q) || !(q < q_upper_limit(dim) - kQBoundaryGuard))
    throw std::domain_error("q-Gaussian: q = " + std::to_string(q) +
                            " is outside (-inf, 1 + 2/N) for N = " + std::to_string(dim));
}

QKernel::QKernel(double q, double beta, std::size_t dim) : q_(q), beta_(beta), dim_(dim) {
  check_q_domain(q, dim);
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("QKernel: beta must be positive and finite");
}

double QKernel::shape_factor() const noexcept { return qgsf::shape_factor(q_, dim_); }

double log_normalizing_constant(double q, std::size_t dim) {
  check_q_domain(q, dim);
  const double n = static_cast<double>(dim);
  const double half_n = 0.5 * n;
  if (q == 1.0) return half_n * std::log(2.0 * std::numbers::pi);
  const double c = shape_factor(q, dim);
  const double log_pi_term = half_n * std::log(std::numbers::pi);
  if (q < 1.0) {
    const double s = (2.0 - q) / (1.0 - q);
    return half_n * std::log(c / (1.0 - q)) + log_pi_term + std::lgamma(s) -
           std::lgamma(s + half_n);
  }
  const double s = 1.0 / (q - 1.0);
  return half_n * std::log(c / (q - 1.0)) + log_pi_term + std::lgamma(s - half_n) -
         std::lgamma(s);
}

double normalizing_constant(double q, std::size_t dim) {
  return std::exp(log_normalizing_constant(q, dim));
}

double density(std::span<const double> x, const QKernel& kernel) {
  if (x.size() != kernel.dim()) throw std::invalid_argument("density: dimension mismatch");
  const double q = kernel.q();
  const double n = static_cast<double>(kernel.dim());
  const double beta = kernel.beta();
  const double r2 = squared_norm(x) / (beta * beta);
  const double log_scale = log_normalizing_constant(q, kernel.dim()) + n * std::log(beta);
  if (q == 1.0) return std::exp(-0.5 * r2 - log_scale);
  const double base = 1.0 - (1.0 - q) / kernel.shape_factor() * r2;
  if (base <= 0.0) return 0.0;
  return std::exp(std::log(base) / (1.0 - q) - log_scale);
}

double rho(std::span<const double> eta, double q, std::size_t dim) {
  if (eta.size() != dim) throw std::invalid_argument("rho: dimension mismatch");
  if (q == 1.0) return 1.0;
  return 1.0 - (1.0 - q) / shape_factor(q, dim) * squared_norm(eta);
}

bool support_contains(std::span<const double> x, const QKernel& kernel) {
  if (x.size() != kernel.dim())
    throw std::invalid_argument("support_contains: dimension mismatch");
  if (kernel.q() >= 1.0) return true;
  const double beta = kernel.beta();
  return squared_norm(x) / (beta * beta) < kernel.shape_factor() / (1.0 - kernel.q());
}

Perturbation sample_standard(double q, std::size_t dim, RngStream& stream) {
  check_q_domain(q, dim);
  Perturbation p;
  p.eta.resize(dim);
  if (q == 1.0) {
    for (double& z : p.eta) z = stream.standard_normal();
    p.rho = 1.0;
    return p;
  }
  const double c = shape_factor(q, dim);
  for (;;) {
    for (double& z : p.eta) z = stream.standard_normal();
    const double zz = squared_norm(p.eta);
    double scale;
    if (q < 1.0) {
      const double a = stream.chi_squared(2.0 * (2.0 - q) / (1.0 - q));
      scale = std::sqrt(c / (1.0 - q)) / std::sqrt(a + zz);
    } else {
      const double a = stream.chi_squared(c / (q - 1.0));
      // a can underflow to 0 for the tiny degrees of freedom near q = 1 + 2/N.
      if (!(a > 0.0) || !std::isnormal(a)) continue;
      scale = std::sqrt(c / (q - 1.0)) / std::sqrt(a);
    }
    for (double& z : p.eta) z *= scale;
    p.rho = rho(p.eta, q, dim);
    // Rounding can put a q < 1 draw on the support boundary (rho == 0).
    if (p.rho > 0.0 && std::isfinite(p.rho)) return p;
  }
}

std::vector<double> sample(const QKernel& kernel, std::span<const double> mean,
                           RngStream& stream) {
  if (mean.size() != kernel.dim()) throw std::invalid_argument("sample: dimension mismatch");
  Perturbation p = sample_standard(kernel.q(), kernel.dim(), stream);
  for (std::size_t i = 0; i < p.eta.size(); ++i) p.eta[i] = mean[i] + kernel.beta() * p.eta[i];
  return std::move(p.eta);
}

bool moment_exists(const MomentSpec& spec, double q, std::size_t dim) {
  check_q_domain(q, dim);
  if (q == 1.0) return true;
  // Both conditions are strict; the margin keeps rounding in 1/(1-q) from
  // admitting a moment sitting exactly on the boundary.
  constexpr double kMargin = 1e-12;
  const double b = spec.rho_power;
  if (q < 1.0) return 1.0 + 1.0 / (1.0 - q) - b > kMargin;
  double half_sum = 0.0;
  for (unsigned bi : spec.powers) half_sum += 0.5 * bi;
  return 1.0 / (q - 1.0) - 0.5 * static_cast<double>(dim) - (half_sum - b) > kMargin;
}

double analytic_moment(const MomentSpec& spec, double q, std::size_t dim) {
  check_q_domain(q, dim);
  if (spec.powers.size() != dim)
    throw std::invalid_argument("analytic_moment: powers must have one entry per dimension");
  if (!moment_exists(spec, q, dim))
    throw MomentDoesNotExist("analytic_moment: moment is infinite for q = " + std::to_string(q) +
                             ", N = " + std::to_string(dim));
  for (unsigned bi : spec.powers)
    if (bi % 2 != 0) return 0.0;

  // log prod_i b_i! / (2^{b_i} (b_i/2)!) = log prod_i (b_i - 1)!! / 2^{b_i/2}
  double log_double_factorials = 0.0;
  double half_sum = 0.0;
  for (unsigned bi : spec.powers) {
    const double v = bi;
    log_double_factorials +=
        std::lgamma(v + 1.0) - v * std::numbers::ln2 - std::lgamma(0.5 * v + 1.0);
    half_sum += 0.5 * v;
  }
  if (q == 1.0) return std::exp(log_double_factorials + half_sum * std::numbers::ln2);

  const double half_n = 0.5 * static_cast<double>(dim);
  const double b = spec.rho_power;
  double log_kbar;
  if (q < 1.0) {
    const double s = 1.0 / (1.0 - q);
    log_kbar = std::lgamma(s - b + 1.0) + std::lgamma(s + 1.0 + half_n) - std::lgamma(s + 1.0) -
               std::lgamma(s - b + 1.0 + half_n + half_sum);
  } else {
    const double s = 1.0 / (q - 1.0);
    log_kbar = std::lgamma(s) + std::lgamma(s + b - half_n - half_sum) - std::lgamma(s + b) -
               std::lgamma(s - half_n);
  }
  const double log_ratio = std::log(shape_factor(q, dim) / std::abs(1.0 - q));
  return std::exp(log_kbar + half_sum * log_ratio + log_double_factorials);
}

}  // namespace qgsf
