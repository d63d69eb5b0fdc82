#include "qgsf/smoothing.hpp"

#include <cmath>
#include <stdexcept>

namespace qgsf {

namespace {

void check_perturbation(const Perturbation& eta, const QKernel& kernel) {
  if (eta.eta.size() != kernel.dim())
    throw std::invalid_argument("smoothing: perturbation dimension does not match kernel");
  if (!(eta.rho > 0.0))
    throw std::logic_error("smoothing: rho(eta) <= 0, perturbation lies outside the support");
}

double prefactor(const Perturbation& eta, const QKernel& kernel) {
  return 1.0 / (kernel.beta() * kernel.shape_factor() * eta.rho);
}

// Welford accumulator over vectors.
class VectorMoments {
public:
  explicit VectorMoments(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> x) {
    ++count_;
    for (std::size_t i = 0; i < mean_.size(); ++i) {
      const double delta = x[i] - mean_[i];
      mean_[i] += delta / static_cast<double>(count_);
      m2_[i] += delta * (x[i] - mean_[i]);
    }
  }

  MonteCarloEstimate result() const {
    MonteCarloEstimate r{mean_, std::vector<double>(mean_.size(), 0.0)};
    if (count_ > 1) {
      const double n = static_cast<double>(count_);
      for (std::size_t i = 0; i < m2_.size(); ++i) r.std_error[i] = std::sqrt(m2_[i] / (n - 1) / n);
    }
    return r;
  }

private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace

std::vector<double> sf_term_one(const GradientSampleOne& sample, const QKernel& kernel) {
  check_perturbation(sample.eta, kernel);
  const double factor = 2.0 * sample.cost * prefactor(sample.eta, kernel);
  std::vector<double> term(sample.eta.eta);
  for (double& v : term) v *= factor;
  return term;
}

std::vector<double> sf_term_two(const GradientSampleTwo& sample, const QKernel& kernel) {
  check_perturbation(sample.eta, kernel);
  const double factor = (sample.cost_plus - sample.cost_minus) * prefactor(sample.eta, kernel);
  std::vector<double> term(sample.eta.eta);
  for (double& v : term) v *= factor;
  return term;
}

double smoothed_value(const Objective& f, std::span<const double> theta, const QKernel& kernel,
                      std::size_t n_samples, RngStream& stream) {
  if (theta.size() != kernel.dim()) throw std::invalid_argument("smoothed_value: dimension mismatch");
  if (n_samples == 0) throw std::invalid_argument("smoothed_value: n_samples must be positive");
  std::vector<double> point(theta.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Perturbation p = sample_standard(kernel.q(), kernel.dim(), stream);
    for (std::size_t i = 0; i < point.size(); ++i) point[i] = theta[i] - kernel.beta() * p.eta[i];
    mean += (f(point) - mean) / static_cast<double>(k + 1);
  }
  return mean;
}

MonteCarloEstimate smoothed_gradient_mc(const Objective& f, std::span<const double> theta,
                                        const QKernel& kernel, std::size_t n_samples,
                                        RngStream& stream) {
  if (theta.size() != kernel.dim())
    throw std::invalid_argument("smoothed_gradient_mc: dimension mismatch");
  VectorMoments acc(kernel.dim());
  std::vector<double> point(theta.size());
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Perturbation p = sample_standard(kernel.q(), kernel.dim(), stream);
    for (std::size_t i = 0; i < point.size(); ++i) point[i] = theta[i] + kernel.beta() * p.eta[i];
    acc.add(sf_term_one({p, f(point)}, kernel));
  }
  return acc.result();
}

MonteCarloEstimate smoothed_gradient_two_mc(const Objective& f, std::span<const double> theta,
                                            const QKernel& kernel, std::size_t n_samples,
                                            RngStream& stream) {
  if (theta.size() != kernel.dim())
    throw std::invalid_argument("smoothed_gradient_two_mc: dimension mismatch");
  VectorMoments acc(kernel.dim());
  std::vector<double> plus(theta.size());
  std::vector<double> minus(theta.size());
  for (std::size_t k = 0; k < n_samples; ++k) {
    const Perturbation p = sample_standard(kernel.q(), kernel.dim(), stream);
    for (std::size_t i = 0; i < plus.size(); ++i) {
      plus[i] = theta[i] + kernel.beta() * p.eta[i];
      minus[i] = theta[i] - kernel.beta() * p.eta[i];
    }
    acc.add(sf_term_two({p, f(plus), f(minus)}, kernel));
  }
  return acc.result();
}

}  // namespace qgsf
