#ifndef LQFT_LINALG_HPP
#define LQFT_LINALG_HPP

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "lqft/mc.hpp"

namespace lqft {

struct JitterPolicy {
  double initial = 1e-12;
  double factor = 10.0;
  double maximum = 1e-10;
};

// Lower Cholesky factor of a covariance matrix. Diagonal jitter is tried only after
// an unjittered factorization fails.
class GaussianFactor {
 public:
  GaussianFactor() = default;
  explicit GaussianFactor(const Eigen::MatrixXd& covariance, JitterPolicy policy = {});

  std::size_t size() const { return static_cast<std::size_t>(lower_.rows()); }
  const Eigen::MatrixXd& lower() const { return lower_; }
  double jitter() const { return jitter_; }

  // out = L z with z standard normal.
  void draw(CounterRng& rng, std::span<double> out) const;

  // Draw conditional on the first coordinate being `leading`.
  void draw_given_leading(double leading, CounterRng& rng, std::span<double> out) const;

  void apply(std::span<const double> z, std::span<double> out) const;

 private:
  Eigen::MatrixXd lower_;
  double jitter_ = 0.0;
};

// 1-based index of the first non-positive pivot of an unblocked Cholesky, 0 if none.
std::size_t first_failing_minor(const Eigen::MatrixXd& a);

}  // namespace lqft

#endif
