#include "lqft/linalg.hpp"

#include <cmath>
#include <string>

#include "lqft/errors.hpp"

namespace lqft {

std::size_t first_failing_minor(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return static_cast<std::size_t>(j + 1);
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return 0;
}

GaussianFactor::GaussianFactor(const Eigen::MatrixXd& covariance, JitterPolicy policy) {
  if (covariance.rows() != covariance.cols()) throw DomainError("GaussianFactor: covariance must be square");
  const Eigen::Index n = covariance.rows();
  double jitter = 0.0;
  Eigen::MatrixXd work;
  for (;;) {
    work = covariance;
    work.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(work);
    if (llt.info() == Eigen::Success) {
      lower_ = llt.matrixL();
      jitter_ = jitter;
      return;
    }
    if (jitter >= policy.maximum * (1.0 - 1e-9)) break;
    jitter = (jitter == 0.0) ? policy.initial : std::min(policy.maximum, jitter * policy.factor);
  }
  std::size_t minor = first_failing_minor(work);
  if (minor == 0) minor = static_cast<std::size_t>(n);
  throw FactorizationError("covariance factorization failed after jitter " + std::to_string(jitter) +
                               ": leading minor of order " + std::to_string(minor) + " is not positive",
                           minor);
}

void GaussianFactor::apply(std::span<const double> z, std::span<double> out) const {
  const Eigen::Index n = lower_.rows();
  Eigen::Map<const Eigen::VectorXd> zv(z.data(), n);
  Eigen::Map<Eigen::VectorXd> ov(out.data(), n);
  ov.noalias() = lower_.triangularView<Eigen::Lower>() * zv;
}

void GaussianFactor::draw(CounterRng& rng, std::span<double> out) const {
  Eigen::VectorXd z(lower_.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  apply({z.data(), static_cast<std::size_t>(z.size())}, out);
}

void GaussianFactor::draw_given_leading(double leading, CounterRng& rng, std::span<double> out) const {
  Eigen::VectorXd z(lower_.rows());
  z[0] = leading / lower_(0, 0);
  for (Eigen::Index i = 1; i < z.size(); ++i) z[i] = rng.normal();
  apply({z.data(), static_cast<std::size_t>(z.size())}, out);
}

}  // namespace lqft
