#ifndef LQFT_FIELD_HPP
#define LQFT_FIELD_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lqft/geometry.hpp"
#include "lqft/linalg.hpp"
#include "lqft/mc.hpp"

namespace lqft {

// Average of ln g over the circle of radius eps around z.
double circle_average_log_metric(PlanePoint z, double eps);

// Double angular average of -ln|a - b| over two circles.
double circle_pair_log_average(PlanePoint z, double eps_z, PlanePoint w, double eps_w);

// Covariance of eps-circle averages of the field at z and w.
double cov_circle_avg(PlanePoint z, PlanePoint w, double eps);
double cov_circle_avg(PlanePoint z, double eps_z, PlanePoint w, double eps_w);

Eigen::MatrixXd circle_average_covariance(std::span<const PlanePoint> points, std::span<const double> radii);

struct FieldSample {
  std::vector<PlanePoint> points;
  std::vector<double> radii;
  double eps = 0.0;  // common radius, or 0 when radii differ
  std::vector<double> values;
  std::uint64_t seed = 0;
};

// Joint sampler of circle averages at a fixed point set.
class CircleAverageSampler {
 public:
  CircleAverageSampler(std::vector<PlanePoint> points, std::vector<double> radii);

  std::size_t size() const { return points_.size(); }
  const std::vector<PlanePoint>& points() const { return points_; }
  const std::vector<double>& radii() const { return radii_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const GaussianFactor& factor() const { return factor_; }

  std::vector<double> draw(CounterRng& rng) const;
  FieldSample sample(std::uint64_t seed) const;

 private:
  std::vector<PlanePoint> points_;
  std::vector<double> radii_;
  Eigen::MatrixXd covariance_;
  GaussianFactor factor_;
};

FieldSample sample_field_eps(std::span<const PlanePoint> points, double eps, std::uint64_t seed);

// Covariance of the lateral field at e^{-s+i theta} and e^{-s'+i theta'}.
double lateral_covariance(double s, double theta, double s2, double theta2);

// Same kernel as a function of the offsets u = s - s', v = theta - theta'.
// Its angular Fourier series is sum_{m >= 1} e^{-m|u|} cos(m v) / m.
double lateral_kernel(double u, double v);

// The series truncated after `modes` terms: the covariance of the sampled lateral field.
double truncated_lateral_kernel(double u, double v, std::size_t modes);

struct RadialLateralConfig {
  double ds = 1.0 / 32.0;
  std::size_t n_theta = 32;
};

// Lateral nodes sit on rows of height row_step = steps_per_row * ds. The field is
// band-limited to angular modes 1..n_theta/2.
struct LateralGrid {
  double ds = 0.0;
  std::size_t steps_per_row = 1;
  std::size_t n_theta = 0;
  double row_step = 0.0;
  double theta_step = 0.0;
  std::size_t modes = 0;
};

struct RadialLateralSample {
  double ds = 0.0;
  double horizon = 0.0;
  std::vector<double> x;         // x at s_j = j ds, j = 0..N
  std::vector<double> step_max;  // exact sup of the Brownian bridge on [s_j, s_{j+1}]
  LateralGrid grid;
  std::size_t rows = 0;
  std::vector<double> y;  // rows x n_theta, row-major
  double lateral_variance = 0.0;
  std::uint64_t seed = 0;

  std::size_t steps() const { return x.size() - 1; }
  double time(std::size_t j) const { return static_cast<double>(j) * ds; }
  std::size_t row_of_step(std::size_t j) const { return j / grid.steps_per_row; }
  double y_at(std::size_t row, std::size_t c) const { return y[row * grid.n_theta + c]; }
};

class RadialLateralSampler {
 public:
  explicit RadialLateralSampler(RadialLateralConfig config = {});

  const RadialLateralConfig& config() const { return config_; }
  const LateralGrid& grid() const { return grid_; }
  double lateral_variance() const { return variance_; }

  // Model covariance of lateral nodes (row, c) and (row2, c2).
  double node_covariance(std::size_t row, std::size_t c, std::size_t row2, std::size_t c2) const;

  std::size_t steps_for(double horizon) const;
  std::size_t rows_for(double horizon) const;

  // Brownian path with x_0 ~ N(0, ln2 - 1/2) unless start is given.
  void draw_radial(double horizon, CounterRng& rng, std::vector<double>& x, std::vector<double>& step_max,
                   std::optional<double> start = std::nullopt) const;
  // Row 0 sits on the unit circle. initial_modes, if given, fixes the row-0 coefficients
  // (cos, sin) of modes 1..modes interleaved; the Nyquist sine entry is ignored.
  void draw_lateral(std::size_t rows, CounterRng& rng, std::vector<double>& y,
                    std::span<const double> initial_modes = {}) const;

  RadialLateralSample draw(double horizon, CounterRng& x_rng, CounterRng& y_rng,
                           std::optional<double> start = std::nullopt,
                           std::span<const double> initial_modes = {}) const;

 private:
  RadialLateralConfig config_;
  LateralGrid grid_;
  double variance_ = 0.0;
  // Each angular mode is an Ornstein-Uhlenbeck process in s with rate m, so rows
  // are generated by an exact AR(1) recursion on the mode coefficients.
  std::vector<double> basis_;
  std::vector<double> decay_;
  std::vector<double> innovation_sd_;
};

RadialLateralSample sample_radial_lateral(double S, double ds, std::size_t n_theta, std::uint64_t seed);

// Sup of a Brownian bridge from a to b over a step of length dt, from u in (0, 1].
inline double bridge_max(double a, double b, double dt, double u) {
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(d * d - 2.0 * dt * std::log(u)));
}

}  // namespace lqft

#endif
