#include "lqft/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lqft/errors.hpp"

namespace lqft {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Composite Gauss–Legendre on [a, b], panel count doubled until converged.
template <class F>
double converged_panels(F&& f, double a, double b, double tol) {
  const GaussRule& rule = gauss_legendre(16);
  auto panels = [&](std::size_t p) {
    const double h = (b - a) / static_cast<double>(p);
    double s = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
      const double lo = a + h * static_cast<double>(k);
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        s += rule.weights[i] * f(lo + 0.5 * h * (1.0 + rule.nodes[i]));
      }
    }
    return 0.5 * h * s;
  };
  std::size_t p = 4;
  double prev = panels(p);
  while (p < (std::size_t{1} << 14)) {
    p *= 2;
    const double next = panels(p);
    if (std::abs(next - prev) < tol) return next;
    prev = next;
  }
  return prev;
}

}  // namespace

double circle_average_log_metric(PlanePoint z, double eps) {
  if (!(eps > 0.0)) throw DomainError("circle average radius must be positive");
  auto term = [&](double t) { return log_metric_density(z + PlanePoint::polar(eps, t)); };
  std::size_t n = 64;
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += term(kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  double avg = sum / static_cast<double>(n);
  while (n < (std::size_t{1} << 16)) {
    double odd = 0.0;
    for (std::size_t k = 0; k < n; ++k) odd += term(kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
    sum += odd;
    n *= 2;
    const double next = sum / static_cast<double>(n);
    const bool done = std::abs(next - avg) < 1e-8;
    avg = next;
    if (done) break;
  }
  return avg;
}

double circle_pair_log_average(PlanePoint z, double eps_z, PlanePoint w, double eps_w) {
  if (!(eps_z > 0.0) || !(eps_w > 0.0)) throw DomainError("circle average radius must be positive");
  // Average over the larger circle first: by the mean-value property the average of
  // -ln|a - b| over a on a circle of radius E around c is -ln max(E, |c - b|).
  const double big = std::max(eps_z, eps_w);
  const double small = std::min(eps_z, eps_w);
  const double rho = distance(z, w);
  if (rho >= big + small) return -std::log(rho);
  if (rho + small <= big) return -std::log(big);

  const double c0 = std::clamp((rho * rho + small * small - big * big) / (2.0 * rho * small), -1.0, 1.0);
  const double phi = std::acos(c0);
  auto outside = [&](double t) { return -0.5 * std::log(rho * rho + small * small - 2.0 * rho * small * std::cos(t)); };
  const double arc = converged_panels(outside, phi, std::numbers::pi, 1e-11);
  return (2.0 * phi * -std::log(big) + 2.0 * arc) / kTwoPi;
}

double cov_circle_avg(PlanePoint z, double eps_z, PlanePoint w, double eps_w) {
  return circle_pair_log_average(z, eps_z, w, eps_w) -
         0.25 * (circle_average_log_metric(z, eps_z) + circle_average_log_metric(w, eps_w)) + kCircleConstant;
}

double cov_circle_avg(PlanePoint z, PlanePoint w, double eps) { return cov_circle_avg(z, eps, w, eps); }

Eigen::MatrixXd circle_average_covariance(std::span<const PlanePoint> points, std::span<const double> radii) {
  if (points.size() != radii.size()) throw DomainError("circle_average_covariance: one radius per point required");
  const std::size_t n = points.size();
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) smooth[i] = circle_average_log_metric(points[i], radii[i]);
  Eigen::MatrixXd c(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = circle_pair_log_average(points[i], radii[i], points[j], radii[j]) -
                       0.25 * (smooth[i] + smooth[j]) + kCircleConstant;
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

CircleAverageSampler::CircleAverageSampler(std::vector<PlanePoint> points, std::vector<double> radii)
    : points_(std::move(points)), radii_(std::move(radii)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (points_[i] == points_[j] && radii_[i] == radii_[j]) {
        throw DomainError("field points must be pairwise distinct");
      }
    }
  }
  covariance_ = circle_average_covariance(points_, radii_);
  factor_ = GaussianFactor(covariance_);
}

std::vector<double> CircleAverageSampler::draw(CounterRng& rng) const {
  std::vector<double> v(points_.size());
  factor_.draw(rng, v);
  return v;
}

FieldSample CircleAverageSampler::sample(std::uint64_t seed) const {
  FieldSample s;
  s.points = points_;
  s.radii = radii_;
  const bool uniform = std::all_of(radii_.begin(), radii_.end(), [&](double r) { return r == radii_.front(); });
  s.eps = (uniform && !radii_.empty()) ? radii_.front() : 0.0;
  CounterRng rng = SeedPlan{seed}.stream(0, 0);
  s.values = draw(rng);
  s.seed = seed;
  return s;
}

FieldSample sample_field_eps(std::span<const PlanePoint> points, double eps, std::uint64_t seed) {
  if (!(eps > 0.0)) throw DomainError("sample_field_eps: eps must be positive");
  CircleAverageSampler sampler(std::vector<PlanePoint>(points.begin(), points.end()),
                               std::vector<double>(points.size(), eps));
  return sampler.sample(seed);
}

double lateral_kernel(double u, double v) {
  const double au = std::abs(u);
  const double vv = std::remainder(v, kTwoPi);
  const double one_minus_q = -std::expm1(-au);
  const double s = std::sin(0.5 * vv);
  const double m = one_minus_q * one_minus_q + 4.0 * std::exp(-au) * s * s;
  if (!(m > 0.0)) throw DomainError("lateral_covariance: coincident points");
  return -0.5 * std::log(m);
}

double truncated_lateral_kernel(double u, double v, std::size_t modes) {
  const double q = std::exp(-std::abs(u));
  double qm = 1.0;
  double sum = 0.0;
  for (std::size_t m = 1; m <= modes; ++m) {
    qm *= q;
    const double md = static_cast<double>(m);
    sum += qm * std::cos(md * v) / md;
  }
  return sum;
}

double lateral_covariance(double s, double theta, double s2, double theta2) {
  return lateral_kernel(s - s2, theta - theta2);
}

RadialLateralSampler::RadialLateralSampler(RadialLateralConfig config) : config_(config) {
  if (!(config_.ds > 0.0)) throw DomainError("radial step ds must be positive");
  if (config_.n_theta < 4) throw DomainError("n_theta must be at least 4");
  grid_.ds = config_.ds;
  grid_.n_theta = config_.n_theta;
  grid_.theta_step = kTwoPi / static_cast<double>(config_.n_theta);
  grid_.steps_per_row = static_cast<std::size_t>(std::max(1.0, std::round(grid_.theta_step / config_.ds)));
  grid_.row_step = static_cast<double>(grid_.steps_per_row) * config_.ds;
  grid_.modes = config_.n_theta / 2;
  variance_ = 0.0;
  for (std::size_t m = 1; m <= grid_.modes; ++m) variance_ += 1.0 / static_cast<double>(m);

  const std::size_t nt = config_.n_theta;
  basis_.resize(nt * grid_.modes * 2);
  decay_.resize(grid_.modes);
  innovation_sd_.resize(grid_.modes);
  for (std::size_t m = 1; m <= grid_.modes; ++m) {
    const double md = static_cast<double>(m);
    decay_[m - 1] = std::exp(-md * grid_.row_step);
    innovation_sd_[m - 1] = std::sqrt(-std::expm1(-2.0 * md * grid_.row_step) / md);
    for (std::size_t c = 0; c < nt; ++c) {
      const double t = md * grid_.theta_step * static_cast<double>(c);
      basis_[(c * grid_.modes + (m - 1)) * 2] = std::cos(t);
      basis_[(c * grid_.modes + (m - 1)) * 2 + 1] = std::sin(t);
    }
  }
}

double RadialLateralSampler::node_covariance(std::size_t row, std::size_t c, std::size_t row2, std::size_t c2) const {
  const double u = (static_cast<double>(row) - static_cast<double>(row2)) * grid_.row_step;
  const double v = (static_cast<double>(c) - static_cast<double>(c2)) * grid_.theta_step;
  return truncated_lateral_kernel(u, v, grid_.modes);
}

std::size_t RadialLateralSampler::steps_for(double horizon) const {
  if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
  const double n = horizon / config_.ds;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, r)) throw DomainError("horizon / ds must be an integer");
  return static_cast<std::size_t>(r);
}

std::size_t RadialLateralSampler::rows_for(double horizon) const {
  const std::size_t n = steps_for(horizon);
  return (n + grid_.steps_per_row - 1) / grid_.steps_per_row;
}

void RadialLateralSampler::draw_radial(double horizon, CounterRng& rng, std::vector<double>& x,
                                       std::vector<double>& step_max, std::optional<double> start) const {
  const std::size_t n = steps_for(horizon);
  x.resize(n + 1);
  step_max.resize(n);
  x[0] = start ? *start : std::sqrt(kCircleConstant) * rng.normal();
  const double sd = std::sqrt(config_.ds);
  for (std::size_t j = 0; j < n; ++j) {
    x[j + 1] = x[j] + sd * rng.normal();
    step_max[j] = bridge_max(x[j], x[j + 1], config_.ds, uniform_open0(rng));
  }
}

void RadialLateralSampler::draw_lateral(std::size_t rows, CounterRng& rng, std::vector<double>& y,
                                        std::span<const double> initial_modes) const {
  const std::size_t nt = config_.n_theta;
  const std::size_t modes = grid_.modes;
  // Coefficients of cos(m theta) and sin(m theta); the sine of the Nyquist mode
  // vanishes on the nodes and is never drawn.
  std::vector<double> coef(2 * modes, 0.0);
  const bool nyquist = 2 * modes == nt;
  auto has_sine = [&](std::size_t m) { return !(nyquist && m == modes); };
  if (!initial_modes.empty()) {
    if (initial_modes.size() != 2 * modes) throw DomainError("initial_modes must hold 2 * modes coefficients");
    for (std::size_t m = 1; m <= modes; ++m) {
      coef[2 * (m - 1)] = initial_modes[2 * (m - 1)];
      if (has_sine(m)) coef[2 * (m - 1) + 1] = initial_modes[2 * (m - 1) + 1];
    }
  } else {
    for (std::size_t m = 1; m <= modes; ++m) {
      const double sd = 1.0 / std::sqrt(static_cast<double>(m));
      coef[2 * (m - 1)] = sd * rng.normal();
      if (has_sine(m)) coef[2 * (m - 1) + 1] = sd * rng.normal();
    }
  }
  y.assign(rows * nt, 0.0);
  for (std::size_t row = 0; row < rows; ++row) {
    if (row > 0) {
      for (std::size_t m = 1; m <= modes; ++m) {
        const double a = decay_[m - 1];
        const double b = innovation_sd_[m - 1];
        coef[2 * (m - 1)] = a * coef[2 * (m - 1)] + b * rng.normal();
        if (has_sine(m)) coef[2 * (m - 1) + 1] = a * coef[2 * (m - 1) + 1] + b * rng.normal();
      }
    }
    double* out = y.data() + row * nt;
    for (std::size_t c = 0; c < nt; ++c) {
      const double* basis = basis_.data() + c * modes * 2;
      double v = 0.0;
      for (std::size_t k = 0; k < 2 * modes; ++k) v += basis[k] * coef[k];
      out[c] = v;
    }
  }
}

RadialLateralSample RadialLateralSampler::draw(double horizon, CounterRng& x_rng, CounterRng& y_rng,
                                               std::optional<double> start,
                                               std::span<const double> initial_modes) const {
  RadialLateralSample s;
  s.ds = config_.ds;
  s.horizon = horizon;
  s.grid = grid_;
  s.lateral_variance = variance_;
  draw_radial(horizon, x_rng, s.x, s.step_max, start);
  s.rows = rows_for(horizon);
  draw_lateral(s.rows, y_rng, s.y, initial_modes);
  s.seed = x_rng.key();
  return s;
}

RadialLateralSample sample_radial_lateral(double S, double ds, std::size_t n_theta, std::uint64_t seed) {
  RadialLateralSampler sampler({ds, n_theta});
  const SeedPlan plan{seed};
  CounterRng x_rng = plan.stream(0, 0);
  CounterRng y_rng = plan.stream(1, 0);
  return sampler.draw(S, x_rng, y_rng);
}

}  // namespace lqft
