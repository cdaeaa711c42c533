#include "lqft/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "lqft/errors.hpp"
#include "lqft/field.hpp"
#include "lqft/special.hpp"

namespace lqft {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_distinct(const std::vector<Insertion>& ins) {
  for (std::size_t i = 0; i < ins.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (ins[i].z == ins[j].z) {
        throw DomainError("insertions " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
    }
  }
}

// int_0^R max(r, eps)^{-beta} r dr.
double capped_radial(double R, double eps, double beta) {
  if (R <= eps) return 0.5 * R * R * std::pow(eps, -beta);
  const double head = 0.5 * std::pow(eps, 2.0 - beta);
  if (std::abs(beta - 2.0) < 1e-12) return head + std::log(R / eps);
  return head + (std::pow(R, 2.0 - beta) - std::pow(eps, 2.0 - beta)) / (2.0 - beta);
}

PlanePoint polar_point(PlanePoint center, double u, double t) { return center + PlanePoint::polar(std::exp(u), t); }

}  // namespace

InsertionShift::InsertionShift(const LiouvilleParams& p, double eps) : gamma_(p.gamma), eps_(eps) {
  if (!(eps > 0.0)) throw DomainError("insertion shift: eps must be positive");
  for (const auto& ins : p.insertions) {
    z_.push_back(ins.z);
    alpha_.push_back(ins.alpha);
    avg_.push_back(circle_average_log_metric(ins.z, eps));
  }
}

double InsertionShift::term(std::size_t i, PlanePoint z, double lg) const {
  return alpha_[i] * (-std::log(std::max(distance(z, z_[i]), eps_)) - 0.25 * lg - 0.25 * avg_[i] + kCircleConstant);
}

double InsertionShift::operator()(PlanePoint z) const {
  const double lg = log_metric_density(z);
  double h = 0.0;
  for (std::size_t i = 0; i < z_.size(); ++i) h += term(i, z, lg);
  return gamma_ * h;
}

double InsertionShift::regular_part(std::size_t k, PlanePoint z) const {
  const double lg = log_metric_density(z);
  double h = alpha_[k] * (-0.25 * lg - 0.25 * avg_[k] + kCircleConstant);
  for (std::size_t i = 0; i < z_.size(); ++i) {
    if (i != k) h += term(i, z, lg);
  }
  return gamma_ * h;
}

LiouvilleParams derive_params(double gamma, double mu, std::vector<Insertion> insertions) {
  if (!(gamma > 0.0 && gamma < 2.0)) throw DomainError("gamma must lie in (0, 2)");
  if (!(mu > 0.0)) throw DomainError("mu must be positive");
  LiouvilleParams p;
  p.gamma = gamma;
  p.mu = mu;
  p.insertions = std::move(insertions);
  p.Q = 2.0 / gamma + 0.5 * gamma;
  double sum = 0.0;
  for (const auto& ins : p.insertions) sum += ins.alpha;
  p.sigma = sum - 2.0 * p.Q;
  return p;
}

bool is_puncture(const Insertion& ins, double Q) { return std::abs(ins.alpha - Q) <= kPunctureTolerance; }

SeibergReport validate_seiberg(const LiouvilleParams& p) {
  SeibergReport r;
  r.sum_bound = p.sigma > 0.0;
  r.each_bound = true;
  for (const auto& ins : p.insertions) {
    if (ins.alpha > p.Q + kPunctureTolerance) r.each_bound = false;
    if (is_puncture(ins, p.Q)) ++r.k;
  }
  return r;
}

int puncture_index(const LiouvilleParams& p) {
  int idx = -1;
  for (std::size_t i = 0; i < p.insertions.size(); ++i) {
    if (!is_puncture(p.insertions[i], p.Q)) continue;
    if (idx >= 0) throw UnsupportedConfiguration("more than one insertion with alpha = Q");
    idx = static_cast<int>(i);
  }
  return idx;
}

double insertion_field_capped(PlanePoint z, const LiouvilleParams& p, double eps) {
  if (!(eps > 0.0)) throw DomainError("insertion_field: eps must be positive");
  return InsertionShift(p, eps)(z) / p.gamma;
}

double insertion_field(PlanePoint z, const LiouvilleParams& p, double eps) {
  if (!(eps > 0.0)) throw DomainError("insertion_field: eps must be positive");
  for (std::size_t i = 0; i < p.insertions.size(); ++i) {
    if (distance(z, p.insertions[i].z) <= eps) {
      throw DomainError("insertion_field: point within eps of insertion " + std::to_string(i));
    }
  }
  return insertion_field_capped(z, p, eps);
}

double prefactor_K(const LiouvilleParams& p) {
  require_distinct(p.insertions);
  double log_k = 0.0;
  double sum_sq = 0.0;
  const auto& ins = p.insertions;
  for (std::size_t i = 0; i < ins.size(); ++i) {
    const double a = ins[i].alpha;
    log_k += (-0.25 * a * a + 0.5 * p.Q * a) * log_metric_density(ins[i].z);
    sum_sq += a * a;
    for (std::size_t j = 0; j < i; ++j) log_k += a * ins[j].alpha * green_round(ins[i].z, ins[j].z);
  }
  log_k += 0.5 * kCircleConstant * sum_sq;
  return std::exp(log_k);
}

ZeroMode::ZeroMode(double gamma_, double sigma_, double mu_) : gamma(gamma_), sigma(sigma_), mu(mu_) {
  if (!(sigma > 0.0)) throw DomainError("zero-mode integral diverges for sigma <= 0");
  a = sigma / gamma;
  gamma_a = gamma_fn(a);
  dgamma_a = gamma_derivative(a);
}

double ZeroMode::integral(double W) const {
  if (!(W > 0.0)) throw DomainError("zero-mode integral needs W > 0");
  return gamma_a * std::pow(mu * W, -a) / gamma;
}

double ZeroMode::shifted(double W, double n) const {
  if (!(W > 0.0)) throw DomainError("zero-mode integral needs W > 0");
  const double l = std::log(mu * W);
  return std::pow(mu * W, -a) / gamma * ((n - l / gamma) * gamma_a + dgamma_a / gamma);
}

double zero_mode_integral(double gamma, double sigma, double mu, double W) {
  return ZeroMode(gamma, sigma, mu).integral(W);
}

double shifted_zero_mode_integral(double gamma, double sigma, double mu, double W, double n) {
  return ZeroMode(gamma, sigma, mu).shifted(W, n);
}

double sample_zero_mode(double gamma, double sigma, double mu, double W, CounterRng& rng) {
  if (!(sigma > 0.0)) throw DomainError("zero-mode law is improper for sigma <= 0");
  if (!(W > 0.0)) throw DomainError("zero-mode law needs W > 0");
  // Log-concave rejection: f(m + y/f(m)) <= f(m) min(1, e^{1-|y|}).
  const double a = sigma / gamma;
  const double log_norm = std::log(gamma_fn(a)) - a * std::log(mu * W) - std::log(gamma);
  auto log_f = [&](double c) { return sigma * c - mu * W * std::exp(gamma * c) - log_norm; };
  const double mode = std::log(sigma / (gamma * mu * W)) / gamma;
  const double fm = std::exp(log_f(mode));
  for (;;) {
    const double side = uniform_open0(rng);
    double y;
    double bound;
    if (side <= 0.5) {
      y = uniform_open0(rng);
      bound = 1.0;
    } else {
      const double e = -std::log(uniform_open0(rng));
      y = 1.0 + e;
      bound = std::exp(-e);
    }
    if (rng() & 1u) y = -y;
    const double c = mode + y / fm;
    const double t = uniform_open0(rng) * bound;
    if (std::log(t) <= log_f(c) - std::log(fm)) return c;
  }
}

EstimatorResult reduced_correlation(const LiouvilleParams& p, std::span<const double> w_samples, std::size_t batches) {
  if (!(p.sigma > 0.0)) throw DomainError("reduced_correlation: sigma <= 0, the zero-mode integral diverges");
  const double a = p.sigma / p.gamma;
  std::vector<double> v(w_samples.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(w_samples[i] > 0.0)) throw DomainError("reduced_correlation: nonpositive W at index " + std::to_string(i));
    v[i] = std::pow(w_samples[i], -a);
  }
  EstimatorResult r = summarize(v, batches);
  const double scale = std::pow(p.mu, -a);
  const double g = gamma_fn(a) / p.gamma;
  r.estimate = scale * (g * r.estimate);
  r.std_error = scale * (g * r.std_error);
  return r;
}

bool GammaLawReport::mean_pass() const { return std::abs(mean - analytic_mean) <= 3.0 * mean_std_error; }

GammaLawReport gamma_law_check(const LiouvilleParams& p, std::span<const double> w_samples, std::size_t n_mass_draws,
                               std::uint64_t seed, double alpha) {
  if (!(p.sigma > 0.0)) throw DomainError("gamma_law_check: sigma <= 0");
  if (n_mass_draws == 0) throw DomainError("gamma_law_check: n_mass_draws must be positive");
  GammaLawReport r;
  r.shape = p.sigma / p.gamma;
  r.rate = p.mu;
  r.analytic_mean = r.shape / r.rate;
  const SeedPlan plan{seed};
  r.total_masses.reserve(w_samples.size() * n_mass_draws);
  for (std::size_t i = 0; i < w_samples.size(); ++i) {
    CounterRng rng = plan.stream(0, i);
    for (std::size_t k = 0; k < n_mass_draws; ++k) {
      const double c = sample_zero_mode(p.gamma, p.sigma, p.mu, w_samples[i], rng);
      r.total_masses.push_back(std::exp(p.gamma * c) * w_samples[i]);
    }
  }
  r.n = r.total_masses.size();
  r.ks = ks_statistic(r.total_masses, [&](double y) { return gamma_cdf(y, r.shape, r.rate); });
  r.ks_critical = ks_critical_value(r.n, alpha);
  const EstimatorResult m = summarize(r.total_masses, kMinBatches, seed);
  r.mean = m.estimate;
  r.mean_std_error = m.std_error;
  return r;
}

InsertionChaos::InsertionChaos(const LiouvilleParams& p, std::vector<double> eps_levels, ChaosGridConfig config)
    : params_(p), eps_(std::move(eps_levels)), config_(config) {
  require_distinct(p.insertions);
  if (!validate_seiberg(p).each_bound) throw DomainError("InsertionChaos: some alpha exceeds Q");
  if (eps_.empty()) throw DomainError("InsertionChaos: at least one eps level is required");
  for (double e : eps_) {
    if (!(e > 0.0 && e < 1.0)) throw DomainError("InsertionChaos: eps levels must lie in (0, 1)");
  }
  if (config_.n_angular < 4 || !(config_.radial_density > 0.0) || config_.quad_order < 1) {
    throw DomainError("InsertionChaos: grid too coarse");
  }
  const int pidx = puncture_index(p);
  const bool far = config_.region == ChaosRegion::far;
  center_ = pidx >= 0 ? p.insertions[static_cast<std::size_t>(pidx)].z : PlanePoint(0.0);
  if (far) {
    if (center_.norm() != 0.0) throw UnsupportedConfiguration("far region needs the puncture at the origin");
    for (std::size_t i = 0; i < p.insertions.size(); ++i) {
      if (static_cast<int>(i) != pidx && !(p.insertions[i].z.norm() > 1.0)) {
        throw UnsupportedConfiguration("far region needs every non-puncture insertion outside the unit disc");
      }
    }
  }
  const double eps_min = *std::min_element(eps_.begin(), eps_.end());
  if (pidx >= 0 && !far) {
    for (std::size_t i = 0; i < p.insertions.size(); ++i) {
      if (static_cast<int>(i) == pidx) continue;
      if (distance(p.insertions[i].z, center_) <= *std::max_element(eps_.begin(), eps_.end())) {
        throw DomainError("InsertionChaos: the excluded disc around the puncture swallows insertion " +
                          std::to_string(i));
      }
    }
  }

  // Radial edges in u = ln r about the center.
  const double r_min = far ? 1.0 : (pidx >= 0 ? eps_min : std::min(config_.inner_radius, eps_min));
  std::vector<double> keys{std::log(r_min), std::log(config_.outer_radius)};
  if (!far) {
    keys.push_back(0.0);
    if (pidx >= 0) {
      for (double e : eps_) keys.push_back(std::log(e));
    }
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             keys.end());
  std::vector<double> edges{keys.front()};
  for (std::size_t k = 1; k < keys.size(); ++k) {
    const double w = keys[k] - keys[k - 1];
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(config_.radial_density * w - 1e-9)));
    for (std::size_t j = 1; j <= n; ++j) edges.push_back(j == n ? keys[k] : keys[k - 1] + w * double(j) / double(n));
  }
  const double outer_u = edges.back();
  for (int k = 1; k <= 4; ++k) edges.push_back(outer_u + k * std::log(10.0));

  // Singular points as (u, theta) about the center.
  struct Sing {
    std::size_t index;
    PlanePoint z;
    double u;
    double t;
  };
  std::vector<Sing> sing;
  for (std::size_t i = 0; i < p.insertions.size(); ++i) {
    if (static_cast<int>(i) == pidx) continue;
    const PlanePoint d = p.insertions[i].z - center_;
    if (d.norm() == 0.0) {
      if (far || pidx >= 0) throw DomainError("InsertionChaos: insertion at the grid center");
      continue;  // handled by the disc cell
    }
    if (d.norm() > 0.5 * config_.outer_radius) throw DomainError("InsertionChaos: insertion beyond outer_radius / 2");
    double t = std::atan2(d.im, d.re);
    if (t < 0.0) t += kTwoPi;
    sing.push_back({i, p.insertions[i].z, std::log(d.norm()), t});
  }

  auto box_diameter = [&](const ChaosCell& c) {
    const PlanePoint a = polar_point(center_, c.u0, c.t0), b = polar_point(center_, c.u1, c.t1);
    const PlanePoint d = polar_point(center_, c.u0, c.t1), e = polar_point(center_, c.u1, c.t0);
    return std::max(distance(a, b), distance(d, e));
  };
  auto contains = [&](const ChaosCell& c, const Sing& s) {
    const double tol = 1e-12;
    if (s.u < c.u0 - tol || s.u > c.u1 + tol) return false;
    for (double t : {s.t, s.t + kTwoPi, s.t - kTwoPi}) {
      if (t >= c.t0 - tol && t <= c.t1 + tol) return true;
    }
    return false;
  };
  std::vector<ChaosCell> stack;
  const double dt = kTwoPi / static_cast<double>(config_.n_angular);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    for (std::size_t j = 0; j < config_.n_angular; ++j) {
      ChaosCell c;
      c.u0 = edges[i];
      c.u1 = edges[i + 1];
      c.t0 = dt * static_cast<double>(j);
      c.t1 = c.t0 + dt;
      stack.push_back(c);
    }
  }
  while (!stack.empty()) {
    ChaosCell c = stack.back();
    stack.pop_back();
    const double diam = box_diameter(c);
    const PlanePoint mid = polar_point(center_, 0.5 * (c.u0 + c.u1), 0.5 * (c.t0 + c.t1));
    bool split = false;
    if (c.u0 < outer_u) {
      for (const auto& s : sing) {
        if (diam > config_.refine_floor && distance(mid, s.z) < config_.refine_factor * diam) split = true;
      }
    }
    if (split) {
      // Halve the longer side, or both when the cell is roughly square.
      const double rc = std::exp(0.5 * (c.u0 + c.u1));
      const double radial = 2.0 * rc * std::sinh(0.5 * (c.u1 - c.u0)), arc = rc * (c.t1 - c.t0);
      const int nu = arc > 2.0 * radial ? 1 : 2;
      const int nt = radial > 2.0 * arc ? 1 : 2;
      for (int a = 0; a < nu; ++a) {
        for (int b = 0; b < nt; ++b) {
          ChaosCell q = c;
          if (nu == 2) (a == 0 ? q.u1 : q.u0) = 0.5 * (c.u0 + c.u1);
          if (nt == 2) (b == 0 ? q.t1 : q.t0) = 0.5 * (c.t0 + c.t1);
          stack.push_back(q);
        }
      }
      continue;
    }
    for (const auto& s : sing) {
      if (contains(c, s)) {
        if (c.singular >= 0) throw DomainError("InsertionChaos: two insertions share a leaf; lower refine_floor");
        c.singular = static_cast<int>(s.index);
      }
    }
    const double uc = 0.5 * (c.u0 + c.u1);
    const double rc = std::exp(uc);
    c.point = center_ + PlanePoint::polar(rc, 0.5 * (c.t0 + c.t1));
    const double side = std::min(2.0 * rc * std::sinh(0.5 * (c.u1 - c.u0)), rc * (c.t1 - c.t0));
    c.radius = config_.radius_fraction * side;
    if (far) c.radius = std::min(c.radius, 0.5 * (c.point.norm() - 1.0));
    cells_.push_back(c);
  }
  if (!far && pidx < 0) {
    ChaosCell d;
    d.disc = true;
    d.u0 = -INFINITY;
    d.u1 = std::log(r_min);
    d.point = center_;
    d.radius = 0.5 * r_min;
    for (std::size_t i = 0; i < p.insertions.size(); ++i) {
      const double r = distance(p.insertions[i].z, center_);
      if (r == 0.0) d.singular = static_cast<int>(i);
      else if (r < r_min) throw DomainError("InsertionChaos: insertion inside the inner disc; lower inner_radius");
    }
    cells_.push_back(d);
  }
  std::stable_sort(cells_.begin(), cells_.end(), [](const ChaosCell& a, const ChaosCell& b) {
    return a.u0 < b.u0 || (a.u0 == b.u0 && (a.t0 < b.t0 || (a.t0 == b.t0 && a.u1 < b.u1)));
  });

  // Expected masses per level.
  const GaussRule& rule = gauss_legendre(config_.quad_order);
  const GaussRule& fan = gauss_legendre(8);
  const double norm = std::exp(0.5 * p.gamma * p.gamma * kCircleConstant);
  expected_.resize(eps_.size());
  first_cell_.resize(eps_.size());
  for (std::size_t k = 0; k < eps_.size(); ++k) {
    const InsertionShift shift(p, eps_[k]);
    auto integrand = [&](PlanePoint z) { return metric_density(z) * std::exp(shift(z)); };
    std::vector<double>& ex = expected_[k];
    ex.resize(cells_.size());
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      const ChaosCell& c = cells_[i];
      double v = 0.0;
      if (c.singular >= 0) {
        const auto si = static_cast<std::size_t>(c.singular);
        const PlanePoint z0 = p.insertions[si].z;
        const double g0 = metric_density(z0) * std::exp(shift.regular_part(si, z0));
        const double beta = shift.exponent(si);
        if (c.disc) {
          v = kTwoPi * g0 * capped_radial(std::exp(c.u1), shift.eps(), beta);
        } else {
          const PlanePoint corner[4] = {polar_point(center_, c.u0, c.t0), polar_point(center_, c.u1, c.t0),
                                        polar_point(center_, c.u1, c.t1), polar_point(center_, c.u0, c.t1)};
          double fan_sum = 0.0;
          for (int e = 0; e < 4; ++e) {
            const PlanePoint a = corner[e] - z0, b = corner[(e + 1) % 4] - z0;
            const double cross = a.re * b.im - a.im * b.re;
            const double len = distance(corner[e], corner[(e + 1) % 4]);
            const double h = std::abs(cross) / len;
            if (h <= 1e-14 * len) continue;
            const double phi_a = std::atan2(a.im, a.re);
            const double span = std::atan2(cross, a.re * b.re + a.im * b.im);
            // Direction of the edge's normal from z0.
            const PlanePoint foot_dir = PlanePoint(b.im - a.im, a.re - b.re);
            double phi_n = std::atan2(foot_dir.im, foot_dir.re);
            if (foot_dir.re * a.re + foot_dir.im * a.im < 0.0) phi_n += std::numbers::pi;
            double s = 0.0;
            for (std::size_t q = 0; q < fan.nodes.size(); ++q) {
              const double phi = phi_a + 0.5 * span * (1.0 + fan.nodes[q]);
              const double R = h / std::cos(phi - phi_n);
              s += fan.weights[q] * capped_radial(R, shift.eps(), beta);
            }
            fan_sum += 0.5 * std::abs(span) * s;
          }
          v = g0 * fan_sum;
        }
      } else if (c.disc) {
        const double r1 = std::exp(c.u1);
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
          const double r = 0.5 * r1 * (1.0 + rule.nodes[a]);
          for (int b = 0; b < 4 * config_.quad_order; ++b) {
            const double t = kTwoPi * (b + 0.5) / (4.0 * config_.quad_order);
            v += rule.weights[a] * integrand(center_ + PlanePoint::polar(r, t)) * r;
          }
        }
        v *= 0.5 * r1 * kTwoPi / (4.0 * config_.quad_order);
      } else {
        const double hu = 0.5 * (c.u1 - c.u0), ht = 0.5 * (c.t1 - c.t0);
        for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
          const double u = c.u0 + hu * (1.0 + rule.nodes[a]);
          const double r = std::exp(u);
          for (std::size_t b = 0; b < rule.nodes.size(); ++b) {
            const double t = c.t0 + ht * (1.0 + rule.nodes[b]);
            v += rule.weights[a] * rule.weights[b] * integrand(center_ + PlanePoint::polar(r, t)) * r * r;
          }
        }
        v *= hu * ht;
      }
      if (!std::isfinite(v) || v < 0.0) throw NumericalError("InsertionChaos: bad expected mass at cell " + std::to_string(i));
      ex[i] = norm * v;
    }
    std::size_t first = 0;
    if (pidx >= 0 && !far) {
      const double le = std::log(eps_[k]) - 1e-9;
      while (first < cells_.size() && cells_[first].u0 < le) ++first;
    }
    first_cell_[k] = first;
  }

  // Joint covariance.
  const std::size_t n = cells_.size();
  std::vector<PlanePoint> pts(n);
  std::vector<double> rad(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts[i] = cells_[i].point;
    rad[i] = cells_[i].radius;
  }
  const Eigen::MatrixXd cc = circle_average_covariance(pts, rad);
  if (!far) {
    cell_offset_ = 0;
    covariance_ = cc;
  } else {
    const std::size_t M = config_.lateral_modes;
    const std::size_t dim = 1 + n + 2 * M;
    cell_offset_ = 1;
    covariance_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    covariance_(0, 0) = kCircleConstant;
    covariance_.block(1, 1, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = cc;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(1 + i);
      const double cx = cov_circle_avg(PlanePoint(0.0), 1.0, pts[i], rad[i]);
      covariance_(0, ii) = covariance_(ii, 0) = cx;
      // Unit-circle Fourier coefficients of -ln|e^{i theta} - w| for |w| > 1 are Re(w^{-m})/m and
      // -Im(w^{-m})/m; circles outside the unit disc average them exactly.
      const std::complex<double> inv = 1.0 / pts[i].complex();
      std::complex<double> pw = 1.0;
      for (std::size_t m = 1; m <= M; ++m) {
        pw *= inv;
        const double md = static_cast<double>(m);
        const auto jc = static_cast<Eigen::Index>(1 + n + 2 * (m - 1));
        covariance_(ii, jc) = covariance_(jc, ii) = pw.real() / md;
        covariance_(ii, jc + 1) = covariance_(jc + 1, ii) = -pw.imag() / md;
      }
    }
    for (std::size_t m = 1; m <= M; ++m) {
      const auto jc = static_cast<Eigen::Index>(1 + n + 2 * (m - 1));
      covariance_(jc, jc) = covariance_(jc + 1, jc + 1) = 1.0 / static_cast<double>(m);
    }
  }
  factor_ = GaussianFactor(covariance_);
  variance_.resize(n);
  for (std::size_t i = 0; i < n; ++i) variance_[i] = cc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
}

std::span<const double> InsertionChaos::expected_masses(std::size_t level) const { return expected_.at(level); }

double InsertionChaos::expected_total(std::size_t level) const {
  const auto& ex = expected_.at(level);
  double s = 0.0;
  for (std::size_t i = first_cell_[level]; i < ex.size(); ++i) s += ex[i];
  return s;
}

void InsertionChaos::draw(CounterRng& rng, std::span<double> out) const { factor_.draw(rng, out); }

void InsertionChaos::draw_given_x0(double x0, CounterRng& rng, std::span<double> out) const {
  if (config_.region != ChaosRegion::far) throw DomainError("draw_given_x0 needs the far region");
  factor_.draw_given_leading(x0, rng, out);
}

void InsertionChaos::cell_factors(std::span<const double> joint, std::span<double> out) const {
  if (joint.size() != dimension() || out.size() != cells_.size()) throw DomainError("cell_factors: size mismatch");
  const double g = params_.gamma;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    out[i] = std::exp(g * joint[cell_offset_ + i] - 0.5 * g * g * variance_[i]);
  }
}

double InsertionChaos::mass(std::span<const double> factors, std::size_t level) const {
  const auto& ex = expected_.at(level);
  if (factors.size() != ex.size()) throw DomainError("mass: size mismatch");
  double s = 0.0;
  for (std::size_t i = first_cell_[level]; i < ex.size(); ++i) s += factors[i] * ex[i];
  return s;
}

double chaos_mass_with_insertions(const LiouvilleParams& p, double eps, const ChaosGridConfig& config,
                                  std::uint64_t seed) {
  const InsertionChaos chaos(p, {eps}, config);
  CounterRng rng = SeedPlan{seed}.stream(0, 0);
  std::vector<double> joint(chaos.dimension()), f(chaos.cells().size());
  chaos.draw(rng, joint);
  chaos.cell_factors(joint, f);
  return chaos.mass(f, 0);
}

}  // namespace lqft
