#include "lqft/geometry.hpp"

#include <array>
#include <map>
#include <mutex>
#include <numbers>

namespace lqft {

double metric_density(PlanePoint z) {
  const double d = 1.0 + z.norm2();
  return 4.0 / (d * d);
}

double log_metric_density(PlanePoint z) { return 2.0 * std::numbers::ln2 - 2.0 * std::log1p(z.norm2()); }

double green_round(PlanePoint z, PlanePoint w) {
  if (z == w) throw DomainError("green_round: coincident points");
  return -std::log(distance(z, w)) - 0.25 * (log_metric_density(z) + log_metric_density(w)) + kCircleConstant;
}

double round_volume_disc(double r) {
  const double r2 = r * r;
  return 4.0 * std::numbers::pi * r2 / (1.0 + r2);
}

double round_volume_outside(double r) { return 4.0 * std::numbers::pi / (1.0 + r * r); }

double QuadratureGrid::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > 64) throw DomainError("gauss_legendre: order must be in [1, 64]");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  const int n = order;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 2.0);
  for (int i = 0; n > 1 && i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

namespace {

struct CellBuilder {
  const PolarGridSpec& spec;
  const GaussRule& rule;
  QuadratureGrid& grid;

  double diameter(double u0, double u1, double t0, double t1) const {
    const PlanePoint a = PlanePoint::polar(std::exp(u0), t0);
    const PlanePoint b = PlanePoint::polar(std::exp(u1), t1);
    const PlanePoint c = PlanePoint::polar(std::exp(u0), t1);
    const PlanePoint d = PlanePoint::polar(std::exp(u1), t0);
    return std::max(distance(a, b), distance(c, d));
  }

  bool near_singular(double u0, double u1, double t0, double t1) const {
    const double diam = diameter(u0, u1, t0, t1);
    const PlanePoint center = PlanePoint::polar(std::exp(0.5 * (u0 + u1)), 0.5 * (t0 + t1));
    for (const PlanePoint& p : spec.singular_points) {
      if (distance(center, p) < spec.refine_factor * diam) return true;
    }
    return false;
  }

  void add(double u0, double u1, double t0, double t1, int depth) {
    if (depth < spec.refine_depth && near_singular(u0, u1, t0, t1)) {
      const double um = 0.5 * (u0 + u1);
      const double tm = 0.5 * (t0 + t1);
      add(u0, um, t0, tm, depth + 1);
      add(um, u1, t0, tm, depth + 1);
      add(u0, um, tm, t1, depth + 1);
      add(um, u1, tm, t1, depth + 1);
      return;
    }
    const double hu = 0.5 * (u1 - u0);
    const double ht = 0.5 * (t1 - t0);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = u0 + hu * (1.0 + rule.nodes[i]);
      const double r = std::exp(u);
      const double g = metric_density(PlanePoint(r));
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        const double t = t0 + ht * (1.0 + rule.nodes[j]);
        grid.nodes.push_back(PlanePoint::polar(r, t));
        grid.weights.push_back(g * r * r * hu * ht * rule.weights[i] * rule.weights[j]);
      }
    }
  }
};

}  // namespace

QuadratureGrid make_polar_grid(const PolarGridSpec& spec) {
  if (spec.n_radial < 1 || spec.n_angular < 1) throw DomainError("make_polar_grid: empty grid");
  if (!(spec.cutoff > 1.0)) throw DomainError("make_polar_grid: cutoff must exceed 1");
  QuadratureGrid grid;
  grid.cutoff = spec.cutoff;
  const GaussRule& rule = gauss_legendre(spec.gauss_order);
  CellBuilder builder{spec, rule, grid};

  const double u_min = -std::log(spec.cutoff);
  const double du = -2.0 * u_min / static_cast<double>(spec.n_radial);
  const double dt = 2.0 * std::numbers::pi / static_cast<double>(spec.n_angular);
  for (std::size_t i = 0; i < spec.n_radial; ++i) {
    const double u0 = u_min + du * static_cast<double>(i);
    for (std::size_t j = 0; j < spec.n_angular; ++j) {
      const double t0 = dt * static_cast<double>(j);
      builder.add(u0, u0 + du, t0, t0 + dt, 0);
    }
  }

  const double r_in = 1.0 / spec.cutoff;
  const double inner = round_volume_disc(r_in) / static_cast<double>(spec.n_angular);
  const double outer = round_volume_outside(spec.cutoff) / static_cast<double>(spec.n_angular);
  for (std::size_t j = 0; j < spec.n_angular; ++j) {
    const double t = dt * (static_cast<double>(j) + 0.5);
    grid.nodes.push_back(PlanePoint::polar(0.5 * r_in, t));
    grid.weights.push_back(inner);
    grid.nodes.push_back(PlanePoint::polar(2.0 * spec.cutoff, t));
    grid.weights.push_back(outer);
  }
  return grid;
}

}  // namespace lqft
