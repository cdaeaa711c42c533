#ifndef LQFT_GEOMETRY_HPP
#define LQFT_GEOMETRY_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "lqft/errors.hpp"

namespace lqft {

// Point of the plane in stereographic coordinates.
struct PlanePoint {
  double re = 0.0;
  double im = 0.0;

  constexpr PlanePoint() = default;
  constexpr PlanePoint(double re_, double im_ = 0.0) : re(re_), im(im_) {}

  static PlanePoint polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

  std::complex<double> complex() const { return {re, im}; }
  double norm() const { return std::hypot(re, im); }
  double norm2() const { return re * re + im * im; }

  friend constexpr PlanePoint operator+(PlanePoint a, PlanePoint b) { return {a.re + b.re, a.im + b.im}; }
  friend constexpr PlanePoint operator-(PlanePoint a, PlanePoint b) { return {a.re - b.re, a.im - b.im}; }
  friend constexpr bool operator==(PlanePoint a, PlanePoint b) = default;
};

inline double distance(PlanePoint a, PlanePoint b) { return (a - b).norm(); }

// ln 2 - 1/2: variance of the unit-circle average at the origin.
inline constexpr double kCircleConstant = std::numbers::ln2 - 0.5;

// Round metric 4 / (1 + |z|^2)^2.
double metric_density(PlanePoint z);
double log_metric_density(PlanePoint z);

// Zero-mean Green function of the round sphere; throws on z == w.
double green_round(PlanePoint z, PlanePoint w);

// Round volume of the disc |z| < r and of its complement.
double round_volume_disc(double r);
double round_volume_outside(double r);

struct PolarGridSpec {
  std::size_t n_radial = 256;
  std::size_t n_angular = 128;
  double cutoff = 1e3;
  // Gauss–Legendre points per direction inside each cell; 1 is the midpoint rule.
  int gauss_order = 2;
  std::vector<PlanePoint> singular_points;
  int refine_depth = 6;
  double refine_factor = 3.0;
};

// Nodes and weights for integrals against the round volume. Radii are geometric on
// [1/cutoff, cutoff]; the disc |z| < 1/cutoff and the exterior |z| > cutoff are
// each represented by a ring of nodes carrying their exact volume.
struct QuadratureGrid {
  std::vector<PlanePoint> nodes;
  std::vector<double> weights;
  double cutoff = 0.0;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const;
};

QuadratureGrid make_polar_grid(const PolarGridSpec& spec = {});

template <class F>
double integrate_round(F&& f, const QuadratureGrid& grid) {
  double sum = 0.0;
  double carry = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const double v = f(grid.nodes[i]);
    if (!std::isfinite(v)) throw NumericalError("integrate_round: non-finite integrand at node " + std::to_string(i));
    const double y = v * grid.weights[i] - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

}  // namespace lqft

#endif
