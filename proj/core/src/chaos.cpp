#include "lqft/chaos.hpp"

#include <cmath>
#include <string>

#include "lqft/errors.hpp"

namespace lqft {

std::vector<Cell> polar_cells(PlanePoint origin, double r0, double r1, double t0, double t1, std::size_t n_radial,
                              std::size_t n_angular) {
  if (!(r0 > 0.0) || !(r1 > r0) || !(t1 > t0) || n_radial == 0 || n_angular == 0) {
    throw DomainError("polar_cells: empty or inverted box");
  }
  std::vector<Cell> cells;
  cells.reserve(n_radial * n_angular);
  const double q = std::pow(r1 / r0, 1.0 / static_cast<double>(n_radial));
  const double dt = (t1 - t0) / static_cast<double>(n_angular);
  double a = r0;
  for (std::size_t i = 0; i < n_radial; ++i) {
    const double b = (i + 1 == n_radial) ? r1 : a * q;
    for (std::size_t j = 0; j < n_angular; ++j) {
      const double ta = t0 + dt * static_cast<double>(j);
      const double tb = ta + dt;
      Cell c;
      c.center = origin + PlanePoint::polar(0.5 * (a + b), 0.5 * (ta + tb));
      c.area = 0.5 * dt * (b * b - a * a);
      c.diameter = std::max(distance(PlanePoint::polar(a, ta), PlanePoint::polar(b, tb)),
                            distance(PlanePoint::polar(a, tb), PlanePoint::polar(b, ta)));
      cells.push_back(c);
    }
    a = b;
  }
  return cells;
}

double ChaosMeasure::total() const {
  double s = 0.0;
  for (double m : masses) s += m;
  return s;
}

double ChaosMeasure::mass_of(std::span<const std::size_t> indices) const {
  double s = 0.0;
  for (std::size_t i : indices) s += masses.at(i);
  return s;
}

ChaosMeasure gmc_cells(const FieldSample& field, double gamma, double Q, std::span<const Cell> cells) {
  if (field.values.size() != cells.size() || field.points.size() != cells.size()) {
    throw DomainError("gmc_cells: " + std::to_string(field.values.size()) + " field values for " +
                      std::to_string(cells.size()) + " cells");
  }
  if (!(gamma >= 0.0 && gamma < 2.0)) throw DomainError("gmc_cells: gamma must lie in [0, 2)");
  ChaosMeasure m;
  m.cells.assign(cells.begin(), cells.end());
  m.masses.resize(cells.size());
  m.gamma = gamma;
  m.eps = field.eps;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    if (distance(field.points[i], c.center) > 1e-12 * (1.0 + c.center.norm())) {
      throw DomainError("gmc_cells: field point " + std::to_string(i) + " is not the cell center");
    }
    const double eps = field.radii.empty() ? field.eps : field.radii[i];
    if (eps > c.diameter) throw DomainError("gmc_cells: field radius exceeds the cell diameter at cell " + std::to_string(i));
    m.masses[i] = std::pow(eps, 0.5 * gamma * gamma) *
                  std::exp(gamma * (field.values[i] + 0.5 * Q * log_metric_density(c.center))) * c.area;
  }
  return m;
}

EstimatorResult negative_moment(std::span<const double> mass_samples, double q, std::size_t batches) {
  if (!(q > 0.0)) throw DomainError("negative_moment: q must be positive");
  std::vector<double> v(mass_samples.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(mass_samples[i] > 0.0)) throw DomainError("negative_moment: nonpositive sample at index " + std::to_string(i));
    v[i] = std::pow(mass_samples[i], -q);
  }
  return summarize(v, batches);
}

}  // namespace lqft
