#ifndef LQFT_CHAOS_HPP
#define LQFT_CHAOS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "lqft/field.hpp"
#include "lqft/geometry.hpp"
#include "lqft/mc.hpp"

namespace lqft {

struct Cell {
  PlanePoint center;
  double area = 0.0;  // Lebesgue area
  double diameter = 0.0;
};

// Cells of the polar box r0 < |z - origin| < r1, t0 < arg < t1 with geometric radii.
std::vector<Cell> polar_cells(PlanePoint origin, double r0, double r1, double t0, double t1, std::size_t n_radial,
                              std::size_t n_angular);

struct ChaosMeasure {
  std::vector<Cell> cells;
  std::vector<double> masses;
  double gamma = 0.0;
  double eps = 0.0;

  double total() const;
  double mass_of(std::span<const std::size_t> indices) const;
};

// mass_i = eps_i^{gamma^2/2} exp(gamma (X_i + Q/2 ln g(c_i))) area_i, one field value per cell.
ChaosMeasure gmc_cells(const FieldSample& field, double gamma, double Q, std::span<const Cell> cells);

// Batch-means estimate of E[m^{-q}].
EstimatorResult negative_moment(std::span<const double> mass_samples, double q, std::size_t batches = kMinBatches);

}  // namespace lqft

#endif
