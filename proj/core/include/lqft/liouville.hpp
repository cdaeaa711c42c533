#ifndef LQFT_LIOUVILLE_HPP
#define LQFT_LIOUVILLE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lqft/geometry.hpp"
#include "lqft/linalg.hpp"
#include "lqft/mc.hpp"

namespace lqft {

struct Insertion {
  PlanePoint z;
  double alpha = 0.0;
};

struct LiouvilleParams {
  double gamma = 1.0;
  double mu = 1.0;
  std::vector<Insertion> insertions;
  double Q = 2.5;
  double sigma = 0.0;  // sum of alphas minus 2Q
};

// Weights within this distance of Q count as punctures.
inline constexpr double kPunctureTolerance = 1e-12;

LiouvilleParams derive_params(double gamma, double mu, std::vector<Insertion> insertions);

struct SeibergReport {
  bool sum_bound = false;
  bool each_bound = false;
  int k = 0;  // number of alphas equal to Q
};

SeibergReport validate_seiberg(const LiouvilleParams& p);

bool is_puncture(const Insertion& ins, double Q);

// Index of the unique puncture, or -1 if there is none. Throws if there are several.
int puncture_index(const LiouvilleParams& p);

// Circle-averaged Girsanov shift sum_i alpha_i avg_theta G(z_i + eps e^{i theta}, z).
// Throws if z lies within eps of an insertion.
double insertion_field(PlanePoint z, const LiouvilleParams& p, double eps);

// Same shift without the precondition; inside an eps-disc the log term saturates at -ln eps.
double insertion_field_capped(PlanePoint z, const LiouvilleParams& p, double eps);

// gamma H_eps with the circle averages of ln g around each insertion cached; log terms
// saturate at -ln eps.
class InsertionShift {
 public:
  InsertionShift(const LiouvilleParams& p, double eps);
  double operator()(PlanePoint z) const;
  // gamma H_eps without the log term of insertion k.
  double regular_part(std::size_t k, PlanePoint z) const;
  double exponent(std::size_t k) const { return gamma_ * alpha_[k]; }
  double eps() const { return eps_; }

 private:
  double term(std::size_t i, PlanePoint z, double lg) const;
  double gamma_;
  double eps_;
  std::vector<PlanePoint> z_;
  std::vector<double> alpha_;
  std::vector<double> avg_;
};

double prefactor_K(const LiouvilleParams& p);

// int_R e^{sigma c} exp(-mu e^{gamma c} W) dc = Gamma(sigma/gamma) (mu W)^{-sigma/gamma} / gamma.
double zero_mode_integral(double gamma, double sigma, double mu, double W);

// int_R e^{sigma c} (n + c) exp(-mu e^{gamma c} W) dc.
double shifted_zero_mode_integral(double gamma, double sigma, double mu, double W, double n);

// The two zero-mode integrals above with Gamma(a) and Gamma'(a) cached, a = sigma / gamma.
struct ZeroMode {
  ZeroMode(double gamma, double sigma, double mu);
  double integral(double W) const;
  double shifted(double W, double n) const;
  double gamma;
  double sigma;
  double mu;
  double a;
  double gamma_a;
  double dgamma_a;
};

// Draws c from the density proportional to e^{sigma c} exp(-mu e^{gamma c} W).
double sample_zero_mode(double gamma, double sigma, double mu, double W, CounterRng& rng);

EstimatorResult reduced_correlation(const LiouvilleParams& p, std::span<const double> w_samples,
                                    std::size_t batches = kMinBatches);

struct GammaLawReport {
  std::size_t n = 0;
  double ks = 0.0;
  double ks_critical = 0.0;
  double mean = 0.0;
  double mean_std_error = 0.0;
  double analytic_mean = 0.0;
  double shape = 0.0;
  double rate = 0.0;
  std::vector<double> total_masses;

  bool ks_pass() const { return ks < ks_critical; }
  bool mean_pass() const;
};

// For each W sample draws n_mass_draws zero modes c and records Z = e^{gamma c} W.
GammaLawReport gamma_law_check(const LiouvilleParams& p, std::span<const double> w_samples, std::size_t n_mass_draws,
                               std::uint64_t seed, double alpha = 0.05);

enum class ChaosRegion { whole, far };

struct ChaosGridConfig {
  ChaosRegion region = ChaosRegion::whole;
  double radial_density = 4.0;  // cells per unit of ln r
  std::size_t n_angular = 16;
  double inner_radius = 1e-3;  // without a puncture the disc below this radius is one cell
  double outer_radius = 1e3;   // four decade rings cover [outer_radius, 1e4 outer_radius]
  double refine_floor = 1e-5;
  double refine_factor = 1.0;
  int quad_order = 3;
  double radius_fraction = 0.25;  // circle-average radius relative to the smaller cell side
  std::size_t lateral_modes = 16;  // far region: unit-circle Fourier modes sampled jointly
};

// Log-polar box about the grid center, or the disc r < r1 when disc is set.
struct ChaosCell {
  double u0 = 0.0;
  double u1 = 0.0;
  double t0 = 0.0;
  double t1 = 0.0;
  bool disc = false;
  int singular = -1;  // insertion whose point lies in the closure
  PlanePoint point;
  double radius = 0.0;
};

// Chaos mass of the insertion-weighted field on a refined log-polar grid centered at the
// puncture (or the origin). Each cell carries e^{gamma X_c - gamma^2/2 Var X_c} times its
// exact expected mass e^{gamma^2/2 (ln2 - 1/2)} int_cell g e^{gamma H_eps}.
// The far region keeps only |z| >= 1 and adds x_0 (the unit-circle average at the origin)
// as leading coordinate and the unit-circle Fourier coefficients of the field as trailing ones.
class InsertionChaos {
 public:
  InsertionChaos(const LiouvilleParams& p, std::vector<double> eps_levels, ChaosGridConfig config = {});

  const ChaosGridConfig& config() const { return config_; }
  const std::vector<ChaosCell>& cells() const { return cells_; }
  const std::vector<double>& eps_levels() const { return eps_; }
  PlanePoint center() const { return center_; }

  std::size_t dimension() const { return factor_.size(); }
  std::size_t cell_offset() const { return cell_offset_; }
  std::size_t mode_offset() const { return cell_offset_ + cells_.size(); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const GaussianFactor& factor() const { return factor_; }

  std::span<const double> expected_masses(std::size_t level) const;
  double expected_total(std::size_t level) const;

  void draw(CounterRng& rng, std::span<double> out) const;
  void draw_given_x0(double x0, CounterRng& rng, std::span<double> out) const;
  // e^{gamma X_c - gamma^2/2 Var X_c} per cell from a joint draw.
  void cell_factors(std::span<const double> joint, std::span<double> out) const;
  double mass(std::span<const double> factors, std::size_t level) const;

 private:
  LiouvilleParams params_;
  std::vector<double> eps_;
  ChaosGridConfig config_;
  PlanePoint center_;
  std::vector<ChaosCell> cells_;
  std::size_t cell_offset_ = 0;
  Eigen::MatrixXd covariance_;
  GaussianFactor factor_;
  std::vector<double> variance_;
  std::vector<std::vector<double>> expected_;  // per level
  std::vector<std::size_t> first_cell_;        // per level: cells before it lie inside the eps-disc
};

// One draw of W_eps = int_{D_eps} e^{gamma H_eps} dM_gamma over the whole sphere.
double chaos_mass_with_insertions(const LiouvilleParams& p, double eps, const ChaosGridConfig& config,
                                  std::uint64_t seed);

}  // namespace lqft

#endif
