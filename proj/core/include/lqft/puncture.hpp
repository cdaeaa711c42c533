#ifndef LQFT_PUNCTURE_HPP
#define LQFT_PUNCTURE_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lqft/field.hpp"
#include "lqft/liouville.hpp"
#include "lqft/mc.hpp"

namespace lqft {

// Radial process x_s = X_{g, e^{-s}}(0) on s_j = j ds, with the exact sup on each step.
struct RadialPath {
  double ds = 0.0;
  std::vector<double> x;
  std::vector<double> step_max;

  std::size_t steps() const { return x.size() - 1; }
  double horizon() const { return ds * static_cast<double>(steps()); }
};

// Path whose sup on each step is the larger endpoint (piecewise linear interpolation).
RadialPath linear_path(double ds, std::vector<double> x);

struct PartitionedPathStats {
  int n = 0;
  double max_x = 0.0;
  std::map<int, double> T_levels;  // T_a = inf{s : x_s >= a - 1}
  double x_end = 0.0;
  double S = 0.0;
};

// Partition cell of the running max over the first `steps` steps (all if 0):
// n = 0 for max <= 0, else max in (n - 1, n].
PartitionedPathStats partition_index(const RadialPath& path, std::span<const int> levels = {}, std::size_t steps = 0);

// Time of the first step at which the path reaches `level`, linearly interpolated when an
// endpoint crosses and the step midpoint when only the bridge excursion does.
std::optional<double> first_passage(const RadialPath& path, double level, std::size_t steps = 0);

// (n - x_S) if the path stays <= n on [0, S], else 0.
double martingale_weight(const RadialPath& path, int n, double S);

// E[(n - x_0)^+] for x_0 ~ N(0, ln2 - 1/2); the constant mean of the martingale.
double expected_martingale(int n);

// x_0 from the density proportional to (n - x)^+ phi(x), by inverse CDF.
double sample_theta_start(int n, CounterRng& rng);

// Bessel-3 path R started at R_0 = n - x_0, returned as x = n - R with the exact
// sup of x on each step (from the Bessel-bridge minimum of R).
RadialPath draw_theta_path(int n, double horizon, double ds, CounterRng& rng, std::optional<double> x0 = std::nullopt);

struct ThetaSampleRecord {
  int n = 0;
  double ds = 0.0;
  std::vector<double> path;  // n - x_t on the grid
  double x0 = 0.0;
  double weight_context = 0.0;  // E[f_1^n]
  RadialPath radial;
};

ThetaSampleRecord sample_theta_n(int n, double S, double ds, std::uint64_t seed);

// Discrete int_a^b int e^{gamma x_s} mu_Y(ds, dtheta) with the normalized lateral chaos
// e^{gamma y - gamma^2/2 Var y} ds dtheta.
double path_chaos_integral(const RadialLateralSample& sample, double a, double b, double gamma);
// Same with x_s replaced by x_s - x_a.
double local_chaos_integral(const RadialLateralSample& sample, double a, double b, double gamma);
// I_n over [T_{n-1}, T_n] (truncated at the horizon); nullopt if T_{n-1} is not reached.
std::optional<double> stopping_chaos_integral(const RadialLateralSample& sample, int n, double gamma);

struct PunctureConfig {
  RadialLateralConfig lateral;
  ChaosGridConfig far;  // region is forced to far
};

struct PunctureDraw {
  RadialPath path;
  std::vector<double> near;  // near[j] = near-field mass over s in [0, s_j] at the reference level
  std::vector<double> far;   // far-field mass per level
};

// The puncture sits at the origin and the other insertions outside the unit disc. Levels
// are horizons S = ln(1/eps), each a multiple of ds.
class PunctureModel {
 public:
  PunctureModel(const LiouvilleParams& p, std::vector<double> horizons, PunctureConfig config = {});

  const LiouvilleParams& params() const { return params_; }
  const std::vector<double>& horizons() const { return horizons_; }
  double eps(std::size_t level) const { return std::exp(-horizons_.at(level)); }
  std::size_t steps(std::size_t level) const { return steps_.at(level); }
  const RadialLateralSampler& lateral() const { return lateral_; }
  const InsertionChaos& far_field() const { return far_; }

  // Brownian law, or Theta^n when theta_n is set.
  PunctureDraw draw(CounterRng& rng, std::optional<int> theta_n = std::nullopt) const;
  double mass(const PunctureDraw& d, std::size_t level) const;
  double near_mass(const PunctureDraw& d, std::size_t level) const;

 private:
  LiouvilleParams params_;
  std::vector<double> horizons_;
  std::vector<std::size_t> steps_;
  PunctureConfig config_;
  RadialLateralSampler lateral_;
  InsertionChaos far_;
  std::size_t max_steps_ = 0;
  std::vector<double> near_weight_;  // (step, column) at the deepest level
  std::vector<double> near_scale_;   // per level, relative to the deepest
};

struct PartitionTerms {
  EstimatorResult A;
  EstimatorResult tildeA;
  EstimatorResult B;
};

// Per-draw columns for each level: A_n, tildeA_n, B_n for the requested n, then the sums
// over all n of A and B, then the partition index and W.
inline constexpr std::size_t kTermColumns = 7;
enum TermColumn : std::size_t { kColA = 0, kColTildeA, kColB, kColSumA, kColSumB, kColIndex, kColW };

SampleTable partition_samples(const PunctureModel& model, int n, std::size_t n_samples, std::uint64_t seed,
                              unsigned workers = 1);

PartitionTerms estimate_partition_terms(const LiouvilleParams& p, int n, double eps, std::size_t n_samples,
                                        std::uint64_t seed, PunctureConfig config = {});

// Tilde-A_n through Theta^n: E[f_1^n] Gamma(a) mu^{-a} / gamma E^Theta[1_M W^{-a}].
EstimatorResult theta_tilde_a(const PunctureModel& model, std::size_t level, int n, std::size_t n_samples,
                              std::uint64_t seed);

struct SenetaHeydePoint {
  double eps = 0.0;
  double ratio = 0.0;
  double std_error = 0.0;
  double std_error_independent = 0.0;
  EstimatorResult A;
  EstimatorResult tildeA;
};

std::vector<SenetaHeydePoint> seneta_heyde_ratio(const SampleTable& samples, const PunctureModel& model);
std::vector<SenetaHeydePoint> seneta_heyde_ratio(const LiouvilleParams& p, int n, std::span<const double> eps_list,
                                                 std::size_t n_samples, std::uint64_t seed, PunctureConfig config = {});

// P(sup_{u <= t} B_u <= beta) = 2 Phi(beta / sqrt t) - 1.
double reflection_probability(double beta, double t);

}  // namespace lqft

#endif
