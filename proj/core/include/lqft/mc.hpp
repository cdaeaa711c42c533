#ifndef LQFT_MC_HPP
#define LQFT_MC_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace lqft {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

// Counter-based generator: Philox keyed by the master seed, counter space split into
// a 64-bit stream id and a 64-bit draw counter. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t key, std::uint64_t stream) : key_(key), stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (available_ == 0) refill();
    return buffer_[2 - available_--];
  }

  // Marsaglia polar method; the second variate of each pair is cached.
  double normal();

  std::uint64_t key() const { return key_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int available_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Uniform on (0, 1], safe for logarithms.
inline double uniform_open0(CounterRng& rng) { return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53; }

inline double standard_normal(CounterRng& rng) { return rng.normal(); }

struct SeedPlan {
  std::uint64_t master_seed = 0;

  // Streams for distinct (task, index) pairs occupy disjoint counter ranges.
  CounterRng stream(std::uint32_t task, std::uint64_t index) const;
};

struct EstimatorResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMinBatches = 16;

// Batch means over contiguous batches whose sizes differ by at most one.
std::vector<double> batch_means(std::span<const double> values, std::size_t batches);

EstimatorResult summarize(std::span<const double> values, std::size_t batches = kMinBatches, std::uint64_t seed = 0);

// Standard error of mean(a) - mean(b) on paired samples.
double paired_difference_stderr(std::span<const double> a, std::span<const double> b,
                                std::size_t batches = kMinBatches);

struct RatioEstimate {
  double ratio = 0.0;
  double std_error = 0.0;
  // Same delta-method error with the covariance term dropped.
  double std_error_independent = 0.0;
};

RatioEstimate ratio_of_means(std::span<const double> numerator, std::span<const double> denominator,
                             std::size_t batches = kMinBatches);

// Row-major n_samples x width table; row i is the output of sample i.
struct SampleTable {
  std::size_t rows = 0;
  std::size_t width = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * width + j]; }
  std::vector<double> column(std::size_t j) const;
};

using VectorTask = std::function<void(std::size_t index, std::span<double> out)>;
using ScalarTask = std::function<double(CounterRng& rng)>;

// Evaluates task(i, row_i) for every i, split over workers in contiguous blocks.
// workers = 0 picks hardware concurrency. Rows are identical for any worker count.
SampleTable run_samples(std::size_t n_samples, std::size_t width, const VectorTask& task, unsigned workers = 1);

EstimatorResult run_estimator(const ScalarTask& task, std::size_t n_samples, std::size_t batches,
                              const SeedPlan& plan, std::uint32_t task_id = 0, unsigned workers = 1);

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// Asymptotic one-sample critical value sqrt(-ln(alpha/2)/2)/sqrt(n).
double ks_critical_value(std::size_t n, double alpha = 0.05);

double spearman_rho(std::span<const double> x, std::span<const double> y);

// P(rho >= observed) under independence; exact enumeration for n <= 9.
double spearman_pvalue_upper(double rho, std::size_t n);

}  // namespace lqft

#endif
