#include "lqft/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "lqft/errors.hpp"

namespace lqft {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

double sample_variance(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / (n - 1.0);
}

double sample_covariance(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / (n - 1.0);
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c, std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kPhiloxW0;
      k[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

void CounterRng::refill() {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
      static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)};
  const auto out = philox4x32(ctr, key);
  ++block_;
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  available_ = 2;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * (static_cast<double>((*this)() >> 11) * 0x1.0p-53) - 1.0;
    v = 2.0 * (static_cast<double>((*this)() >> 11) * 0x1.0p-53) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

CounterRng SeedPlan::stream(std::uint32_t task, std::uint64_t index) const {
  if (task >= (1u << 16)) throw DomainError("SeedPlan: task id must be below 2^16");
  if (index >= (std::uint64_t{1} << 48)) throw DomainError("SeedPlan: sample index must be below 2^48");
  return CounterRng(master_seed, (static_cast<std::uint64_t>(task) << 48) | index);
}

std::vector<double> batch_means(std::span<const double> values, std::size_t batches) {
  if (batches == 0 || values.size() < batches) throw DomainError("batch_means: fewer samples than batches");
  std::vector<double> out(batches);
  const std::size_t n = values.size();
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * n / batches;
    const std::size_t hi = (b + 1) * n / batches;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    out[b] = s / static_cast<double>(hi - lo);
  }
  return out;
}

EstimatorResult summarize(std::span<const double> values, std::size_t batches, std::uint64_t seed) {
  if (batches < kMinBatches) throw DomainError("summarize: at least 16 batches required");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw NumericalError("non-finite sample at index " + std::to_string(i));
  }
  const auto means = batch_means(values, batches);
  EstimatorResult r;
  r.estimate = mean_of(values);
  r.std_error = std::sqrt(sample_variance(means) / static_cast<double>(batches));
  r.n_samples = values.size();
  r.seed = seed;
  return r;
}

double paired_difference_stderr(std::span<const double> a, std::span<const double> b, std::size_t batches) {
  if (a.size() != b.size()) throw DomainError("paired_difference_stderr: size mismatch");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return summarize(d, batches).std_error;
}

RatioEstimate ratio_of_means(std::span<const double> num, std::span<const double> den, std::size_t batches) {
  if (num.size() != den.size()) throw DomainError("ratio_of_means: size mismatch");
  const auto bn = batch_means(num, batches);
  const auto bd = batch_means(den, batches);
  const double mn = mean_of(num);
  const double md = mean_of(den);
  if (md == 0.0) throw NumericalError("ratio_of_means: zero denominator");
  const double bb = static_cast<double>(batches);
  const double vn = sample_variance(bn) / bb;
  const double vd = sample_variance(bd) / bb;
  const double cv = sample_covariance(bn, bd) / bb;
  RatioEstimate r;
  r.ratio = mn / md;
  const double rel_indep = vn / (mn * mn) + vd / (md * md);
  r.std_error_independent = std::abs(r.ratio) * std::sqrt(rel_indep);
  r.std_error = std::abs(r.ratio) * std::sqrt(std::max(0.0, rel_indep - 2.0 * cv / (mn * md)));
  return r;
}

std::vector<double> SampleTable::column(std::size_t j) const {
  std::vector<double> c(rows);
  for (std::size_t i = 0; i < rows; ++i) c[i] = data[i * width + j];
  return c;
}

SampleTable run_samples(std::size_t n_samples, std::size_t width, const VectorTask& task, unsigned workers) {
  SampleTable table;
  table.rows = n_samples;
  table.width = width;
  table.data.assign(n_samples * width, 0.0);
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, n_samples)));

  auto run_block = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) task(i, std::span<double>(table.data.data() + i * width, width));
  };
  if (workers == 1) {
    run_block(0, n_samples);
    return table;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * n_samples / workers;
    const std::size_t hi = (w + 1) * n_samples / workers;
    pool.emplace_back([&, w, lo, hi] {
      try {
        run_block(lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return table;
}

EstimatorResult run_estimator(const ScalarTask& task, std::size_t n_samples, std::size_t batches,
                              const SeedPlan& plan, std::uint32_t task_id, unsigned workers) {
  if (batches < kMinBatches) throw DomainError("run_estimator: at least 16 batches required");
  if (n_samples == 0 || n_samples % batches != 0) {
    throw DomainError("run_estimator: n_samples must be a positive multiple of batches");
  }
  const SampleTable table = run_samples(
      n_samples, 1,
      [&](std::size_t i, std::span<double> out) {
        CounterRng rng = plan.stream(task_id, i);
        out[0] = task(rng);
      },
      workers);
  return summarize(table.data, batches, plan.master_seed);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("ks_statistic: no samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("spearman_rho: need two equal-length samples");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double c = sample_covariance(rx, ry);
  return c / std::sqrt(sample_variance(rx) * sample_variance(ry));
}

double spearman_pvalue_upper(double rho, std::size_t n) {
  if (n < 2) throw DomainError("spearman_pvalue_upper: n < 2");
  if (n <= 9) {
    std::vector<double> base(n), perm(n);
    std::iota(base.begin(), base.end(), 1.0);
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::size_t hits = 0;
    std::size_t total = 0;
    do {
      for (std::size_t i = 0; i < n; ++i) perm[i] = base[p[i]];
      if (spearman_rho(base, perm) >= rho - 1e-12) ++hits;
      ++total;
    } while (std::next_permutation(p.begin(), p.end()));
    return static_cast<double>(hits) / static_cast<double>(total);
  }
  const double z = rho * std::sqrt(static_cast<double>(n) - 1.0);
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

}  // namespace lqft
