#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "doctest.h"
#include "lqft/mc.hpp"
#include "lqft/errors.hpp"
#include "lqft/special.hpp"

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(lqft::philox4x32(A4{0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(lqft::philox4x32(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(lqft::philox4x32(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("seed plan streams are reproducible and distinct") {
  const lqft::SeedPlan plan{42};
  auto a = plan.stream(1, 5);
  auto b = plan.stream(1, 5);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  std::set<std::uint64_t> firsts;
  for (std::uint32_t t = 0; t < 4; ++t) {
    for (std::uint64_t i = 0; i < 64; ++i) firsts.insert(plan.stream(t, i)());
  }
  CHECK(firsts.size() == 256);
  CHECK_THROWS(plan.stream(1u << 16, 0));
  CHECK_THROWS(plan.stream(0, std::uint64_t{1} << 48));
}

TEST_CASE("run_estimator basics") {
  const lqft::SeedPlan plan{3};
  const auto c = lqft::run_estimator([](lqft::CounterRng&) { return 5.0; }, 1600, 16, plan);
  CHECK(c.estimate == 5.0);
  CHECK(c.std_error == 0.0);
  CHECK(c.n_samples == 1600);
  CHECK(c.seed == 3);

  const auto z = lqft::run_estimator([](lqft::CounterRng& r) { return r.normal(); }, 10000, 16, plan);
  CHECK(std::abs(z.estimate) < 3.0 / 100.0);
  CHECK(z.std_error == doctest::Approx(0.01).epsilon(0.4));

  CHECK_THROWS(lqft::run_estimator([](lqft::CounterRng&) { return 1.0; }, 100, 8, plan));
  CHECK_THROWS(lqft::run_estimator([](lqft::CounterRng&) { return 1.0; }, 1000, 16, plan));
}

TEST_CASE("run_estimator is bit-identical across worker counts") {
  const lqft::SeedPlan plan{11};
  auto task = [](lqft::CounterRng& r) { return std::exp(r.normal()) + r.normal(); };
  const auto one = lqft::run_estimator(task, 4096, 16, plan, 2, 1);
  const auto eight = lqft::run_estimator(task, 4096, 16, plan, 2, 8);
  CHECK(one.estimate == eight.estimate);
  CHECK(one.std_error == eight.std_error);
}

TEST_CASE("non-finite samples are reported with their index") {
  const lqft::SeedPlan plan{1};
  std::vector<double> v(64, 1.0);
  v[37] = std::nan("");
  try {
    lqft::summarize(v);
    FAIL("expected an error");
  } catch (const lqft::NumericalError& e) {
    CHECK(std::string(e.what()).find("37") != std::string::npos);
  }
}

TEST_CASE("stderr halves when the sample count quadruples") {
  const lqft::SeedPlan plan{5};
  auto task = [](lqft::CounterRng& r) { return r.normal() * r.normal() + 1.0; };
  double ratio_sum = 0.0;
  const int reps = 8;
  for (int k = 0; k < reps; ++k) {
    const auto small = lqft::run_estimator(task, 4000, 16, plan, 10 + k);
    const auto large = lqft::run_estimator(task, 16000, 16, plan, 20 + k);
    ratio_sum += large.std_error / small.std_error;
  }
  CHECK(std::abs(ratio_sum / reps - 0.5) < 0.125);
}

TEST_CASE("ks_statistic") {
  const lqft::SeedPlan plan{9};
  std::vector<double> s(10000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto r = plan.stream(0, i);
    s[i] = r.normal();
  }
  const double d = lqft::ks_statistic(s, lqft::normal_cdf);
  CHECK(d < lqft::ks_critical_value(s.size()));
  CHECK(lqft::ks_critical_value(10000) == doctest::Approx(0.0136).epsilon(0.01));

  std::vector<double> same(100, 0.0);
  CHECK(lqft::ks_statistic(same, lqft::normal_cdf) == doctest::Approx(0.5));

  // For equal-variance normals the KS distance equals the total-variation distance.
  const double shift = 0.5;
  std::vector<double> shifted(s);
  for (double& x : shifted) x += shift;
  const double tv = 2.0 * lqft::normal_cdf(shift / 2.0) - 1.0;
  CHECK(std::abs(lqft::ks_statistic(shifted, lqft::normal_cdf) - tv) < 0.02);
}

TEST_CASE("spearman rank correlation") {
  std::vector<double> x{1, 2, 3, 4};
  std::vector<double> y{0.1, 0.5, 0.7, 2.0};
  CHECK(lqft::spearman_rho(x, y) == doctest::Approx(1.0));
  std::vector<double> z{4.0, 1.0, 3.0, 2.0};
  CHECK(lqft::spearman_rho(x, z) == doctest::Approx(-0.4));
  CHECK(lqft::spearman_pvalue_upper(1.0, 4) == doctest::Approx(1.0 / 24.0));
  CHECK(lqft::spearman_pvalue_upper(-1.0, 4) == doctest::Approx(1.0));
}

TEST_CASE("ratio of coupled means has smaller error than the independent estimate") {
  const lqft::SeedPlan plan{13};
  std::vector<double> a(8000), b(8000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto r = plan.stream(0, i);
    const double common = r.normal();
    a[i] = 2.0 + common + 0.1 * r.normal();
    b[i] = 1.0 + 0.5 * common + 0.1 * r.normal();
  }
  const auto est = lqft::ratio_of_means(a, b);
  CHECK(est.ratio == doctest::Approx(2.0).epsilon(0.05));
  CHECK(est.std_error < est.std_error_independent);
}
