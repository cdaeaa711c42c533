#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "lqft/errors.hpp"
#include "lqft/liouville.hpp"
#include "oracles.hpp"

using lqft::Insertion;
using lqft::PlanePoint;

namespace {

const double kLn2Half = std::numbers::ln2 - 0.5;

lqft::LiouvilleParams four_point(double gamma = 1.0) {
  const double s3 = std::sqrt(3.0);
  const double Q = 2.0 / gamma + 0.5 * gamma;
  return lqft::derive_params(gamma, 1.0,
                             {{PlanePoint(0.0), Q}, {PlanePoint(2.0, 0.0), 1.0}, {PlanePoint(-1.0, s3), 1.0},
                              {PlanePoint(-1.0, -s3), 1.0}});
}

// Brute-force circle average of sum_i alpha_i G(z_i + eps e^{it}, z).
double circle_shift(PlanePoint z, const lqft::LiouvilleParams& p, double eps, int n) {
  double h = 0.0;
  for (const auto& ins : p.insertions) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      s += lqft::green_round(ins.z + PlanePoint::polar(eps, 2.0 * std::numbers::pi * (k + 0.5) / n), z);
    }
    h += ins.alpha * s / n;
  }
  return h;
}

// Trapezoid rule for a smooth integrand decaying at both ends.
template <class F>
double trapezoid(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) s += f(a + h * i);
  return s * h;
}

}  // namespace

TEST_CASE("derive_params") {
  auto p = lqft::derive_params(1.0, 1.0, {});
  CHECK(p.Q == 2.5);
  p = lqft::derive_params(1.0, 1.0, {{PlanePoint(0.0), 2.5}, {PlanePoint(2.0), 1.0}, {PlanePoint(3.0), 1.0},
                                     {PlanePoint(4.0), 1.0}});
  CHECK(p.sigma == doctest::Approx(0.5).epsilon(1e-15));
  p = lqft::derive_params(std::sqrt(2.0), 1.0, {});
  CHECK(p.Q == doctest::Approx(2.121320).epsilon(1e-6));
  CHECK_THROWS_AS(lqft::derive_params(2.5, 1.0, {}), lqft::DomainError);
  CHECK_THROWS_AS(lqft::derive_params(0.0, 1.0, {}), lqft::DomainError);
  CHECK_THROWS_AS(lqft::derive_params(1.0, 0.0, {}), lqft::DomainError);
}

TEST_CASE("seiberg report") {
  auto mk = [](std::vector<double> alphas) {
    std::vector<Insertion> ins;
    for (std::size_t i = 0; i < alphas.size(); ++i) ins.push_back({PlanePoint(double(i) * 2.0, 1.0), alphas[i]});
    return lqft::validate_seiberg(lqft::derive_params(1.0, 1.0, ins));
  };
  auto r = mk({2.5, 1, 1, 1});
  CHECK(r.sum_bound);
  CHECK(r.each_bound);
  CHECK(r.k == 1);
  r = mk({1, 1, 1});
  CHECK_FALSE(r.sum_bound);
  CHECK(r.each_bound);
  CHECK(r.k == 0);
  r = mk({3, 1, 1, 1});
  CHECK(r.sum_bound);
  CHECK_FALSE(r.each_bound);
  CHECK(r.k == 0);

  std::vector<double> a{2.5, 1.2, 0.7, 2.5, 3.1};
  const auto ref = mk(a);
  std::sort(a.begin(), a.end());
  do {
    const auto q = mk(a);
    CHECK(q.sum_bound == ref.sum_bound);
    CHECK(q.each_bound == ref.each_bound);
    CHECK(q.k == ref.k);
  } while (std::next_permutation(a.begin(), a.end()));
}

TEST_CASE("puncture index") {
  CHECK(lqft::puncture_index(four_point()) == 0);
  const auto none = lqft::derive_params(1.0, 1.0, {{PlanePoint(2.0), 1.0}});
  CHECK(lqft::puncture_index(none) == -1);
  const auto two = lqft::derive_params(1.0, 1.0, {{PlanePoint(0.0), 2.5}, {PlanePoint(2.0), 2.5}});
  CHECK_THROWS_AS(lqft::puncture_index(two), lqft::UnsupportedConfiguration);
}

TEST_CASE("insertion field at a far point equals the Green function") {
  const auto p = lqft::derive_params(1.0, 1.0, {{PlanePoint(0.0), 1.0}});
  CHECK(lqft::insertion_field(PlanePoint(1.0), p, 1e-6) == doctest::Approx(-0.153426).epsilon(1e-6));
  CHECK(lqft::insertion_field(PlanePoint(1.0), p, 1e-6) ==
        doctest::Approx(lqft::green_round(PlanePoint(1.0), PlanePoint(0.0))).epsilon(1e-9));
}

TEST_CASE("insertion field matches the brute-force circle average") {
  const auto p = four_point();
  for (double eps : {0.3, 0.05}) {
    for (PlanePoint z : {PlanePoint(0.6, 0.2), PlanePoint(1.5, -0.4), PlanePoint(-3.0, 2.0)}) {
      CAPTURE(eps);
      CHECK(lqft::insertion_field(z, p, eps) == doctest::Approx(circle_shift(z, p, eps, 4096)).epsilon(1e-9));
    }
  }
}

TEST_CASE("insertion field converges at rate eps^2") {
  const auto p = four_point();
  const PlanePoint z(0.7, 0.9);
  double h = 0.0;
  for (const auto& ins : p.insertions) h += ins.alpha * lqft::green_round(z, ins.z);
  double prev = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double eps = 0.1 * std::pow(0.5, k);
    const double err = std::abs(lqft::insertion_field(z, p, eps) - h);
    if (k > 0) CHECK(err / prev == doctest::Approx(0.25).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("insertion field blows up at the insertion rate") {
  const double gamma = 1.3, alpha = 1.1;
  const PlanePoint z1(0.4, -0.2);
  const auto p = lqft::derive_params(gamma, 1.0, {{z1, alpha}, {PlanePoint(3.0, 1.0), 0.8}});
  auto log_weight = [&](double d) { return gamma * lqft::insertion_field(z1 + PlanePoint(d, 0.0), p, 1e-9); };
  const double d0 = 1e-3, d1 = 1e-5;
  const double slope = (log_weight(d1) - log_weight(d0)) / (std::log(d1) - std::log(d0));
  CHECK(slope == doctest::Approx(-gamma * alpha).epsilon(0.02));
}

TEST_CASE("insertion field edge cases") {
  const auto empty = lqft::derive_params(1.0, 1.0, {});
  for (PlanePoint z : {PlanePoint(0.0), PlanePoint(2.0, -1.0), PlanePoint(1e5, 0.0)}) {
    CHECK(lqft::insertion_field(z, empty, 0.1) == 0.0);
  }
  const auto p = four_point();
  CHECK_THROWS_AS(lqft::insertion_field(PlanePoint(0.05, 0.0), p, 0.1), lqft::DomainError);
  CHECK_THROWS_AS(lqft::insertion_field(PlanePoint(1.0), p, 0.0), lqft::DomainError);
}

TEST_CASE("prefactor K") {
  const auto single = lqft::derive_params(1.0, 1.0, {{PlanePoint(0.0, 2.0), 1.0}});
  CHECK(lqft::prefactor_K(single) == doctest::Approx(0.16 * std::exp(kLn2Half / 2.0)).epsilon(1e-12));
  CHECK(lqft::prefactor_K(single) == doctest::Approx(0.17620).epsilon(1e-4));
  CHECK(lqft::prefactor_K(lqft::derive_params(1.0, 1.0, {})) == 1.0);

  auto p = four_point();
  const double k0 = lqft::prefactor_K(p);
  std::vector<std::size_t> order{0, 1, 2, 3};
  while (std::next_permutation(order.begin(), order.end())) {
    auto q = p;
    for (std::size_t i = 0; i < 4; ++i) q.insertions[i] = p.insertions[order[i]];
    CHECK(lqft::prefactor_K(q) == doctest::Approx(k0).epsilon(1e-13));
  }

  // Two insertions: the cross term is alpha_1 alpha_2 G(z_1, z_2).
  const PlanePoint z1(0.3, 0.1), z2(-1.2, 2.0);
  const auto pair = lqft::derive_params(1.2, 1.0, {{z1, 0.9}, {z2, 1.4}});
  auto ln_g = [](PlanePoint z) { return std::log(4.0) - 2.0 * std::log1p(z.norm() * z.norm()); };
  const double Q = pair.Q;
  const double expect = (-0.81 / 4 + Q * 0.9 / 2) * ln_g(z1) + (-1.96 / 4 + Q * 1.4 / 2) * ln_g(z2) +
                        0.9 * 1.4 * (-std::log(lqft::distance(z1, z2)) - 0.25 * ln_g(z1) - 0.25 * ln_g(z2) +
                                     std::numbers::ln2 - 0.5) +
                        kLn2Half / 2 * (0.81 + 1.96);
  CHECK(std::log(lqft::prefactor_K(pair)) == doctest::Approx(expect).epsilon(1e-12));

  p.insertions[2].z = p.insertions[1].z;
  CHECK_THROWS_AS(lqft::prefactor_K(p), lqft::DomainError);
}

TEST_CASE("zero-mode integrals match quadrature in c") {
  for (const auto& [gamma, sigma, mu, W] : std::vector<std::array<double, 4>>{
           {1.0, 0.5, 1.0, 1.0}, {1.0, 0.5, 2.0, 3.7}, {0.6, 1.3, 0.4, 0.02}, {1.8, 2.2, 5.0, 40.0}}) {
    auto f = [&](double c) { return std::exp(sigma * c - mu * std::exp(gamma * c) * W); };
    const double lo = -80.0 / sigma, hi = (8.0 - std::log(mu * W)) / gamma;
    const double i0 = trapezoid(f, lo, hi, 400000);
    CAPTURE(gamma);
    CAPTURE(sigma);
    CHECK(lqft::zero_mode_integral(gamma, sigma, mu, W) == doctest::Approx(i0).epsilon(1e-9));
    for (double n : {0.0, 1.0, 3.0}) {
      const double i1 = trapezoid([&](double c) { return (n + c) * f(c); }, lo, hi, 400000);
      CHECK(lqft::shifted_zero_mode_integral(gamma, sigma, mu, W, n) == doctest::Approx(i1).epsilon(1e-8).scale(i0));
    }
  }
  CHECK_THROWS_AS(lqft::zero_mode_integral(1.0, -0.1, 1.0, 1.0), lqft::DomainError);
  CHECK_THROWS_AS(lqft::zero_mode_integral(1.0, 0.5, 1.0, 0.0), lqft::DomainError);
}

TEST_CASE("zero-mode sampler follows its density") {
  const double gamma = 1.5, sigma = 0.8, mu = 0.7, W = 3.0;
  auto f = [&](double c) { return std::exp(sigma * c - mu * std::exp(gamma * c) * W); };
  // Tabulated CDF of the density by the trapezoid rule.
  const double lo = -80.0, hi = 6.0;
  const int n = 200000;
  const double h = (hi - lo) / n;
  std::vector<double> cdf(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) cdf[i] = cdf[i - 1] + 0.5 * h * (f(lo + h * (i - 1)) + f(lo + h * i));
  for (double& v : cdf) v /= cdf.back();
  auto F = [&](double c) {
    if (c <= lo) return 0.0;
    if (c >= hi) return 1.0;
    const double x = (c - lo) / h;
    const auto i = static_cast<std::size_t>(x);
    return cdf[i] + (x - double(i)) * (cdf[i + 1] - cdf[i]);
  };
  lqft::CounterRng rng(77, 0);
  std::vector<double> c(20000);
  for (double& v : c) v = lqft::sample_zero_mode(gamma, sigma, mu, W, rng);
  CHECK(lqft::ks_statistic(c, F) < lqft::ks_critical_value(c.size()));
}

TEST_CASE("reduced correlation") {
  auto p = four_point();
  const std::vector<double> ones(64, 1.0);
  const auto r = lqft::reduced_correlation(p, ones);
  CHECK(r.estimate == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
  CHECK(r.std_error == 0.0);

  lqft::CounterRng rng(5, 0);
  std::vector<double> w(160), w2(160);
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(rng.normal());
    w2[i] = 2.0 * w[i];
  }
  const double a = p.sigma / p.gamma;
  const double base = lqft::reduced_correlation(p, w).estimate;
  for (double mu : {2.0, 4.0, 8.0}) {
    auto q = p;
    q.mu = mu;
    CHECK(lqft::reduced_correlation(q, w).estimate == std::pow(mu, -a) * base);
  }
  CHECK(lqft::reduced_correlation(p, w2).estimate == doctest::Approx(std::pow(2.0, -a) * base).epsilon(1e-14));

  w[3] = 0.0;
  CHECK_THROWS_AS(lqft::reduced_correlation(p, w), lqft::DomainError);
  auto bad = p;
  bad.sigma = -0.5;
  CHECK_THROWS_AS(lqft::reduced_correlation(bad, ones), lqft::DomainError);
}

TEST_CASE("gamma law of the total mass") {
  const auto p = four_point();
  lqft::CounterRng rng(11, 0);
  std::vector<double> w(20000);
  for (double& v : w) v = std::exp(1.5 * rng.normal());
  const std::vector<double> w1(w.begin(), w.begin() + 10000), w2(w.begin() + 10000, w.end());
  const auto r1 = lqft::gamma_law_check(p, w1, 1, 3);
  const auto r2 = lqft::gamma_law_check(p, w2, 1, 4);
  CHECK(r1.n == 10000);
  CHECK(r1.analytic_mean == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r1.ks_pass());
  CHECK(r1.mean_pass());
  CHECK(r2.ks_pass());
  CHECK(std::abs(r1.ks - r2.ks) < r1.ks_critical);

  auto q = p;
  q.mu = 2.0;
  const auto r3 = lqft::gamma_law_check(q, w1, 1, 3);
  CHECK(r3.mean_pass());
  const double se = std::hypot(r1.mean_std_error / 2.0, r3.mean_std_error);
  CHECK(std::abs(r3.mean - r1.mean / 2.0) < 3.0 * se);
}

TEST_CASE("chaos with no insertions has the total round volume") {
  const auto p = lqft::derive_params(1.0, 1.0, {});
  const lqft::InsertionChaos chaos(p, {0.1});
  const double expected = std::exp(0.5 * kLn2Half) * 4.0 * std::numbers::pi;
  CHECK(chaos.expected_total(0) == doctest::Approx(expected).epsilon(1e-6));

  std::vector<double> joint(chaos.dimension()), f(chaos.cells().size()), w(4000);
  const lqft::SeedPlan plan{21};
  for (std::size_t i = 0; i < w.size(); ++i) {
    auto rng = plan.stream(0, i);
    chaos.draw(rng, joint);
    chaos.cell_factors(joint, f);
    w[i] = chaos.mass(f, 0);
    REQUIRE(w[i] > 0.0);
  }
  const auto est = lqft::summarize(w);
  CHECK(std::abs(est.estimate - expected) < 3.0 * est.std_error);
}

TEST_CASE("chaos mass grows as the excluded disc shrinks") {
  const auto p = four_point();
  const lqft::InsertionChaos chaos(p, {0.1, 0.01, 0.001});
  std::vector<double> joint(chaos.dimension()), f(chaos.cells().size());
  for (std::uint64_t i = 0; i < 20; ++i) {
    lqft::CounterRng rng(9, i);
    chaos.draw(rng, joint);
    chaos.cell_factors(joint, f);
    const double m0 = chaos.mass(f, 0), m1 = chaos.mass(f, 1), m2 = chaos.mass(f, 2);
    CHECK(m0 > 0.0);
    CHECK(m1 >= m0);
    CHECK(m2 >= m1);
  }
  CHECK(lqft::chaos_mass_with_insertions(p, 0.01, {}, 3) > 0.0);
}

TEST_CASE("expected chaos mass of one insertion matches the radial integral") {
  const double gamma = 1.0, alpha = 1.0, eps = 1e-4;
  const auto p = lqft::derive_params(gamma, 1.0, {{PlanePoint(0.0), alpha}});
  auto ln_g = [](double r) { return std::log(4.0) - 2.0 * std::log1p(r * r); };
  // 2 pi int r g(r) e^{gamma H_eps(r)} dr in u = ln r.
  auto integrand = [&](double u) {
    const double r = std::exp(u);
    const double h = alpha * (-std::log(std::max(r, eps)) - 0.25 * ln_g(r) - 0.25 * ln_g(eps) + kLn2Half);
    return 2.0 * std::numbers::pi * r * r * std::exp(ln_g(r) + gamma * h);
  };
  const double radial = trapezoid(integrand, -40.0, std::log(eps), 200000) +
                        trapezoid(integrand, std::log(eps), 30.0, 400000);
  const double expected = std::exp(0.5 * gamma * gamma * kLn2Half) * radial;
  const lqft::InsertionChaos chaos(p, {eps});
  CHECK(chaos.expected_total(0) == doctest::Approx(expected).epsilon(2e-4));

  // The round metric and Green function are invariant under rotations of the sphere, so the
  // total does not depend on where the insertion sits.
  for (PlanePoint z : {PlanePoint(0.3, 0.2), PlanePoint(2.0, -1.0)}) {
    const auto q = lqft::derive_params(gamma, 1.0, {{z, alpha}});
    const lqft::InsertionChaos moved(q, {eps});
    CAPTURE(z.re);
    CHECK(moved.expected_total(0) == doctest::Approx(expected).epsilon(2e-3));
  }
}

TEST_CASE("expected chaos mass is stable under grid refinement") {
  const auto p = four_point();
  const lqft::InsertionChaos coarse(p, {0.01});
  lqft::ChaosGridConfig fine_cfg;
  fine_cfg.radial_density = 8.0;
  fine_cfg.n_angular = 32;
  fine_cfg.quad_order = 5;
  fine_cfg.refine_floor = 1e-6;
  const lqft::InsertionChaos fine(p, {0.01}, fine_cfg);
  CHECK(coarse.expected_total(0) == doctest::Approx(fine.expected_total(0)).epsilon(2e-3));
}

TEST_CASE("far region couples to the unit-circle modes") {
  const auto p = four_point();
  lqft::ChaosGridConfig cfg;
  cfg.region = lqft::ChaosRegion::far;
  cfg.lateral_modes = 8;
  const lqft::InsertionChaos chaos(p, {std::exp(-8.0)}, cfg);
  CHECK(chaos.cell_offset() == 1);
  CHECK(chaos.dimension() == 1 + chaos.cells().size() + 16);
  for (const auto& c : chaos.cells()) CHECK(c.point.norm() > 1.0);
  CHECK(chaos.covariance()(0, 0) == doctest::Approx(kLn2Half).epsilon(1e-15));

  std::vector<double> joint(chaos.dimension());
  lqft::CounterRng rng(4, 0);
  for (int i = 0; i < 5; ++i) {
    chaos.draw_given_x0(0.37, rng, joint);
    CHECK(joint[0] == 0.37);
  }

  // Mode covariance against the brute-force Fourier projection of the circle-average covariance.
  const std::size_t i = 17;
  const auto& c = chaos.cells()[i];
  const int n = 512;
  for (int m : {1, 3}) {
    double a = 0.0, b = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / n;
      const double g = oracle::circle_covariance(PlanePoint::polar(1.0, t), 1e-9, c.point, c.radius, 64);
      a += 2.0 * g * std::cos(m * t) / n;
      b += 2.0 * g * std::sin(m * t) / n;
    }
    const auto jc = static_cast<Eigen::Index>(chaos.mode_offset() + 2 * (m - 1));
    const auto ii = static_cast<Eigen::Index>(chaos.cell_offset() + i);
    CHECK(chaos.covariance()(ii, jc) == doctest::Approx(a).epsilon(1e-6).scale(1.0));
    CHECK(chaos.covariance()(ii, jc + 1) == doctest::Approx(b).epsilon(1e-6).scale(1.0));
  }

  auto inside = p;
  inside.insertions[1].z = PlanePoint(0.5, 0.0);
  CHECK_THROWS_AS(lqft::InsertionChaos(inside, {0.01}, cfg), lqft::UnsupportedConfiguration);
  const lqft::InsertionChaos whole(p, {0.01});
  CHECK_THROWS_AS(whole.draw_given_x0(0.0, rng, joint), lqft::DomainError);
}

TEST_CASE("chaos configuration errors") {
  const auto p = four_point();
  CHECK_THROWS_AS(lqft::InsertionChaos(p, {}), lqft::DomainError);
  CHECK_THROWS_AS(lqft::InsertionChaos(p, {1.5}), lqft::DomainError);
  auto big = p;
  big.insertions[1].alpha = 3.0;
  CHECK_THROWS_AS(lqft::InsertionChaos(big, {0.01}), lqft::DomainError);
  auto swallowed = p;
  swallowed.insertions[1].z = PlanePoint(0.05, 0.0);
  CHECK_THROWS_AS(lqft::InsertionChaos(swallowed, {0.1}), lqft::DomainError);
  lqft::ChaosGridConfig coarse;
  coarse.n_angular = 2;
  CHECK_THROWS_AS(lqft::InsertionChaos(p, {0.01}, coarse), lqft::DomainError);
}
