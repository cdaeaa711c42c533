#include "experiments.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lqft/chaos.hpp"
#include "lqft/errors.hpp"
#include "lqft/field.hpp"
#include "lqft/puncture.hpp"

namespace lqft::cli {

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::vector<PlanePoint> default_points() {
  std::vector<PlanePoint> p;
  for (int k = 0; k < 20; ++k) p.push_back(PlanePoint::polar(0.15 * std::pow(1.22, k), 2.39996 * k));
  return p;
}

// W draws of the whole-sphere chaos with insertions at eps[0].
std::vector<double> chaos_masses(const ExperimentConfig& c, std::uint32_t task) {
  const InsertionChaos chaos(c.params(), {c.eps.front()}, c.chaos_grid());
  const SeedPlan plan{c.seed};
  const auto rows = run_samples(
      c.n_samples, 1,
      [&](std::size_t i, std::span<double> out) {
        CounterRng rng = plan.stream(task, i);
        std::vector<double> joint(chaos.dimension()), f(chaos.cells().size());
        chaos.draw(rng, joint);
        chaos.cell_factors(joint, f);
        out[0] = chaos.mass(f, 0);
      },
      c.workers);
  return rows.data;
}

ExperimentResult covariance_check(const ExperimentConfig& c) {
  const auto pts = c.points.empty() ? default_points() : c.points;
  const double eps = c.eps.front();
  const CircleAverageSampler sampler(pts, std::vector<double>(pts.size(), eps));
  const SeedPlan plan{c.seed};
  const std::size_t m = pts.size();
  const auto draws = run_samples(
      c.n_samples, m,
      [&](std::size_t i, std::span<double> out) {
        CounterRng rng = plan.stream(0, i);
        const auto v = sampler.draw(rng);
        std::copy(v.begin(), v.end(), out.begin());
      },
      c.workers);
  ExperimentResult r;
  r.columns = {"i", "j", "empirical", "model", "std_error", "z"};
  const auto& cov = sampler.covariance();
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < draws.rows; ++k) s += draws(k, i) * draws(k, j);
      const double emp = s / static_cast<double>(draws.rows);
      const double model = cov_circle_avg(pts[i], pts[j], eps);
      const double se =
          std::sqrt((cov(long(i), long(i)) * cov(long(j), long(j)) + model * model) / static_cast<double>(draws.rows));
      const double z = (emp - model) / se;
      worst = std::max(worst, std::abs(z));
      r.rows.push_back({double(i), double(j), emp, model, se, z});
    }
  }
  r.summary["entries"] = r.rows.size();
  r.summary["max_abs_z"] = worst;
  r.checks.push_back({"covariance_within_tolerance", worst < c.tol_sigma, "max |z| = " + fmt(worst)});
  return r;
}

ExperimentResult circle_variance(const ExperimentConfig& c) {
  ExperimentResult r;
  r.columns = {"eps", "variance", "constant", "error"};
  const double target = kCircleConstant;
  bool ok = true;
  for (double e : c.eps) {
    const double v = cov_circle_avg(PlanePoint(0.0), PlanePoint(0.0), e);
    const double k = v + std::log(e) + 0.5 * log_metric_density(PlanePoint(0.0));
    r.rows.push_back({e, v, k, k - target});
    ok = ok && std::abs(k - target) < c.tol_constant;
  }
  r.summary["target"] = target;
  r.checks.push_back({"constant_within_tolerance", ok, "target " + fmt(target)});
  return r;
}

ExperimentResult gmc_mass(const ExperimentConfig& c) {
  const double r0 = 0.5, r1 = 0.7, t1 = 0.25 * std::numbers::pi;
  const auto cells = polar_cells(PlanePoint(0.0), r0, r1, 0.0, t1, 8, 8);
  std::vector<PlanePoint> centers;
  double dmin = INFINITY;
  for (const auto& cell : cells) {
    centers.push_back(cell.center);
    dmin = std::min(dmin, cell.diameter);
  }
  const CircleAverageSampler sampler(centers, std::vector<double>(cells.size(), 0.5 * dmin));
  const double volume = (round_volume_disc(r1) - round_volume_disc(r0)) * t1 / (2.0 * std::numbers::pi);
  ExperimentResult r;
  r.columns = {"gamma", "estimate", "std_error", "expected", "z"};
  bool ok = true;
  for (std::size_t g = 0; g < c.gamma_list.size(); ++g) {
    const double gamma = c.gamma_list[g];
    const double Q = 2.0 / gamma + 0.5 * gamma;
    const SeedPlan plan{c.seed};
    const auto totals = run_samples(
        c.n_samples, 1,
        [&](std::size_t i, std::span<double> out) {
          CounterRng rng = plan.stream(static_cast<std::uint32_t>(g), i);
          FieldSample f;
          f.points = sampler.points();
          f.radii = sampler.radii();
          f.eps = 0.5 * dmin;
          f.values = sampler.draw(rng);
          out[0] = gmc_cells(f, gamma, Q, cells).total();
        },
        c.workers);
    const auto est = summarize(totals.data, c.batches, c.seed);
    const double expected = std::exp(0.5 * gamma * gamma * kCircleConstant) * volume;
    const double z = (est.estimate - expected) / est.std_error;
    r.rows.push_back({gamma, est.estimate, est.std_error, expected, z});
    ok = ok && std::abs(z) < c.tol_sigma;
  }
  r.summary["cell_volume"] = volume;
  r.checks.push_back({"expected_mass", ok, "all |z| < " + fmt(c.tol_sigma)});
  return r;
}

ExperimentResult gamma_law(const ExperimentConfig& c) {
  const auto w = chaos_masses(c, 1);
  const auto p = c.params();
  const auto rep = gamma_law_check(p, w, 1, c.seed, c.ks_alpha);
  ExperimentResult r;
  r.columns = {"index", "W", "Z"};
  for (std::size_t i = 0; i < w.size(); ++i) r.rows.push_back({double(i), w[i], rep.total_masses[i]});
  r.summary["ks"] = rep.ks;
  r.summary["ks_critical"] = rep.ks_critical;
  r.summary["mean"] = rep.mean;
  r.summary["mean_std_error"] = rep.mean_std_error;
  r.summary["analytic_mean"] = rep.analytic_mean;
  r.summary["shape"] = rep.shape;
  r.summary["rate"] = rep.rate;
  r.checks.push_back({"ks", rep.ks_pass(), "KS " + fmt(rep.ks) + " vs " + fmt(rep.ks_critical)});
  r.checks.push_back({"mean", rep.mean_pass(), "mean " + fmt(rep.mean) + " vs " + fmt(rep.analytic_mean)});
  return r;
}

ExperimentResult kpz_scan(const ExperimentConfig& c) {
  const auto w = chaos_masses(c, 1);
  ExperimentResult r;
  r.columns = {"mu", "estimate", "std_error", "log_mu", "log_estimate"};
  auto p = c.params();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (double mu : c.mu_list) {
    p.mu = mu;
    const auto e = reduced_correlation(p, w, c.batches);
    const double x = std::log(mu), y = std::log(e.estimate);
    r.rows.push_back({mu, e.estimate, e.std_error, x, y});
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(c.mu_list.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double expected = -p.sigma / p.gamma;
  r.summary["slope"] = slope;
  r.summary["expected_slope"] = expected;
  r.summary["slope_error"] = slope - expected;
  r.checks.push_back({"slope", c.mu_list.size() >= 2 && std::abs(slope - expected) < c.tol_slope,
                      "slope " + fmt(slope) + " vs " + fmt(expected)});
  return r;
}

ExperimentResult bessel_check(const ExperimentConfig& c) {
  const RadialLateralSampler sampler(RadialLateralConfig{c.ds, c.n_theta});
  const SeedPlan plan{c.seed};
  ExperimentResult r;
  r.columns = {"n", "theta", "theta_std_error", "weighted", "weighted_std_error", "z"};
  bool ok = true;
  for (int n : c.n_list) {
    const auto t = run_samples(
        c.n_samples, 3,
        [&](std::size_t i, std::span<double> out) {
          CounterRng rng = plan.stream(static_cast<std::uint32_t>(2 * n), i);
          const RadialPath tp = draw_theta_path(n, c.horizon, c.ds, rng);
          out[0] = partition_index(tp).n == n ? 1.0 : 0.0;
          CounterRng brng = plan.stream(static_cast<std::uint32_t>(2 * n + 1), i);
          RadialPath bp;
          bp.ds = c.ds;
          sampler.draw_radial(c.horizon, brng, bp.x, bp.step_max);
          out[1] = martingale_weight(bp, n, c.horizon);
          out[2] = partition_index(bp).n == n ? out[1] : 0.0;
        },
        c.workers);
    const auto theta = summarize(t.column(0), c.batches, c.seed);
    const auto ratio = ratio_of_means(t.column(2), t.column(1), c.batches);
    const double z = (theta.estimate - ratio.ratio) / std::hypot(theta.std_error, ratio.std_error);
    r.rows.push_back({double(n), theta.estimate, theta.std_error, ratio.ratio, ratio.std_error, z});
    ok = ok && std::abs(z) < c.tol_sigma;
  }
  r.checks.push_back({"theta_vs_weighted", ok, "event {max in (n-1, n]} at horizon " + fmt(c.horizon)});
  return r;
}

ExperimentResult martingale_check(const ExperimentConfig& c) {
  const RadialLateralSampler sampler(RadialLateralConfig{c.ds, c.n_theta});
  const SeedPlan plan{c.seed};
  const double S = *std::max_element(c.horizon_list.begin(), c.horizon_list.end());
  const std::size_t h = c.horizon_list.size();
  const auto t = run_samples(
      c.n_samples, h,
      [&](std::size_t i, std::span<double> out) {
        CounterRng rng = plan.stream(0, i);
        RadialPath p;
        p.ds = c.ds;
        sampler.draw_radial(S, rng, p.x, p.step_max);
        for (std::size_t k = 0; k < h; ++k) out[k] = martingale_weight(p, c.n, c.horizon_list[k]);
      },
      c.workers);
  ExperimentResult r;
  r.columns = {"S", "estimate", "std_error", "expected", "z"};
  const double expected = expected_martingale(c.n);
  bool ok = true;
  for (std::size_t k = 0; k < h; ++k) {
    const auto e = summarize(t.column(k), c.batches, c.seed);
    const double z = (e.estimate - expected) / e.std_error;
    r.rows.push_back({c.horizon_list[k], e.estimate, e.std_error, expected, z});
    ok = ok && std::abs(z) < c.tol_sigma;
  }
  r.summary["expected"] = expected;
  r.checks.push_back({"constant_mean", ok, "E[f] = " + fmt(expected)});
  return r;
}

PunctureConfig puncture_config(const ExperimentConfig& c) {
  PunctureConfig pc;
  pc.lateral = RadialLateralConfig{c.ds, c.n_theta};
  pc.far = c.chaos_grid();
  return pc;
}

std::vector<double> horizons_of(const ExperimentConfig& c) {
  std::vector<double> h;
  for (double e : c.eps) h.push_back(std::log(1.0 / e));
  return h;
}

// Column of +-x (sign of its mean) so paired differences compare magnitudes.
std::vector<double> signed_column(const SampleTable& t, std::size_t col) {
  auto v = t.column(col);
  double m = 0.0;
  for (double x : v) m += x;
  if (m < 0.0) {
    for (double& x : v) x = -x;
  }
  return v;
}

ExperimentResult partition_terms(const ExperimentConfig& c) {
  const PunctureModel model(c.params(), horizons_of(c), puncture_config(c));
  const auto t = partition_samples(model, c.n, c.n_samples, c.seed, c.workers);
  ExperimentResult r;
  r.columns = {"eps", "S", "A", "A_std_error", "tildeA", "tildeA_std_error", "B", "B_std_error", "sumB",
               "sumB_std_error"};
  bool nonneg = true;
  std::vector<std::vector<double>> mags;
  for (std::size_t k = 0; k < model.horizons().size(); ++k) {
    const std::size_t o = k * kTermColumns;
    const auto A = summarize(t.column(o + kColA), c.batches, c.seed);
    const auto tA = summarize(t.column(o + kColTildeA), c.batches, c.seed);
    const auto B = summarize(t.column(o + kColB), c.batches, c.seed);
    const auto sB = summarize(t.column(o + kColSumB), c.batches, c.seed);
    r.rows.push_back({model.eps(k), model.horizons()[k], A.estimate, A.std_error, tA.estimate, tA.std_error,
                      B.estimate, B.std_error, sB.estimate, sB.std_error});
    for (double x : t.column(o + kColTildeA)) nonneg = nonneg && x >= 0.0;
    mags.push_back(signed_column(t, o + kColSumB));
  }
  r.checks.push_back({"tildeA_nonnegative", nonneg, "every draw"});
  if (mags.size() >= 2) {
    // No step may increase |sum B| by more than tol_sigma paired errors, and the last level
    // must be significantly below the first.
    bool envelope = true;
    for (std::size_t k = 1; k < mags.size(); ++k) {
      const double d = summarize(mags[k]).estimate - summarize(mags[k - 1]).estimate;
      envelope = envelope && d < c.tol_sigma * paired_difference_stderr(mags[k], mags[k - 1], c.batches);
    }
    const double drop = summarize(mags.front()).estimate - summarize(mags.back()).estimate;
    const double se = paired_difference_stderr(mags.front(), mags.back(), c.batches);
    r.summary["sumB_drop"] = drop;
    r.summary["sumB_drop_std_error"] = se;
    r.checks.push_back({"sumB_decreasing", envelope && drop > c.tol_sigma * se,
                        "drop " + fmt(drop) + " +- " + fmt(se)});
  }
  return r;
}

ExperimentResult seneta_heyde(const ExperimentConfig& c) {
  const PunctureModel model(c.params(), horizons_of(c), puncture_config(c));
  const auto t = partition_samples(model, c.n, c.n_samples, c.seed, c.workers);
  const auto pts = seneta_heyde_ratio(t, model);
  ExperimentResult r;
  r.columns = {"eps", "S", "ratio", "std_error", "std_error_independent", "A", "tildeA", "tildeA_std_error"};
  std::vector<double> k, closeness;
  bool crn = true;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& q = pts[i];
    r.rows.push_back({q.eps, model.horizons()[i], q.ratio, q.std_error, q.std_error_independent, q.A.estimate,
                      q.tildeA.estimate, q.tildeA.std_error});
    k.push_back(model.horizons()[i]);
    closeness.push_back(-std::abs(q.ratio - kSqrt2OverPi));
    crn = crn && q.std_error < q.std_error_independent;
  }
  const auto& last = pts.back();
  const double rel = std::abs(last.ratio - kSqrt2OverPi) / kSqrt2OverPi;
  r.summary["target"] = kSqrt2OverPi;
  r.summary["last_relative_error"] = rel;
  r.checks.push_back({"last_within_band", rel < c.tol_band, "relative error " + fmt(rel)});
  r.checks.push_back({"common_random_numbers", crn, "stderr_common < stderr_indep at every eps"});
  if (pts.size() >= 3) {
    const double rho = spearman_rho(k, closeness);
    const double pv = spearman_pvalue_upper(rho, k.size());
    r.summary["spearman_rho"] = rho;
    r.summary["spearman_p"] = pv;
    r.checks.push_back({"monotone_trend", pv <= c.spearman_alpha, "rho " + fmt(rho) + ", p " + fmt(pv)});
  }
  if (pts.size() >= 2) {
    const std::size_t o1 = (pts.size() - 2) * kTermColumns + kColTildeA, o2 = (pts.size() - 1) * kTermColumns + kColTildeA;
    const double d = pts[pts.size() - 1].tildeA.estimate - pts[pts.size() - 2].tildeA.estimate;
    const double se = std::hypot(pts[pts.size() - 1].tildeA.std_error, pts[pts.size() - 2].tildeA.std_error);
    r.summary["tildeA_last_step"] = d;
    r.summary["tildeA_last_step_paired_std_error"] = paired_difference_stderr(t.column(o2), t.column(o1), c.batches);
    r.checks.push_back({"tildeA_stable", std::abs(d) < c.tol_sigma * se, "step " + fmt(d) + " +- " + fmt(se)});
  }
  return r;
}

ExperimentResult reflection_check(const ExperimentConfig& c) {
  const RadialLateralSampler sampler(RadialLateralConfig{c.ds, c.n_theta});
  const SeedPlan plan{c.seed};
  const double T = *std::max_element(c.t_list.begin(), c.t_list.end());
  const std::size_t nt = c.t_list.size();
  // Running sup of B over [0, t] for each t, from paths started at 0.
  const auto sup = run_samples(
      c.n_samples, nt,
      [&](std::size_t i, std::span<double> out) {
        CounterRng rng = plan.stream(0, i);
        RadialPath p;
        p.ds = c.ds;
        sampler.draw_radial(T, rng, p.x, p.step_max, 0.0);
        for (std::size_t k = 0; k < nt; ++k) {
          out[k] = partition_index(p, {}, sampler.steps_for(c.t_list[k])).max_x;
        }
      },
      c.workers);
  ExperimentResult r;
  r.columns = {"beta", "t", "monte_carlo", "std_error", "exact", "bound", "z"};
  bool ok = true, bound_ok = true;
  const double n = static_cast<double>(sup.rows);
  for (double beta : c.beta_list) {
    for (std::size_t k = 0; k < nt; ++k) {
      const double t = c.t_list[k];
      double hits = 0.0;
      for (std::size_t i = 0; i < sup.rows; ++i) hits += sup(i, k) <= beta ? 1.0 : 0.0;
      const double mc = hits / n;
      const double exact = reflection_probability(beta, t);
      const double se = std::sqrt(exact * (1.0 - exact) / n);
      const double bound = kSqrt2OverPi * beta / std::sqrt(t);
      const double z = (mc - exact) / se;
      r.rows.push_back({beta, t, mc, se, exact, bound, z});
      ok = ok && std::abs(z) < c.tol_sigma;
      bound_ok = bound_ok && exact <= bound;
    }
  }
  r.checks.push_back({"closed_form_vs_mc", ok, "binomial z within " + fmt(c.tol_sigma)});
  r.checks.push_back({"upper_bound", bound_ok, "sqrt(2/pi) beta / sqrt(t)"});
  return r;
}

}  // namespace

bool ExperimentResult::pass() const {
  for (const auto& ch : checks) {
    if (!ch.pass) return false;
  }
  return true;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  try {
    if (c.experiment == "covariance-check") return covariance_check(c);
    if (c.experiment == "circle-variance") return circle_variance(c);
    if (c.experiment == "gmc-mass") return gmc_mass(c);
    if (c.experiment == "gamma-law") return gamma_law(c);
    if (c.experiment == "kpz-scan") return kpz_scan(c);
    if (c.experiment == "bessel-check") return bessel_check(c);
    if (c.experiment == "martingale-check") return martingale_check(c);
    if (c.experiment == "partition-terms") return partition_terms(c);
    if (c.experiment == "seneta-heyde-ratio") return seneta_heyde(c);
    if (c.experiment == "reflection-check") return reflection_check(c);
  } catch (const NumericalError& e) {
    throw StageError(c.experiment, e.what());
  }
  throw ConfigError("experiment: unknown experiment `" + c.experiment + "`");
}

}  // namespace lqft::cli
