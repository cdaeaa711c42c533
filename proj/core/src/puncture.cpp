#include "lqft/puncture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lqft/errors.hpp"
#include "lqft/special.hpp"

namespace lqft {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi); }

std::size_t limit_steps(const RadialPath& path, std::size_t steps) {
  if (path.x.empty()) throw DomainError("radial path is empty");
  if (path.step_max.size() + 1 != path.x.size()) throw DomainError("radial path: step_max must have one entry per step");
  if (steps == 0) return path.steps();
  if (steps > path.steps()) throw DomainError("radial path shorter than the requested horizon");
  return steps;
}

std::size_t grid_index(double s, double ds, std::size_t limit, const char* what) {
  const double k = s / ds;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * std::max(1.0, r) || r < 0.0 || r > static_cast<double>(limit)) {
    throw DomainError(std::string(what) + " is off the grid or outside the horizon");
  }
  return static_cast<std::size_t>(r);
}

// Sum over steps [j0, j1) of the trapezoid in e^{gamma x} times the lateral chaos row mass.
double chaos_steps(const RadialLateralSample& sample, std::size_t j0, std::size_t j1, double gamma, double x_ref) {
  const std::size_t nt = sample.grid.n_theta;
  const double cell = sample.ds * sample.grid.theta_step;
  const double shift = -0.5 * gamma * gamma * sample.lateral_variance;
  std::vector<double> row_mass(sample.rows, -1.0);
  double total = 0.0;
  for (std::size_t j = j0; j < j1; ++j) {
    const std::size_t row = sample.row_of_step(j);
    if (row_mass[row] < 0.0) {
      double m = 0.0;
      for (std::size_t c = 0; c < nt; ++c) m += std::exp(gamma * sample.y_at(row, c) + shift);
      row_mass[row] = m * cell;
    }
    const double ex = 0.5 * (std::exp(gamma * (sample.x[j] - x_ref)) + std::exp(gamma * (sample.x[j + 1] - x_ref)));
    total += ex * row_mass[row];
  }
  return total;
}

}  // namespace

RadialPath linear_path(double ds, std::vector<double> x) {
  if (x.empty()) throw DomainError("linear_path: empty path");
  RadialPath p;
  p.ds = ds;
  p.x = std::move(x);
  p.step_max.resize(p.x.size() - 1);
  for (std::size_t j = 0; j + 1 < p.x.size(); ++j) p.step_max[j] = std::max(p.x[j], p.x[j + 1]);
  return p;
}

std::optional<double> first_passage(const RadialPath& path, double level, std::size_t steps) {
  const std::size_t n = limit_steps(path, steps);
  if (path.x[0] >= level) return 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double s = path.ds * static_cast<double>(j);
    if (path.x[j + 1] >= level) return s + path.ds * (level - path.x[j]) / (path.x[j + 1] - path.x[j]);
    if (path.step_max[j] >= level) return s + 0.5 * path.ds;
  }
  return std::nullopt;
}

PartitionedPathStats partition_index(const RadialPath& path, std::span<const int> levels, std::size_t steps) {
  const std::size_t n = limit_steps(path, steps);
  PartitionedPathStats st;
  st.max_x = path.x[0];
  for (std::size_t j = 0; j < n; ++j) st.max_x = std::max({st.max_x, path.x[j + 1], path.step_max[j]});
  st.n = st.max_x <= 0.0 ? 0 : static_cast<int>(std::ceil(st.max_x));
  st.x_end = path.x[n];
  st.S = path.ds * static_cast<double>(n);
  for (int a : levels) {
    if (auto t = first_passage(path, static_cast<double>(a) - 1.0, n)) st.T_levels[a] = *t;
  }
  return st;
}

double martingale_weight(const RadialPath& path, int n, double S) {
  const std::size_t steps = grid_index(S, path.ds, path.steps(), "martingale_weight: S");
  const double level = static_cast<double>(n);
  if (path.x[0] > level) return 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    if (path.step_max[j] > level || path.x[j + 1] > level) return 0.0;
  }
  return level - path.x[steps];
}

double expected_martingale(int n) {
  const double s = std::sqrt(kCircleConstant);
  const double nd = static_cast<double>(n);
  return nd * normal_cdf(nd / s) + s * normal_pdf(nd / s);
}

double sample_theta_start(int n, CounterRng& rng) {
  if (n < 0) throw DomainError("Theta^n needs n >= 0");
  const double s = std::sqrt(kCircleConstant);
  const double nd = static_cast<double>(n);
  const double total = expected_martingale(n);
  const double u = uniform_open0(rng) * total;
  auto F = [&](double x) { return nd * normal_cdf(x / s) + s * normal_pdf(x / s); };
  double lo = -40.0 * s, hi = nd;
  double x = std::max(lo, nd - 2.0 * s);
  for (int it = 0; it < 200; ++it) {
    const double f = F(x) - u;
    if (f > 0.0) hi = x;
    else lo = x;
    const double d = (nd - x) * normal_pdf(x / s) / s;
    double next = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-14 * (1.0 + std::abs(x)) || hi - lo < 1e-14) return next;
    x = next;
  }
  return x;
}

RadialPath draw_theta_path(int n, double horizon, double ds, CounterRng& rng, std::optional<double> x0) {
  if (n < 0) throw DomainError("Theta^n needs n >= 0");
  if (!(ds > 0.0)) throw DomainError("ds must be positive");
  const double k = horizon / ds;
  if (!(horizon > 0.0) || std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
    throw DomainError("horizon / ds must be a positive integer");
  }
  const auto steps = static_cast<std::size_t>(std::round(k));
  const double nd = static_cast<double>(n);
  const double start = x0 ? *x0 : sample_theta_start(n, rng);
  if (start > nd) throw DomainError("Theta^n start must satisfy x_0 <= n");
  RadialPath p;
  p.ds = ds;
  p.x.resize(steps + 1);
  p.step_max.resize(steps);
  double v[3] = {nd - start, 0.0, 0.0};
  double r = v[0];
  p.x[0] = start;
  const double sd = std::sqrt(ds);
  for (std::size_t j = 0; j < steps; ++j) {
    for (double& c : v) c += sd * rng.normal();
    const double r2 = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    // Minimum of the Bessel-3 bridge: a Brownian bridge conditioned to stay positive.
    const double q = std::exp(-2.0 * r * r2 / ds);
    const double w = uniform_open0(rng) * (1.0 - q) + q;
    const double m = 0.5 * ((r + r2) - std::sqrt((r - r2) * (r - r2) - 2.0 * ds * std::log(w)));
    p.x[j + 1] = nd - r2;
    p.step_max[j] = nd - std::max(0.0, m);
    r = r2;
  }
  return p;
}

ThetaSampleRecord sample_theta_n(int n, double S, double ds, std::uint64_t seed) {
  CounterRng rng = SeedPlan{seed}.stream(0, 0);
  ThetaSampleRecord rec;
  rec.n = n;
  rec.ds = ds;
  rec.radial = draw_theta_path(n, S, ds, rng);
  rec.x0 = rec.radial.x[0];
  rec.weight_context = expected_martingale(n);
  rec.path.resize(rec.radial.x.size());
  for (std::size_t j = 0; j < rec.path.size(); ++j) rec.path[j] = static_cast<double>(n) - rec.radial.x[j];
  return rec;
}

double path_chaos_integral(const RadialLateralSample& sample, double a, double b, double gamma) {
  const std::size_t j0 = grid_index(a, sample.ds, sample.steps(), "window start");
  const std::size_t j1 = grid_index(b, sample.ds, sample.steps(), "window end");
  if (j1 < j0) throw DomainError("window end precedes its start");
  return chaos_steps(sample, j0, j1, gamma, 0.0);
}

double local_chaos_integral(const RadialLateralSample& sample, double a, double b, double gamma) {
  const std::size_t j0 = grid_index(a, sample.ds, sample.steps(), "window start");
  const std::size_t j1 = grid_index(b, sample.ds, sample.steps(), "window end");
  if (j1 < j0) throw DomainError("window end precedes its start");
  return chaos_steps(sample, j0, j1, gamma, sample.x[j0]);
}

std::optional<double> stopping_chaos_integral(const RadialLateralSample& sample, int n, double gamma) {
  if (n < 1) throw DomainError("stopping_chaos_integral needs n >= 1");
  RadialPath path{sample.ds, sample.x, sample.step_max};
  const double lo_level = static_cast<double>(n) - 2.0;
  const auto t0 = first_passage(path, lo_level);
  if (!t0) return std::nullopt;
  const auto t1 = first_passage(path, lo_level + 1.0);
  const std::size_t j0 = static_cast<std::size_t>(std::floor(*t0 / sample.ds));
  std::size_t j1 = t1 ? static_cast<std::size_t>(std::ceil(*t1 / sample.ds)) : sample.steps();
  j1 = std::clamp<std::size_t>(j1, j0 + 1, sample.steps());
  const double x_ref = *t0 == 0.0 ? sample.x[0] : lo_level;
  return chaos_steps(sample, j0, j1, gamma, x_ref);
}

PunctureModel::PunctureModel(const LiouvilleParams& p, std::vector<double> horizons, PunctureConfig config)
    : params_(p),
      horizons_(std::move(horizons)),
      config_(std::move(config)),
      lateral_(config_.lateral),
      far_([&] {
        const SeibergReport rep = validate_seiberg(p);
        if (rep.k != 1) throw UnsupportedConfiguration("puncture estimators need exactly one insertion with alpha = Q");
        if (!rep.sum_bound) throw DomainError("puncture estimators need sigma > 0");
        if (!rep.each_bound) throw DomainError("some alpha exceeds Q");
        const auto& z1 = p.insertions[static_cast<std::size_t>(puncture_index(p))].z;
        if (z1.norm() != 0.0) throw UnsupportedConfiguration("the puncture must sit at the origin");
        if (horizons_.empty()) throw DomainError("at least one horizon is required");
        std::vector<double> eps;
        for (double S : horizons_) {
          if (!(S >= std::numbers::ln2)) throw DomainError("horizons must be at least ln 2");
          eps.push_back(std::exp(-S));
        }
        ChaosGridConfig far = config_.far;
        far.region = ChaosRegion::far;
        far.lateral_modes = lateral_.grid().modes;
        return InsertionChaos(p, eps, far);
      }()) {
  for (double S : horizons_) steps_.push_back(lateral_.steps_for(S));
  max_steps_ = *std::max_element(steps_.begin(), steps_.end());
  const std::size_t deepest =
      static_cast<std::size_t>(std::max_element(horizons_.begin(), horizons_.end()) - horizons_.begin());
  const double eps_min = eps(deepest);
  const double eps_max = std::exp(-*std::min_element(horizons_.begin(), horizons_.end()));
  for (const auto& ins : p.insertions) {
    if (ins.z.norm() != 0.0 && ins.z.norm() - 1.0 <= eps_max) {
      throw DomainError("insertions must lie farther than eps from the unit disc");
    }
  }

  // Near-field weight e^{gamma H_eps(z)} |z|^{gamma Q} g(z) ds dtheta at step midpoints.
  const InsertionShift shift(p, eps_min);
  const LateralGrid& g = lateral_.grid();
  near_weight_.resize(max_steps_ * g.n_theta);
  const double cell = g.ds * g.theta_step;
  for (std::size_t j = 0; j < max_steps_; ++j) {
    const double s = (static_cast<double>(j) + 0.5) * g.ds;
    const double r = std::exp(-s);
    const double lg = log_metric_density(PlanePoint(r));
    for (std::size_t c = 0; c < g.n_theta; ++c) {
      const PlanePoint z = PlanePoint::polar(r, g.theta_step * static_cast<double>(c));
      near_weight_[j * g.n_theta + c] = std::exp(shift(z) - p.gamma * p.Q * s + lg) * cell;
    }
  }
  const PlanePoint probe(0.5);
  near_scale_.resize(horizons_.size());
  for (std::size_t k = 0; k < horizons_.size(); ++k) {
    near_scale_[k] = std::exp(InsertionShift(p, eps(k))(probe) - shift(probe));
  }
}

PunctureDraw PunctureModel::draw(CounterRng& rng, std::optional<int> theta_n) const {
  PunctureDraw d;
  std::vector<double> joint(far_.dimension());
  const double S = lateral_.grid().ds * static_cast<double>(max_steps_);
  if (theta_n) {
    const double x0 = sample_theta_start(*theta_n, rng);
    far_.draw_given_x0(x0, rng, joint);
    d.path = draw_theta_path(*theta_n, S, lateral_.grid().ds, rng, x0);
  } else {
    far_.draw(rng, joint);
    d.path.ds = lateral_.grid().ds;
    lateral_.draw_radial(S, rng, d.path.x, d.path.step_max, joint[0]);
  }
  std::vector<double> factors(far_.cells().size());
  far_.cell_factors(joint, factors);
  d.far.resize(horizons_.size());
  for (std::size_t k = 0; k < horizons_.size(); ++k) d.far[k] = far_.mass(factors, k);

  const LateralGrid& g = lateral_.grid();
  const std::size_t rows = lateral_.rows_for(S);
  std::vector<double> y;
  lateral_.draw_lateral(rows, rng, y,
                        std::span<const double>(joint).subspan(far_.mode_offset(), 2 * g.modes));
  const double gamma = params_.gamma;
  const double shift = -0.5 * gamma * gamma * lateral_.lateral_variance();
  std::vector<double> lat(rows * g.n_theta);
  for (std::size_t i = 0; i < lat.size(); ++i) lat[i] = std::exp(gamma * y[i] + shift);
  d.near.assign(max_steps_ + 1, 0.0);
  double ex_prev = std::exp(gamma * d.path.x[0]);
  for (std::size_t j = 0; j < max_steps_; ++j) {
    const double ex_next = std::exp(gamma * d.path.x[j + 1]);
    const double* w = near_weight_.data() + j * g.n_theta;
    const double* l = lat.data() + (j / g.steps_per_row) * g.n_theta;
    double m = 0.0;
    for (std::size_t c = 0; c < g.n_theta; ++c) m += w[c] * l[c];
    d.near[j + 1] = d.near[j] + 0.5 * (ex_prev + ex_next) * m;
    ex_prev = ex_next;
  }
  return d;
}

double PunctureModel::near_mass(const PunctureDraw& d, std::size_t level) const {
  return near_scale_.at(level) * d.near.at(steps_.at(level));
}

double PunctureModel::mass(const PunctureDraw& d, std::size_t level) const {
  return d.far.at(level) + near_mass(d, level);
}

SampleTable partition_samples(const PunctureModel& model, int n, std::size_t n_samples, std::uint64_t seed,
                              unsigned workers) {
  const LiouvilleParams& p = model.params();
  const ZeroMode zm(p.gamma, p.sigma, p.mu);
  const std::size_t levels = model.horizons().size();
  const SeedPlan plan{seed};
  const auto task = [&](std::size_t i, std::span<double> out) {
    CounterRng rng = plan.stream(0, i);
    const PunctureDraw d = model.draw(rng);
    for (std::size_t k = 0; k < levels; ++k) {
      const PartitionedPathStats st = partition_index(d.path, {}, model.steps(k));
      const double W = model.mass(d, k);
      const double z0 = zm.integral(W);
      const bool hit = st.n == n;
      double* o = out.data() + k * kTermColumns;
      o[kColA] = hit ? z0 : 0.0;
      o[kColTildeA] = hit ? (static_cast<double>(n) - st.x_end) * z0 : 0.0;
      o[kColB] = hit ? -zm.shifted(W, static_cast<double>(n)) : 0.0;
      o[kColSumA] = z0;
      o[kColSumB] = -zm.shifted(W, static_cast<double>(st.n));
      o[kColIndex] = static_cast<double>(st.n);
      o[kColW] = W;
    }
  };
  return run_samples(n_samples, levels * kTermColumns, task, workers);
}

PartitionTerms estimate_partition_terms(const LiouvilleParams& p, int n, double eps, std::size_t n_samples,
                                        std::uint64_t seed, PunctureConfig config) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const PunctureModel model(p, {std::log(1.0 / eps)}, std::move(config));
  const SampleTable t = partition_samples(model, n, n_samples, seed);
  PartitionTerms r;
  r.A = summarize(t.column(kColA), kMinBatches, seed);
  r.tildeA = summarize(t.column(kColTildeA), kMinBatches, seed);
  r.B = summarize(t.column(kColB), kMinBatches, seed);
  return r;
}

EstimatorResult theta_tilde_a(const PunctureModel& model, std::size_t level, int n, std::size_t n_samples,
                              std::uint64_t seed) {
  const LiouvilleParams& p = model.params();
  const ZeroMode zm(p.gamma, p.sigma, p.mu);
  const SeedPlan plan{seed};
  std::vector<double> v(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    CounterRng rng = plan.stream(1, i);
    const PunctureDraw d = model.draw(rng, n);
    const PartitionedPathStats st = partition_index(d.path, {}, model.steps(level));
    v[i] = st.n == n ? zm.integral(model.mass(d, level)) : 0.0;
  }
  EstimatorResult r = summarize(v, kMinBatches, seed);
  const double f = expected_martingale(n);
  r.estimate *= f;
  r.std_error *= f;
  return r;
}

std::vector<SenetaHeydePoint> seneta_heyde_ratio(const SampleTable& samples, const PunctureModel& model) {
  std::vector<SenetaHeydePoint> out;
  for (std::size_t k = 0; k < model.horizons().size(); ++k) {
    const double S = model.horizons()[k];
    std::vector<double> a = samples.column(k * kTermColumns + kColA);
    const std::vector<double> ta = samples.column(k * kTermColumns + kColTildeA);
    SenetaHeydePoint pt;
    pt.eps = model.eps(k);
    pt.A = summarize(a);
    pt.tildeA = summarize(ta);
    if (std::abs(pt.tildeA.estimate) <= 3.0 * pt.tildeA.std_error) {
      throw NumericalError("seneta_heyde_ratio: tilde-A is consistent with 0 at S = " + std::to_string(S));
    }
    for (double& x : a) x *= std::sqrt(S);
    const RatioEstimate r = ratio_of_means(a, ta);
    pt.ratio = r.ratio;
    pt.std_error = r.std_error;
    pt.std_error_independent = r.std_error_independent;
    out.push_back(pt);
  }
  return out;
}

std::vector<SenetaHeydePoint> seneta_heyde_ratio(const LiouvilleParams& p, int n, std::span<const double> eps_list,
                                                 std::size_t n_samples, std::uint64_t seed, PunctureConfig config) {
  std::vector<double> horizons;
  for (double e : eps_list) {
    if (!(e > 0.0 && e < 1.0)) throw DomainError("eps must lie in (0, 1)");
    horizons.push_back(std::log(1.0 / e));
  }
  const PunctureModel model(p, horizons, std::move(config));
  return seneta_heyde_ratio(partition_samples(model, n, n_samples, seed), model);
}

double reflection_probability(double beta, double t) {
  if (!(beta > 0.0) || !(t > 0.0)) throw DomainError("reflection_probability needs beta > 0 and t > 0");
  return std::erf(beta / std::sqrt(2.0 * t));
}

}  // namespace lqft
