#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace lqft::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string at_line(int line, const std::string& key) {
  return line > 0 ? "line " + std::to_string(line) + ": " + key : key;
}

double to_real(const std::string& v) {
  std::size_t pos = 0;
  const double x = std::stod(v, &pos);
  if (trim(v.substr(pos)) != "" || !std::isfinite(x)) throw std::invalid_argument("not a real number");
  return x;
}

long long to_int(const std::string& v) {
  std::size_t pos = 0;
  const long long x = std::stoll(v, &pos);
  if (trim(v.substr(pos)) != "") throw std::invalid_argument("not an integer");
  return x;
}

std::size_t to_count(const std::string& v) {
  const long long x = to_int(v);
  if (x < 0) throw std::invalid_argument("must be nonnegative");
  return static_cast<std::size_t>(x);
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_reals(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) out.push_back(to_real(s));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> words(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string w;
  while (ss >> w) out.push_back(to_real(w));
  return out;
}

std::vector<Insertion> to_insertions(const std::string& v) {
  std::vector<Insertion> out;
  for (const auto& item : split(v, ';')) {
    const auto w = words(item);
    if (w.size() != 3) throw std::invalid_argument("each insertion is `re im alpha`");
    out.push_back({PlanePoint(w[0], w[1]), w[2]});
  }
  return out;
}

std::vector<PlanePoint> to_points(const std::string& v) {
  std::vector<PlanePoint> out;
  for (const auto& item : split(v, ';')) {
    const auto w = words(item);
    if (w.size() != 2) throw std::invalid_argument("each point is `re im`");
    out.emplace_back(w[0], w[1]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m{
      {"experiment", [](auto& c, const auto& v) { c.experiment = v; }},
      {"gamma", [](auto& c, const auto& v) { c.gamma = to_real(v); }},
      {"mu", [](auto& c, const auto& v) { c.mu = to_real(v); }},
      {"insertions", [](auto& c, const auto& v) { c.insertions = to_insertions(v); }},
      {"eps", [](auto& c, const auto& v) { c.eps = to_reals(v); }},
      {"n", [](auto& c, const auto& v) { c.n = static_cast<int>(to_int(v)); }},
      {"n_list",
       [](auto& c, const auto& v) {
         c.n_list.clear();
         for (const auto& s : split(v, ',')) c.n_list.push_back(static_cast<int>(to_int(s)));
       }},
      {"n_samples", [](auto& c, const auto& v) { c.n_samples = to_count(v); }},
      {"batches", [](auto& c, const auto& v) { c.batches = to_count(v); }},
      {"seed", [](auto& c, const auto& v) { c.seed = to_count(v); }},
      {"workers", [](auto& c, const auto& v) { c.workers = static_cast<unsigned>(to_count(v)); }},
      {"output", [](auto& c, const auto& v) { c.output = v; }},
      {"ds", [](auto& c, const auto& v) { c.ds = to_real(v); }},
      {"n_theta", [](auto& c, const auto& v) { c.n_theta = to_count(v); }},
      {"cutoff", [](auto& c, const auto& v) { c.cutoff = to_real(v); }},
      {"inner_radius", [](auto& c, const auto& v) { c.inner_radius = to_real(v); }},
      {"radial_density", [](auto& c, const auto& v) { c.radial_density = to_real(v); }},
      {"n_angular", [](auto& c, const auto& v) { c.n_angular = to_count(v); }},
      {"refine_floor", [](auto& c, const auto& v) { c.refine_floor = to_real(v); }},
      {"quad_order", [](auto& c, const auto& v) { c.quad_order = static_cast<int>(to_int(v)); }},
      {"points", [](auto& c, const auto& v) { c.points = to_points(v); }},
      {"gamma_list", [](auto& c, const auto& v) { c.gamma_list = to_reals(v); }},
      {"mu_list", [](auto& c, const auto& v) { c.mu_list = to_reals(v); }},
      {"beta_list", [](auto& c, const auto& v) { c.beta_list = to_reals(v); }},
      {"t_list", [](auto& c, const auto& v) { c.t_list = to_reals(v); }},
      {"horizon_list", [](auto& c, const auto& v) { c.horizon_list = to_reals(v); }},
      {"horizon", [](auto& c, const auto& v) { c.horizon = to_real(v); }},
      {"tol_sigma", [](auto& c, const auto& v) { c.tol_sigma = to_real(v); }},
      {"tol_constant", [](auto& c, const auto& v) { c.tol_constant = to_real(v); }},
      {"tol_slope", [](auto& c, const auto& v) { c.tol_slope = to_real(v); }},
      {"tol_band", [](auto& c, const auto& v) { c.tol_band = to_real(v); }},
      {"ks_alpha", [](auto& c, const auto& v) { c.ks_alpha = to_real(v); }},
      {"spearman_alpha", [](auto& c, const auto& v) { c.spearman_alpha = to_real(v); }},
  };
  return m;
}

void require(bool ok, const std::map<std::string, int>& where, const std::string& key, const std::string& msg) {
  if (ok) return;
  const auto it = where.find(key);
  throw ConfigError(at_line(it == where.end() ? 0 : it->second, key) + ": " + msg);
}

ExperimentConfig parse_with_lines(const std::string& text, std::map<std::string, int>& where) {
  ExperimentConfig c;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    const std::string body = trim(raw.substr(0, raw.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected `key = value`");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(at_line(line, key) + ": unknown key");
    if (where.count(key)) throw ConfigError(at_line(line, key) + ": duplicate key");
    if (value.empty()) throw ConfigError(at_line(line, key) + ": missing value");
    try {
      it->second(c, value);
    } catch (const std::exception& e) {
      throw ConfigError(at_line(line, key) + ": bad value `" + value + "` (" + e.what() + ")");
    }
    where[key] = line;
  }
  return c;
}

}  // namespace

ChaosGridConfig ExperimentConfig::chaos_grid() const {
  ChaosGridConfig g;
  g.radial_density = radial_density;
  g.n_angular = n_angular;
  g.inner_radius = inner_radius;
  g.outer_radius = cutoff;
  g.refine_floor = refine_floor;
  g.quad_order = quad_order;
  return g;
}

LiouvilleParams ExperimentConfig::params() const { return derive_params(gamma, mu, insertions); }

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["gamma"] = gamma;
  j["mu"] = mu;
  nlohmann::json ins = nlohmann::json::array();
  for (const auto& i : insertions) ins.push_back({i.z.re, i.z.im, i.alpha});
  j["insertions"] = ins;
  j["eps"] = eps;
  j["n"] = n;
  j["n_list"] = n_list;
  j["n_samples"] = n_samples;
  j["batches"] = batches;
  j["seed"] = seed;
  j["workers"] = workers;
  j["output"] = output;
  j["ds"] = ds;
  j["n_theta"] = n_theta;
  j["cutoff"] = cutoff;
  j["inner_radius"] = inner_radius;
  j["radial_density"] = radial_density;
  j["n_angular"] = n_angular;
  j["refine_floor"] = refine_floor;
  j["quad_order"] = quad_order;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back({p.re, p.im});
  j["points"] = pts;
  j["gamma_list"] = gamma_list;
  j["mu_list"] = mu_list;
  j["beta_list"] = beta_list;
  j["t_list"] = t_list;
  j["horizon_list"] = horizon_list;
  j["horizon"] = horizon;
  j["tol_sigma"] = tol_sigma;
  j["tol_constant"] = tol_constant;
  j["tol_slope"] = tol_slope;
  j["tol_band"] = tol_band;
  j["ks_alpha"] = ks_alpha;
  j["spearman_alpha"] = spearman_alpha;
  return j;
}

void validate(const ExperimentConfig& c, const std::map<std::string, int>& where) {
  const auto& names = experiment_names();
  require(std::find(names.begin(), names.end(), c.experiment) != names.end(), where, "experiment",
          c.experiment.empty() ? "missing" : "unknown experiment `" + c.experiment + "`");
  require(c.gamma > 0.0 && c.gamma < 2.0, where, "gamma", "must lie in the range (0, 2)");
  for (double g : c.gamma_list) require(g > 0.0 && g < 2.0, where, "gamma_list", "entries must lie in the range (0, 2)");
  require(c.mu > 0.0, where, "mu", "must be positive");
  for (double m : c.mu_list) require(m > 0.0, where, "mu_list", "entries must be positive");
  for (double e : c.eps) require(e > 0.0 && e < 1.0, where, "eps", "entries must lie in (0, 1)");
  require(c.n >= 0, where, "n", "must be nonnegative");
  for (int n : c.n_list) require(n >= 0, where, "n_list", "entries must be nonnegative");
  require(c.batches >= 16, where, "batches", "must be at least 16");
  require(c.n_samples >= c.batches, where, "n_samples", "must be at least the batch count");
  require(c.ds > 0.0, where, "ds", "must be positive");
  require(c.n_theta >= 4 && c.n_theta % 2 == 0, where, "n_theta", "must be an even number >= 4");
  require(c.cutoff > 1.0, where, "cutoff", "must exceed 1");
  require(c.inner_radius > 0.0 && c.inner_radius < 1.0, where, "inner_radius", "must lie in (0, 1)");
  require(c.radial_density > 0.0, where, "radial_density", "must be positive");
  require(c.n_angular >= 4, where, "n_angular", "must be at least 4");
  require(c.refine_floor > 0.0, where, "refine_floor", "must be positive");
  require(c.quad_order >= 1 && c.quad_order <= 16, where, "quad_order", "must lie in 1..16");
  for (double b : c.beta_list) require(b > 0.0, where, "beta_list", "entries must be positive");
  for (double t : c.t_list) require(t > 0.0, where, "t_list", "entries must be positive");
  for (double s : c.horizon_list) require(s > 0.0, where, "horizon_list", "entries must be positive");
  require(c.horizon > 0.0, where, "horizon", "must be positive");
  require(c.tol_sigma > 0.0, where, "tol_sigma", "must be positive");
  require(c.tol_constant > 0.0, where, "tol_constant", "must be positive");
  require(c.tol_slope > 0.0, where, "tol_slope", "must be positive");
  require(c.tol_band > 0.0, where, "tol_band", "must be positive");
  require(c.ks_alpha > 0.0 && c.ks_alpha < 1.0, where, "ks_alpha", "must lie in (0, 1)");
  require(c.spearman_alpha > 0.0 && c.spearman_alpha < 1.0, where, "spearman_alpha", "must lie in (0, 1)");

  const bool needs_insertions = c.experiment == "gamma-law" || c.experiment == "kpz-scan" ||
                                c.experiment == "partition-terms" || c.experiment == "seneta-heyde-ratio";
  if (needs_insertions) {
    require(!c.insertions.empty(), where, "insertions", "required by " + c.experiment);
    require(!c.eps.empty(), where, "eps", "required by " + c.experiment);
    const auto p = c.params();
    const auto rep = validate_seiberg(p);
    require(rep.sum_bound, where, "insertions", "sum of alphas must exceed 2Q");
    require(rep.each_bound, where, "insertions", "every alpha must be at most Q");
  }
  if (c.experiment == "partition-terms" || c.experiment == "seneta-heyde-ratio") {
    require(validate_seiberg(c.params()).k == 1, where, "insertions", "exactly one alpha must equal Q");
  }
  if (c.experiment == "circle-variance" || c.experiment == "covariance-check") {
    require(!c.eps.empty(), where, "eps", "required by " + c.experiment);
  }
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, int> where;
  ExperimentConfig c = parse_with_lines(text, where);
  validate(c, where);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace lqft::cli
