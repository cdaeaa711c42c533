#ifndef LQFT_TOOLS_CONFIG_HPP
#define LQFT_TOOLS_CONFIG_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lqft/liouville.hpp"

namespace lqft::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"covariance-check", "circle-variance",  "gmc-mass",
                                              "gamma-law",        "kpz-scan",         "bessel-check",
                                              "martingale-check", "partition-terms",  "seneta-heyde-ratio",
                                              "reflection-check"};
  return names;
}

struct ExperimentConfig {
  std::string experiment;
  double gamma = 1.0;
  double mu = 1.0;
  std::vector<Insertion> insertions;
  std::vector<double> eps;
  int n = 1;
  std::vector<int> n_list{1, 2};
  std::size_t n_samples = 10000;
  std::size_t batches = 16;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output = "lqft_result";

  // Field and chaos grids.
  double ds = 1.0 / 32.0;
  std::size_t n_theta = 32;
  double cutoff = 1e3;
  double inner_radius = 1e-3;
  double radial_density = 4.0;
  std::size_t n_angular = 16;
  double refine_floor = 1e-5;
  int quad_order = 3;
  std::vector<PlanePoint> points;

  std::vector<double> gamma_list{0.5, 1.0, 1.5};
  std::vector<double> mu_list{1.0, 2.0, 4.0, 8.0};
  std::vector<double> beta_list{0.5, 1.0, 2.0};
  std::vector<double> t_list{1.0, 4.0};
  std::vector<double> horizon_list{1.0, 4.0, 16.0, 64.0};
  double horizon = 4.0;

  // Pass/fail tolerances.
  double tol_sigma = 3.0;
  double tol_constant = 0.02;
  double tol_slope = 1e-12;
  double tol_band = 0.15;
  double ks_alpha = 0.05;
  double spearman_alpha = 0.05;

  ChaosGridConfig chaos_grid() const;
  LiouvilleParams params() const;
  nlohmann::json to_json() const;
};

// Parses `key = value` lines; `#` starts a comment. Unknown keys, duplicates and bad values
// raise ConfigError naming the line and the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Range checks on a parsed config; `where` maps keys to their source lines.
void validate(const ExperimentConfig& c, const std::map<std::string, int>& where = {});

}  // namespace lqft::cli

#endif
