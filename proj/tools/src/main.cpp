#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "lqft/errors.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;

void write_csv(const std::string& path, const lqft::cli::ExperimentResult& r) {
  std::ofstream out(path);
  if (!out) throw lqft::cli::ConfigError("output: cannot write " + path);
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
  out << '\n';
  char buf[64];
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments for Liouville correlation functions on the sphere"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> out;
  run->add_option("config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--samples", samples, "Override n_samples");
  run->add_option("--out", out, "Output prefix for <prefix>.csv and <prefix>.json");
  CLI11_PARSE(app, argc, argv);

  lqft::cli::ExperimentConfig config;
  try {
    config = lqft::cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (samples) config.n_samples = *samples;
    if (out) config.output = *out;
    lqft::cli::validate(config);
  } catch (const lqft::cli::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lqft::DomainError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }

  const auto start = std::chrono::steady_clock::now();
  lqft::cli::ExperimentResult result;
  try {
    result = lqft::cli::run_experiment(config);
  } catch (const lqft::cli::StageError& e) {
    std::cerr << "numerical failure in stage " << e.what() << '\n';
    return kExitFail;
  } catch (const lqft::DomainError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lqft::UnsupportedConfiguration& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json j;
  j["schema"] = 1;
  j["experiment"] = config.experiment;
  j["seed"] = config.seed;
  j["config"] = config.to_json();
  j["results"] = result.summary;
  j["columns"] = result.columns;
  j["rows"] = result.rows.size();
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& c : result.checks) checks[c.name] = {{"pass", c.pass}, {"detail", c.detail}};
  j["checks"] = checks;
  j["pass"] = result.pass();
  j["wall_time"] = wall;

  try {
    write_csv(config.output + ".csv", result);
    std::ofstream js(config.output + ".json");
    if (!js) throw lqft::cli::ConfigError("output: cannot write " + config.output + ".json");
    js << j.dump(2) << '\n';
  } catch (const lqft::cli::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kExitConfig;
  }

  for (const auto& c : result.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << config.experiment << ' ' << c.name << ": " << c.detail << '\n';
  }
  return result.pass() ? kExitPass : kExitFail;
}
