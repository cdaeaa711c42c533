#ifndef LQFT_TOOLS_EXPERIMENTS_HPP
#define LQFT_TOOLS_EXPERIMENTS_HPP

#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace lqft::cli {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Check> checks;

  bool pass() const;
};

// Raised for numerical failures, naming the stage that failed.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace lqft::cli

#endif
