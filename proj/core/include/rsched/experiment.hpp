#ifndef RSCHED_EXPERIMENT_HPP
#define RSCHED_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rsched/optim.hpp"
#include "rsched/tasks.hpp"

namespace rsched {

/// Uncertainty set as configured; centers are bound to the dataset's p_train
/// at run time.
struct SetSpec {
  enum class Kind { Singleton, FullSimplex, CVaR, ChiSquare };
  Kind kind = Kind::Singleton;
  double rho = 0.0;    // ChiSquare
  double alpha = 1.0;  // CVaR
};

UncertaintySet bind_set(const SetSpec& spec, const GroupWeights& p_train);

struct ErmMethod {
  double tau = 1.0;
};

struct IbrMethod {
  SetSpec set;
  std::optional<std::string> baselines_path;
};

struct PrimalDualMethod {
  SetSpec set;
  bool importance_weight = false;
  std::optional<std::vector<double>> p0;  // importance sampling source; default p_train
  double q_step = 0.1;
  std::optional<std::string> baselines_path;
};

using MethodSpec = std::variant<ErmMethod, IbrMethod, PrimalDualMethod>;

struct ExperimentConfig {
  TaskSpec task;
  MethodSpec method;
  LrSchedule schedule;
  std::size_t epochs = 0;      // erm / ibr budget
  std::uint64_t steps = 0;     // primal_dual budget
  std::size_t batch_size = 1;  // primal_dual only
  double ema_lambda = 0.1;
  std::uint64_t seed = 0;
  SolverConfig solver;
  std::optional<std::size_t> target_total;
  bool warm_start_ema = false;
  std::string output_dir;
};

/// Strict JSON parsing: unknown keys, missing required keys, and invalid
/// method/set combinations are ConfigErrors naming the offending field.
ExperimentConfig parse_experiment_config(const std::string& json_text);
/// Fully resolved config (defaults filled in); feeding it back reproduces the
/// run byte for byte.
std::string echo_config_json(const ExperimentConfig& config);

struct RunSummary {
  std::vector<std::string> labels;
  ModelParams params;
  std::vector<double> final_losses;
  std::vector<double> q_final;
  double average_loss = 0.0;     // p_train-weighted
  double worst_group_loss = 0.0;
  double robust_loss = 0.0;      // under the configured set (and baselines)
  std::string output_dir;
};

/// Runs one experiment and writes trajectory.csv, final.csv, baselines.tsv,
/// config.echo.json and summary.txt into config.output_dir.
RunSummary run_experiment(const ExperimentConfig& config);

struct CompareConfig {
  ExperimentConfig shared;  // method field unused; per-entry methods below
  struct Entry {
    std::string name;
    MethodSpec method;
    std::optional<std::size_t> epochs;
    std::optional<std::uint64_t> steps;
  };
  std::vector<Entry> entries;
};

CompareConfig parse_compare_config(const std::string& json_text);

/// Runs every method on the shared task/seed, writes per-method artifacts
/// under `<output_dir>/<name>/` plus a joint `compare.csv`, and prints one
/// table row per method.
std::vector<RunSummary> run_compare(const CompareConfig& config, std::ostream& table_out);

}  // namespace rsched

#endif
