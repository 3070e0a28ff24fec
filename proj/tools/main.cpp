#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsched/distributions.hpp"
#include "rsched/errors.hpp"
#include "rsched/experiment.hpp"
#include "rsched/log.hpp"
#include "rsched/solvers.hpp"

namespace {

using rsched::ConfigError;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config field `--config`: cannot open `" + path + "`");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

rsched::GroupWeights parse_center(const std::string& spec, std::size_t n) {
  if (spec == "uniform") return rsched::GroupWeights::uniform(n);
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
  if (values.size() != n) {
    throw ConfigError("config field `--center`: expected " + std::to_string(n) + " entries");
  }
  return rsched::GroupWeights(values);
}

struct SolveArgs {
  std::vector<double> v;
  double rho = -1.0;
  double alpha = -1.0;
  bool full_simplex = false;
  bool singleton = false;
  std::string center = "uniform";
  double dual_tolerance = 1e-10;
  int max_iterations = 200;

  rsched::SolverConfig solver() const { return {dual_tolerance, max_iterations}; }

  rsched::UncertaintySet set() const {
    const std::size_t n = v.size();
    const int picked = (rho >= 0.0) + (alpha >= 0.0) + full_simplex + singleton;
    if (picked != 1) {
      throw ConfigError(
          "config field `--rho|--alpha|--full-simplex|--singleton`: pick exactly one set");
    }
    if (full_simplex) return rsched::FullSimplex{};
    if (singleton) return rsched::Singleton{parse_center(center, n)};
    if (alpha >= 0.0) return rsched::CVaR(alpha, parse_center(center, n));
    return rsched::ChiSquareBall(rho, parse_center(center, n));
  }
};

void add_solve_flags(CLI::App* cmd, SolveArgs& args, bool projection) {
  cmd->add_option("--v", args.v, "loss vector, comma separated")
      ->required()
      ->delimiter(',');
  cmd->add_option("--rho", args.rho, "chi-square ball radius");
  if (!projection) {
    cmd->add_option("--alpha", args.alpha, "CVaR level in (0,1]");
    cmd->add_flag("--full-simplex", args.full_simplex, "maximize over the whole simplex");
    cmd->add_flag("--singleton", args.singleton, "fixed weighting at --center");
  }
  cmd->add_option("--center", args.center, "`uniform` or a comma separated distribution");
  cmd->add_option("--dual-tolerance", args.dual_tolerance, "bisection stopping width");
  cmd->add_option("--max-iterations", args.max_iterations, "bisection budget");
}

int run_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                const std::optional<std::string>& output) {
  rsched::ExperimentConfig config = rsched::parse_experiment_config(read_file(config_path));
  if (seed) config.seed = *seed;
  if (output) config.output_dir = *output;
  const rsched::RunSummary summary = rsched::run_experiment(config);
  std::printf("average_loss %.9g\n", summary.average_loss);
  std::printf("worst_group_loss %.9g\n", summary.worst_group_loss);
  std::printf("robust_loss %.9g\n", summary.robust_loss);
  rsched::log_info("artifacts written to " + summary.output_dir);
  return kExitOk;
}

int compare_command(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                    const std::optional<std::string>& output) {
  rsched::CompareConfig config = rsched::parse_compare_config(read_file(config_path));
  if (seed) config.shared.seed = *seed;
  if (output) config.shared.output_dir = *output;
  rsched::run_compare(config, std::cout);
  return kExitOk;
}

int best_response_command(const SolveArgs& args) {
  const rsched::BestResponse br =
      rsched::best_response(rsched::GroupLosses(args.v), args.set(), args.solver());
  nlohmann::json out;
  out["q"] = br.q.values();
  out["objective"] = br.objective;
  out["active"] = br.active;
  std::cout << out.dump() << '\n';
  return kExitOk;
}

int project_command(const SolveArgs& args) {
  if (args.rho < 0.0) throw ConfigError("config field `--rho`: required for project");
  const rsched::ChiSquareBall ball(args.rho, parse_center(args.center, args.v.size()));
  const rsched::GroupWeights q = rsched::project_chi_square(args.v, ball, args.solver());
  nlohmann::json out;
  out["q"] = q.values();
  out["divergence"] = rsched::chi_square_divergence(q, ball.center);
  std::cout << out.dump() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  rsched::log_level();  // parse ROBUST_SCHED_LOG up front so typos warn early

  CLI::App app{"robust-sched: distributionally robust training over grouped losses"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> output_override;

  CLI::App* run = app.add_subcommand("run", "run one configured experiment");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed", seed_override, "override the config seed");
  run->add_option("--output", output_override, "override the config output_dir");

  CLI::App* compare = app.add_subcommand("compare", "run a method list on one task/seed");
  compare->add_option("--config", config_path, "compare config (JSON)")->required();
  compare->add_option("--seed", seed_override, "override the config seed");
  compare->add_option("--output", output_override, "override the config output_dir");

  CLI::App* solve = app.add_subcommand("solve", "scriptable solver access");
  solve->require_subcommand(1);
  SolveArgs br_args;
  CLI::App* br = solve->add_subcommand("best-response", "argmax_q q^T v over a set");
  add_solve_flags(br, br_args, /*projection=*/false);
  SolveArgs proj_args;
  CLI::App* proj = solve->add_subcommand("project", "Euclidean projection onto a chi-square ball");
  add_solve_flags(proj, proj_args, /*projection=*/true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return run_command(config_path, seed_override, output_override);
    if (compare->parsed()) return compare_command(config_path, seed_override, output_override);
    if (br->parsed()) return best_response_command(br_args);
    if (proj->parsed()) return project_command(proj_args);
    std::fprintf(stderr, "no subcommand selected\n");
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const rsched::TrainingDiverged& e) {
    std::fprintf(stderr, "training diverged: %s\n", e.what());
    return kExitDiverged;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
