#include "rsched/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rsched/distributions.hpp"
#include "rsched/errors.hpp"
#include "rsched/log.hpp"

namespace rsched {

namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw ConfigError("config field `" + field + "`: " + why);
}

void expect_object(const json& j, const std::string& ctx) {
  if (!j.is_object()) bad_field(ctx, "expected a JSON object");
}

// Unknown keys are hard errors; silent hyperparameter typos would invalidate
// comparisons.
void check_keys(const json& j, const std::string& ctx,
                const std::vector<std::string>& required,
                const std::vector<std::string>& optional) {
  expect_object(j, ctx);
  for (const auto& key : required) {
    if (!j.contains(key)) bad_field(ctx + "." + key, "missing required key");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end()) {
      bad_field(ctx + "." + key, "unknown key");
    }
  }
}

double get_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) bad_field(ctx, "expected a number");
  return j.get<double>();
}

std::uint64_t get_uint(const json& j, const std::string& ctx) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    bad_field(ctx, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& ctx) {
  if (!j.is_string()) bad_field(ctx, "expected a string");
  return j.get<std::string>();
}

std::vector<double> get_double_vector(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty()) bad_field(ctx, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(get_number(x, ctx));
  return out;
}

std::vector<std::size_t> get_size_vector(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty()) bad_field(ctx, "expected a non-empty array of integers");
  std::vector<std::size_t> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(static_cast<std::size_t>(get_uint(x, ctx)));
  return out;
}

TaskSpec parse_task(const json& j, const std::string& ctx) {
  expect_object(j, ctx);
  if (!j.contains("type")) bad_field(ctx + ".type", "missing required key");
  const std::string type = get_string(j.at("type"), ctx + ".type");
  if (type == "quadratic_means") {
    check_keys(j, ctx, {"type", "mus", "sizes"}, {"noise"});
    QuadraticMeans task;
    task.mus = get_double_vector(j.at("mus"), ctx + ".mus");
    task.sizes = get_size_vector(j.at("sizes"), ctx + ".sizes");
    task.noise = j.contains("noise") ? get_number(j.at("noise"), ctx + ".noise") : 0.0;
    return task;
  }
  if (type == "linear_regression") {
    check_keys(j, ctx, {"type", "dim", "weights", "sizes"}, {"noise"});
    LinearRegression task;
    task.dim = static_cast<std::size_t>(get_uint(j.at("dim"), ctx + ".dim"));
    const auto& weights = j.at("weights");
    if (!weights.is_array() || weights.empty()) {
      bad_field(ctx + ".weights", "expected one weight vector per group");
    }
    for (const auto& row : weights) {
      task.weights.push_back(get_double_vector(row, ctx + ".weights"));
    }
    task.sizes = get_size_vector(j.at("sizes"), ctx + ".sizes");
    if (j.contains("noise")) {
      if (j.at("noise").is_number()) {
        task.noise.assign(task.weights.size(), get_number(j.at("noise"), ctx + ".noise"));
      } else {
        task.noise = get_double_vector(j.at("noise"), ctx + ".noise");
      }
    } else {
      task.noise.assign(task.weights.size(), 0.0);
    }
    return task;
  }
  if (type == "logistic") {
    check_keys(j, ctx, {"type", "dim", "separation", "sizes"}, {"hidden_units"});
    Logistic task;
    task.dim = static_cast<std::size_t>(get_uint(j.at("dim"), ctx + ".dim"));
    task.separation = get_double_vector(j.at("separation"), ctx + ".separation");
    task.sizes = get_size_vector(j.at("sizes"), ctx + ".sizes");
    task.hidden_units = j.contains("hidden_units")
                            ? static_cast<std::size_t>(
                                  get_uint(j.at("hidden_units"), ctx + ".hidden_units"))
                            : 0;
    return task;
  }
  bad_field(ctx + ".type", "unknown task type `" + type + "`");
}

SetSpec parse_set(const json& j, const std::string& ctx) {
  expect_object(j, ctx);
  if (!j.contains("type")) bad_field(ctx + ".type", "missing required key");
  const std::string type = get_string(j.at("type"), ctx + ".type");
  SetSpec spec;
  if (type == "singleton") {
    check_keys(j, ctx, {"type"}, {});
    spec.kind = SetSpec::Kind::Singleton;
  } else if (type == "full_simplex") {
    check_keys(j, ctx, {"type"}, {});
    spec.kind = SetSpec::Kind::FullSimplex;
  } else if (type == "cvar") {
    check_keys(j, ctx, {"type", "alpha"}, {});
    spec.kind = SetSpec::Kind::CVaR;
    spec.alpha = get_number(j.at("alpha"), ctx + ".alpha");
    if (!(spec.alpha > 0.0) || spec.alpha > 1.0) {
      bad_field(ctx + ".alpha", "must lie in (0, 1]");
    }
  } else if (type == "chi_square") {
    check_keys(j, ctx, {"type", "rho"}, {});
    spec.kind = SetSpec::Kind::ChiSquare;
    spec.rho = get_number(j.at("rho"), ctx + ".rho");
    if (!(spec.rho > 0.0)) bad_field(ctx + ".rho", "must be > 0");
  } else {
    bad_field(ctx + ".type", "unknown set type `" + type + "`");
  }
  return spec;
}

LrSchedule parse_schedule(const json& j, const std::string& ctx) {
  expect_object(j, ctx);
  if (!j.contains("type")) bad_field(ctx + ".type", "missing required key");
  const std::string type = get_string(j.at("type"), ctx + ".type");
  if (type == "inverse_sqrt") {
    check_keys(j, ctx, {"type", "peak", "warmup_steps"}, {});
    InverseSqrt s;
    s.peak = get_number(j.at("peak"), ctx + ".peak");
    s.warmup_steps = get_uint(j.at("warmup_steps"), ctx + ".warmup_steps");
    validate_schedule(LrSchedule{s});
    return s;
  }
  if (type == "step_decay") {
    check_keys(j, ctx, {"type", "base", "decay_every", "factor"}, {"warmup_steps"});
    StepDecay s;
    s.base = get_number(j.at("base"), ctx + ".base");
    s.warmup_steps =
        j.contains("warmup_steps") ? get_uint(j.at("warmup_steps"), ctx + ".warmup_steps") : 0;
    s.decay_every = get_uint(j.at("decay_every"), ctx + ".decay_every");
    s.factor = get_number(j.at("factor"), ctx + ".factor");
    validate_schedule(LrSchedule{s});
    return s;
  }
  bad_field(ctx + ".type", "unknown schedule type `" + type + "`");
}

MethodSpec parse_method(const json& j, const std::string& ctx) {
  expect_object(j, ctx);
  if (!j.contains("type")) bad_field(ctx + ".type", "missing required key");
  const std::string type = get_string(j.at("type"), ctx + ".type");
  if (type == "erm") {
    check_keys(j, ctx, {"type", "tau"}, {});
    ErmMethod m;
    m.tau = get_number(j.at("tau"), ctx + ".tau");
    if (!(m.tau > 0.0)) bad_field(ctx + ".tau", "must be > 0");
    return m;
  }
  if (type == "ibr") {
    check_keys(j, ctx, {"type", "set"}, {"baselines_path"});
    IbrMethod m;
    m.set = parse_set(j.at("set"), ctx + ".set");
    if (m.set.kind == SetSpec::Kind::FullSimplex) {
      bad_field(ctx + ".set",
                "ibr cannot use full_simplex: every epoch would train on a single group");
    }
    if (j.contains("baselines_path")) {
      m.baselines_path = get_string(j.at("baselines_path"), ctx + ".baselines_path");
    }
    return m;
  }
  if (type == "primal_dual") {
    check_keys(j, ctx, {"type", "set", "q_step"}, {"gradient_mode", "baselines_path"});
    PrimalDualMethod m;
    m.set = parse_set(j.at("set"), ctx + ".set");
    m.q_step = get_number(j.at("q_step"), ctx + ".q_step");
    if (!(m.q_step > 0.0)) bad_field(ctx + ".q_step", "must be > 0");
    if (j.contains("gradient_mode")) {
      const auto& gm = j.at("gradient_mode");
      const std::string gctx = ctx + ".gradient_mode";
      expect_object(gm, gctx);
      if (!gm.contains("type")) bad_field(gctx + ".type", "missing required key");
      const std::string gtype = get_string(gm.at("type"), gctx + ".type");
      if (gtype == "sample_from_q") {
        check_keys(gm, gctx, {"type"}, {});
      } else if (gtype == "importance_weight") {
        check_keys(gm, gctx, {"type"}, {"p0"});
        m.importance_weight = true;
        if (gm.contains("p0")) m.p0 = get_double_vector(gm.at("p0"), gctx + ".p0");
      } else {
        bad_field(gctx + ".type", "unknown gradient mode `" + gtype + "`");
      }
    }
    if (j.contains("baselines_path")) {
      m.baselines_path = get_string(j.at("baselines_path"), ctx + ".baselines_path");
    }
    return m;
  }
  bad_field(ctx + ".type", "unknown method type `" + type + "`");
}

void parse_shared(const json& j, ExperimentConfig& config, bool is_primal_dual,
                  bool budget_required) {
  config.schedule = parse_schedule(j.at("schedule"), "schedule");
  config.seed = get_uint(j.at("seed"), "seed");
  config.output_dir = get_string(j.at("output_dir"), "output_dir");
  if (config.output_dir.empty()) bad_field("output_dir", "must not be empty");
  if (j.contains("ema_lambda")) {
    config.ema_lambda = get_number(j.at("ema_lambda"), "ema_lambda");
    if (!(config.ema_lambda > 0.0) || config.ema_lambda > 1.0) {
      bad_field("ema_lambda", "must lie in (0, 1]");
    }
  }
  if (j.contains("solver")) {
    check_keys(j.at("solver"), "solver", {}, {"dual_tolerance", "max_iterations"});
    if (j.at("solver").contains("dual_tolerance")) {
      config.solver.dual_tolerance =
          get_number(j.at("solver").at("dual_tolerance"), "solver.dual_tolerance");
    }
    if (j.at("solver").contains("max_iterations")) {
      config.solver.max_iterations = static_cast<int>(
          get_uint(j.at("solver").at("max_iterations"), "solver.max_iterations"));
    }
    config.solver.validate();
  }
  if (j.contains("target_total")) {
    config.target_total = static_cast<std::size_t>(get_uint(j.at("target_total"), "target_total"));
  }
  if (j.contains("warm_start_ema")) {
    if (!j.at("warm_start_ema").is_boolean()) bad_field("warm_start_ema", "expected a boolean");
    config.warm_start_ema = j.at("warm_start_ema").get<bool>();
  }
  if (is_primal_dual) {
    if (j.contains("epochs")) bad_field("epochs", "only valid for methods erm and ibr");
    if (budget_required && !j.contains("steps")) {
      bad_field("steps", "required for method primal_dual");
    }
    if (j.contains("steps")) config.steps = get_uint(j.at("steps"), "steps");
    if (budget_required && config.steps == 0) bad_field("steps", "must be >= 1");
    if (j.contains("batch_size")) {
      config.batch_size = static_cast<std::size_t>(get_uint(j.at("batch_size"), "batch_size"));
      if (config.batch_size == 0) bad_field("batch_size", "must be >= 1");
    }
  } else {
    if (budget_required && !j.contains("epochs")) {
      bad_field("epochs", "required for methods erm and ibr");
    }
    if (j.contains("steps")) bad_field("steps", "only valid for method primal_dual");
    if (j.contains("batch_size")) bad_field("batch_size", "only valid for method primal_dual");
    if (j.contains("epochs")) config.epochs = get_uint(j.at("epochs"), "epochs");
    if (budget_required && config.epochs == 0) bad_field("epochs", "must be >= 1");
  }
}

json task_to_json(const TaskSpec& spec) {
  json j;
  if (const auto* qm = std::get_if<QuadraticMeans>(&spec)) {
    j["type"] = "quadratic_means";
    j["mus"] = qm->mus;
    j["noise"] = qm->noise;
    j["sizes"] = qm->sizes;
  } else if (const auto* lr = std::get_if<LinearRegression>(&spec)) {
    j["type"] = "linear_regression";
    j["dim"] = lr->dim;
    j["weights"] = lr->weights;
    j["noise"] = lr->noise;
    j["sizes"] = lr->sizes;
  } else {
    const auto& lg = std::get<Logistic>(spec);
    j["type"] = "logistic";
    j["dim"] = lg.dim;
    j["separation"] = lg.separation;
    j["sizes"] = lg.sizes;
    j["hidden_units"] = lg.hidden_units;
  }
  return j;
}

json set_to_json(const SetSpec& spec) {
  json j;
  switch (spec.kind) {
    case SetSpec::Kind::Singleton:
      j["type"] = "singleton";
      break;
    case SetSpec::Kind::FullSimplex:
      j["type"] = "full_simplex";
      break;
    case SetSpec::Kind::CVaR:
      j["type"] = "cvar";
      j["alpha"] = spec.alpha;
      break;
    case SetSpec::Kind::ChiSquare:
      j["type"] = "chi_square";
      j["rho"] = spec.rho;
      break;
  }
  return j;
}

json schedule_to_json(const LrSchedule& schedule) {
  json j;
  if (const auto* s = std::get_if<InverseSqrt>(&schedule)) {
    j["type"] = "inverse_sqrt";
    j["peak"] = s->peak;
    j["warmup_steps"] = s->warmup_steps;
  } else {
    const auto& sd = std::get<StepDecay>(schedule);
    j["type"] = "step_decay";
    j["base"] = sd.base;
    j["warmup_steps"] = sd.warmup_steps;
    j["decay_every"] = sd.decay_every;
    j["factor"] = sd.factor;
  }
  return j;
}

json method_to_json(const MethodSpec& method) {
  json j;
  if (const auto* erm = std::get_if<ErmMethod>(&method)) {
    j["type"] = "erm";
    j["tau"] = erm->tau;
  } else if (const auto* ibr = std::get_if<IbrMethod>(&method)) {
    j["type"] = "ibr";
    j["set"] = set_to_json(ibr->set);
    if (ibr->baselines_path) j["baselines_path"] = *ibr->baselines_path;
  } else {
    const auto& pd = std::get<PrimalDualMethod>(method);
    j["type"] = "primal_dual";
    j["set"] = set_to_json(pd.set);
    j["q_step"] = pd.q_step;
    json gm;
    gm["type"] = pd.importance_weight ? "importance_weight" : "sample_from_q";
    if (pd.importance_weight && pd.p0) gm["p0"] = *pd.p0;
    j["gradient_mode"] = gm;
    if (pd.baselines_path) j["baselines_path"] = *pd.baselines_path;
  }
  return j;
}

std::optional<Baselines> load_method_baselines(const MethodSpec& method,
                                               const std::vector<std::string>& labels) {
  const std::optional<std::string>* path = nullptr;
  if (const auto* ibr = std::get_if<IbrMethod>(&method)) path = &ibr->baselines_path;
  if (const auto* pd = std::get_if<PrimalDualMethod>(&method)) path = &pd->baselines_path;
  if (path == nullptr || !*path) return std::nullopt;
  try {
    return load_baselines_file(**path, labels);
  } catch (const std::exception& e) {
    throw ConfigError("config field `method.baselines_path`: " + std::string(e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write `" + path.string() + "`");
  out << text;
}

std::string format_g9(double x) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

}  // namespace

UncertaintySet bind_set(const SetSpec& spec, const GroupWeights& p_train) {
  switch (spec.kind) {
    case SetSpec::Kind::Singleton:
      return Singleton{p_train};
    case SetSpec::Kind::FullSimplex:
      return FullSimplex{};
    case SetSpec::Kind::CVaR:
      return CVaR{spec.alpha, p_train};
    case SetSpec::Kind::ChiSquare:
      return ChiSquareBall{spec.rho, p_train};
  }
  throw ConfigError("bind_set: invalid set kind");
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"task", "method", "schedule", "seed", "output_dir"},
             {"epochs", "steps", "batch_size", "ema_lambda", "solver", "target_total",
              "warm_start_ema"});
  ExperimentConfig config;
  config.task = parse_task(j.at("task"), "task");
  config.method = parse_method(j.at("method"), "method");
  parse_shared(j, config, std::holds_alternative<PrimalDualMethod>(config.method),
               /*budget_required=*/true);
  return config;
}

std::string echo_config_json(const ExperimentConfig& config) {
  json j;
  j["task"] = task_to_json(config.task);
  j["method"] = method_to_json(config.method);
  j["schedule"] = schedule_to_json(config.schedule);
  if (std::holds_alternative<PrimalDualMethod>(config.method)) {
    j["steps"] = config.steps;
    j["batch_size"] = config.batch_size;
  } else {
    j["epochs"] = config.epochs;
  }
  j["ema_lambda"] = config.ema_lambda;
  j["seed"] = config.seed;
  j["solver"] = {{"dual_tolerance", config.solver.dual_tolerance},
                 {"max_iterations", config.solver.max_iterations}};
  if (config.target_total) j["target_total"] = *config.target_total;
  j["warm_start_ema"] = config.warm_start_ema;
  j["output_dir"] = config.output_dir;
  return j.dump(2) + "\n";
}

RunSummary run_experiment(const ExperimentConfig& config) {
  Task task = [&] {
    try {
      return Task(config.task);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("config field `task`: " + std::string(e.what()));
    }
  }();
  const GroupedDataset data = task.generate(config.seed);
  const GroupWeights p_train = data.train_frequencies();
  const std::optional<Baselines> baselines = load_method_baselines(config.method, data.labels);

  log_info("running on " + std::to_string(data.group_count()) + " groups, " +
           std::to_string(data.total_size()) + " examples");

  TrainResult trained;
  UncertaintySet summary_set = Singleton{p_train};
  if (std::holds_alternative<ErmMethod>(config.method) ||
      std::holds_alternative<IbrMethod>(config.method)) {
    IbrOptions opt;
    opt.schedule = config.schedule;
    opt.epochs = config.epochs;
    opt.ema_lambda = config.ema_lambda;
    opt.seed = config.seed;
    opt.solver = config.solver;
    opt.target_total = config.target_total;
    opt.warm_start_ema = config.warm_start_ema;
    if (const auto* erm = std::get_if<ErmMethod>(&config.method)) {
      summary_set = Singleton{temperature_distribution(data.sizes(), erm->tau)};
    } else {
      summary_set = bind_set(std::get<IbrMethod>(config.method).set, p_train);
      opt.baselines = baselines;
    }
    trained = ibr_train(task, data, summary_set, opt);
  } else {
    const auto& pd = std::get<PrimalDualMethod>(config.method);
    summary_set = bind_set(pd.set, p_train);
    PrimalDualOptions opt;
    opt.schedule = config.schedule;
    opt.steps = config.steps;
    opt.q_step = pd.q_step;
    opt.batch_size = config.batch_size;
    if (pd.importance_weight) {
      opt.gradient_mode = ImportanceWeight{pd.p0 ? GroupWeights(*pd.p0) : p_train};
    }
    opt.ema_lambda = config.ema_lambda;
    opt.seed = config.seed;
    opt.solver = config.solver;
    opt.baselines = baselines;
    trained = primal_dual_train(task, data, summary_set, opt);
  }

  RunSummary summary;
  summary.labels = data.labels;
  summary.params = trained.params;
  summary.final_losses = task.group_losses(trained.params.theta, data);
  summary.q_final = trained.trajectory.back().q;
  summary.average_loss = dot(p_train.span(), summary.final_losses);
  summary.worst_group_loss =
      *std::max_element(summary.final_losses.begin(), summary.final_losses.end());
  summary.robust_loss = robust_loss(GroupLosses(summary.final_losses), summary_set,
                                    baselines, config.solver);
  summary.output_dir = config.output_dir;

  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trajectory.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write trajectory.csv");
    write_trajectory_csv(out, data.labels, trained.trajectory);
  }
  {
    std::ofstream out(dir / "final.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write final.csv");
    out << "group,final_loss,q_final\n";
    for (std::size_t g = 0; g < data.group_count(); ++g) {
      out << data.labels[g] << ',' << format_g9(summary.final_losses[g]) << ','
          << format_g9(summary.q_final[g]) << '\n';
    }
  }
  {
    std::ofstream out(dir / "baselines.tsv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write baselines.tsv");
    save_baselines(out, data.labels, summary.final_losses);
  }
  write_text_file(dir / "config.echo.json", echo_config_json(config));
  {
    std::ostringstream os;
    os << "average_loss " << format_g9(summary.average_loss) << '\n'
       << "worst_group_loss " << format_g9(summary.worst_group_loss) << '\n'
       << "robust_loss " << format_g9(summary.robust_loss) << '\n';
    write_text_file(dir / "summary.txt", os.str());
  }
  return summary;
}

CompareConfig parse_compare_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"task", "methods", "schedule", "seed", "output_dir"},
             {"epochs", "steps", "batch_size", "ema_lambda", "solver", "target_total",
              "warm_start_ema"});
  CompareConfig config;
  config.shared.task = parse_task(j.at("task"), "task");
  // Budgets may come from the top level or per entry; validated per entry.
  json shared = j;
  shared.erase("methods");
  if (shared.contains("epochs")) {
    config.shared.epochs = get_uint(shared.at("epochs"), "epochs");
    shared.erase("epochs");
  }
  if (shared.contains("steps")) {
    config.shared.steps = get_uint(shared.at("steps"), "steps");
    shared.erase("steps");
  }
  if (shared.contains("batch_size")) {
    config.shared.batch_size =
        static_cast<std::size_t>(get_uint(shared.at("batch_size"), "batch_size"));
    if (config.shared.batch_size == 0) bad_field("batch_size", "must be >= 1");
    shared.erase("batch_size");
  }
  parse_shared(shared, config.shared, /*is_primal_dual=*/false, /*budget_required=*/false);

  const auto& methods = j.at("methods");
  if (!methods.is_array() || methods.empty()) {
    bad_field("methods", "expected a non-empty array");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string ctx = "methods[" + std::to_string(i) + "]";
    json entry = methods[i];
    expect_object(entry, ctx);
    if (!entry.contains("name")) bad_field(ctx + ".name", "missing required key");
    CompareConfig::Entry out;
    out.name = get_string(entry.at("name"), ctx + ".name");
    if (out.name.empty() ||
        out.name.find_first_not_of(
            "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos) {
      bad_field(ctx + ".name", "must be a non-empty [A-Za-z0-9_-]+ identifier");
    }
    if (!names.insert(out.name).second) bad_field(ctx + ".name", "duplicate method name");
    entry.erase("name");
    if (entry.contains("epochs")) {
      out.epochs = get_uint(entry.at("epochs"), ctx + ".epochs");
      entry.erase("epochs");
    }
    if (entry.contains("steps")) {
      out.steps = get_uint(entry.at("steps"), ctx + ".steps");
      entry.erase("steps");
    }
    out.method = parse_method(entry, ctx);
    config.entries.push_back(std::move(out));
  }
  return config;
}

std::vector<RunSummary> run_compare(const CompareConfig& config, std::ostream& table_out) {
  std::vector<RunSummary> summaries;
  summaries.reserve(config.entries.size());
  const std::filesystem::path base(config.shared.output_dir);
  for (const auto& entry : config.entries) {
    ExperimentConfig run = config.shared;
    run.method = entry.method;
    const bool is_pd = std::holds_alternative<PrimalDualMethod>(entry.method);
    if (is_pd) {
      run.steps = entry.steps.value_or(config.shared.steps);
      if (run.steps == 0) {
        throw ConfigError("config field `steps`: required for primal_dual method `" +
                          entry.name + "`");
      }
    } else {
      run.epochs = entry.epochs.value_or(config.shared.epochs);
      if (run.epochs == 0) {
        throw ConfigError("config field `epochs`: required for method `" + entry.name + "`");
      }
    }
    run.output_dir = (base / entry.name).string();
    log_info("compare: running method `" + entry.name + "`");
    summaries.push_back(run_experiment(run));
    summaries.back().output_dir = entry.name;  // report by method name
  }

  const auto& labels = summaries.front().labels;
  std::filesystem::create_directories(base);
  std::ofstream csv(base / "compare.csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write compare.csv");
  csv << "method,average_loss,worst_group_loss";
  for (const auto& label : labels) csv << ",loss_" << label;
  csv << '\n';

  table_out << "method  average_loss  worst_group_loss  per_group_losses\n";
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto& s = summaries[i];
    csv << config.entries[i].name << ',' << format_g9(s.average_loss) << ','
        << format_g9(s.worst_group_loss);
    for (double loss : s.final_losses) csv << ',' << format_g9(loss);
    csv << '\n';
    table_out << config.entries[i].name << "  " << format_g9(s.average_loss) << "  "
              << format_g9(s.worst_group_loss) << "  ";
    for (std::size_t g = 0; g < s.final_losses.size(); ++g) {
      table_out << (g == 0 ? "" : " ") << format_g9(s.final_losses[g]);
    }
    table_out << '\n';
  }
  return summaries;
}

}  // namespace rsched
