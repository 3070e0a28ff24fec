#include "rsched/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>

#include "rsched/errors.hpp"

namespace rsched {

LossTracker::LossTracker(std::size_t groups, double lambda)
    : lambda_(lambda), ema_(groups, 0.0), counts_(groups, 0) {
  if (groups == 0) throw std::invalid_argument("LossTracker: no groups");
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw std::invalid_argument("LossTracker: lambda must lie in (0, 1]");
  }
}

void LossTracker::observe(std::size_t group, double loss) {
  if (group >= ema_.size()) {
    throw std::invalid_argument("LossTracker::observe: group index out of range");
  }
  if (!std::isfinite(loss)) {
    throw std::invalid_argument("LossTracker::observe: non-finite loss");
  }
  ema_[group] = lambda_ * loss + (1.0 - lambda_) * ema_[group];
  ++counts_[group];
}

void LossTracker::warm_start(const std::vector<double>& losses) {
  if (losses.size() != ema_.size()) {
    throw std::invalid_argument("LossTracker::warm_start: dimension mismatch");
  }
  for (double x : losses) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("LossTracker::warm_start: non-finite loss");
    }
  }
  ema_ = losses;
}

ResamplePlan make_resample_plan(const GroupWeights& q,
                                const std::vector<std::size_t>& group_sizes,
                                std::size_t target_total) {
  const std::size_t n = q.size();
  if (group_sizes.size() != n) {
    throw std::invalid_argument("make_resample_plan: dimension mismatch");
  }
  if (target_total < n) {
    throw std::invalid_argument("make_resample_plan: target_total must be >= group count");
  }
  ResamplePlan plan;
  plan.target_total = target_total;
  plan.counts.resize(n);
  plan.with_replacement.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(target_total) * q[i];
    // Products meant to be integers drift a hair above them; do not let
    // 0.1 * 100 ceil to 11.
    const double fl = std::floor(x);
    auto c = static_cast<std::size_t>(x - fl <= 1e-9 ? fl : fl + 1.0);
    if (q[i] > 0.0 && c == 0) c = 1;
    plan.counts[i] = c;
    plan.with_replacement[i] = c > group_sizes[i];
  }
  return plan;
}

void validate_schedule(const LrSchedule& schedule) {
  if (const auto* s = std::get_if<InverseSqrt>(&schedule)) {
    if (!(s->peak > 0.0)) throw std::invalid_argument("InverseSqrt: peak must be > 0");
    if (s->warmup_steps == 0) {
      throw std::invalid_argument("InverseSqrt: warmup_steps must be >= 1");
    }
    return;
  }
  const auto& s = std::get<StepDecay>(schedule);
  if (!(s.base > 0.0)) throw std::invalid_argument("StepDecay: base must be > 0");
  if (s.decay_every == 0) throw std::invalid_argument("StepDecay: decay_every must be >= 1");
  if (!(s.factor > 0.0) || s.factor >= 1.0) {
    throw std::invalid_argument("StepDecay: factor must lie in (0, 1)");
  }
}

double lr_at(const LrSchedule& schedule, std::uint64_t step) {
  if (const auto* s = std::get_if<InverseSqrt>(&schedule)) {
    if (step < s->warmup_steps) {
      return s->peak * static_cast<double>(step) / static_cast<double>(s->warmup_steps);
    }
    return s->peak * std::sqrt(static_cast<double>(s->warmup_steps) / static_cast<double>(step));
  }
  const auto& s = std::get<StepDecay>(schedule);
  if (step < s.warmup_steps) {
    return s.base * static_cast<double>(step) / static_cast<double>(s.warmup_steps);
  }
  const std::uint64_t decays = (step - s.warmup_steps) / s.decay_every;
  return s.base * std::pow(s.factor, static_cast<double>(decays));
}

ModelParams initial_params(const Task& task, std::uint64_t seed) {
  ModelParams params;
  params.theta.assign(task.param_dim(), 0.0);
  if (const auto* lg = std::get_if<Logistic>(&task.spec()); lg && lg->hidden_units > 0) {
    // Zero is a flat saddle of the two-layer network; break it with small
    // deterministic noise.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> small(0.0, 0.1);
    for (double& t : params.theta) t = small(rng);
  }
  return params;
}

void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& labels,
                          const std::vector<TrajectoryPoint>& trajectory) {
  out << "epoch,step,group,q,ema_loss,true_group_loss,lr\n";
  char buf[160];
  for (const auto& pt : trajectory) {
    for (std::size_t g = 0; g < labels.size(); ++g) {
      std::snprintf(buf, sizeof(buf), "%zu,%llu,%s,%.9g,%.9g,%.9g,%.9g\n", pt.epoch,
                    static_cast<unsigned long long>(pt.step), labels[g].c_str(), pt.q[g],
                    pt.ema_loss[g], pt.group_loss[g], pt.lr);
      out << buf;
    }
  }
}

namespace {

struct TrainContext {
  std::size_t n = 0;
  GroupWeights p_train{std::vector<double>{1.0}};
  std::vector<double> baseline;
};

TrainContext validate_common(const Task& task, const GroupedDataset& data,
                             const UncertaintySet& set, const LrSchedule& schedule,
                             double ema_lambda, const std::optional<Baselines>& baselines,
                             const SolverConfig& solver) {
  if (data.group_count() == 0) throw ConfigError("training: dataset has no groups");
  for (const auto& g : data.groups) {
    if (g.empty()) throw ConfigError("training: dataset has an empty group");
  }
  if (task.group_count() != data.group_count()) {
    throw ConfigError("training: task and dataset group counts differ");
  }
  validate_schedule(schedule);
  solver.validate();
  if (!(ema_lambda > 0.0) || ema_lambda > 1.0) {
    throw ConfigError("training: ema_lambda must lie in (0, 1]");
  }
  TrainContext ctx;
  ctx.n = data.group_count();
  ctx.p_train = data.train_frequencies();
  if (auto gc = group_count(set); gc && *gc != ctx.n) {
    throw ConfigError("training: uncertainty set group count differs from dataset");
  }
  // The ball / ratio sets are defined around the training frequencies.
  const GroupWeights* center = nullptr;
  if (const auto* ball = std::get_if<ChiSquareBall>(&set)) center = &ball->center;
  if (const auto* cv = std::get_if<CVaR>(&set)) center = &cv->center;
  if (center != nullptr) {
    for (std::size_t i = 0; i < ctx.n; ++i) {
      if (std::abs((*center)[i] - ctx.p_train[i]) > 1e-9) {
        throw ConfigError("training: set center must equal the dataset p_train");
      }
    }
  }
  if (baselines) {
    if (baselines->b.size() != ctx.n) {
      throw ConfigError("training: baseline dimension mismatch");
    }
    ctx.baseline = baselines->b;
  } else {
    ctx.baseline.assign(ctx.n, 0.0);
  }
  return ctx;
}

using EpochItem = std::pair<std::uint32_t, std::uint32_t>;  // (group, example index)

std::vector<EpochItem> build_epoch(const GroupedDataset& data, const ResamplePlan& plan,
                                   std::mt19937_64& rng) {
  std::vector<EpochItem> items;
  items.reserve(std::accumulate(plan.counts.begin(), plan.counts.end(), std::size_t{0}));
  for (std::size_t g = 0; g < data.group_count(); ++g) {
    const std::size_t size = data.groups[g].size();
    const std::size_t count = plan.counts[g];
    if (count == 0) continue;
    if (plan.with_replacement[g]) {
      std::uniform_int_distribution<std::size_t> pick(0, size - 1);
      for (std::size_t j = 0; j < count; ++j) {
        items.emplace_back(static_cast<std::uint32_t>(g),
                           static_cast<std::uint32_t>(pick(rng)));
      }
    } else {
      // Partial Fisher-Yates: the first `count` entries of a fresh permutation.
      std::vector<std::uint32_t> idx(size);
      std::iota(idx.begin(), idx.end(), 0u);
      for (std::size_t j = 0; j < count; ++j) {
        std::uniform_int_distribution<std::size_t> pick(j, size - 1);
        std::swap(idx[j], idx[pick(rng)]);
        items.emplace_back(static_cast<std::uint32_t>(g), idx[j]);
      }
    }
  }
  std::shuffle(items.begin(), items.end(), rng);
  return items;
}

[[noreturn]] void diverged(const GroupedDataset& data, std::size_t group, std::uint64_t step) {
  throw TrainingDiverged("non-finite loss in group `" + data.labels[group] + "` at step " +
                         std::to_string(step));
}

}  // namespace

TrainResult ibr_train(const Task& task, const GroupedDataset& data,
                      const UncertaintySet& set, const IbrOptions& opt) {
  if (std::holds_alternative<FullSimplex>(set)) {
    throw ConfigError(
        "ibr: FullSimplex uncertainty set is not supported; every epoch would be "
        "spent on a single group");
  }
  TrainContext ctx = validate_common(task, data, set, opt.schedule, opt.ema_lambda,
                                     opt.baselines, opt.solver);
  if (opt.epochs == 0) throw ConfigError("ibr: epochs must be >= 1");
  const std::size_t target = opt.target_total.value_or(data.total_size());
  if (target < ctx.n) throw ConfigError("ibr: target_total must be >= group count");

  const std::vector<std::size_t> sizes = data.sizes();
  ModelParams params = initial_params(task, opt.seed);
  LossTracker tracker(ctx.n, opt.ema_lambda);
  if (opt.warm_start_ema) {
    tracker.warm_start(task.group_losses(params.theta, data));
  }
  GroupWeights q = ctx.p_train;
  std::mt19937_64 master(opt.seed);
  std::vector<double> grad(task.param_dim());
  std::vector<double> shifted(ctx.n);
  std::uint64_t step = 0;

  TrainResult result;
  result.trajectory.reserve(opt.epochs);
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    const ResamplePlan plan = make_resample_plan(q, sizes, target);
    std::mt19937_64 child(master());
    const auto items = build_epoch(data, plan, child);
    for (const auto& [g, j] : items) {
      double loss;
      try {
        loss = task.loss_grad(params.theta, data.groups[g][j], grad);
      } catch (const std::runtime_error&) {
        diverged(data, g, step);
      }
      const double lr = lr_at(opt.schedule, step);
      for (std::size_t c = 0; c < grad.size(); ++c) params.theta[c] -= lr * grad[c];
      tracker.observe(g, loss);
      ++step;
    }
    for (std::size_t i = 0; i < ctx.n; ++i) {
      shifted[i] = tracker.ema()[i] - ctx.baseline[i];
    }
    q = best_response(GroupLosses(shifted), set, opt.solver).q;
    result.trajectory.push_back({epoch, step, q.values(), tracker.ema(),
                                 task.group_losses(params.theta, data),
                                 lr_at(opt.schedule, step)});
  }
  result.params = std::move(params);
  return result;
}

GroupWeights eg_update(const GroupWeights& q, std::span<const double> grad, double step) {
  if (grad.size() != q.size()) {
    throw std::invalid_argument("eg_update: dimension mismatch");
  }
  // Shift by the extreme exponent so large gradients cannot overflow.
  const double m = step >= 0.0 ? *std::max_element(grad.begin(), grad.end())
                               : *std::min_element(grad.begin(), grad.end());
  std::vector<double> w(q.size());
  double z = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    w[i] = q[i] * std::exp(step * (grad[i] - m));
    z += w[i];
  }
  for (double& x : w) x /= z;
  return GroupWeights(std::move(w));
}

TrainResult primal_dual_train(const Task& task, const GroupedDataset& data,
                              const UncertaintySet& set, const PrimalDualOptions& opt) {
  TrainContext ctx = validate_common(task, data, set, opt.schedule, opt.ema_lambda,
                                     opt.baselines, opt.solver);
  if (opt.steps == 0) throw ConfigError("primal_dual: steps must be >= 1");
  if (!(opt.q_step > 0.0)) throw ConfigError("primal_dual: q_step must be > 0");
  if (opt.batch_size == 0) throw ConfigError("primal_dual: batch_size must be >= 1");
  const auto* iw = std::get_if<ImportanceWeight>(&opt.gradient_mode);
  if (iw != nullptr) {
    if (iw->p0.size() != ctx.n) {
      throw ConfigError("primal_dual: p0 dimension mismatch");
    }
    if (!iw->p0.strictly_positive()) {
      throw ConfigError("primal_dual: p0 entries must be strictly > 0");
    }
  }

  ModelParams params = initial_params(task, opt.seed);
  LossTracker tracker(ctx.n, opt.ema_lambda);
  GroupWeights q = ctx.p_train;
  std::mt19937_64 rng(opt.seed);
  const double batch = static_cast<double>(opt.batch_size);
  const std::uint64_t record_every = opt.record_every.value_or(
      std::max<std::uint64_t>(1, (data.total_size() + opt.batch_size - 1) / opt.batch_size));

  std::vector<double> grad(task.param_dim());
  std::vector<double> g_theta(task.param_dim());
  std::vector<double> g_q(ctx.n);
  TrainResult result;

  for (std::uint64_t step = 0; step < opt.steps; ++step) {
    std::fill(g_theta.begin(), g_theta.end(), 0.0);
    std::fill(g_q.begin(), g_q.end(), 0.0);
    const std::vector<double>& sample_from = iw ? iw->p0.values() : q.values();
    std::discrete_distribution<std::size_t> pick_group(sample_from.begin(), sample_from.end());
    for (std::size_t b = 0; b < opt.batch_size; ++b) {
      const std::size_t g = pick_group(rng);
      std::uniform_int_distribution<std::size_t> pick_example(0, data.groups[g].size() - 1);
      const Example& ex = data.groups[g][pick_example(rng)];
      double loss;
      try {
        loss = task.loss_grad(params.theta, ex, grad);
      } catch (const std::runtime_error&) {
        diverged(data, g, step);
      }
      const double w_theta = iw ? q[g] / iw->p0[g] : 1.0;
      for (std::size_t c = 0; c < grad.size(); ++c) g_theta[c] += w_theta * grad[c];
      g_q[g] += (loss - ctx.baseline[g]) / sample_from[g];
      tracker.observe(g, loss);
    }
    const double lr = lr_at(opt.schedule, step);
    for (std::size_t c = 0; c < g_theta.size(); ++c) {
      params.theta[c] -= lr * g_theta[c] / batch;
    }

    if (std::holds_alternative<Singleton>(set)) {
      // Nothing to ascend: the adversary has a single choice.
    } else if (std::holds_alternative<FullSimplex>(set)) {
      for (double& x : g_q) x /= batch;
      q = eg_update(q, g_q, opt.q_step);
    } else if (const auto* ball = std::get_if<ChiSquareBall>(&set)) {
      std::vector<double> ascent(ctx.n);
      for (std::size_t i = 0; i < ctx.n; ++i) {
        ascent[i] = q[i] + opt.q_step * g_q[i] / batch;
      }
      q = project_chi_square(ascent, *ball, opt.solver);
    } else {
      // CVaR: hybrid scheme, primal step on theta and best response on q.
      std::vector<double> shifted(ctx.n);
      for (std::size_t i = 0; i < ctx.n; ++i) {
        shifted[i] = tracker.ema()[i] - ctx.baseline[i];
      }
      q = best_response(GroupLosses(std::move(shifted)), set, opt.solver).q;
    }

    if ((step + 1) % record_every == 0 || step + 1 == opt.steps) {
      result.trajectory.push_back({result.trajectory.size(), step + 1, q.values(),
                                   tracker.ema(), task.group_losses(params.theta, data),
                                   lr});
    }
  }
  result.params = std::move(params);
  return result;
}

}  // namespace rsched
