#ifndef RSCHED_OPTIM_HPP
#define RSCHED_OPTIM_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <variant>
#include <vector>

#include "rsched/objectives.hpp"
#include "rsched/solvers.hpp"
#include "rsched/tasks.hpp"
#include "rsched/types.hpp"
#include "rsched/uncertainty.hpp"

namespace rsched {

/// Per-group exponential moving average of observed losses,
/// L_hat_k <- lambda * loss + (1 - lambda) * L_hat_k, starting from zero.
class LossTracker {
 public:
  LossTracker(std::size_t groups, double lambda);

  void observe(std::size_t group, double loss);
  /// Replaces the zero cold start with externally computed group losses.
  void warm_start(const std::vector<double>& losses);

  double lambda() const { return lambda_; }
  const std::vector<double>& ema() const { return ema_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  double lambda_;
  std::vector<double> ema_;
  std::vector<std::uint64_t> counts_;
};

/// Per-group sample counts realizing one training epoch under q.
struct ResamplePlan {
  std::vector<std::size_t> counts;
  std::size_t target_total = 0;
  std::vector<bool> with_replacement;  // true where counts exceed the group size
};

/// counts_i = ceil(target_total * q_i), drawing with replacement wherever a
/// group is oversampled.
ResamplePlan make_resample_plan(const GroupWeights& q,
                                const std::vector<std::size_t>& group_sizes,
                                std::size_t target_total);

/// Linear warmup from 0 to peak, then peak * sqrt(warmup_steps / step).
struct InverseSqrt {
  double peak = 1e-2;
  std::uint64_t warmup_steps = 1;
};

/// Linear warmup to base, then base * factor^floor((step - warmup) / decay_every).
struct StepDecay {
  double base = 1e-2;
  std::uint64_t warmup_steps = 0;
  std::uint64_t decay_every = 1;
  double factor = 0.5;
};

using LrSchedule = std::variant<InverseSqrt, StepDecay>;

double lr_at(const LrSchedule& schedule, std::uint64_t step);
void validate_schedule(const LrSchedule& schedule);

struct ModelParams {
  std::vector<double> theta;
};

/// Deterministic parameter init for a task: zeros, except small random values
/// for the two-layer network (which has a flat saddle at zero).
ModelParams initial_params(const Task& task, std::uint64_t seed);

struct TrajectoryPoint {
  std::size_t epoch = 0;
  std::uint64_t step = 0;  // optimizer steps taken so far
  std::vector<double> q;
  std::vector<double> ema_loss;
  std::vector<double> group_loss;  // exact mean loss per group at current theta
  double lr = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<TrajectoryPoint> trajectory;
};

/// `epoch,step,group,q,ema_loss,true_group_loss,lr` with one row per
/// (epoch, group); floats at 9 significant digits, LF line endings.
void write_trajectory_csv(std::ostream& out, const std::vector<std::string>& labels,
                          const std::vector<TrajectoryPoint>& trajectory);

struct IbrOptions {
  LrSchedule schedule;
  std::size_t epochs = 1;
  double ema_lambda = 0.1;
  std::uint64_t seed = 0;
  SolverConfig solver;
  std::optional<Baselines> baselines;
  /// Epoch data budget; defaults to the dataset size.
  std::optional<std::size_t> target_total;
  /// Fill the EMA with a full-dataset loss pass before the first q-update
  /// instead of the zero cold start.
  bool warm_start_ema = false;
};

/// Iterated best response: per epoch, one pass of per-example SGD over a
/// shuffled resampling of the dataset under q^t (EMA updates interleaved),
/// then q^{t+1} = best_response(L_hat - b, set).
///
/// RNG discipline (fixed so runs are reproducible and replicable in tests):
/// a master mt19937_64(seed) yields one child seed per epoch; the child
/// engine samples groups in index order (uniform_int_distribution draws with
/// replacement, or a partial Fisher-Yates prefix without), then std::shuffle
/// of the concatenated epoch.
///
/// FullSimplex is rejected: a best-response epoch would train on a single
/// group. ChiSquare / CVaR sets must be centered at the dataset's p_train.
TrainResult ibr_train(const Task& task, const GroupedDataset& data,
                      const UncertaintySet& set, const IbrOptions& opt);

/// Exponentiated-gradient ascent step on the simplex:
/// q'_i proportional to q_i * exp(step * grad_i).
GroupWeights eg_update(const GroupWeights& q, std::span<const double> grad, double step);

/// Mini-batches drawn from the current q (unweighted gradients).
struct SampleFromQ {};
/// Mini-batches drawn from a fixed p0 with importance-weighted gradients.
struct ImportanceWeight {
  GroupWeights p0;
};
using GradientMode = std::variant<SampleFromQ, ImportanceWeight>;

struct PrimalDualOptions {
  LrSchedule schedule;
  std::uint64_t steps = 1;
  double q_step = 0.1;
  std::size_t batch_size = 1;
  GradientMode gradient_mode = SampleFromQ{};
  double ema_lambda = 0.1;
  std::uint64_t seed = 0;
  SolverConfig solver;
  std::optional<Baselines> baselines;
  /// Trajectory cadence in steps; defaults to one dataset pass worth.
  std::optional<std::uint64_t> record_every;
};

/// Primal-dual saddle-point training: per step, an SGD step on theta from an
/// unbiased mini-batch gradient, and an ascent step on q — exponentiated
/// gradient on the full simplex, projected gradient onto the chi-square ball,
/// or (for CVaR) a best-response update on the EMA losses.
TrainResult primal_dual_train(const Task& task, const GroupedDataset& data,
                              const UncertaintySet& set, const PrimalDualOptions& opt);

}  // namespace rsched

#endif
