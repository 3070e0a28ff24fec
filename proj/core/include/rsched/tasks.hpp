#ifndef RSCHED_TASKS_HPP
#define RSCHED_TASKS_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rsched/types.hpp"

namespace rsched {

struct Example {
  std::vector<double> x;
  double y = 0.0;
};

/// N groups of (feature, target) examples with a shared feature dimension.
struct GroupedDataset {
  std::vector<std::vector<Example>> groups;
  std::vector<std::string> labels;
  std::size_t feature_dim = 0;

  std::size_t group_count() const { return groups.size(); }
  std::vector<std::size_t> sizes() const;
  std::size_t total_size() const;
  /// p_train derived from group sizes.
  GroupWeights train_frequencies() const;
};

/// Scalar location task: group i draws targets mu_i + noise, the model is a
/// single scalar, and the zero-noise group loss is exactly (theta - mu_i)^2.
struct QuadraticMeans {
  std::vector<double> mus;
  double noise = 0.0;
  std::vector<std::size_t> sizes;
};

/// y = w_i^T x + noise_i per group, x ~ N(0, I). Squared-error loss.
struct LinearRegression {
  std::size_t dim = 0;
  std::vector<std::vector<double>> weights;  // one true weight vector per group
  std::vector<double> noise;                 // one sigma per group
  std::vector<std::size_t> sizes;
};

/// Binary labels at per-group separation along a group-specific direction.
/// hidden_units == 0 trains a linear logistic model; > 0 a small two-layer
/// tanh network (non-convex).
struct Logistic {
  std::size_t dim = 0;
  std::vector<double> separation;
  std::vector<std::size_t> sizes;
  std::size_t hidden_units = 0;
};

using TaskSpec = std::variant<QuadraticMeans, LinearRegression, Logistic>;

/// A spec-bound model: parameter dimension, per-example loss and gradient,
/// and deterministic dataset generation.
class Task {
 public:
  explicit Task(TaskSpec spec);

  const TaskSpec& spec() const { return spec_; }
  std::size_t group_count() const;
  std::size_t param_dim() const;
  std::size_t feature_dim() const;

  GroupedDataset generate(std::uint64_t seed) const;

  /// Loss and gradient at theta for one example. grad must have param_dim()
  /// entries; throws if the result is non-finite.
  double loss_grad(std::span<const double> theta, const Example& ex,
                   std::span<double> grad) const;
  double loss(std::span<const double> theta, const Example& ex) const;

  /// Mean loss over each full group.
  std::vector<double> group_losses(std::span<const double> theta,
                                   const GroupedDataset& data) const;

 private:
  TaskSpec spec_;
};

/// Eight-way group-size mix used by the imbalanced synthetic benchmarks.
inline constexpr std::array<double, 8> kImbalancedProportions = {
    0.004, 0.006, 0.013, 0.081, 0.240, 0.274, 0.243, 0.136};

/// round(total * proportion_i) per group.
std::vector<std::size_t> scaled_sizes(std::span<const double> proportions, std::size_t total);

/// One CSV per group, rows `group_id,feature...,target`, written under `dir`
/// as `<label>.csv`; import reads the same layout back.
void export_dataset_csv(const GroupedDataset& data, const std::string& dir);
GroupedDataset import_dataset_csv(const std::vector<std::string>& paths);

}  // namespace rsched

#endif
