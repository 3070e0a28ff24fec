#ifndef RSCHED_OBJECTIVES_HPP
#define RSCHED_OBJECTIVES_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rsched/solvers.hpp"
#include "rsched/types.hpp"
#include "rsched/uncertainty.hpp"

namespace rsched {

/// Per-group scalars subtracted from group losses before the adversary's
/// maximization; typically the final per-group losses of a reference run.
struct Baselines {
  Baselines(std::vector<double> values, std::string source_tag);
  std::vector<double> b;
  std::string source_tag;
};

/// sup_{q in U} sum_i q_i (losses_i - b_i); the plain robust loss when no
/// baselines are given.
double robust_loss(const GroupLosses& losses, const UncertaintySet& set,
                   const std::optional<Baselines>& baselines = std::nullopt,
                   const SolverConfig& cfg = {});

/// sum_i weights_i * losses_i.
double weighted_loss(const GroupLosses& losses, const GroupWeights& weights);

/// Baselines file: one `group_id<TAB>baseline_loss` line per group, UTF-8, LF.
/// Loading aligns entries to `labels` and rejects missing or unknown ids.
Baselines load_baselines(std::istream& in, const std::vector<std::string>& labels,
                         std::string source_tag);
Baselines load_baselines_file(const std::string& path, const std::vector<std::string>& labels);
void save_baselines(std::ostream& out, const std::vector<std::string>& labels,
                    const std::vector<double>& values);

}  // namespace rsched

#endif
