#include "rsched/objectives.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace rsched {

Baselines::Baselines(std::vector<double> values, std::string tag)
    : b(std::move(values)), source_tag(std::move(tag)) {
  for (double x : b) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("Baselines: entries must be finite");
    }
  }
}

double robust_loss(const GroupLosses& losses, const UncertaintySet& set,
                   const std::optional<Baselines>& baselines, const SolverConfig& cfg) {
  if (!baselines) {
    return best_response(losses, set, cfg).objective;
  }
  if (baselines->b.size() != losses.size()) {
    throw std::invalid_argument("robust_loss: baseline dimension mismatch");
  }
  std::vector<double> shifted(losses.size());
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    shifted[i] = losses[i] - baselines->b[i];
  }
  return best_response(GroupLosses(std::move(shifted)), set, cfg).objective;
}

double weighted_loss(const GroupLosses& losses, const GroupWeights& weights) {
  if (losses.size() != weights.size()) {
    throw std::invalid_argument("weighted_loss: dimension mismatch");
  }
  return dot(weights.span(), losses.values());
}

Baselines load_baselines(std::istream& in, const std::vector<std::string>& labels,
                         std::string source_tag) {
  std::map<std::string, double> by_id;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("baselines line " + std::to_string(lineno) +
                               ": expected `group_id<TAB>baseline_loss`");
    }
    const std::string id = line.substr(0, tab);
    double value = 0.0;
    try {
      value = std::stod(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw std::runtime_error("baselines line " + std::to_string(lineno) +
                               ": unparsable loss value");
    }
    if (!by_id.emplace(id, value).second) {
      throw std::runtime_error("baselines: duplicate group id `" + id + "`");
    }
  }
  std::vector<double> values;
  values.reserve(labels.size());
  for (const auto& label : labels) {
    auto it = by_id.find(label);
    if (it == by_id.end()) {
      throw std::runtime_error("baselines: missing group id `" + label + "`");
    }
    values.push_back(it->second);
    by_id.erase(it);
  }
  if (!by_id.empty()) {
    throw std::runtime_error("baselines: unknown group id `" + by_id.begin()->first + "`");
  }
  return Baselines(std::move(values), std::move(source_tag));
}

Baselines load_baselines_file(const std::string& path, const std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("baselines: cannot open `" + path + "`");
  }
  return load_baselines(in, labels, path);
}

void save_baselines(std::ostream& out, const std::vector<std::string>& labels,
                    const std::vector<double>& values) {
  if (labels.size() != values.size()) {
    throw std::invalid_argument("save_baselines: dimension mismatch");
  }
  char buf[64];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", values[i]);
    out << labels[i] << '\t' << buf << '\n';
  }
}

}  // namespace rsched
