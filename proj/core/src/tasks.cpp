#include "rsched/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rsched/distributions.hpp"

namespace rsched {

namespace {

double stable_logistic_loss(double margin) {
  // log(1 + exp(-margin)) without overflow on either tail.
  if (margin < 0.0) return -margin + std::log1p(std::exp(margin));
  return std::log1p(std::exp(-margin));
}

double sigmoid_neg(double margin) {
  // 1 / (1 + exp(margin)) = d/dm log(1 + exp(-m)) up to sign.
  if (margin > 0.0) {
    const double e = std::exp(-margin);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(margin));
}

void check_sizes(const std::vector<std::size_t>& sizes, std::size_t expected_groups,
                 const char* what) {
  if (sizes.size() != expected_groups || sizes.empty()) {
    throw std::invalid_argument(std::string(what) + ": group count mismatch");
  }
  for (std::size_t s : sizes) {
    if (s == 0) throw std::invalid_argument(std::string(what) + ": empty group");
  }
}

}  // namespace

std::vector<std::size_t> GroupedDataset::sizes() const {
  std::vector<std::size_t> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.size());
  return out;
}

std::size_t GroupedDataset::total_size() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.size();
  return n;
}

GroupWeights GroupedDataset::train_frequencies() const {
  return training_distribution(sizes());
}

Task::Task(TaskSpec spec) : spec_(std::move(spec)) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, QuadraticMeans>) {
          check_sizes(s.sizes, s.mus.size(), "QuadraticMeans");
          if (s.noise < 0.0) throw std::invalid_argument("QuadraticMeans: noise must be >= 0");
        } else if constexpr (std::is_same_v<T, LinearRegression>) {
          check_sizes(s.sizes, s.weights.size(), "LinearRegression");
          if (s.dim == 0) throw std::invalid_argument("LinearRegression: dim must be >= 1");
          if (s.noise.size() != s.weights.size()) {
            throw std::invalid_argument("LinearRegression: one noise level per group");
          }
          for (const auto& w : s.weights) {
            if (w.size() != s.dim) {
              throw std::invalid_argument("LinearRegression: weight dim mismatch");
            }
          }
          for (double sg : s.noise) {
            if (sg < 0.0) throw std::invalid_argument("LinearRegression: noise must be >= 0");
          }
        } else {
          check_sizes(s.sizes, s.separation.size(), "Logistic");
          if (s.dim == 0) throw std::invalid_argument("Logistic: dim must be >= 1");
          for (double sep : s.separation) {
            if (sep < 0.0) throw std::invalid_argument("Logistic: separation must be >= 0");
          }
        }
      },
      spec_);
}

std::size_t Task::group_count() const {
  return std::visit([](const auto& s) { return s.sizes.size(); }, spec_);
}

std::size_t Task::param_dim() const {
  if (std::holds_alternative<QuadraticMeans>(spec_)) return 1;
  if (const auto* lr = std::get_if<LinearRegression>(&spec_)) return lr->dim;
  const auto& lg = std::get<Logistic>(spec_);
  if (lg.hidden_units == 0) return lg.dim;
  return lg.hidden_units * lg.dim + lg.hidden_units;
}

std::size_t Task::feature_dim() const {
  if (std::holds_alternative<QuadraticMeans>(spec_)) return 0;
  if (const auto* lr = std::get_if<LinearRegression>(&spec_)) return lr->dim;
  return std::get<Logistic>(spec_).dim;
}

GroupedDataset Task::generate(std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GroupedDataset data;
  data.feature_dim = feature_dim();
  const std::size_t n_groups = group_count();
  data.groups.resize(n_groups);
  data.labels.resize(n_groups);
  for (std::size_t i = 0; i < n_groups; ++i) data.labels[i] = "g" + std::to_string(i);

  if (const auto* qm = std::get_if<QuadraticMeans>(&spec_)) {
    for (std::size_t i = 0; i < n_groups; ++i) {
      data.groups[i].reserve(qm->sizes[i]);
      for (std::size_t j = 0; j < qm->sizes[i]; ++j) {
        Example ex;
        ex.y = qm->mus[i] + qm->noise * (qm->noise > 0.0 ? normal(rng) : 0.0);
        data.groups[i].push_back(std::move(ex));
      }
    }
    return data;
  }
  if (const auto* lr = std::get_if<LinearRegression>(&spec_)) {
    for (std::size_t i = 0; i < n_groups; ++i) {
      data.groups[i].reserve(lr->sizes[i]);
      for (std::size_t j = 0; j < lr->sizes[i]; ++j) {
        Example ex;
        ex.x.resize(lr->dim);
        double y = 0.0;
        for (std::size_t c = 0; c < lr->dim; ++c) {
          ex.x[c] = normal(rng);
          y += lr->weights[i][c] * ex.x[c];
        }
        if (lr->noise[i] > 0.0) y += lr->noise[i] * normal(rng);
        ex.y = y;
        data.groups[i].push_back(std::move(ex));
      }
    }
    return data;
  }
  const auto& lg = std::get<Logistic>(spec_);
  for (std::size_t i = 0; i < n_groups; ++i) {
    // Group-specific unit direction along which the classes separate.
    std::vector<double> u(lg.dim);
    double norm = 0.0;
    for (double& c : u) {
      c = normal(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) norm = 1.0;
    for (double& c : u) c /= norm;
    std::bernoulli_distribution coin(0.5);
    data.groups[i].reserve(lg.sizes[i]);
    for (std::size_t j = 0; j < lg.sizes[i]; ++j) {
      Example ex;
      ex.y = coin(rng) ? 1.0 : -1.0;
      ex.x.resize(lg.dim);
      for (std::size_t c = 0; c < lg.dim; ++c) {
        ex.x[c] = ex.y * lg.separation[i] * u[c] + normal(rng);
      }
      data.groups[i].push_back(std::move(ex));
    }
  }
  return data;
}

double Task::loss_grad(std::span<const double> theta, const Example& ex,
                       std::span<double> grad) const {
  if (theta.size() != param_dim() || grad.size() != param_dim()) {
    throw std::invalid_argument("loss_grad: parameter dimension mismatch");
  }
  double loss = 0.0;
  if (std::holds_alternative<QuadraticMeans>(spec_)) {
    const double r = theta[0] - ex.y;
    loss = r * r;
    grad[0] = 2.0 * r;
  } else if (std::holds_alternative<LinearRegression>(spec_)) {
    double pred = 0.0;
    for (std::size_t c = 0; c < theta.size(); ++c) pred += theta[c] * ex.x[c];
    const double r = pred - ex.y;
    loss = r * r;
    for (std::size_t c = 0; c < theta.size(); ++c) grad[c] = 2.0 * r * ex.x[c];
  } else {
    const auto& lg = std::get<Logistic>(spec_);
    if (lg.hidden_units == 0) {
      double f = 0.0;
      for (std::size_t c = 0; c < lg.dim; ++c) f += theta[c] * ex.x[c];
      const double margin = ex.y * f;
      loss = stable_logistic_loss(margin);
      const double df = -ex.y * sigmoid_neg(margin);
      for (std::size_t c = 0; c < lg.dim; ++c) grad[c] = df * ex.x[c];
    } else {
      // theta = [W1 (h x dim, row-major) | w2 (h)], f = w2^T tanh(W1 x).
      const std::size_t h = lg.hidden_units;
      const std::size_t d = lg.dim;
      const double* w1 = theta.data();
      const double* w2 = theta.data() + h * d;
      double f = 0.0;
      std::vector<double> hidden(h);
      for (std::size_t r = 0; r < h; ++r) {
        double z = 0.0;
        for (std::size_t c = 0; c < d; ++c) z += w1[r * d + c] * ex.x[c];
        hidden[r] = std::tanh(z);
        f += w2[r] * hidden[r];
      }
      const double margin = ex.y * f;
      loss = stable_logistic_loss(margin);
      const double df = -ex.y * sigmoid_neg(margin);
      for (std::size_t r = 0; r < h; ++r) {
        const double dz = df * w2[r] * (1.0 - hidden[r] * hidden[r]);
        for (std::size_t c = 0; c < d; ++c) grad[r * d + c] = dz * ex.x[c];
        grad[h * d + r] = df * hidden[r];
      }
    }
  }
  if (!std::isfinite(loss)) {
    throw std::runtime_error("loss_grad: non-finite loss");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) throw std::runtime_error("loss_grad: non-finite gradient");
  }
  return loss;
}

double Task::loss(std::span<const double> theta, const Example& ex) const {
  std::vector<double> scratch(param_dim());
  return loss_grad(theta, ex, scratch);
}

std::vector<double> Task::group_losses(std::span<const double> theta,
                                       const GroupedDataset& data) const {
  std::vector<double> out(data.group_count(), 0.0);
  std::vector<double> scratch(param_dim());
  for (std::size_t i = 0; i < data.group_count(); ++i) {
    double acc = 0.0;
    for (const auto& ex : data.groups[i]) acc += loss_grad(theta, ex, scratch);
    out[i] = acc / static_cast<double>(data.groups[i].size());
  }
  return out;
}

std::vector<std::size_t> scaled_sizes(std::span<const double> proportions, std::size_t total) {
  std::vector<std::size_t> out;
  out.reserve(proportions.size());
  for (double p : proportions) {
    if (!(p > 0.0)) throw std::invalid_argument("scaled_sizes: proportions must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(p * static_cast<double>(total)));
    out.push_back(n == 0 ? 1 : n);
  }
  return out;
}

void export_dataset_csv(const GroupedDataset& data, const std::string& dir) {
  std::filesystem::create_directories(dir);
  char buf[64];
  for (std::size_t i = 0; i < data.group_count(); ++i) {
    std::ofstream out(std::filesystem::path(dir) / (data.labels[i] + ".csv"));
    if (!out) throw std::runtime_error("export_dataset_csv: cannot write into `" + dir + "`");
    out << "group_id";
    for (std::size_t c = 0; c < data.feature_dim; ++c) out << ",f" << c;
    out << ",target\n";
    for (const auto& ex : data.groups[i]) {
      out << data.labels[i];
      for (double x : ex.x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        out << ',' << buf;
      }
      std::snprintf(buf, sizeof(buf), "%.17g", ex.y);
      out << ',' << buf << '\n';
    }
  }
}

GroupedDataset import_dataset_csv(const std::vector<std::string>& paths) {
  GroupedDataset data;
  bool dim_known = false;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_dataset_csv: cannot open `" + path + "`");
    std::string line;
    if (!std::getline(in, line)) {
      throw std::runtime_error("import_dataset_csv: `" + path + "` is empty");
    }
    std::vector<Example> group;
    std::string label;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream row(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(row, cell, ',')) cells.push_back(cell);
      if (cells.size() < 2) {
        throw std::runtime_error("import_dataset_csv: malformed row in `" + path + "`");
      }
      if (label.empty()) {
        label = cells.front();
      } else if (label != cells.front()) {
        throw std::runtime_error("import_dataset_csv: mixed group ids in `" + path + "`");
      }
      Example ex;
      for (std::size_t c = 1; c + 1 < cells.size(); ++c) ex.x.push_back(std::stod(cells[c]));
      ex.y = std::stod(cells.back());
      group.push_back(std::move(ex));
    }
    if (group.empty()) {
      throw std::runtime_error("import_dataset_csv: no rows in `" + path + "`");
    }
    const std::size_t dim = group.front().x.size();
    for (const auto& ex : group) {
      if (ex.x.size() != dim) {
        throw std::runtime_error("import_dataset_csv: ragged feature rows in `" + path + "`");
      }
    }
    if (!dim_known) {
      data.feature_dim = dim;
      dim_known = true;
    } else if (data.feature_dim != dim) {
      throw std::runtime_error("import_dataset_csv: feature dim differs across groups");
    }
    data.groups.push_back(std::move(group));
    data.labels.push_back(std::move(label));
  }
  return data;
}

}  // namespace rsched
