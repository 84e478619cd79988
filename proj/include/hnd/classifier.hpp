#pragma once

// Probabilistic binary classifiers behind one contract: logistic regression,
// random forest and gradient-boosted trees.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hnd/error.hpp"
#include "hnd/graph.hpp"

namespace hnd {

/// Row-major feature matrix with binary labels. `schema` identifies the
/// feature layout; models refuse rows from another schema.
struct TrainingSet {
  std::size_t dim = 0;
  std::uint64_t schema = 0;
  std::vector<double> x;
  std::vector<Label> y;

  TrainingSet() = default;
  TrainingSet(std::size_t d, std::uint64_t s) : dim(d), schema(s) {}

  std::size_t rows() const noexcept { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }

  void add(std::span<const double> features, Label label) {
    if (features.size() != dim) throw Error("training row has wrong dimensionality");
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(label);
  }

  double positive_rate() const {
    if (y.empty()) return 0.0;
    return static_cast<double>(std::count(y.begin(), y.end(), Label{1})) / static_cast<double>(y.size());
  }
  bool single_class() const {
    return std::all_of(y.begin(), y.end(), [&](Label l) { return l == y.front(); });
  }
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

/// Per-row weights; with `balance` each class carries half the total weight.
inline std::vector<double> sample_weights(const TrainingSet& data, bool balance) {
  std::vector<double> w(data.rows(), 1.0);
  if (!balance || data.single_class()) return w;
  const double n = static_cast<double>(data.rows());
  const double pos = data.positive_rate() * n;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = data.y[i] ? n / (2 * pos) : n / (2 * (n - pos));
  return w;
}

class ProbModel {
 public:
  virtual ~ProbModel() = default;

  /// Probability that the row is a target; always within [0, 1].
  virtual double predict(std::span<const double> features) const = 0;

  /// Nonnegative weights summing to 1, or all zero for a constant model.
  virtual std::vector<double> feature_importance() const = 0;

  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t schema() const noexcept { return schema_; }

 protected:
  ProbModel(std::size_t dim, std::uint64_t schema) : dim_(dim), schema_(schema) {}

  void check_row(std::span<const double> features) const {
    if (features.size() != dim_) {
      throw Error("feature row of size " + std::to_string(features.size()) + " given to a model of dimension " +
                  std::to_string(dim_));
    }
  }

 private:
  std::size_t dim_;
  std::uint64_t schema_;
};

using ModelPtr = std::shared_ptr<const ProbModel>;

inline std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total > 0) {
    for (double& v : w) v /= total;
  } else {
    std::fill(w.begin(), w.end(), 0.0);
  }
  return w;
}

/// Predicts the same probability for every input.
class ConstantModel final : public ProbModel {
 public:
  ConstantModel(double p, std::size_t dim, std::uint64_t schema) : ProbModel(dim, schema), p_(p) {}

  double predict(std::span<const double> features) const override {
    check_row(features);
    return p_;
  }
  std::vector<double> feature_importance() const override { return std::vector<double>(dim(), 0.0); }
  double probability() const noexcept { return p_; }

 private:
  double p_;
};

/// Fallback for training sets with a single class: the base rate, clamped.
inline ModelPtr degenerate_model(const TrainingSet& data) {
  return std::make_shared<ConstantModel>(std::clamp(data.positive_rate(), 0.01, 0.99), data.dim, data.schema);
}

inline void require_rows(const TrainingSet& data) {
  if (data.rows() == 0) throw Error("cannot train on an empty training set");
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticParams {
  double l2 = 1.0;
  std::size_t epochs = 300;
  double learning_rate = 0.1;
  bool balance_classes = false;
};

/// Per-column mean and standard deviation; zero-variance columns map to 0.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const TrainingSet& data) {
    Standardizer s;
    s.mean.assign(data.dim, 0.0);
    s.scale.assign(data.dim, 0.0);
    const double n = static_cast<double>(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (std::size_t j = 0; j < data.dim; ++j) s.mean[j] += data.x[i * data.dim + j];
    }
    for (double& m : s.mean) m /= n;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (std::size_t j = 0; j < data.dim; ++j) {
        const double d = data.x[i * data.dim + j] - s.mean[j];
        s.scale[j] += d * d;
      }
    }
    for (double& v : s.scale) v = std::sqrt(v / n);
    return s;
  }

  double apply(std::size_t j, double value) const { return scale[j] > 0 ? (value - mean[j]) / scale[j] : 0.0; }

  TrainingSet apply(const TrainingSet& data) const {
    TrainingSet out = data;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      for (std::size_t j = 0; j < data.dim; ++j) out.x[i * data.dim + j] = apply(j, data.x[i * data.dim + j]);
    }
    return out;
  }
};

/// Weighted mean logistic loss plus (l2 / 2n) * |w|^2. `params` holds the
/// weights followed by the bias.
inline double logistic_objective(std::span<const double> params, const TrainingSet& data,
                                 std::span<const double> weights, double l2) {
  const std::size_t d = data.dim;
  const double n = static_cast<double>(data.rows());
  double loss = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double z = params[d];
    for (std::size_t j = 0; j < d; ++j) z += params[j] * data.x[i * d + j];
    loss += weights[i] * (softplus(z) - (data.y[i] ? z : 0.0));
  }
  double reg = 0;
  for (std::size_t j = 0; j < d; ++j) reg += params[j] * params[j];
  return loss / n + 0.5 * l2 * reg / n;
}

inline std::vector<double> logistic_gradient(std::span<const double> params, const TrainingSet& data,
                                             std::span<const double> weights, double l2) {
  const std::size_t d = data.dim;
  const double n = static_cast<double>(data.rows());
  std::vector<double> grad(d + 1, 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double z = params[d];
    for (std::size_t j = 0; j < d; ++j) z += params[j] * data.x[i * d + j];
    const double r = weights[i] * (sigmoid(z) - data.y[i]);
    for (std::size_t j = 0; j < d; ++j) grad[j] += r * data.x[i * d + j];
    grad[d] += r;
  }
  for (std::size_t j = 0; j < d; ++j) grad[j] = grad[j] / n + l2 * params[j] / n;
  grad[d] /= n;
  return grad;
}

class LogisticModel final : public ProbModel {
 public:
  LogisticModel(Standardizer standardizer, std::vector<double> params, std::uint64_t schema)
      : ProbModel(standardizer.mean.size(), schema), std_(std::move(standardizer)), params_(std::move(params)) {}

  double predict(std::span<const double> features) const override {
    check_row(features);
    double z = params_.back();
    for (std::size_t j = 0; j < dim(); ++j) z += params_[j] * std_.apply(j, features[j]);
    return sigmoid(z);
  }

  std::vector<double> feature_importance() const override {
    std::vector<double> w(dim());
    for (std::size_t j = 0; j < dim(); ++j) w[j] = std::abs(params_[j]);
    return normalized(std::move(w));
  }

  /// Coefficients on standardized features, bias last.
  const std::vector<double>& coefficients() const noexcept { return params_; }

 private:
  Standardizer std_;
  std::vector<double> params_;
};

/// Full-batch gradient descent on standardized features.
inline ModelPtr train_logistic(const TrainingSet& data, const LogisticParams& p = {}) {
  require_rows(data);
  if (data.single_class()) return degenerate_model(data);
  Standardizer standardizer = Standardizer::fit(data);
  const TrainingSet z = standardizer.apply(data);
  const std::vector<double> weights = sample_weights(data, p.balance_classes);
  std::vector<double> params(data.dim + 1, 0.0);
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    const auto grad = logistic_gradient(params, z, weights, p.l2);
    for (std::size_t j = 0; j < params.size(); ++j) params[j] -= p.learning_rate * grad[j];
  }
  return std::make_shared<LogisticModel>(std::move(standardizer), std::move(params), data.schema);
}

// ---------------------------------------------------------------------------
// Decision trees shared by the forest and the booster

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;       // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double evaluate(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
      const TreeNode& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
  }
};

// ---------------------------------------------------------------------------
// Random forest

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_depth = 8;
  std::size_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0 = floor(sqrt(dim))
  bool bootstrap = true;
  bool balance_classes = false;
  std::uint64_t seed = 1;
};

class ForestModel final : public ProbModel {
 public:
  ForestModel(std::vector<Tree> trees, std::vector<double> importance, std::size_t dim, std::uint64_t schema)
      : ProbModel(dim, schema), trees_(std::move(trees)), importance_(normalized(std::move(importance))) {}

  /// Mean over trees of the leaf's positive fraction (soft vote).
  double predict(std::span<const double> features) const override {
    check_row(features);
    if (trees_.empty()) return 0.0;
    double sum = 0;
    for (const Tree& t : trees_) sum += t.evaluate(features);
    return std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
  }

  std::vector<double> feature_importance() const override { return importance_; }
  std::size_t tree_count() const noexcept { return trees_.size(); }

 private:
  std::vector<Tree> trees_;
  std::vector<double> importance_;
};

namespace detail {

struct GiniTreeBuilder {
  const std::vector<std::vector<double>>& rows;  // unique rows
  const std::vector<Label>& labels;
  const std::vector<double>& weight;  // per unique row, this tree
  const ForestParams& params;
  std::size_t mtry;
  Rng& rng;
  std::vector<double>& importance;
  Tree tree;

  static double gini(double pos, double total) {
    if (total <= 0) return 0;
    const double p = pos / total;
    return 2 * p * (1 - p);
  }

  std::int32_t build(std::vector<std::size_t> idx, std::size_t depth) {
    double total = 0, pos = 0;
    for (std::size_t i : idx) {
      total += weight[i];
      pos += labels[i] ? weight[i] : 0.0;
    }
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].value = total > 0 ? pos / total : 0.0;
    if (depth >= params.max_depth || pos == 0 || pos == total || idx.size() < 2 * params.min_samples_leaf) {
      return id;
    }

    const std::size_t d = rows.front().size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (std::size_t k = 0; k < mtry; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, d - 1);
      std::swap(features[k], features[pick(rng)]);
    }

    const double parent = total * gini(pos, total);
    double best_gain = 1e-12;
    std::int32_t best_feature = -1;
    double best_threshold = 0;
    std::vector<std::size_t> sorted = idx;
    for (std::size_t k = 0; k < mtry; ++k) {
      const std::size_t f = features[k];
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return rows[a][f] < rows[b][f]; });
      double left_total = 0, left_pos = 0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_total += weight[sorted[i]];
        left_pos += labels[sorted[i]] ? weight[sorted[i]] : 0.0;
        const double a = rows[sorted[i]][f], b = rows[sorted[i + 1]][f];
        if (a == b) continue;
        if (i + 1 < params.min_samples_leaf || sorted.size() - i - 1 < params.min_samples_leaf) continue;
        const double right_total = total - left_total, right_pos = pos - left_pos;
        const double gain = parent - left_total * gini(left_pos, left_total) - right_total * gini(right_pos, right_total);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<std::int32_t>(f);
          best_threshold = a + (b - a) / 2;
        }
      }
    }
    if (best_feature < 0) return id;

    importance[static_cast<std::size_t>(best_feature)] += best_gain;
    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (rows[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const std::int32_t l = build(std::move(left), depth + 1);
    const std::int32_t r = build(std::move(right), depth + 1);
    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }
};

}  // namespace detail

/// Bagged Gini trees over sqrt(d) random features per split. Identical rows
/// are collapsed first and the bootstrap draws one sample per distinct row
/// with probability proportional to multiplicity, so duplicating a dataset
/// leaves the fitted forest unchanged.
inline ModelPtr train_random_forest(const TrainingSet& data, const ForestParams& p = {}) {
  require_rows(data);
  if (data.single_class()) return degenerate_model(data);

  const std::vector<double> row_weight = sample_weights(data, p.balance_classes);
  std::vector<std::vector<double>> rows;
  std::vector<Label> labels;
  std::vector<double> multiplicity;
  {
    std::map<std::pair<std::vector<double>, Label>, std::size_t> seen;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      std::vector<double> r(data.row(i).begin(), data.row(i).end());
      auto [it, inserted] = seen.emplace(std::make_pair(r, data.y[i]), rows.size());
      if (inserted) {
        rows.push_back(std::move(r));
        labels.push_back(data.y[i]);
        multiplicity.push_back(0);
      }
      multiplicity[it->second] += row_weight[i];
    }
  }
  const std::size_t unique = rows.size();
  std::vector<double> cumulative(unique);
  std::partial_sum(multiplicity.begin(), multiplicity.end(), cumulative.begin());

  const std::size_t mtry = std::clamp<std::size_t>(
      p.max_features ? p.max_features : static_cast<std::size_t>(std::sqrt(static_cast<double>(data.dim))), 1,
      std::max<std::size_t>(data.dim, 1));

  std::vector<Tree> trees;
  std::vector<double> importance(data.dim, 0.0);
  Rng master(p.seed);
  for (std::size_t t = 0; t < p.trees; ++t) {
    Rng rng(master());
    std::vector<double> weight(unique, 0.0);
    if (p.bootstrap) {
      std::uniform_real_distribution<double> u(0.0, cumulative.back());
      for (std::size_t k = 0; k < unique; ++k) {
        const double r = u(rng);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        weight[std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), unique - 1)] += 1.0;
      }
    } else {
      weight = multiplicity;
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < unique; ++i) {
      if (weight[i] > 0) idx.push_back(i);
    }
    detail::GiniTreeBuilder builder{rows, labels, weight, p, mtry, rng, importance, {}};
    builder.build(std::move(idx), 0);
    trees.push_back(std::move(builder.tree));
  }
  return std::make_shared<ForestModel>(std::move(trees), std::move(importance), data.dim, data.schema);
}

// ---------------------------------------------------------------------------
// Gradient-boosted trees on logistic loss

struct BoostingParams {
  std::size_t trees = 100;
  std::size_t max_depth = 5;
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 20;
  double min_hessian = 1e-3;
  double l2 = 0.0;
  std::size_t max_bins = 255;
  bool balance_classes = false;
};

class BoostedModel final : public ProbModel {
 public:
  BoostedModel(double prior, std::vector<Tree> trees, std::vector<double> importance, std::vector<double> loss_trace,
               std::size_t dim, std::uint64_t schema)
      : ProbModel(dim, schema),
        prior_(prior),
        trees_(std::move(trees)),
        importance_(normalized(std::move(importance))),
        loss_trace_(std::move(loss_trace)) {}

  double raw_score(std::span<const double> features) const {
    double s = prior_;
    for (const Tree& t : trees_) s += t.evaluate(features);
    return s;
  }

  double predict(std::span<const double> features) const override {
    check_row(features);
    return sigmoid(raw_score(features));
  }

  std::vector<double> feature_importance() const override { return importance_; }

  /// Mean training log loss before boosting and after every round.
  const std::vector<double>& loss_trace() const noexcept { return loss_trace_; }
  double prior_log_odds() const noexcept { return prior_; }

 private:
  double prior_;
  std::vector<Tree> trees_;
  std::vector<double> importance_;
  std::vector<double> loss_trace_;
};

namespace detail {

/// Quantile bin edges per feature; bin b holds values <= edges[b].
struct FeatureBins {
  std::vector<std::vector<double>> edges;
  std::vector<std::vector<std::uint8_t>> codes;  // column-major [feature][row]

  static FeatureBins fit(const TrainingSet& data, std::size_t max_bins) {
    max_bins = std::clamp<std::size_t>(max_bins, 2, 256);
    FeatureBins b;
    b.edges.resize(data.dim);
    b.codes.assign(data.dim, std::vector<std::uint8_t>(data.rows()));
    std::vector<double> col(data.rows());
    for (std::size_t f = 0; f < data.dim; ++f) {
      for (std::size_t i = 0; i < data.rows(); ++i) col[i] = data.x[i * data.dim + f];
      std::vector<double> sorted = col;
      std::sort(sorted.begin(), sorted.end());
      std::vector<double> distinct = sorted;
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      auto& e = b.edges[f];
      if (distinct.size() <= max_bins) {
        for (std::size_t k = 0; k + 1 < distinct.size(); ++k) e.push_back(distinct[k] + (distinct[k + 1] - distinct[k]) / 2);
      } else {
        for (std::size_t k = 1; k < max_bins; ++k) {
          const double q = sorted[k * sorted.size() / max_bins];
          auto it = std::lower_bound(distinct.begin(), distinct.end(), q);
          if (it + 1 >= distinct.end()) break;
          const double cut = *it + (*(it + 1) - *it) / 2;
          if (e.empty() || cut > e.back()) e.push_back(cut);
        }
      }
      for (std::size_t i = 0; i < data.rows(); ++i) {
        b.codes[f][i] = static_cast<std::uint8_t>(std::lower_bound(e.begin(), e.end(), col[i]) - e.begin());
      }
    }
    return b;
  }
};

struct BoostTreeBuilder {
  const FeatureBins& bins;
  const std::vector<double>& grad;
  const std::vector<double>& hess;
  const BoostingParams& params;
  std::vector<double>& importance;
  Tree tree;

  double leaf_value(double g, double h) const { return -params.learning_rate * g / (h + params.l2 + 1e-12); }

  std::int32_t build(std::vector<std::uint32_t>& idx, std::size_t depth) {
    double g = 0, h = 0;
    for (std::uint32_t i : idx) {
      g += grad[i];
      h += hess[i];
    }
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[id].value = leaf_value(g, h);
    if (depth >= params.max_depth || idx.size() < 2 * params.min_samples_leaf) return id;

    const double parent = g * g / (h + params.l2);
    double best_gain = 1e-12;
    std::int32_t best_feature = -1;
    std::size_t best_bin = 0;
    std::vector<double> hg, hh;
    std::vector<std::uint32_t> hc;
    for (std::size_t f = 0; f < bins.edges.size(); ++f) {
      const std::size_t nb = bins.edges[f].size() + 1;
      if (nb < 2) continue;
      hg.assign(nb, 0.0);
      hh.assign(nb, 0.0);
      hc.assign(nb, 0);
      const auto& codes = bins.codes[f];
      for (std::uint32_t i : idx) {
        hg[codes[i]] += grad[i];
        hh[codes[i]] += hess[i];
        ++hc[codes[i]];
      }
      double lg = 0, lh = 0;
      std::size_t lc = 0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        lg += hg[b];
        lh += hh[b];
        lc += hc[b];
        const std::size_t rc = idx.size() - lc;
        if (lc < params.min_samples_leaf || rc < params.min_samples_leaf) continue;
        const double rg = g - lg, rh = h - lh;
        if (lh < params.min_hessian || rh < params.min_hessian) continue;
        const double gain = lg * lg / (lh + params.l2) + rg * rg / (rh + params.l2) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<std::int32_t>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0) return id;

    const auto f = static_cast<std::size_t>(best_feature);
    importance[f] += best_gain;
    std::vector<std::uint32_t> left, right;
    for (std::uint32_t i : idx) (bins.codes[f][i] <= best_bin ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    const std::int32_t l = build(left, depth + 1);
    const std::int32_t r = build(right, depth + 1);
    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = bins.edges[f][best_bin];
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }
};

}  // namespace detail

/// Histogram-based boosting with Newton leaf values on logistic loss.
inline ModelPtr train_gbt(const TrainingSet& data, const BoostingParams& p = {}) {
  require_rows(data);
  if (data.single_class()) return degenerate_model(data);

  const std::vector<double> weights = sample_weights(data, p.balance_classes);
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  double wpos = 0;
  for (std::size_t i = 0; i < data.rows(); ++i) wpos += data.y[i] ? weights[i] : 0.0;
  const double base = wpos / wsum;
  const double prior = std::log(base / (1 - base));

  const auto bins = detail::FeatureBins::fit(data, p.max_bins);
  const std::size_t n = data.rows();
  std::vector<double> score(n, prior), grad(n), hess(n);
  std::vector<double> importance(data.dim, 0.0);
  std::vector<Tree> trees;
  std::vector<double> trace;

  auto mean_loss = [&]() {
    double loss = 0;
    for (std::size_t i = 0; i < n; ++i) loss += weights[i] * (softplus(score[i]) - (data.y[i] ? score[i] : 0.0));
    return loss / wsum;
  };
  trace.push_back(mean_loss());

  for (std::size_t t = 0; t < p.trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double prob = sigmoid(score[i]);
      grad[i] = weights[i] * (prob - data.y[i]);
      hess[i] = weights[i] * prob * (1 - prob);
    }
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0U);
    detail::BoostTreeBuilder builder{bins, grad, hess, p, importance, {}};
    builder.build(idx, 0);
    for (std::size_t i = 0; i < n; ++i) score[i] += builder.tree.evaluate(data.row(i));
    trees.push_back(std::move(builder.tree));
    trace.push_back(mean_loss());
  }
  return std::make_shared<BoostedModel>(prior, std::move(trees), std::move(importance), std::move(trace), data.dim,
                                        data.schema);
}

enum class ClassifierKind { gbt, random_forest, logistic };

inline std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::gbt: return "gbt";
    case ClassifierKind::random_forest: return "rf";
    case ClassifierKind::logistic: return "logistic";
  }
  return "?";
}

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::gbt;
  LogisticParams logistic;
  ForestParams forest;
  BoostingParams boosting;
};

inline ModelPtr train(const TrainingSet& data, const ClassifierConfig& cfg, std::uint64_t seed) {
  switch (cfg.kind) {
    case ClassifierKind::logistic: return train_logistic(data, cfg.logistic);
    case ClassifierKind::random_forest: {
      ForestParams p = cfg.forest;
      p.seed = seed;
      return train_random_forest(data, p);
    }
    case ClassifierKind::gbt: return train_gbt(data, cfg.boosting);
  }
  throw Error("unknown classifier kind");
}

}  // namespace hnd
