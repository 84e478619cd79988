#pragma once

// Query-selection policies over the border of an observed graph.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hnd/classifier.hpp"
#include "hnd/embedding.hpp"
#include "hnd/error.hpp"
#include "hnd/features.hpp"
#include "hnd/graph.hpp"

namespace hnd {

/// Border node ids in query order, distinct, at most m long.
using RankedSelection = std::vector<NodeId>;

/// Orders candidates by descending score, ties by ascending id.
inline std::vector<NodeId> rank_by_score(std::span<const NodeId> candidates, std::span<const double> scores) {
  if (candidates.size() != scores.size()) throw Error("score count does not match candidate count");
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });
  std::vector<NodeId> ranked;
  ranked.reserve(order.size());
  for (std::size_t i : order) ranked.push_back(candidates[i]);
  return ranked;
}

inline RankedSelection top(std::vector<NodeId> ranking, std::size_t m) {
  if (ranking.size() > m) ranking.resize(m);
  return ranking;
}

// ---------------------------------------------------------------------------
// Heuristics

/// Border ranked by observed degree.
inline std::vector<NodeId> mod_ranking(const ObservedGraph& view) {
  const std::vector<NodeId> border = view.border();
  std::vector<double> key(border.size());
  for (std::size_t i = 0; i < border.size(); ++i) key[i] = static_cast<double>(view.degree(border[i]));
  return rank_by_score(border, key);
}

/// Number of revealed targets adjacent to v.
inline std::size_t adjacent_targets(const ObservedGraph& view, NodeId v) {
  std::size_t n = 0;
  for (NodeId u : view.neighbors(v)) n += view.label(u) == 1;
  return n;
}

/// Border ranked by number of adjacent revealed targets.
inline std::vector<NodeId> tn_ranking(const ObservedGraph& view) {
  const std::vector<NodeId> border = view.border();
  std::vector<double> key(border.size());
  for (std::size_t i = 0; i < border.size(); ++i) key[i] = static_cast<double>(adjacent_targets(view, border[i]));
  return rank_by_score(border, key);
}

/// Uniformly shuffled border.
inline std::vector<NodeId> random_ranking(const ObservedGraph& view, Rng& rng) {
  std::vector<NodeId> border = view.border();
  std::shuffle(border.begin(), border.end(), rng);
  return border;
}

inline RankedSelection mod_select(const ObservedGraph& view, std::size_t m) { return top(mod_ranking(view), m); }
inline RankedSelection tn_select(const ObservedGraph& view, std::size_t m) { return top(tn_ranking(view), m); }
inline RankedSelection random_select(const ObservedGraph& view, std::size_t m, Rng& rng) {
  return top(random_ranking(view, rng), m);
}

// ---------------------------------------------------------------------------
// Feature tables and classifier-driven ranking

/// Feature rows for a set of nodes under one schema.
struct FeatureTable {
  std::uint64_t schema = 0;
  std::size_t dim = 0;
  std::vector<std::uint32_t> row_of;  // dense id -> row
  std::vector<double> values;

  bool has(NodeId v) const { return v < row_of.size() && row_of[v] != UINT32_MAX; }
  std::span<const double> row(NodeId v) const {
    if (!has(v)) throw Error("node " + std::to_string(v) + " has no feature row");
    return {values.data() + static_cast<std::size_t>(row_of[v]) * dim, dim};
  }
};

/// Base features for `nodes` computed over `view`.
template <LabeledView V>
FeatureTable base_feature_table(const V& view, std::span<const NodeId> nodes) {
  FeatureTable t;
  t.schema = kBaseFeatureSchema;
  t.dim = kBaseFeatureCount;
  t.row_of.assign(view.capacity(), UINT32_MAX);
  t.values.reserve(nodes.size() * t.dim);
  FeatureScratch scratch;
  for (NodeId v : nodes) {
    t.row_of[v] = static_cast<std::uint32_t>(t.values.size() / t.dim);
    const FeatureVector f = base_features(view, v, scratch);
    t.values.insert(t.values.end(), f.begin(), f.end());
  }
  return t;
}

/// Schema id of the base+embedding layout for a given program.
inline std::uint64_t embedding_schema(const FeatureProgram& program) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::uint64_t x) {
    h ^= x;
    h *= 1099511628211ULL;
  };
  mix(kBaseFeatureSchema);
  for (const FeatureDef& def : program.defs) {
    mix(def.input + 1);
    for (RelOp op : def.ops) mix(static_cast<std::uint64_t>(op) + 17);
    mix(0xff);
  }
  return h | (1ULL << 63);
}

/// Base features followed by the embedding columns whose definitions apply
/// at least one relational operator. Layer-0 columns are left out: the base
/// features already appear raw, and the raw label channel is the training
/// target itself.
template <LabeledView V>
FeatureTable embedding_feature_table(const V& view, std::span<const NodeId> nodes, const FeatureProgram& program) {
  const FeatureTable base = base_feature_table(view, nodes);
  const Embedding emb = transform(program, view);
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < program.defs.size(); ++c) {
    if (program.defs[c].layer() > 0) cols.push_back(c);
  }
  FeatureTable t;
  t.schema = embedding_schema(program);
  t.dim = base.dim + cols.size();
  t.row_of.assign(view.capacity(), UINT32_MAX);
  t.values.reserve(nodes.size() * t.dim);
  for (NodeId v : nodes) {
    t.row_of[v] = static_cast<std::uint32_t>(t.values.size() / t.dim);
    const auto b = base.row(v);
    t.values.insert(t.values.end(), b.begin(), b.end());
    const auto e = emb.row(v);
    for (std::size_t c : cols) t.values.push_back(e[c]);
  }
  return t;
}

/// Training rows for the given (queried) nodes with their revealed labels.
inline TrainingSet training_set(const FeatureTable& table, std::span<const NodeId> nodes,
                                const std::vector<Label>& labels_by_node) {
  TrainingSet data(table.dim, table.schema);
  data.x.reserve(nodes.size() * table.dim);
  data.y.reserve(nodes.size());
  for (NodeId v : nodes) data.add(table.row(v), labels_by_node.at(v));
  return data;
}

inline TrainingSet training_set(const FeatureTable& table, const ObservedGraph& view) {
  TrainingSet data(table.dim, table.schema);
  data.x.reserve(view.queried().size() * table.dim);
  for (NodeId v : view.queried()) data.add(table.row(v), static_cast<Label>(view.label(v)));
  return data;
}

/// Border ranked by model probability.
inline std::vector<NodeId> ml_ranking(const ObservedGraph& view, const ProbModel& model, const FeatureTable& table) {
  if (model.schema() != table.schema || model.dim() != table.dim) {
    throw Error("feature schema does not match the model");
  }
  const std::vector<NodeId> border = view.border();
  std::vector<double> scores(border.size());
  for (std::size_t i = 0; i < border.size(); ++i) scores[i] = model.predict(table.row(border[i]));
  return rank_by_score(border, scores);
}

inline RankedSelection ml_select(const ObservedGraph& view, const ProbModel& model, const FeatureTable& table,
                                 std::size_t m) {
  return top(ml_ranking(view, model, table), m);
}

/// Known-topology baseline: `model` was trained on full-graph features of
/// the queried nodes; border nodes are scored on full-graph features with
/// only the queried labels revealed.
inline RankedSelection oracle_select(const FullGraph& full, const ObservedGraph& view, const ProbModel& model,
                                     std::size_t m) {
  const RevealedGraph revealed(full, view);
  const std::vector<NodeId> border = view.border();
  const FeatureTable table = base_feature_table(revealed, border);
  return ml_select(view, model, table, m);
}

// ---------------------------------------------------------------------------
// D3TS bandit

/// Per-arm Beta parameters under Dynamic Thompson Sampling with cap C.
struct BanditState {
  std::vector<double> alpha;
  std::vector<double> beta;
  double cap = 100.0;

  BanditState() = default;
  BanditState(std::size_t arms, double c) : alpha(arms, 1.0), beta(arms, 1.0), cap(c) {
    if (arms == 0) throw Error("a bandit needs at least one arm");
    if (!(c > 0)) throw Error("bandit cap must be positive");
  }

  std::size_t arms() const noexcept { return alpha.size(); }
};

inline double sample_beta(double a, double b, Rng& rng) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng), y = gb(rng);
  if (x + y <= 0) return 0.5;
  return x / (x + y);
}

/// Arm whose Beta(alpha, beta) draw is largest among arms not masked out;
/// ties go to the lower index. Every arm draws, masked or not, so the random
/// stream does not depend on the mask.
inline std::size_t d3ts_choose(const BanditState& state, Rng& rng, const std::vector<char>& masked = {}) {
  std::size_t best = state.arms();
  double best_draw = -1;
  for (std::size_t k = 0; k < state.arms(); ++k) {
    const double r = sample_beta(state.alpha[k], state.beta[k], rng);
    if (!masked.empty() && masked[k]) continue;
    if (r > best_draw) {
      best_draw = r;
      best = k;
    }
  }
  return best;
}

/// Below the cap the reward is added as a success or failure; at or above
/// it both parameters are rescaled by C/(C+1) after the increment.
inline void d3ts_update(BanditState& state, std::size_t arm, int reward) {
  if (arm >= state.arms()) throw Error("bandit arm out of range");
  const double r = reward ? 1.0 : 0.0;
  double& a = state.alpha[arm];
  double& b = state.beta[arm];
  if (a + b < state.cap) {
    a += r;
    b += 1.0 - r;
  } else {
    const double shrink = state.cap / (state.cap + 1.0);
    a = (a + r) * shrink;
    b = (b + 1.0 - r) * shrink;
  }
}

struct BanditSelection {
  RankedSelection nodes;
  std::vector<std::size_t> slot_arm;  // arm that filled each slot
};

/// Fills up to m slots; each slot draws one Beta sample per arm and takes the
/// winning arm's best-ranked node not already chosen this round.
inline BanditSelection d3ts_select(const std::vector<std::vector<NodeId>>& rankings, const BanditState& state,
                                   std::size_t m, Rng& rng) {
  if (rankings.empty()) throw Error("D3TS needs at least one arm");
  if (rankings.size() != state.arms()) throw Error("ranking count does not match bandit arms");
  BanditSelection out;
  std::vector<std::size_t> cursor(rankings.size(), 0);
  std::vector<NodeId> chosen;
  auto taken = [&](NodeId v) { return std::find(chosen.begin(), chosen.end(), v) != chosen.end(); };
  std::vector<char> exhausted(rankings.size(), 0);
  std::size_t live = rankings.size();
  while (out.nodes.size() < m && live > 0) {
    const std::size_t arm = d3ts_choose(state, rng, exhausted);
    auto& c = cursor[arm];
    const auto& ranking = rankings[arm];
    while (c < ranking.size() && taken(ranking[c])) ++c;
    if (c == ranking.size()) {
      exhausted[arm] = 1;
      --live;
      continue;
    }
    chosen.push_back(ranking[c]);
    out.nodes.push_back(ranking[c]);
    out.slot_arm.push_back(arm);
    ++c;
  }
  return out;
}

}  // namespace hnd
