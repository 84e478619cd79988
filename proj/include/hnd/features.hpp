#pragma once

// Base structural features of a node, computed from whatever part of the
// graph a view exposes plus the labels it has revealed.

#include <array>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <string_view>
#include <vector>

#include "hnd/error.hpp"
#include "hnd/graph.hpp"

namespace hnd {

/// Anything that exposes adjacency and (possibly unknown) labels by node id.
template <class V>
concept LabeledView = requires(const V& view, NodeId v) {
  { view.capacity() } -> std::convertible_to<std::size_t>;
  { view.contains(v) } -> std::convertible_to<bool>;
  { view.neighbors(v) } -> std::convertible_to<std::span<const NodeId>>;
  { view.label(v) } -> std::convertible_to<int>;
};

/// The full topology with labels revealed for a chosen subset of nodes.
/// This is what the known-topology baseline sees.
class RevealedGraph {
 public:
  /// Every label revealed.
  explicit RevealedGraph(const FullGraph& graph) : graph_(&graph), labels_(graph.size()) {
    for (NodeId v = 0; v < graph.size(); ++v) labels_[v] = static_cast<std::int8_t>(graph.label(v));
  }

  /// Labels revealed exactly for the view's queried nodes.
  RevealedGraph(const FullGraph& graph, const ObservedGraph& view)
      : graph_(&graph), labels_(graph.size(), static_cast<std::int8_t>(kUnknownLabel)) {
    for (NodeId v : view.queried()) labels_[v] = static_cast<std::int8_t>(graph.label(v));
  }

  std::size_t capacity() const noexcept { return graph_->size(); }
  bool contains(NodeId v) const noexcept { return graph_->contains(v); }
  std::span<const NodeId> neighbors(NodeId v) const { return graph_->neighbors(v); }
  int label(NodeId v) const { return labels_.at(v); }
  const FullGraph& graph() const noexcept { return *graph_; }

  std::vector<NodeId> members() const {
    std::vector<NodeId> all(graph_->size());
    std::iota(all.begin(), all.end(), NodeId{0});
    return all;
  }

 private:
  const FullGraph* graph_;
  std::vector<std::int8_t> labels_;
};

static_assert(LabeledView<ObservedGraph>);
static_assert(LabeledView<RevealedGraph>);

enum BaseFeature : std::size_t {
  kObservedDegree,
  kAdjTargetCount,
  kAdjTargetRatio,
  kTriTargetCount,
  kTriTargetRatio,
  kTriNontargetCount,
  kTriNontargetRatio,
  kTriTotal,
  kTwoHopTargetCount,
  kBaseFeatureCount
};

inline constexpr std::array<std::string_view, kBaseFeatureCount> kBaseFeatureNames = {
    "observed_degree", "adj_target_count",    "adj_target_ratio",
    "tri_target_count", "tri_target_ratio",   "tri_nontarget_count",
    "tri_nontarget_ratio", "tri_total",       "two_hop_target_count"};

/// Bumped whenever the meaning or order of base features changes.
inline constexpr std::uint32_t kBaseFeatureSchema = 1;

using FeatureVector = std::array<double, kBaseFeatureCount>;

/// Reusable scratch space so batches avoid reallocating per node.
class FeatureScratch {
 public:
  void reserve(std::size_t capacity) {
    if (mark_.size() < capacity) {
      mark_.resize(capacity, 0);
      two_hop_.resize(capacity, 0);
    }
  }

 private:
  template <LabeledView V>
  friend FeatureVector base_features(const V&, NodeId, FeatureScratch&);

  std::uint32_t next_stamp() {
    if (++stamp_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      std::fill(two_hop_.begin(), two_hop_.end(), 0);
      stamp_ = 1;
    }
    return stamp_;
  }

  std::vector<std::uint32_t> mark_;
  std::vector<std::uint32_t> two_hop_;
  std::uint32_t stamp_ = 0;
};

/// Nine-value feature vector of `node` over `view`. Neighbors with an unknown
/// label count towards the degree and ratio denominators only; mixed
/// triangles count towards tri_total only; two-hop targets are those at
/// distance exactly two.
template <LabeledView V>
FeatureVector base_features(const V& view, NodeId node, FeatureScratch& scratch) {
  if (!view.contains(node)) throw Error("feature request for node " + std::to_string(node) + " outside the view");
  scratch.reserve(view.capacity());
  const std::uint32_t stamp = scratch.next_stamp();
  auto& mark = scratch.mark_;
  auto& two_hop = scratch.two_hop_;

  FeatureVector f{};
  const auto nbrs = view.neighbors(node);
  std::size_t adj_targets = 0;
  for (NodeId a : nbrs) {
    mark[a] = stamp;
    if (view.label(a) == 1) ++adj_targets;
  }
  mark[node] = stamp;

  std::size_t tri_total = 0, tri_target = 0, tri_nontarget = 0, two_hop_targets = 0;
  for (NodeId a : nbrs) {
    const int la = view.label(a);
    for (NodeId b : view.neighbors(a)) {
      if (mark[b] == stamp) {
        // b is node itself or another neighbor; count each triangle once.
        if (b == node || b <= a) continue;
        ++tri_total;
        const int lb = view.label(b);
        if (la == 1 && lb == 1) ++tri_target;
        if (la == 0 && lb == 0) ++tri_nontarget;
      } else if (two_hop[b] != stamp) {
        two_hop[b] = stamp;
        if (view.label(b) == 1) ++two_hop_targets;
      }
    }
  }

  const auto deg = static_cast<double>(nbrs.size());
  f[kObservedDegree] = deg;
  f[kAdjTargetCount] = static_cast<double>(adj_targets);
  f[kAdjTargetRatio] = nbrs.empty() ? 0.0 : static_cast<double>(adj_targets) / deg;
  f[kTriTotal] = static_cast<double>(tri_total);
  f[kTriTargetCount] = static_cast<double>(tri_target);
  f[kTriNontargetCount] = static_cast<double>(tri_nontarget);
  f[kTriTargetRatio] = tri_total == 0 ? 0.0 : static_cast<double>(tri_target) / static_cast<double>(tri_total);
  f[kTriNontargetRatio] = tri_total == 0 ? 0.0 : static_cast<double>(tri_nontarget) / static_cast<double>(tri_total);
  f[kTwoHopTargetCount] = static_cast<double>(two_hop_targets);
  return f;
}

template <LabeledView V>
FeatureVector base_features(const V& view, NodeId node) {
  FeatureScratch scratch;
  return base_features(view, node, scratch);
}

template <LabeledView V>
std::vector<FeatureVector> batch_features(const V& view, std::span<const NodeId> nodes) {
  std::vector<FeatureVector> out;
  out.reserve(nodes.size());
  FeatureScratch scratch;
  for (NodeId v : nodes) out.push_back(base_features(view, v, scratch));
  return out;
}

}  // namespace hnd
