#pragma once

// Ground-truth target labels: Sybil-region synthesis, k-core periphery and
// cascade-based influencer scores.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "hnd/error.hpp"
#include "hnd/graph.hpp"

namespace hnd {

/// Per-node nonnegative score, indexed by dense node id.
using ScoreTable = std::vector<std::uint64_t>;

struct SybilConfig {
  std::size_t attack_links = 80'000;
  std::uint64_t seed = 1;
};

/// Duplicates an undirected graph into a normal region (ids 0..n-1, label 0)
/// and a structurally identical Sybil region (ids n..2n-1, label 1), then adds
/// `attack_links` distinct random Sybil-normal edges.
inline FullGraph synthesize_sybil(const FullGraph& base, const SybilConfig& cfg) {
  if (base.directed()) throw Error("Sybil synthesis requires an undirected graph");
  const std::size_t n = base.size();
  const auto cross_pairs = static_cast<unsigned long long>(n) * n;
  if (cfg.attack_links > cross_pairs) {
    throw Error("L = " + std::to_string(cfg.attack_links) + " exceeds the " + std::to_string(cross_pairs) +
                " distinct Sybil-normal pairs");
  }

  std::vector<Edge> edges;
  edges.reserve(2 * base.edge_count() + cfg.attack_links);
  for (const Edge& e : base.edges()) {
    edges.push_back(e);
    edges.push_back({static_cast<NodeId>(e.from + n), static_cast<NodeId>(e.to + n)});
  }

  Rng rng(cfg.seed);
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(n - 1));
  std::unordered_set<std::uint64_t> used;
  used.reserve(cfg.attack_links * 2);
  while (used.size() < cfg.attack_links) {
    const NodeId sybil = pick(rng);
    const NodeId normal = pick(rng);
    if (!used.insert(std::uint64_t{sybil} * n + normal).second) continue;
    edges.push_back({normal, static_cast<NodeId>(sybil + n)});
  }

  FullGraph g = FullGraph::from_edges(2 * n, std::move(edges), false);
  // Sybil copies keep the normal ids shifted past the largest one.
  std::vector<std::int64_t> ids = base.original_ids();
  if (n > 0) {
    const auto [lo, hi] = std::minmax_element(ids.begin(), ids.end());
    const std::int64_t shift = *hi - *lo + 1;
    for (std::size_t v = 0; v < n; ++v) ids.push_back(ids[v] + shift);
  }
  g.set_original_ids(std::move(ids));
  std::vector<Label> labels(2 * n, 0);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(n), labels.end(), Label{1});
  g.set_labels(std::move(labels));
  return g;
}

/// k-core index of every node by bucketed minimum-degree peeling
/// (Batagelj-Zaversnik). Directed graphs use the undirected skeleton.
inline ScoreTable coreness(const FullGraph& graph) {
  const std::size_t n = graph.size();
  std::vector<std::size_t> deg(n);
  std::size_t max_deg = 0;
  for (NodeId v = 0; v < n; ++v) {
    deg[v] = graph.degree(v);
    max_deg = std::max(max_deg, deg[v]);
  }

  // bin[d] = start of degree-d block in `order`.
  std::vector<std::size_t> bin(max_deg + 2, 0);
  for (std::size_t d : deg) ++bin[d + 1];
  std::partial_sum(bin.begin(), bin.end(), bin.begin());
  std::vector<NodeId> order(n);
  std::vector<std::size_t> pos(n);
  {
    std::vector<std::size_t> next(bin.begin(), bin.end() - 1);
    for (NodeId v = 0; v < n; ++v) {
      pos[v] = next[deg[v]]++;
      order[pos[v]] = v;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const NodeId v = order[i];
    for (NodeId u : graph.neighbors(v)) {
      if (deg[u] > deg[v]) {
        // Swap u with the first node of its degree block, then shrink the block.
        const std::size_t du = deg[u];
        const std::size_t pu = pos[u];
        const std::size_t pw = bin[du];
        const NodeId w = order[pw];
        if (u != w) {
          std::swap(order[pu], order[pw]);
          pos[u] = pw;
          pos[w] = pu;
        }
        ++bin[du];
        --deg[u];
      }
    }
  }
  return ScoreTable(deg.begin(), deg.end());
}

namespace detail {

inline std::size_t positive_count(double fraction, std::size_t n) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error("fraction must lie in (0, 1)");
  // Absorb representation error such as 0.29 * 100 = 28.999999999999996.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace detail

/// Labels the floor(fraction * n) nodes of lowest coreness; ties by id.
inline std::vector<Label> peripheral_labels(const FullGraph& graph, double fraction) {
  const ScoreTable core = coreness(graph);
  const std::size_t count = detail::positive_count(fraction, core.size());
  std::vector<NodeId> order(core.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return core[a] < core[b]; });
  std::vector<Label> labels(core.size(), 0);
  for (std::size_t i = 0; i < count; ++i) labels[order[i]] = 1;
  return labels;
}

/// Labels the floor(fraction * n) nodes of highest score; ties by id.
inline std::vector<Label> top_fraction_labels(const ScoreTable& scores, double fraction) {
  const std::size_t count = detail::positive_count(fraction, scores.size());
  std::vector<NodeId> order(scores.size());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return scores[a] > scores[b]; });
  std::vector<Label> labels(scores.size(), 0);
  for (std::size_t i = 0; i < count; ++i) labels[order[i]] = 1;
  return labels;
}

struct Cascade {
  NodeId initiator = 0;
  std::vector<NodeId> retweeters;  // temporal order
};

using CascadeSet = std::vector<Cascade>;

/// Throws unless every id exists in a graph of `node_count` nodes, retweeter
/// lists are duplicate-free and never contain their initiator.
inline void validate_cascades(const CascadeSet& cascades, std::size_t node_count) {
  std::vector<std::size_t> seen(node_count, SIZE_MAX);
  for (std::size_t c = 0; c < cascades.size(); ++c) {
    const Cascade& cascade = cascades[c];
    if (cascade.initiator >= node_count) {
      throw Error("cascade " + std::to_string(c) + ": unknown initiator " + std::to_string(cascade.initiator));
    }
    for (NodeId r : cascade.retweeters) {
      if (r >= node_count) throw Error("cascade " + std::to_string(c) + ": unknown node " + std::to_string(r));
      if (r == cascade.initiator) throw Error("cascade " + std::to_string(c) + ": initiator retweets itself");
      if (seen[r] == c) throw Error("cascade " + std::to_string(c) + ": duplicate retweeter " + std::to_string(r));
      seen[r] = c;
    }
  }
}

/// Parses "initiator: r1 r2 ..." lines (original ids, temporal order).
inline CascadeSet load_cascades(std::istream& in, const FullGraph& graph) {
  const auto index = graph.original_index();
  auto resolve = [&](const std::string& token, std::size_t line_no) {
    auto it = index.find(detail::parse_id(token, line_no));
    if (it == index.end()) throw ParseError(line_no, "node '" + token + "' is not in the graph");
    return it->second;
  };

  CascadeSet cascades;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError(line_no, "expected 'initiator: retweeters...'");
    std::istringstream head(line.substr(0, colon));
    std::string initiator, extra;
    if (!(head >> initiator) || (head >> extra)) throw ParseError(line_no, "expected a single initiator id");
    Cascade cascade;
    cascade.initiator = resolve(initiator, line_no);
    std::istringstream tail(line.substr(colon + 1));
    for (std::string token; tail >> token;) cascade.retweeters.push_back(resolve(token, line_no));
    try {
      validate_cascades({cascade}, graph.size());
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
    cascades.push_back(std::move(cascade));
  }
  return cascades;
}

/// S_u: distinct users retweeting any cascade initiated by u.
inline ScoreTable source_spreader_scores(const FullGraph& graph, const CascadeSet& cascades) {
  validate_cascades(cascades, graph.size());
  std::vector<std::vector<std::size_t>> initiated(graph.size());
  for (std::size_t c = 0; c < cascades.size(); ++c) initiated[cascades[c].initiator].push_back(c);

  ScoreTable scores(graph.size(), 0);
  std::vector<NodeId> stamp(graph.size(), UINT32_MAX);
  for (NodeId u = 0; u < graph.size(); ++u) {
    for (std::size_t c : initiated[u]) {
      for (NodeId r : cascades[c].retweeters) {
        if (stamp[r] != u) {
          stamp[r] = u;
          ++scores[u];
        }
      }
    }
  }
  return scores;
}

/// B_u: distinct users retweeting after u, over every cascade u retweeted in.
inline ScoreTable broker_scores(const FullGraph& graph, const CascadeSet& cascades) {
  validate_cascades(cascades, graph.size());
  struct Occurrence {
    std::size_t cascade;
    std::size_t position;
  };
  std::vector<std::vector<Occurrence>> occurrences(graph.size());
  for (std::size_t c = 0; c < cascades.size(); ++c) {
    const auto& rt = cascades[c].retweeters;
    for (std::size_t i = 0; i < rt.size(); ++i) occurrences[rt[i]].push_back({c, i});
  }

  ScoreTable scores(graph.size(), 0);
  std::vector<NodeId> stamp(graph.size(), UINT32_MAX);
  for (NodeId u = 0; u < graph.size(); ++u) {
    for (const Occurrence& occ : occurrences[u]) {
      const auto& rt = cascades[occ.cascade].retweeters;
      for (std::size_t j = occ.position + 1; j < rt.size(); ++j) {
        if (stamp[rt[j]] != u) {
          stamp[rt[j]] = u;
          ++scores[u];
        }
      }
    }
  }
  return scores;
}

}  // namespace hnd
