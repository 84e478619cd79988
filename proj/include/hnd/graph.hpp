#pragma once

// Hidden graph, single-node query oracle and the explorer's partial view.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hnd/error.hpp"

namespace hnd {

using NodeId = std::uint32_t;
using Label = std::uint8_t;
using Rng = std::mt19937_64;

/// Label value reported by views for nodes whose label has not been revealed.
inline constexpr int kUnknownLabel = -1;

struct Edge {
  NodeId from;
  NodeId to;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// The complete graph together with the true label of every node. Immutable
/// apart from relabelling; shared read-only between trials.
class FullGraph {
 public:
  FullGraph() = default;

  /// Builds a graph on `node_count` nodes. Self-loops and duplicate edges are
  /// dropped; for undirected graphs (u,v) and (v,u) are the same edge.
  static FullGraph from_edges(std::size_t node_count, std::vector<Edge> edges, bool directed = false) {
    FullGraph g;
    g.directed_ = directed;
    g.labels_.assign(node_count, 0);
    for (Edge& e : edges) {
      if (e.from >= node_count || e.to >= node_count) {
        throw Error("edge endpoint out of range: (" + std::to_string(e.from) + ", " + std::to_string(e.to) +
                    ") with " + std::to_string(node_count) + " nodes");
      }
      if (!directed && e.from > e.to) std::swap(e.from, e.to);
    }
    std::erase_if(edges, [](const Edge& e) { return e.from == e.to; });
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges_ = std::move(edges);

    g.adj_.assign(node_count, {});
    if (directed) {
      g.out_.assign(node_count, {});
      g.in_.assign(node_count, {});
    }
    for (const Edge& e : g.edges_) {
      g.adj_[e.from].push_back(e.to);
      g.adj_[e.to].push_back(e.from);
      if (directed) {
        g.out_[e.from].push_back(e.to);
        g.in_[e.to].push_back(e.from);
      }
    }
    for (auto& list : g.adj_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    for (auto& list : g.out_) std::sort(list.begin(), list.end());
    for (auto& list : g.in_) std::sort(list.begin(), list.end());
    g.original_ids_.resize(node_count);
    std::iota(g.original_ids_.begin(), g.original_ids_.end(), std::int64_t{0});
    return g;
  }

  std::size_t size() const noexcept { return adj_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool directed() const noexcept { return directed_; }
  bool empty() const noexcept { return adj_.empty(); }

  /// Edges sorted ascending; undirected edges are stored with from < to.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Sorted neighbors over the undirected skeleton (in- and out-neighbors).
  std::span<const NodeId> neighbors(NodeId v) const { return adj_.at(v); }
  std::span<const NodeId> out_neighbors(NodeId v) const { return directed_ ? out_.at(v) : adj_.at(v); }
  std::span<const NodeId> in_neighbors(NodeId v) const { return directed_ ? in_.at(v) : adj_.at(v); }
  std::size_t degree(NodeId v) const { return adj_.at(v).size(); }

  bool adjacent(NodeId u, NodeId v) const {
    const auto& list = adj_.at(u);
    return std::binary_search(list.begin(), list.end(), v);
  }

  bool contains(NodeId v) const noexcept { return v < adj_.size(); }

  Label label(NodeId v) const { return labels_.at(v); }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  void set_labels(std::vector<Label> labels) {
    if (labels.size() != size()) throw Error("label vector size does not match node count");
    for (Label l : labels) {
      if (l > 1) throw Error("labels must be 0 or 1");
    }
    labels_ = std::move(labels);
  }

  std::size_t target_count() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), Label{1}));
  }

  /// Identifier of each dense node id in the source file.
  const std::vector<std::int64_t>& original_ids() const noexcept { return original_ids_; }
  void set_original_ids(std::vector<std::int64_t> ids) {
    if (ids.size() != size()) throw Error("original id vector size does not match node count");
    original_ids_ = std::move(ids);
  }

  /// Map from original identifier to dense id.
  std::unordered_map<std::int64_t, NodeId> original_index() const {
    std::unordered_map<std::int64_t, NodeId> index;
    index.reserve(size());
    for (NodeId v = 0; v < size(); ++v) index.emplace(original_ids_[v], v);
    return index;
  }

 private:
  bool directed_ = false;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adj_;
  std::vector<std::vector<NodeId>> out_;
  std::vector<std::vector<NodeId>> in_;
  std::vector<Label> labels_;
  std::vector<std::int64_t> original_ids_;
};

/// What a single query reveals about a node.
struct QueryResult {
  NodeId node = 0;
  Label label = 0;
  std::vector<NodeId> neighbors;      // in ∪ out, sorted, never contains `node`
  std::vector<NodeId> out_neighbors;  // directed graphs only
  std::vector<NodeId> in_neighbors;   // directed graphs only
};

inline QueryResult query(const FullGraph& graph, NodeId node) {
  if (!graph.contains(node)) throw Error("query of unknown node " + std::to_string(node));
  QueryResult r;
  r.node = node;
  r.label = graph.label(node);
  auto nb = graph.neighbors(node);
  r.neighbors.assign(nb.begin(), nb.end());
  if (graph.directed()) {
    auto out = graph.out_neighbors(node);
    auto in = graph.in_neighbors(node);
    r.out_neighbors.assign(out.begin(), out.end());
    r.in_neighbors.assign(in.begin(), in.end());
  }
  return r;
}

/// The explorer's partial view G_k: queried nodes with their labels, border
/// nodes, and every edge incident to a queried node. Node ids share the dense
/// id space of the hidden graph; `capacity` only sizes the lookup tables.
class ObservedGraph {
 public:
  enum class State : std::uint8_t { unseen, border, queried };

  ObservedGraph() = default;
  explicit ObservedGraph(std::size_t capacity)
      : state_(capacity, State::unseen),
        labels_(capacity, 0),
        adj_(capacity),
        border_pos_(capacity, kNoPos) {}

  std::size_t capacity() const noexcept { return state_.size(); }
  bool empty() const noexcept { return queried_.empty(); }

  /// Moves a border node to the queried set. Only valid on border nodes, or
  /// on any node while the view is still empty.
  void absorb(const QueryResult& result) {
    check_node(result.node);
    if (state_[result.node] == State::queried) {
      throw Error("node " + std::to_string(result.node) + " absorbed twice");
    }
    if (state_[result.node] != State::border && !empty()) {
      throw Error("node " + std::to_string(result.node) + " is not on the border");
    }
    absorb_unchecked(result);
  }

  /// Absorb used while seeding: the node may be previously unseen (e.g. a
  /// random-walk restart into another component).
  void absorb_seed(const QueryResult& result) {
    check_node(result.node);
    if (state_[result.node] == State::queried) {
      throw Error("node " + std::to_string(result.node) + " absorbed twice");
    }
    absorb_unchecked(result);
  }

  State state(NodeId v) const { return state_.at(v); }
  bool is_queried(NodeId v) const { return v < capacity() && state_[v] == State::queried; }
  bool is_border(NodeId v) const { return v < capacity() && state_[v] == State::border; }
  bool contains(NodeId v) const { return v < capacity() && state_[v] != State::unseen; }

  /// Revealed label, or kUnknownLabel for border/unseen nodes.
  int label(NodeId v) const { return is_queried(v) ? static_cast<int>(labels_[v]) : kUnknownLabel; }

  /// Queried nodes in query order.
  const std::vector<NodeId>& queried() const noexcept { return queried_; }

  /// Border nodes in unspecified order.
  std::span<const NodeId> border_unordered() const noexcept { return border_; }

  std::vector<NodeId> border() const {
    std::vector<NodeId> b(border_.begin(), border_.end());
    std::sort(b.begin(), b.end());
    return b;
  }
  std::size_t border_size() const noexcept { return border_.size(); }

  /// Queried then border nodes, each group ascending.
  std::vector<NodeId> members() const {
    std::vector<NodeId> q = queried_;
    std::sort(q.begin(), q.end());
    std::vector<NodeId> b = border();
    q.insert(q.end(), b.begin(), b.end());
    return q;
  }
  std::size_t member_count() const noexcept { return queried_.size() + border_.size(); }

  /// Observed neighbors in discovery order (undirected skeleton).
  std::span<const NodeId> neighbors(NodeId v) const { return adj_.at(v); }
  std::size_t degree(NodeId v) const { return adj_.at(v).size(); }

  /// Observed edges in discovery order, oriented as in the hidden graph.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::size_t target_count() const noexcept { return targets_; }

 private:
  static constexpr std::size_t kNoPos = static_cast<std::size_t>(-1);

  void check_node(NodeId v) const {
    if (v >= capacity()) throw Error("node " + std::to_string(v) + " outside view capacity");
  }

  void absorb_unchecked(const QueryResult& r) {
    const NodeId v = r.node;
    if (state_[v] == State::border) remove_border(v);
    state_[v] = State::queried;
    labels_[v] = r.label;
    targets_ += r.label;
    queried_.push_back(v);
    const bool directed = !r.out_neighbors.empty() || !r.in_neighbors.empty();
    for (NodeId u : r.neighbors) {
      check_node(u);
      if (u == v) continue;
      // An edge to an already-queried node was recorded when that node was queried.
      if (state_[u] == State::queried) continue;
      adj_[v].push_back(u);
      adj_[u].push_back(v);
      if (directed) {
        if (std::binary_search(r.out_neighbors.begin(), r.out_neighbors.end(), u)) edges_.push_back({v, u});
        if (std::binary_search(r.in_neighbors.begin(), r.in_neighbors.end(), u)) edges_.push_back({u, v});
      } else {
        edges_.push_back({v, u});
      }
      if (state_[u] == State::unseen) {
        state_[u] = State::border;
        border_pos_[u] = border_.size();
        border_.push_back(u);
      }
    }
  }

  void remove_border(NodeId v) {
    const std::size_t pos = border_pos_[v];
    const NodeId last = border_.back();
    border_[pos] = last;
    border_pos_[last] = pos;
    border_.pop_back();
    border_pos_[v] = kNoPos;
  }

  std::vector<State> state_;
  std::vector<Label> labels_;
  std::vector<std::vector<NodeId>> adj_;
  std::vector<Edge> edges_;
  std::vector<NodeId> queried_;
  std::vector<NodeId> border_;
  std::vector<std::size_t> border_pos_;
  std::size_t targets_ = 0;
};

/// Called after every seed absorb with the view and the number queried so far.
using SeedObserver = std::function<void(const ObservedGraph&, std::size_t)>;

/// Simple random walk over the undirected skeleton from a uniformly random
/// node, querying each first-visited node until `m0` nodes are queried. When
/// the walk's component is exhausted it restarts at a uniformly random
/// unqueried node.
inline ObservedGraph random_walk_seed(const FullGraph& graph, std::size_t m0, Rng& rng,
                                      const SeedObserver& observer = {}) {
  if (graph.empty()) throw Error("cannot seed an empty graph");
  if (m0 == 0) throw Error("m0 must be at least 1");
  if (m0 > graph.size()) {
    throw Error("m0 (" + std::to_string(m0) + ") exceeds node count (" + std::to_string(graph.size()) + ")");
  }

  // Component id and size per node, for trap detection.
  const std::size_t n = graph.size();
  std::vector<std::uint32_t> comp(n, UINT32_MAX);
  std::vector<std::size_t> comp_size;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] != UINT32_MAX) continue;
    const auto c = static_cast<std::uint32_t>(comp_size.size());
    comp_size.push_back(0);
    comp[s] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      ++comp_size[c];
      for (NodeId w : graph.neighbors(u)) {
        if (comp[w] == UINT32_MAX) {
          comp[w] = c;
          stack.push_back(w);
        }
      }
    }
  }
  std::vector<std::size_t> comp_queried(comp_size.size(), 0);

  ObservedGraph view(n);
  auto visit = [&](NodeId v) {
    view.absorb_seed(query(graph, v));
    ++comp_queried[comp[v]];
    if (observer) observer(view, view.queried().size());
  };

  auto pick_unqueried = [&]() {
    std::vector<NodeId> pool;
    pool.reserve(n - view.queried().size());
    for (NodeId v = 0; v < n; ++v) {
      if (!view.is_queried(v)) pool.push_back(v);
    }
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)];
  };

  std::uniform_int_distribution<NodeId> start(0, static_cast<NodeId>(n - 1));
  NodeId current = start(rng);
  visit(current);
  while (view.queried().size() < m0) {
    if (comp_queried[comp[current]] == comp_size[comp[current]]) {
      current = pick_unqueried();
      visit(current);
      continue;
    }
    auto nb = graph.neighbors(current);
    std::uniform_int_distribution<std::size_t> step(0, nb.size() - 1);
    current = nb[step(rng)];
    if (!view.is_queried(current)) visit(current);
  }
  return view;
}

namespace detail {

inline bool is_blank_or_comment(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

inline std::int64_t parse_id(const std::string& token, std::size_t line_no) {
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(token, &used);
  } catch (const std::exception&) {
    throw ParseError(line_no, "invalid node id '" + token + "'");
  }
  if (used != token.size()) throw ParseError(line_no, "invalid node id '" + token + "'");
  return value;
}

}  // namespace detail

/// Reads a whitespace-separated edge list, one edge per line, '#' comments.
/// Ids are compacted to 0..n-1 in order of first appearance.
inline FullGraph load_edge_list(std::istream& in, bool directed = false) {
  std::unordered_map<std::int64_t, NodeId> index;
  std::vector<std::int64_t> originals;
  std::vector<Edge> edges;
  auto intern = [&](std::int64_t id) {
    auto [it, inserted] = index.emplace(id, static_cast<NodeId>(originals.size()));
    if (inserted) originals.push_back(id);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b) || (fields >> extra)) {
      throw ParseError(line_no, "expected two node ids");
    }
    NodeId u = intern(detail::parse_id(a, line_no));
    NodeId v = intern(detail::parse_id(b, line_no));
    edges.push_back({u, v});
  }
  if (originals.empty()) throw Error("edge list contains no edges");

  FullGraph g = FullGraph::from_edges(originals.size(), std::move(edges), directed);
  g.set_original_ids(std::move(originals));
  return g;
}

inline void write_edge_list(std::ostream& out, const FullGraph& graph) {
  const auto& ids = graph.original_ids();
  for (const Edge& e : graph.edges()) out << ids[e.from] << ' ' << ids[e.to] << '\n';
}

/// Reads "node_id label" lines keyed by original ids. Every node must be
/// labelled exactly once.
inline std::vector<Label> load_labels(std::istream& in, const FullGraph& graph) {
  const auto index = graph.original_index();
  std::vector<int> labels(graph.size(), -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank_or_comment(line)) continue;
    std::istringstream fields(line);
    std::string id, value, extra;
    if (!(fields >> id >> value) || (fields >> extra)) throw ParseError(line_no, "expected 'node_id label'");
    auto it = index.find(detail::parse_id(id, line_no));
    if (it == index.end()) throw ParseError(line_no, "unknown node id '" + id + "'");
    if (value != "0" && value != "1") throw ParseError(line_no, "label must be 0 or 1");
    if (labels[it->second] != -1) throw ParseError(line_no, "node '" + id + "' labelled twice");
    labels[it->second] = value == "1" ? 1 : 0;
  }
  std::vector<Label> out(graph.size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (labels[v] < 0) throw Error("no label for node " + std::to_string(graph.original_ids()[v]));
    out[v] = static_cast<Label>(labels[v]);
  }
  return out;
}

inline void write_labels(std::ostream& out, const FullGraph& graph, const std::vector<Label>& labels) {
  const auto& ids = graph.original_ids();
  for (NodeId v = 0; v < graph.size(); ++v) out << ids[v] << ' ' << static_cast<int>(labels.at(v)) << '\n';
}

}  // namespace hnd
