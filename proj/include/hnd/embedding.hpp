#pragma once

// Inductive relational-feature embedding (DeepGL style). A program of
// operator compositions over the base features and a label channel is fitted
// once on one snapshot and evaluated unchanged on any later snapshot.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hnd/error.hpp"
#include "hnd/features.hpp"
#include "hnd/graph.hpp"

namespace hnd {

enum class RelOp : std::uint8_t { sum, max, mean };

inline constexpr std::array<RelOp, 3> kAllRelOps = {RelOp::sum, RelOp::max, RelOp::mean};

inline std::string_view to_string(RelOp op) {
  switch (op) {
    case RelOp::sum: return "sum";
    case RelOp::max: return "max";
    case RelOp::mean: return "mean";
  }
  return "?";
}

/// Index of the label channel among layer-0 inputs (after the base features).
inline constexpr std::size_t kLabelChannel = kBaseFeatureCount;
inline constexpr std::size_t kLayerZeroCount = kBaseFeatureCount + 1;

/// One embedding dimension: `ops` applied in order to a layer-0 input.
struct FeatureDef {
  std::size_t input = 0;  // base feature index, or kLabelChannel
  std::vector<RelOp> ops;

  std::size_t layer() const noexcept { return ops.size(); }
  friend bool operator==(const FeatureDef&, const FeatureDef&) = default;
  friend auto operator<=>(const FeatureDef&, const FeatureDef&) = default;
};

inline std::string input_name(std::size_t input) {
  if (input == kLabelChannel) return "label";
  if (input < kBaseFeatureCount) return std::string(kBaseFeatureNames[input]);
  throw Error("unknown embedding input " + std::to_string(input));
}

/// "opK∘…∘op1∘input", outermost operator first.
inline std::string to_string(const FeatureDef& def) {
  std::string s;
  for (auto it = def.ops.rbegin(); it != def.ops.rend(); ++it) {
    s += to_string(*it);
    s += "∘";
  }
  return s + input_name(def.input);
}

struct EmbeddingParams {
  double lambda = 0.7;     // similarity threshold for pruning
  std::size_t depth = 2;   // maximum operator-sequence length
  double bin_ratio = 0.5;  // log-binning mass fraction
};

struct FeatureProgram {
  EmbeddingParams params;
  std::vector<FeatureDef> defs;  // construction order

  std::size_t size() const noexcept { return defs.size(); }
};

/// Values equal up to summation-order rounding.
inline bool same_value(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Bin index per value. Values are ranked ascending; bin 0 takes the first
/// ceil(ratio * n) values, each later bin ceil(ratio * remaining), and a bin
/// always extends to swallow a run of equal values.
inline std::vector<std::uint32_t> log_bin(std::span<const double> column, double bin_ratio) {
  if (!(bin_ratio > 0.0 && bin_ratio < 1.0)) throw Error("bin_ratio must lie in (0, 1)");
  const std::size_t n = column.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });

  std::vector<std::uint32_t> bins(n, 0);
  std::size_t pos = 0;
  std::uint32_t bin = 0;
  while (pos < n) {
    const double want = bin_ratio * static_cast<double>(n - pos);
    auto take = static_cast<std::size_t>(std::ceil(want - 1e-9));
    take = std::max<std::size_t>(take, 1);
    std::size_t end = std::min(n, pos + take);
    while (end < n && same_value(column[order[end]], column[order[end - 1]])) ++end;
    for (std::size_t i = pos; i < end; ++i) bins[order[i]] = bin;
    pos = end;
    ++bin;
  }
  return bins;
}

/// Indices of columns surviving similarity pruning. Columns i and j are
/// linked when their bins agree on at least `lambda` of the rows; one column
/// (the earliest) survives per connected component.
inline std::vector<std::size_t> prune_similar(const std::vector<std::vector<std::uint32_t>>& binned, double lambda) {
  const std::size_t k = binned.size();
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const auto& a = binned[i];
      const auto& b = binned[j];
      std::size_t agree = 0;
      for (std::size_t r = 0; r < a.size(); ++r) agree += a[r] == b[r];
      const double similarity = a.empty() ? 1.0 : static_cast<double>(agree) / static_cast<double>(a.size());
      if (similarity >= lambda) {
        const std::size_t ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < k; ++i) {
    if (find(i) == i) keep.push_back(i);
  }
  return keep;
}

/// Members of a view in CSR form over local row indices.
struct LocalGraph {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> adj;
  std::vector<std::uint32_t> row_of;  // dense id -> row, UINT32_MAX if absent

  std::size_t size() const noexcept { return nodes.size(); }
  bool has_edges() const noexcept { return !adj.empty(); }
};

template <LabeledView V>
LocalGraph make_local_graph(const V& view) {
  LocalGraph g;
  g.nodes = view.members();
  g.row_of.assign(view.capacity(), UINT32_MAX);
  for (std::size_t r = 0; r < g.nodes.size(); ++r) g.row_of[g.nodes[r]] = static_cast<std::uint32_t>(r);
  g.offsets.reserve(g.nodes.size() + 1);
  g.offsets.push_back(0);
  for (NodeId v : g.nodes) {
    for (NodeId u : view.neighbors(v)) {
      if (g.row_of[u] != UINT32_MAX) g.adj.push_back(g.row_of[u]);
    }
    g.offsets.push_back(g.adj.size());
  }
  return g;
}

/// Applies a relational operator over each row's neighbors. Empty
/// neighborhoods yield 0 for every operator.
inline std::vector<double> apply_op(RelOp op, const LocalGraph& g, std::span<const double> column) {
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t r = 0; r < g.size(); ++r) {
    const std::size_t begin = g.offsets[r], end = g.offsets[r + 1];
    if (begin == end) continue;
    double acc = op == RelOp::max ? column[g.adj[begin]] : 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double x = column[g.adj[i]];
      if (op == RelOp::max) {
        acc = std::max(acc, x);
      } else {
        acc += x;
      }
    }
    if (op == RelOp::mean) acc /= static_cast<double>(end - begin);
    out[r] = acc;
  }
  return out;
}

/// Layer-0 inputs for every row: the base features and the label channel
/// (revealed label, or -1 when unknown).
template <LabeledView V>
std::vector<std::vector<double>> layer_zero_columns(const V& view, const LocalGraph& g) {
  std::vector<std::vector<double>> cols(kLayerZeroCount, std::vector<double>(g.size()));
  FeatureScratch scratch;
  for (std::size_t r = 0; r < g.size(); ++r) {
    const FeatureVector f = base_features(view, g.nodes[r], scratch);
    for (std::size_t c = 0; c < kBaseFeatureCount; ++c) cols[c][r] = f[c];
    cols[kLabelChannel][r] = static_cast<double>(view.label(g.nodes[r]));
  }
  return cols;
}

/// Learns the feature program on one snapshot.
template <LabeledView V>
FeatureProgram fit_embedding(const V& view, const EmbeddingParams& params = {}) {
  if (!(params.lambda > 0.0 && params.lambda <= 1.0)) throw Error("lambda must lie in (0, 1]");
  if (params.depth < 1) throw Error("embedding depth must be at least 1");
  const LocalGraph g = make_local_graph(view);
  if (g.size() == 0) throw Error("cannot fit an embedding on an empty view");

  struct Candidate {
    FeatureDef def;
    std::vector<double> values;
  };
  auto prune = [&](std::vector<Candidate> layer) {
    std::vector<std::vector<std::uint32_t>> binned;
    binned.reserve(layer.size());
    for (const auto& c : layer) binned.push_back(log_bin(c.values, params.bin_ratio));
    std::vector<Candidate> kept;
    for (std::size_t i : prune_similar(binned, params.lambda)) kept.push_back(std::move(layer[i]));
    return kept;
  };

  FeatureProgram program;
  program.params = params;

  auto inputs = layer_zero_columns(view, g);
  std::vector<Candidate> layer;
  for (std::size_t c = 0; c < kLayerZeroCount; ++c) layer.push_back({FeatureDef{c, {}}, std::move(inputs[c])});
  layer = prune(std::move(layer));
  for (const auto& c : layer) program.defs.push_back(c.def);

  if (!g.has_edges()) return program;

  for (std::size_t d = 1; d <= params.depth; ++d) {
    std::vector<Candidate> next;
    for (const Candidate& prev : layer) {
      for (RelOp op : kAllRelOps) {
        Candidate c{prev.def, apply_op(op, g, prev.values)};
        c.def.ops.push_back(op);
        next.push_back(std::move(c));
      }
    }
    layer = prune(std::move(next));
    for (const auto& c : layer) program.defs.push_back(c.def);
  }
  return program;
}

/// Row-major per-node embedding for the members of one snapshot.
struct Embedding {
  std::vector<NodeId> nodes;
  std::vector<std::uint32_t> row_of;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(NodeId v) const {
    const std::uint32_t r = v < row_of.size() ? row_of[v] : UINT32_MAX;
    if (r == UINT32_MAX) throw Error("node " + std::to_string(v) + " has no embedding row");
    return {values.data() + static_cast<std::size_t>(r) * dim, dim};
  }
};

/// Raw (unbinned) value of every program definition, one column per def.
template <LabeledView V>
std::vector<std::vector<double>> evaluate_raw(const FeatureProgram& program, const V& view, const LocalGraph& g) {
  std::map<FeatureDef, std::vector<double>> memo;
  auto inputs = layer_zero_columns(view, g);
  for (std::size_t c = 0; c < kLayerZeroCount; ++c) memo.emplace(FeatureDef{c, {}}, std::move(inputs[c]));

  auto eval = [&](auto& self, const FeatureDef& def) -> const std::vector<double>& {
    if (auto it = memo.find(def); it != memo.end()) return it->second;
    if (def.input >= kLayerZeroCount || def.ops.empty()) throw Error("invalid feature definition");
    FeatureDef inner = def;
    inner.ops.pop_back();
    const auto& prev = self(self, inner);
    return memo.emplace(def, apply_op(def.ops.back(), g, prev)).first->second;
  };

  std::vector<std::vector<double>> cols;
  cols.reserve(program.defs.size());
  for (const FeatureDef& def : program.defs) cols.push_back(eval(eval, def));
  return cols;
}

/// Evaluates the program on any snapshot and log-bins every column over that
/// snapshot's members. Output dimensionality always equals program size.
template <LabeledView V>
Embedding transform(const FeatureProgram& program, const V& view) {
  const LocalGraph g = make_local_graph(view);
  const auto cols = evaluate_raw(program, view, g);
  Embedding e;
  e.nodes = g.nodes;
  e.row_of = g.row_of;
  e.dim = program.defs.size();
  e.values.assign(g.size() * e.dim, 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto bins = log_bin(cols[c], program.params.bin_ratio);
    for (std::size_t r = 0; r < g.size(); ++r) e.values[r * e.dim + c] = bins[r];
  }
  return e;
}

/// One definition per line; parameters in a leading comment.
inline void write_program(std::ostream& out, const FeatureProgram& program) {
  out << "# lambda=" << program.params.lambda << " depth=" << program.params.depth
      << " bin_ratio=" << program.params.bin_ratio << '\n';
  for (const FeatureDef& def : program.defs) out << to_string(def) << '\n';
}

inline FeatureProgram read_program(std::istream& in) {
  FeatureProgram program;
  std::string line;
  std::size_t line_no = 0;
  constexpr std::string_view kCompose = "∘";
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      for (std::string kv; fields >> kv;) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
        if (key == "lambda") program.params.lambda = std::stod(value);
        if (key == "depth") program.params.depth = std::stoul(value);
        if (key == "bin_ratio") program.params.bin_ratio = std::stod(value);
      }
      continue;
    }
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t at; (at = line.find(kCompose, start)) != std::string::npos; start = at + kCompose.size()) {
      parts.push_back(line.substr(start, at - start));
    }
    parts.push_back(line.substr(start));

    FeatureDef def;
    const std::string& input = parts.back();
    def.input = SIZE_MAX;
    if (input == "label") def.input = kLabelChannel;
    for (std::size_t i = 0; i < kBaseFeatureCount; ++i) {
      if (input == kBaseFeatureNames[i]) def.input = i;
    }
    if (def.input == SIZE_MAX) throw ParseError(line_no, "unknown input '" + input + "'");
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) {
      if (*it == "sum") {
        def.ops.push_back(RelOp::sum);
      } else if (*it == "max") {
        def.ops.push_back(RelOp::max);
      } else if (*it == "mean") {
        def.ops.push_back(RelOp::mean);
      } else {
        throw ParseError(line_no, "unknown operator '" + *it + "'");
      }
    }
    if (def.ops.size() > program.params.depth) throw ParseError(line_no, "operator chain longer than depth");
    program.defs.push_back(std::move(def));
  }
  return program;
}

}  // namespace hnd
