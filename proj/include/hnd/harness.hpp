#pragma once

// Round-based exploration experiments and their metrics.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hnd/classifier.hpp"
#include "hnd/embedding.hpp"
#include "hnd/error.hpp"
#include "hnd/features.hpp"
#include "hnd/graph.hpp"
#include "hnd/labels.hpp"
#include "hnd/strategies.hpp"

namespace hnd {

enum class Task { sybil, periphery, source, broker, given };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::sybil: return "sybil";
    case Task::periphery: return "periphery";
    case Task::source: return "source";
    case Task::broker: return "broker";
    case Task::given: return "given";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  if (s == "sybil") return Task::sybil;
  if (s == "periphery") return Task::periphery;
  if (s == "source") return Task::source;
  if (s == "broker") return Task::broker;
  if (s == "given") return Task::given;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

enum class ArmKind { mod, tn, random, ml };
enum class FeatureSet { base, deepgl };
enum class Topology { observed, full };

/// One ranking policy. A strategy with several arms runs them under D3TS.
struct ArmSpec {
  std::string name;
  ArmKind kind = ArmKind::ml;
  FeatureSet features = FeatureSet::base;
  Topology topology = Topology::observed;
  ClassifierConfig classifier;
  bool inverted = false;  // rank by ascending probability (test fixture for bad arms)
};

inline const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = {"mod",    "tn",     "random",        "ml-base", "ml-deepgl",
                                                 "oracle", "oracle-deepgl", "bandit2", "bandit6"};
  return names;
}

inline std::vector<ArmSpec> strategy_arms(std::string_view name, const ClassifierConfig& cls) {
  auto ml = [&](std::string arm_name, FeatureSet fs, Topology topo, ClassifierConfig c) {
    return ArmSpec{std::move(arm_name), ArmKind::ml, fs, topo, std::move(c), false};
  };
  auto heuristic = [](std::string arm_name, ArmKind kind) {
    ArmSpec a;
    a.name = std::move(arm_name);
    a.kind = kind;
    return a;
  };
  if (name == "mod") return {heuristic("mod", ArmKind::mod)};
  if (name == "tn") return {heuristic("tn", ArmKind::tn)};
  if (name == "random") return {heuristic("random", ArmKind::random)};
  if (name == "ml-base") return {ml("ml-base", FeatureSet::base, Topology::observed, cls)};
  if (name == "ml-deepgl") return {ml("ml-deepgl", FeatureSet::deepgl, Topology::observed, cls)};
  if (name == "oracle") return {ml("oracle", FeatureSet::base, Topology::full, cls)};
  if (name == "oracle-deepgl") return {ml("oracle-deepgl", FeatureSet::deepgl, Topology::full, cls)};
  if (name == "bandit2") {
    return {ml("ml-base", FeatureSet::base, Topology::observed, cls),
            ml("ml-deepgl", FeatureSet::deepgl, Topology::observed, cls)};
  }
  if (name == "bandit6") {
    std::vector<ArmSpec> arms;
    for (ClassifierKind kind : {ClassifierKind::gbt, ClassifierKind::logistic, ClassifierKind::random_forest}) {
      ClassifierConfig c = cls;
      c.kind = kind;
      const std::string prefix(to_string(kind));
      arms.push_back(ml(prefix + "-base", FeatureSet::base, Topology::observed, c));
      arms.push_back(ml(prefix + "-deepgl", FeatureSet::deepgl, Topology::observed, c));
    }
    return arms;
  }
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

struct ExperimentConfig {
  std::string dataset;
  bool directed = false;
  std::string labels_file;
  std::string cascades_file;
  Task task = Task::sybil;
  std::string strategy = "bandit2";
  std::size_t m0 = 200;
  std::size_t mk = 100;
  std::size_t rounds = 0;             // 0: until the budget or border runs out
  std::size_t max_queries = 0;        // 0: unlimited; includes seed queries when count_seed
  std::size_t retrain_every = 1;      // 0: train once on the seed view, never again
  double embedding_build_point = 0.5; // fraction of m0 queried when the embedding is fitted
  std::size_t trials = 10;
  std::uint64_t seed = 1;
  ClassifierConfig classifier;
  std::size_t attack_links = 80'000;
  double fraction = 0.1;
  EmbeddingParams embedding;
  double cap = 100.0;
  bool count_seed = true;
  std::size_t parallel_trials = 1;

  void validate() const {
    if (m0 < 1) throw ConfigError("m0 must be at least 1");
    if (mk < 1) throw ConfigError("mk must be at least 1");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (!(embedding_build_point > 0 && embedding_build_point <= 1)) {
      throw ConfigError("embedding build point must lie in (0, 1]");
    }
    if (!(cap > 0)) throw ConfigError("bandit cap must be positive");
  }
};

/// Queries issued in one round (round 0 is the random-walk seed).
struct RoundLog {
  std::size_t round = 0;
  std::vector<NodeId> queried;
  std::vector<Label> labels;
  std::vector<int> slot_arm;  // -1 for the seed round
  std::size_t targets_cum = 0;
  std::size_t queries_cum = 0;
  double wall_seconds = 0;
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::size_t node_count = 0;
  std::size_t total_targets = 0;
  std::size_t seed_queries = 0;
  std::vector<std::string> arm_names;
  std::vector<RoundLog> rounds;
};

/// Independent per-trial seed stream (splitmix64).
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t trial) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace detail {

struct ArmState {
  ArmSpec spec;
  ModelPtr model;
};

struct RoundTables {
  std::optional<FeatureTable> observed_base, observed_deepgl, full_base, full_deepgl;
};

inline const FeatureTable& table_for(const RoundTables& t, const ArmSpec& arm) {
  const bool full = arm.topology == Topology::full;
  const bool deep = arm.features == FeatureSet::deepgl;
  const auto& slot = full ? (deep ? t.full_deepgl : t.full_base) : (deep ? t.observed_deepgl : t.observed_base);
  if (!slot) throw Error("feature table missing for arm " + arm.name);
  return *slot;
}

}  // namespace detail

/// Runs one exploration with explicit arms. The graph must carry its labels.
inline TrialResult run_trial(const FullGraph& graph, const ExperimentConfig& cfg, const std::vector<ArmSpec>& arms,
                             std::uint64_t seed) {
  cfg.validate();
  if (arms.empty()) throw ConfigError("strategy has no arms");
  if (cfg.max_queries && cfg.count_seed && cfg.max_queries < cfg.m0) {
    throw ConfigError("max_queries is smaller than the seed size");
  }
  using Clock = std::chrono::steady_clock;

  TrialResult result;
  result.seed = seed;
  result.node_count = graph.size();
  result.total_targets = graph.target_count();
  for (const auto& a : arms) result.arm_names.push_back(a.name);

  bool need_observed_deepgl = false, need_full_deepgl = false;
  for (const auto& a : arms) {
    if (a.kind == ArmKind::ml && a.features == FeatureSet::deepgl) {
      (a.topology == Topology::full ? need_full_deepgl : need_observed_deepgl) = true;
    }
  }

  Rng rng(seed);
  std::optional<FeatureProgram> observed_program, full_program;
  const auto build_at = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(cfg.embedding_build_point * static_cast<double>(cfg.m0) - 1e-9)));

  auto start = Clock::now();
  ObservedGraph view = random_walk_seed(graph, cfg.m0, rng, [&](const ObservedGraph& v, std::size_t count) {
    if (count != build_at) return;
    if (need_observed_deepgl) observed_program = fit_embedding(v, cfg.embedding);
    if (need_full_deepgl) full_program = fit_embedding(RevealedGraph(graph, v), cfg.embedding);
  });

  {
    RoundLog seed_round;
    seed_round.round = 0;
    seed_round.queried = view.queried();
    for (NodeId v : seed_round.queried) seed_round.labels.push_back(graph.label(v));
    seed_round.slot_arm.assign(seed_round.queried.size(), -1);
    seed_round.targets_cum = view.target_count();
    seed_round.queries_cum = view.queried().size();
    seed_round.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.seed_queries = seed_round.queries_cum;
    result.rounds.push_back(std::move(seed_round));
  }

  std::vector<detail::ArmState> states;
  for (const auto& a : arms) states.push_back({a, nullptr});
  BanditState bandit(arms.size(), cfg.cap);

  for (std::size_t round = 1;; ++round) {
    if (cfg.rounds && round > cfg.rounds) break;
    if (view.border_size() == 0) break;
    std::size_t m = std::min(cfg.mk, view.border_size());
    if (cfg.max_queries) {
      const std::size_t used = view.queried().size() - (cfg.count_seed ? 0 : result.seed_queries);
      if (used >= cfg.max_queries) break;
      m = std::min(m, cfg.max_queries - used);
    }
    start = Clock::now();

    detail::RoundTables tables;
    const std::vector<NodeId> members = view.members();
    for (const auto& a : arms) {
      if (a.kind != ArmKind::ml) continue;
      if (a.topology == Topology::observed) {
        if (a.features == FeatureSet::base && !tables.observed_base) {
          tables.observed_base = base_feature_table(view, members);
        }
        if (a.features == FeatureSet::deepgl && !tables.observed_deepgl) {
          tables.observed_deepgl = embedding_feature_table(view, members, *observed_program);
        }
      } else {
        const RevealedGraph revealed(graph, view);
        if (a.features == FeatureSet::base && !tables.full_base) {
          tables.full_base = base_feature_table(revealed, members);
        }
        if (a.features == FeatureSet::deepgl && !tables.full_deepgl) {
          tables.full_deepgl = embedding_feature_table(revealed, members, *full_program);
        }
      }
    }

    const bool retrain = round == 1 || (cfg.retrain_every > 0 && (round - 1) % cfg.retrain_every == 0);
    std::vector<std::vector<NodeId>> rankings;
    for (std::size_t k = 0; k < states.size(); ++k) {
      auto& arm = states[k];
      switch (arm.spec.kind) {
        case ArmKind::mod: rankings.push_back(mod_ranking(view)); break;
        case ArmKind::tn: rankings.push_back(tn_ranking(view)); break;
        case ArmKind::random: rankings.push_back(random_ranking(view, rng)); break;
        case ArmKind::ml: {
          const FeatureTable& table = detail::table_for(tables, arm.spec);
          if (retrain || !arm.model) {
            arm.model = train(training_set(table, view), arm.spec.classifier, trial_seed(seed, round * 64 + k));
          }
          if (arm.spec.inverted) {
            const std::vector<NodeId> border = view.border();
            std::vector<double> scores(border.size());
            for (std::size_t i = 0; i < border.size(); ++i) scores[i] = 1.0 - arm.model->predict(table.row(border[i]));
            rankings.push_back(rank_by_score(border, scores));
          } else {
            rankings.push_back(ml_ranking(view, *arm.model, table));
          }
          break;
        }
      }
    }

    BanditSelection selection;
    if (states.size() == 1) {
      selection.nodes = top(std::move(rankings.front()), m);
      selection.slot_arm.assign(selection.nodes.size(), 0);
    } else {
      selection = d3ts_select(rankings, bandit, m, rng);
    }

    RoundLog log;
    log.round = round;
    for (std::size_t slot = 0; slot < selection.nodes.size(); ++slot) {
      const NodeId v = selection.nodes[slot];
      const QueryResult r = query(graph, v);
      view.absorb(r);
      log.queried.push_back(v);
      log.labels.push_back(r.label);
      log.slot_arm.push_back(static_cast<int>(selection.slot_arm[slot]));
      if (states.size() > 1) d3ts_update(bandit, selection.slot_arm[slot], r.label);
    }
    log.targets_cum = view.target_count();
    log.queries_cum = view.queried().size();
    log.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    result.rounds.push_back(std::move(log));
  }
  return result;
}

inline TrialResult run_trial(const FullGraph& graph, const ExperimentConfig& cfg, std::uint64_t seed) {
  return run_trial(graph, cfg, strategy_arms(cfg.strategy, cfg.classifier), seed);
}

/// All trials of an experiment, concurrently when parallel_trials > 1.
/// Results are ordered by trial index regardless of completion order.
inline std::vector<TrialResult> run_trials(const FullGraph& graph, const ExperimentConfig& cfg,
                                           const std::vector<ArmSpec>& arms) {
  cfg.validate();
  std::vector<TrialResult> results(cfg.trials);
  std::vector<std::exception_ptr> errors(cfg.trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t t; (t = next.fetch_add(1)) < cfg.trials;) {
      try {
        results[t] = run_trial(graph, cfg, arms, trial_seed(cfg.seed, t));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.parallel_trials, 1, cfg.trials);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

inline std::vector<TrialResult> run_trials(const FullGraph& graph, const ExperimentConfig& cfg) {
  return run_trials(graph, cfg, strategy_arms(cfg.strategy, cfg.classifier));
}

// ---------------------------------------------------------------------------
// Metrics

struct CurvePoint {
  std::size_t queries = 0;
  double fraction_queried = 0;
  double value = 0;
};

using Curve = std::vector<CurvePoint>;

/// Fraction of all targets found, at each round boundary.
inline Curve coverage_curve(const TrialResult& trial) {
  if (trial.rounds.empty()) throw Error("trial has no rounds");
  if (trial.total_targets == 0) throw Error("graph has no target nodes");
  Curve c;
  for (const RoundLog& r : trial.rounds) {
    c.push_back({r.queries_cum, static_cast<double>(r.queries_cum) / static_cast<double>(trial.node_count),
                 static_cast<double>(r.targets_cum) / static_cast<double>(trial.total_targets)});
  }
  return c;
}

/// Fraction of queried nodes that are targets, at each round boundary.
inline Curve precision_curve(const TrialResult& trial) {
  if (trial.rounds.empty()) throw Error("trial has no rounds");
  if (trial.total_targets == 0) throw Error("graph has no target nodes");
  Curve c;
  for (const RoundLog& r : trial.rounds) {
    c.push_back({r.queries_cum, static_cast<double>(r.queries_cum) / static_cast<double>(trial.node_count),
                 r.queries_cum ? static_cast<double>(r.targets_cum) / static_cast<double>(r.queries_cum) : 0.0});
  }
  return c;
}

/// ceil(p * targets), tolerant of representation error.
inline std::size_t targets_needed(double p, std::size_t total_targets) {
  if (!(p > 0 && p <= 1)) throw Error("target fraction must lie in (0, 1]");
  return static_cast<std::size_t>(std::ceil(p * static_cast<double>(total_targets) - 1e-9));
}

/// Queries (seed included) after which ceil(p * targets) targets have been
/// found, resolved to the individual query; nullopt if never reached.
inline std::optional<std::size_t> queries_to_fraction(const TrialResult& trial, double p) {
  const std::size_t need = targets_needed(p, trial.total_targets);
  std::size_t queries = 0, found = 0;
  if (need == 0) return 0;
  for (const RoundLog& r : trial.rounds) {
    for (Label l : r.labels) {
      ++queries;
      found += l;
      if (found >= need) return queries;
    }
  }
  return std::nullopt;
}

/// Strategy queries over baseline queries to reach fraction p of targets;
/// nullopt when either run never reaches p.
inline std::optional<double> normalized_query_cost(const TrialResult& strategy, const TrialResult& baseline, double p) {
  const auto a = queries_to_fraction(strategy, p);
  const auto b = queries_to_fraction(baseline, p);
  if (!a || !b || *b == 0) return std::nullopt;
  return static_cast<double>(*a) / static_cast<double>(*b);
}

struct AggregateCurve {
  std::vector<double> grid;  // fraction of queried nodes
  std::vector<double> mean;
  std::vector<double> stddev;  // population standard deviation
};

/// Step-interpolated value of a curve at fraction x (0 before the first point).
inline double step_value(const Curve& c, double x) {
  double v = 0;
  for (const CurvePoint& p : c) {
    if (p.fraction_queried > x + 1e-12) break;
    v = p.value;
  }
  return v;
}

/// Pointwise mean and deviation over trials. Without an explicit grid the
/// union of all trials' sample points is used.
inline AggregateCurve aggregate_trials(const std::vector<Curve>& curves, std::vector<double> grid = {}) {
  if (curves.empty()) throw Error("cannot aggregate zero trials");
  if (grid.empty()) {
    for (const Curve& c : curves) {
      for (const CurvePoint& p : c) grid.push_back(p.fraction_queried);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  }
  AggregateCurve out;
  out.grid = grid;
  const auto k = static_cast<double>(curves.size());
  for (double x : grid) {
    double sum = 0, sq = 0;
    for (const Curve& c : curves) {
      const double v = step_value(c, x);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / k;
    out.mean.push_back(mean);
    out.stddev.push_back(std::sqrt(std::max(0.0, sq / k - mean * mean)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment inputs

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

/// Applies the configured task's labels to an already-loaded graph. Sybil
/// tasks replace the graph by its duplicated form.
inline FullGraph apply_task(FullGraph graph, const ExperimentConfig& cfg, const CascadeSet* cascades = nullptr) {
  switch (cfg.task) {
    case Task::sybil: return synthesize_sybil(graph, {cfg.attack_links, cfg.seed});
    case Task::periphery: graph.set_labels(peripheral_labels(graph, cfg.fraction)); return graph;
    case Task::source:
    case Task::broker: {
      if (!cascades) throw ConfigError(std::string(to_string(cfg.task)) + " task requires a cascade file");
      const ScoreTable s = cfg.task == Task::source ? source_spreader_scores(graph, *cascades)
                                                   : broker_scores(graph, *cascades);
      graph.set_labels(top_fraction_labels(s, cfg.fraction));
      return graph;
    }
    case Task::given: throw ConfigError("task 'given' requires a labels file");
  }
  return graph;
}

/// Loads the dataset named by the config and attaches target labels: from the
/// labels file when given, otherwise generated for the task.
inline FullGraph load_experiment_graph(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset given");
  auto in = open_input(cfg.dataset);
  FullGraph graph = load_edge_list(in, cfg.directed);
  if (!cfg.labels_file.empty()) {
    auto lin = open_input(cfg.labels_file);
    graph.set_labels(load_labels(lin, graph));
    return graph;
  }
  if (cfg.task == Task::source || cfg.task == Task::broker) {
    if (cfg.cascades_file.empty()) throw ConfigError(std::string(to_string(cfg.task)) + " task requires --cascades");
    auto cin = open_input(cfg.cascades_file);
    const CascadeSet cascades = load_cascades(cin, graph);
    return apply_task(std::move(graph), cfg, &cascades);
  }
  return apply_task(std::move(graph), cfg);
}

}  // namespace hnd
