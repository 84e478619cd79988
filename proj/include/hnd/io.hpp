#pragma once

// CSV outputs of experiment runs and the report built from them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hnd/error.hpp"
#include "hnd/graph.hpp"
#include "hnd/harness.hpp"

namespace hnd {

/// Fixed six-decimal rendering so outputs compare byte for byte.
inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline void check_field(const std::string& s) {
  if (s.find_first_of(",\n") != std::string::npos) throw Error("CSV field contains a separator: '" + s + "'");
}

}  // namespace detail

inline constexpr const char* kRoundsHeader =
    "trial,round,queries_cum,queries_excl_seed,targets_cum,coverage,precision,fraction_queried,strategy,task,arm_counts";
inline constexpr const char* kQueriesHeader = "trial,round,slot,node,label,arm";
inline constexpr const char* kMetaHeader = "strategy,task,nodes,targets,seed_queries,trials,seed";

/// One row per round per trial. arm_counts lists "arm:count" for the round.
inline void write_rounds_csv(std::ostream& out, const std::vector<TrialResult>& trials, std::string_view strategy,
                             std::string_view task) {
  detail::check_field(std::string(strategy));
  out << kRoundsHeader << '\n';
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const TrialResult& trial = trials[t];
    for (const RoundLog& r : trial.rounds) {
      std::vector<std::size_t> counts(trial.arm_names.size(), 0);
      for (int a : r.slot_arm) {
        if (a >= 0) ++counts.at(static_cast<std::size_t>(a));
      }
      std::string arms;
      if (r.round == 0) {
        arms = "seed:" + std::to_string(r.queried.size());
      } else {
        for (std::size_t k = 0; k < counts.size(); ++k) {
          if (k) arms += ';';
          arms += trial.arm_names[k] + ':' + std::to_string(counts[k]);
        }
      }
      const double coverage =
          trial.total_targets ? static_cast<double>(r.targets_cum) / static_cast<double>(trial.total_targets) : 0.0;
      const double precision =
          r.queries_cum ? static_cast<double>(r.targets_cum) / static_cast<double>(r.queries_cum) : 0.0;
      out << t << ',' << r.round << ',' << r.queries_cum << ',' << (r.queries_cum - trial.seed_queries) << ','
          << r.targets_cum << ',' << format_real(coverage) << ',' << format_real(precision) << ','
          << format_real(static_cast<double>(r.queries_cum) / static_cast<double>(trial.node_count)) << ','
          << strategy << ',' << task << ',' << arms << '\n';
    }
  }
}

/// One row per query, with the node's original identifier.
inline void write_queries_csv(std::ostream& out, const std::vector<TrialResult>& trials, const FullGraph& graph) {
  const auto& ids = graph.original_ids();
  out << kQueriesHeader << '\n';
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const TrialResult& trial = trials[t];
    for (const RoundLog& r : trial.rounds) {
      for (std::size_t s = 0; s < r.queried.size(); ++s) {
        const int a = r.slot_arm[s];
        out << t << ',' << r.round << ',' << s << ',' << ids[r.queried[s]] << ',' << int{r.labels[s]} << ','
            << (a < 0 ? std::string("seed") : trial.arm_names[static_cast<std::size_t>(a)]) << '\n';
      }
    }
  }
}

inline void write_meta_csv(std::ostream& out, const std::vector<TrialResult>& trials, std::string_view strategy,
                           std::string_view task, std::uint64_t master_seed) {
  if (trials.empty()) throw Error("no trials to write");
  out << kMetaHeader << '\n';
  out << strategy << ',' << task << ',' << trials.front().node_count << ',' << trials.front().total_targets << ','
      << trials.front().seed_queries << ',' << trials.size() << ',' << master_seed << '\n';
}

inline std::string run_stem(std::string_view task, std::string_view strategy) {
  return std::string(task) + "_" + std::string(strategy);
}

/// Writes <dir>/<task>_<strategy>_{rounds,queries,meta}.csv.
inline void write_run_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg, const FullGraph& graph,
                              const std::vector<TrialResult>& trials) {
  std::filesystem::create_directories(dir);
  const std::string stem = run_stem(to_string(cfg.task), cfg.strategy);
  auto open = [&](const std::string& suffix) {
    std::ofstream f(dir / (stem + suffix));
    if (!f) throw Error("cannot write " + (dir / (stem + suffix)).string());
    return f;
  };
  auto rounds = open("_rounds.csv");
  write_rounds_csv(rounds, trials, cfg.strategy, to_string(cfg.task));
  auto queries = open("_queries.csv");
  write_queries_csv(queries, trials, graph);
  auto meta = open("_meta.csv");
  write_meta_csv(meta, trials, cfg.strategy, to_string(cfg.task), cfg.seed);
}

// ---------------------------------------------------------------------------
// Reading runs back

/// A run reconstructed from its CSV files. Query nodes are not recovered;
/// rounds carry labels and arm names only.
struct StoredRun {
  std::string strategy;
  std::string task;
  std::vector<TrialResult> trials;
};

inline StoredRun read_run(const std::filesystem::path& meta_path) {
  const std::string name = meta_path.filename().string();
  const std::string suffix = "_meta.csv";
  if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
    throw Error("not a meta file: " + meta_path.string());
  }
  std::ifstream meta(meta_path);
  std::string line;
  if (!std::getline(meta, line) || line != kMetaHeader) throw Error(meta_path.string() + ": bad header");
  if (!std::getline(meta, line)) throw Error(meta_path.string() + ": missing row");
  const auto f = detail::split_csv(line);
  if (f.size() != 7) throw Error(meta_path.string() + ": expected 7 fields");

  StoredRun run;
  run.strategy = f[0];
  run.task = f[1];
  const std::size_t nodes = std::stoull(f[2]), targets = std::stoull(f[3]), seed_queries = std::stoull(f[4]),
                    trial_count = std::stoull(f[5]);
  run.trials.resize(trial_count);
  for (auto& t : run.trials) {
    t.node_count = nodes;
    t.total_targets = targets;
    t.seed_queries = seed_queries;
  }

  const auto queries_path = meta_path.parent_path() / (name.substr(0, name.size() - suffix.size()) + "_queries.csv");
  std::ifstream queries(queries_path);
  if (!queries) throw Error("missing " + queries_path.string());
  std::size_t line_no = 1;
  if (!std::getline(queries, line) || line != kQueriesHeader) throw Error(queries_path.string() + ": bad header");
  while (std::getline(queries, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto q = detail::split_csv(line);
    if (q.size() != 6) throw ParseError(line_no, "expected 6 fields in " + queries_path.string());
    const std::size_t t = std::stoull(q[0]), round = std::stoull(q[1]);
    if (t >= trial_count) throw ParseError(line_no, "trial index out of range");
    TrialResult& trial = run.trials[t];
    if (trial.rounds.empty() || trial.rounds.back().round != round) {
      RoundLog r;
      r.round = round;
      if (!trial.rounds.empty()) {
        r.targets_cum = trial.rounds.back().targets_cum;
        r.queries_cum = trial.rounds.back().queries_cum;
      }
      trial.rounds.push_back(r);
    }
    RoundLog& r = trial.rounds.back();
    const Label label = q[4] == "1" ? 1 : 0;
    r.labels.push_back(label);
    r.targets_cum += label;
    ++r.queries_cum;
    int arm = -1;
    if (q[5] != "seed") {
      auto it = std::find(trial.arm_names.begin(), trial.arm_names.end(), q[5]);
      if (it == trial.arm_names.end()) {
        trial.arm_names.push_back(q[5]);
        it = trial.arm_names.end() - 1;
      }
      arm = static_cast<int>(it - trial.arm_names.begin());
    }
    r.slot_arm.push_back(arm);
  }
  return run;
}

/// All runs in a directory, ordered by task then strategy.
inline std::vector<StoredRun> read_runs(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<std::filesystem::path> metas;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 9 && name.ends_with("_meta.csv")) metas.push_back(entry.path());
  }
  if (metas.empty()) throw Error("no run outputs in " + dir.string());
  std::vector<StoredRun> runs;
  for (const auto& m : metas) runs.push_back(read_run(m));
  std::sort(runs.begin(), runs.end(),
            [](const StoredRun& a, const StoredRun& b) { return std::tie(a.task, a.strategy) < std::tie(b.task, b.strategy); });
  return runs;
}

// ---------------------------------------------------------------------------
// Report

inline const std::vector<double>& default_report_fractions() {
  static const std::vector<double> ps = {0.1, 0.9};
  return ps;
}

struct CostSummary {
  std::string strategy;
  std::string task;
  double p = 0;
  std::optional<double> mean, stddev;  // empty without a baseline or when no trial reached p
  std::size_t trials_reached = 0;
  std::string status;  // ok, no_baseline, unreached
};

/// Normalized query cost per strategy, task and p against the "oracle" run of
/// the same task, pairing trials by index.
inline std::vector<CostSummary> summarize_costs(const std::vector<StoredRun>& runs,
                                                const std::vector<double>& ps = default_report_fractions(),
                                                std::string_view baseline = "oracle") {
  std::vector<CostSummary> out;
  for (const StoredRun& run : runs) {
    const StoredRun* base = nullptr;
    for (const StoredRun& b : runs) {
      if (b.task == run.task && b.strategy == baseline) base = &b;
    }
    for (double p : ps) {
      CostSummary s{run.strategy, run.task, p, std::nullopt, std::nullopt, 0, "no_baseline"};
      if (base) {
        std::vector<double> costs;
        const std::size_t n = std::min(run.trials.size(), base->trials.size());
        for (std::size_t t = 0; t < n; ++t) {
          if (auto c = normalized_query_cost(run.trials[t], base->trials[t], p)) costs.push_back(*c);
        }
        s.trials_reached = costs.size();
        if (costs.empty()) {
          s.status = "unreached";
        } else {
          double sum = 0, sq = 0;
          for (double c : costs) sum += c;
          const double mean = sum / static_cast<double>(costs.size());
          for (double c : costs) sq += (c - mean) * (c - mean);
          s.mean = mean;
          s.stddev = std::sqrt(sq / static_cast<double>(costs.size()));
          s.status = "ok";
        }
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline void write_summary_csv(std::ostream& out, const std::vector<CostSummary>& rows) {
  out << "strategy,task,p,normalized_query_cost_mean,normalized_query_cost_std,trials_reached,status\n";
  for (const CostSummary& r : rows) {
    out << r.strategy << ',' << r.task << ',' << format_real(r.p) << ',' << (r.mean ? format_real(*r.mean) : "NA")
        << ',' << (r.stddev ? format_real(*r.stddev) : "NA") << ',' << r.trials_reached << ',' << r.status << '\n';
  }
}

/// Mean and deviation of coverage and precision over trials, one row per
/// grid point, for external plotting.
inline void write_curves_csv(std::ostream& out, const std::vector<StoredRun>& runs) {
  out << "strategy,task,metric,fraction_queried,mean,std\n";
  for (const StoredRun& run : runs) {
    if (run.trials.empty() || run.trials.front().total_targets == 0) continue;
    for (const char* metric : {"coverage", "precision"}) {
      std::vector<Curve> curves;
      for (const TrialResult& t : run.trials) {
        curves.push_back(metric[0] == 'c' ? coverage_curve(t) : precision_curve(t));
      }
      const AggregateCurve agg = aggregate_trials(curves);
      for (std::size_t i = 0; i < agg.grid.size(); ++i) {
        out << run.strategy << ',' << run.task << ',' << metric << ',' << format_real(agg.grid[i]) << ','
            << format_real(agg.mean[i]) << ',' << format_real(agg.stddev[i]) << '\n';
      }
    }
  }
}

/// Writes summary.csv and curves.csv into `out_dir`; returns the summary rows.
inline std::vector<CostSummary> write_report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir,
                                             const std::vector<double>& ps = default_report_fractions()) {
  const auto runs = read_runs(run_dir);
  const auto rows = summarize_costs(runs, ps);
  std::filesystem::create_directories(out_dir);
  std::ofstream summary(out_dir / "summary.csv");
  write_summary_csv(summary, rows);
  std::ofstream curves(out_dir / "curves.csv");
  write_curves_csv(curves, runs);
  if (!summary || !curves) throw Error("cannot write report into " + out_dir.string());
  return rows;
}

}  // namespace hnd
