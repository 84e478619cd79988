#pragma once

// Command-line front end: run, labelgen, embed and report.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hnd/embedding.hpp"
#include "hnd/error.hpp"
#include "hnd/features.hpp"
#include "hnd/graph.hpp"
#include "hnd/harness.hpp"
#include "hnd/io.hpp"

namespace hnd::cli {

enum class Subcommand { run, labelgen, embed, report };

/// Bad command line or configuration; reported with exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// --help was given; carries the text to print.
struct HelpRequest {
  std::string text;
};

struct CliInvocation {
  Subcommand subcommand = Subcommand::run;
  ExperimentConfig config;
  std::string config_file;
  std::filesystem::path out = "results";
  std::filesystem::path runs_dir;  // report input
  std::vector<double> fractions = default_report_fractions();
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  std::istringstream in(value);
  in >> out;
  if (!in || !(in >> std::ws).eof()) throw UsageError("'" + key + "' expects a number, got '" + value + "'");
  if constexpr (std::is_unsigned_v<T>) {
    if (value.find('-') != std::string::npos) throw UsageError("'" + key + "' must not be negative");
  }
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("'" + key + "' expects true or false, got '" + value + "'");
}

inline ClassifierKind parse_classifier(const std::string& value) {
  if (value == "gbt") return ClassifierKind::gbt;
  if (value == "rf") return ClassifierKind::random_forest;
  if (value == "logistic") return ClassifierKind::logistic;
  throw UsageError("unknown classifier '" + value + "' (gbt, rf, logistic)");
}

struct Key {
  std::string name;
  std::string help;
  std::function<void(CliInvocation&, const std::string&)> apply;
};

inline const std::vector<Key>& keys() {
  using C = CliInvocation;
  using S = const std::string&;
  auto size = [](const char* key, std::size_t ExperimentConfig::*field) {
    return [key, field](C& c, S v) { c.config.*field = parse_number<std::size_t>(key, v); };
  };
  static const std::vector<Key> table = {
      {"dataset", "edge-list file (relative paths also tried under $HND_DATA_DIR)",
       [](C& c, S v) { c.config.dataset = v; }},
      {"directed", "treat the edge list as directed", [](C& c, S v) { c.config.directed = parse_bool("directed", v); }},
      {"labels-file", "node label file; overrides label generation", [](C& c, S v) { c.config.labels_file = v; }},
      {"cascades", "cascade file for the source and broker tasks", [](C& c, S v) { c.config.cascades_file = v; }},
      {"task", "sybil, periphery, source, broker or given", [](C& c, S v) {
         try {
           c.config.task = parse_task(v);
         } catch (const ConfigError& e) {
           throw UsageError(e.what());
         }
       }},
      {"strategy", "mod, tn, random, ml-base, ml-deepgl, oracle, oracle-deepgl, bandit2, bandit6",
       [](C& c, S v) {
         if (std::find(strategy_names().begin(), strategy_names().end(), v) == strategy_names().end()) {
           throw UsageError("unknown strategy '" + v + "'");
         }
         c.config.strategy = v;
       }},
      {"m0", "random-walk seed size", size("m0", &ExperimentConfig::m0)},
      {"mk", "queries per round", size("mk", &ExperimentConfig::mk)},
      {"rounds", "round limit (0: none)", size("rounds", &ExperimentConfig::rounds)},
      {"max-queries", "query budget (0: none)", size("max-queries", &ExperimentConfig::max_queries)},
      {"retrain-every", "retrain period in rounds (0: train once)", size("retrain-every", &ExperimentConfig::retrain_every)},
      {"embedding-build-point", "fraction of m0 queried when the embedding is fitted",
       [](C& c, S v) { c.config.embedding_build_point = parse_number<double>("embedding-build-point", v); }},
      {"trials", "number of trials", size("trials", &ExperimentConfig::trials)},
      {"seed", "master random seed", [](C& c, S v) { c.config.seed = parse_number<std::uint64_t>("seed", v); }},
      {"classifier", "gbt, rf or logistic", [](C& c, S v) { c.config.classifier.kind = parse_classifier(v); }},
      {"trees", "trees per ensemble", [](C& c, S v) {
         c.config.classifier.forest.trees = c.config.classifier.boosting.trees = parse_number<std::size_t>("trees", v);
       }},
      {"learning-rate", "boosting shrinkage", [](C& c, S v) {
         c.config.classifier.boosting.learning_rate = parse_number<double>("learning-rate", v);
       }},
      {"L", "Sybil attack links", size("L", &ExperimentConfig::attack_links)},
      {"fraction", "share of nodes labelled as targets by generated tasks",
       [](C& c, S v) { c.config.fraction = parse_number<double>("fraction", v); }},
      {"lambda", "embedding pruning threshold",
       [](C& c, S v) { c.config.embedding.lambda = parse_number<double>("lambda", v); }},
      {"depth", "embedding operator depth",
       [](C& c, S v) { c.config.embedding.depth = parse_number<std::size_t>("depth", v); }},
      {"bin-ratio", "embedding log-binning ratio",
       [](C& c, S v) { c.config.embedding.bin_ratio = parse_number<double>("bin-ratio", v); }},
      {"cap", "D3TS cap C", [](C& c, S v) { c.config.cap = parse_number<double>("cap", v); }},
      {"count-seed", "count seed queries toward the budget",
       [](C& c, S v) { c.config.count_seed = parse_bool("count-seed", v); }},
      {"parallel-trials", "trials run concurrently", size("parallel-trials", &ExperimentConfig::parallel_trials)},
      {"out", "output directory", [](C& c, S v) { c.out = v; }},
  };
  return table;
}

inline const Key& find_key(const std::string& name) {
  for (const Key& k : keys()) {
    if (k.name == name) return k;
  }
  throw UsageError("unknown configuration key '" + name + "'");
}

/// "key = value" lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    find_key(key);
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

inline std::string resolve_data_path(const std::string& path) {
  if (path.empty() || std::filesystem::path(path).is_absolute() || std::filesystem::exists(path)) return path;
  if (const char* dir = std::getenv("HND_DATA_DIR")) {
    const auto candidate = std::filesystem::path(dir) / path;
    if (std::filesystem::exists(candidate)) return candidate.string();
  }
  return path;
}

}  // namespace detail

inline std::string usage() {
  return "usage: hnd <run|labelgen|embed|report> [options]\n"
         "  run       explore a labelled graph and write per-round CSV logs\n"
         "  labelgen  write the task's edge list and labels\n"
         "  embed     fit an embedding program on the full labelled graph\n"
         "  report    summarize normalized query costs and curves of a results directory\n"
         "run 'hnd <subcommand> --help' for options\n";
}

/// Defaults, then the config file, then flags.
inline CliInvocation parse(int argc, const char* const* argv) {
  if (argc < 2) throw UsageError("no subcommand given");
  CLI::App app("hidden node discovery", "hnd");
  app.require_subcommand(1);
  std::map<std::string, std::string> flag_values;
  std::string config_file;
  bool directed_flag = false;
  std::vector<std::string> runs_positional;
  std::vector<double> fractions;

  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"run", "labelgen", "embed", "report"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_file, "config file of 'key = value' lines");
    for (const detail::Key& k : detail::keys()) {
      if (k.name == "directed") continue;
      sub->add_option("--" + k.name, flag_values[k.name], k.help);
    }
    sub->add_flag("--directed", directed_flag, "treat the edge list as directed");
    subs[name] = sub;
  }
  subs["report"]->add_option("runs", runs_positional, "directory holding run outputs")->expected(0, 1);
  subs["report"]->add_option("--p", fractions, "target fractions (default 0.1 0.9)");

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    for (const auto& [name, sub] : subs) {
      if (sub->parsed()) throw HelpRequest{sub->help()};
    }
    throw HelpRequest{app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CliInvocation inv;
  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    if (name == "run") inv.subcommand = Subcommand::run;
    if (name == "labelgen") inv.subcommand = Subcommand::labelgen;
    if (name == "embed") inv.subcommand = Subcommand::embed;
    if (name == "report") inv.subcommand = Subcommand::report;
    if (!config_file.empty()) {
      inv.config_file = config_file;
      for (const auto& [key, value] : detail::read_config_file(config_file)) detail::find_key(key).apply(inv, value);
    }
    for (const detail::Key& k : detail::keys()) {
      if (k.name == "directed") continue;
      if (sub->count("--" + k.name)) k.apply(inv, flag_values[k.name]);
    }
    if (directed_flag) inv.config.directed = true;
  }
  if (!fractions.empty()) inv.fractions = fractions;
  for (double p : inv.fractions) {
    if (!(p > 0 && p <= 1)) throw UsageError("--p values must lie in (0, 1]");
  }

  if (inv.subcommand == Subcommand::report) {
    if (!runs_positional.empty()) inv.runs_dir = runs_positional.front();
    else inv.runs_dir = inv.out;
    return inv;
  }
  inv.config.dataset = detail::resolve_data_path(inv.config.dataset);
  if (inv.config.dataset.empty()) throw UsageError("--dataset is required");
  inv.config.labels_file = detail::resolve_data_path(inv.config.labels_file);
  inv.config.cascades_file = detail::resolve_data_path(inv.config.cascades_file);
  try {
    inv.config.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return inv;
}

inline void run_command(const CliInvocation& inv, std::ostream& log) {
  const ExperimentConfig& cfg = inv.config;
  const std::string task(to_string(cfg.task));
  switch (inv.subcommand) {
    case Subcommand::run: {
      const FullGraph graph = load_experiment_graph(cfg);
      const auto trials = run_trials(graph, cfg);
      write_run_outputs(inv.out, cfg, graph, trials);
      log << "wrote " << (inv.out / run_stem(task, cfg.strategy)).string() << "_{rounds,queries,meta}.csv ("
          << trials.size() << " trials, " << graph.size() << " nodes, " << graph.target_count() << " targets)\n";
      return;
    }
    case Subcommand::labelgen: {
      const FullGraph graph = load_experiment_graph(cfg);
      std::filesystem::create_directories(inv.out);
      std::ofstream edges(inv.out / (task + "_edges.txt"));
      write_edge_list(edges, graph);
      std::ofstream labels(inv.out / (task + "_labels.txt"));
      write_labels(labels, graph, graph.labels());
      if (!edges || !labels) throw Error("cannot write into " + inv.out.string());
      log << "wrote " << task << "_edges.txt and " << task << "_labels.txt (" << graph.size() << " nodes, "
          << graph.target_count() << " targets)\n";
      return;
    }
    case Subcommand::embed: {
      const FullGraph graph = load_experiment_graph(cfg);
      const RevealedGraph revealed(graph);
      const FeatureProgram program = fit_embedding(revealed, cfg.embedding);
      const Embedding emb = transform(program, revealed);
      std::filesystem::create_directories(inv.out);
      std::ofstream prog(inv.out / (task + "_program.txt"));
      write_program(prog, program);
      std::ofstream values(inv.out / (task + "_embedding.csv"));
      values << "node";
      for (const FeatureDef& d : program.defs) values << ',' << to_string(d);
      values << '\n';
      const auto& ids = graph.original_ids();
      for (NodeId v : emb.nodes) {
        values << ids[v];
        for (double x : emb.row(v)) values << ',' << format_real(x);
        values << '\n';
      }
      if (!prog || !values) throw Error("cannot write into " + inv.out.string());
      log << "wrote " << program.size() << " feature definitions to " << task << "_program.txt\n";
      return;
    }
    case Subcommand::report: {
      const auto rows = write_report(inv.runs_dir, inv.out, inv.fractions);
      log << "wrote summary.csv and curves.csv (" << rows.size() << " summary rows)\n";
      return;
    }
  }
}

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliInvocation inv;
  try {
    inv = parse(argc, argv);
  } catch (const HelpRequest& h) {
    out << h.text;
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << usage();
    return 2;
  }
  try {
    run_command(inv, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hnd::cli
