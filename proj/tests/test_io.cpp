#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "hnd/io.hpp"
#include "social_graph.hpp"

using namespace hnd;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("hnd_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

FullGraph small_graph() {
  hnd::testing::SocialGraphParams p;
  p.nodes = 200;
  p.edges = 900;
  p.communities = 3;
  return synthesize_sybil(hnd::testing::social_graph(p), {150, 3});
}

ExperimentConfig config(std::string strategy) {
  ExperimentConfig cfg;
  cfg.strategy = std::move(strategy);
  cfg.m0 = 20;
  cfg.mk = 20;
  cfg.trials = 2;
  cfg.classifier.kind = ClassifierKind::logistic;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(FormatReal, FixedSixDigits) {
  EXPECT_EQ(format_real(0.5), "0.500000");
  EXPECT_EQ(format_real(1.0 / 3), "0.333333");
  EXPECT_EQ(format_real(0), "0.000000");
}

TEST(RoundsCsv, HeaderAndRows) {
  const FullGraph g = small_graph();
  const ExperimentConfig cfg = config("bandit2");
  const auto trials = run_trials(g, cfg);
  std::ostringstream out;
  write_rounds_csv(out, trials, cfg.strategy, "sybil");
  const auto rows = lines(out.str());
  EXPECT_EQ(rows[0], kRoundsHeader);
  std::size_t expected = 1;
  for (const auto& t : trials) expected += t.rounds.size();
  EXPECT_EQ(rows.size(), expected);
  EXPECT_EQ(rows[1].rfind("0,0,20,0,", 0), 0u);
  EXPECT_NE(rows[1].find(",bandit2,sybil,seed:20"), std::string::npos);
  EXPECT_NE(rows[2].find("ml-base:"), std::string::npos);
  EXPECT_NE(rows[2].find(";ml-deepgl:"), std::string::npos);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(detail::split_csv(rows[i]).size(), 11u);
}

TEST(QueriesCsv, UsesOriginalIds) {
  std::istringstream edges("100 200\n200 300\n300 100\n300 400\n");
  FullGraph g = load_edge_list(edges);
  g.set_labels({0, 1, 0, 1});
  ExperimentConfig cfg = config("mod");
  cfg.m0 = 2;
  cfg.mk = 1;
  cfg.trials = 1;
  const auto trials = run_trials(g, cfg);
  std::ostringstream out;
  write_queries_csv(out, trials, g);
  const auto rows = lines(out.str());
  ASSERT_EQ(rows.size(), 5u);
  std::set<std::string> nodes;
  for (std::size_t i = 1; i < rows.size(); ++i) nodes.insert(detail::split_csv(rows[i])[3]);
  EXPECT_EQ(nodes, (std::set<std::string>{"100", "200", "300", "400"}));
  EXPECT_EQ(detail::split_csv(rows[1])[5], "seed");
  EXPECT_EQ(detail::split_csv(rows[4])[5], "mod");
}

TEST(RunFiles, RoundTrip) {
  TempDir dir;
  const FullGraph g = small_graph();
  const ExperimentConfig cfg = config("bandit2");
  const auto trials = run_trials(g, cfg);
  write_run_outputs(dir.path(), cfg, g, trials);
  for (const char* suffix : {"_rounds.csv", "_queries.csv", "_meta.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path() / ("sybil_bandit2" + std::string(suffix))));
  }
  const StoredRun run = read_run(dir.path() / "sybil_bandit2_meta.csv");
  EXPECT_EQ(run.strategy, "bandit2");
  EXPECT_EQ(run.task, "sybil");
  ASSERT_EQ(run.trials.size(), trials.size());
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const TrialResult& a = trials[t];
    const TrialResult& b = run.trials[t];
    EXPECT_EQ(a.node_count, b.node_count);
    EXPECT_EQ(a.total_targets, b.total_targets);
    EXPECT_EQ(a.seed_queries, b.seed_queries);
    ASSERT_EQ(a.rounds.size(), b.rounds.size());
    for (std::size_t r = 0; r < a.rounds.size(); ++r) {
      EXPECT_EQ(a.rounds[r].labels, b.rounds[r].labels);
      EXPECT_EQ(a.rounds[r].targets_cum, b.rounds[r].targets_cum);
      EXPECT_EQ(a.rounds[r].queries_cum, b.rounds[r].queries_cum);
      for (std::size_t s = 0; s < a.rounds[r].slot_arm.size(); ++s) {
        const int x = a.rounds[r].slot_arm[s], y = b.rounds[r].slot_arm[s];
        EXPECT_EQ(x < 0, y < 0);
        if (x >= 0 && y >= 0) {
          EXPECT_EQ(a.arm_names[static_cast<std::size_t>(x)], b.arm_names[static_cast<std::size_t>(y)]);
        }
      }
    }
    for (double p : {0.1, 0.5, 0.9}) EXPECT_EQ(queries_to_fraction(a, p), queries_to_fraction(b, p));
  }
}

TEST(RunFiles, ReplayIsByteIdentical) {
  TempDir a, b;
  const FullGraph g = small_graph();
  const ExperimentConfig cfg = config("bandit2");
  write_run_outputs(a.path(), cfg, g, run_trials(g, cfg));
  write_run_outputs(b.path(), cfg, g, run_trials(g, cfg));
  for (const char* f : {"sybil_bandit2_rounds.csv", "sybil_bandit2_queries.csv", "sybil_bandit2_meta.csv"}) {
    EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
  }
}

TEST(Report, CostsAgainstOracle) {
  TempDir runs, report;
  const FullGraph g = small_graph();
  for (const char* s : {"oracle", "tn", "mod"}) {
    const ExperimentConfig cfg = config(s);
    write_run_outputs(runs.path(), cfg, g, run_trials(g, cfg));
  }
  const auto rows = write_report(runs.path(), report.path());
  ASSERT_EQ(rows.size(), 6u);
  for (const CostSummary& r : rows) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_EQ(r.trials_reached, 2u);
    ASSERT_TRUE(r.mean.has_value());
    if (r.strategy == "oracle") {
      EXPECT_DOUBLE_EQ(*r.mean, 1.0);
      EXPECT_DOUBLE_EQ(*r.stddev, 0.0);
    }
  }
  // Runs are ordered by strategy within a task.
  EXPECT_EQ(rows[0].strategy, "mod");
  EXPECT_EQ(rows[2].strategy, "oracle");
  EXPECT_EQ(rows[4].strategy, "tn");
  const auto summary = lines(slurp(report.path() / "summary.csv"));
  EXPECT_EQ(summary[0], "strategy,task,p,normalized_query_cost_mean,normalized_query_cost_std,trials_reached,status");
  EXPECT_EQ(summary.size(), 7u);
  const auto curves = lines(slurp(report.path() / "curves.csv"));
  EXPECT_EQ(curves[0], "strategy,task,metric,fraction_queried,mean,std");
  EXPECT_GT(curves.size(), 10u);
}

TEST(Report, NoBaselineIsMarked) {
  TempDir runs, report;
  const FullGraph g = small_graph();
  const ExperimentConfig cfg = config("tn");
  write_run_outputs(runs.path(), cfg, g, run_trials(g, cfg));
  const auto rows = write_report(runs.path(), report.path(), {0.5});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].status, "no_baseline");
  EXPECT_FALSE(rows[0].mean.has_value());
  const auto summary = lines(slurp(report.path() / "summary.csv"));
  EXPECT_EQ(summary[1], "tn,sybil,0.500000,NA,NA,0,no_baseline");
}

TEST(Report, UnreachedIsMarked) {
  TrialResult reached, short_run;
  for (TrialResult* t : {&reached, &short_run}) {
    t->node_count = 10;
    t->total_targets = 2;
    t->seed_queries = 2;
  }
  reached.rounds.push_back({0, {0, 1}, {1, 1}, {-1, -1}, 2, 2, 0});
  short_run.rounds.push_back({0, {0, 1}, {1, 0}, {-1, -1}, 1, 2, 0});
  const std::vector<StoredRun> runs = {{"oracle", "sybil", {reached}}, {"tn", "sybil", {short_run}}};
  const auto rows = summarize_costs(runs, {0.5, 1.0});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[2].status, "ok");
  EXPECT_DOUBLE_EQ(*rows[2].mean, 1.0);
  EXPECT_EQ(rows[3].status, "unreached");
  EXPECT_EQ(rows[3].trials_reached, 0u);
}

TEST(Report, DefaultFractions) { EXPECT_EQ(default_report_fractions(), (std::vector<double>{0.1, 0.9})); }

TEST(Report, EmptyOrMissingDirectoryIsError) {
  TempDir dir;
  EXPECT_THROW(read_runs(dir.path()), Error);
  EXPECT_THROW(read_runs(dir.path() / "missing"), Error);
  std::ofstream(dir.path() / "x_meta.csv") << "wrong\n";
  EXPECT_THROW(read_runs(dir.path()), Error);
}

TEST(Csv, RejectsSeparatorsInFields) {
  std::ostringstream out;
  EXPECT_THROW(write_rounds_csv(out, {}, "a,b", "sybil"), Error);
}
