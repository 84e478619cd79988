#include <gtest/gtest.h>

#include <set>

#include "hnd/harness.hpp"
#include "oracles.hpp"
#include "social_graph.hpp"

using namespace hnd;

namespace {

FullGraph small_sybil(std::size_t attack_links = 300) {
  hnd::testing::SocialGraphParams p;
  p.nodes = 300;
  p.edges = 1500;
  p.communities = 4;
  return synthesize_sybil(hnd::testing::social_graph(p), {attack_links, 7});
}

ExperimentConfig small_config(std::string strategy) {
  ExperimentConfig cfg;
  cfg.strategy = std::move(strategy);
  cfg.m0 = 20;
  cfg.mk = 15;
  cfg.trials = 3;
  cfg.seed = 11;
  cfg.classifier.kind = ClassifierKind::logistic;
  return cfg;
}

std::vector<NodeId> all_queried(const TrialResult& t) {
  std::vector<NodeId> out;
  for (const RoundLog& r : t.rounds) out.insert(out.end(), r.queried.begin(), r.queried.end());
  return out;
}

void expect_same(const TrialResult& a, const TrialResult& b) {
  ASSERT_EQ(a.rounds.size(), b.rounds.size());
  EXPECT_EQ(a.seed, b.seed);
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    EXPECT_EQ(a.rounds[i].queried, b.rounds[i].queried);
    EXPECT_EQ(a.rounds[i].labels, b.rounds[i].labels);
    EXPECT_EQ(a.rounds[i].slot_arm, b.rounds[i].slot_arm);
    EXPECT_EQ(a.rounds[i].targets_cum, b.rounds[i].targets_cum);
  }
}

/// A trial whose rounds reveal the given labels, one round per inner vector.
TrialResult synthetic(std::size_t nodes, std::size_t targets, const std::vector<std::vector<Label>>& rounds) {
  TrialResult t;
  t.node_count = nodes;
  t.total_targets = targets;
  NodeId next = 0;
  std::size_t q = 0, found = 0;
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    RoundLog r;
    r.round = i;
    for (Label l : rounds[i]) {
      r.queried.push_back(next++);
      r.labels.push_back(l);
      r.slot_arm.push_back(i == 0 ? -1 : 0);
      ++q;
      found += l;
    }
    r.queries_cum = q;
    r.targets_cum = found;
    t.rounds.push_back(std::move(r));
  }
  t.seed_queries = rounds.empty() ? 0 : rounds[0].size();
  return t;
}

std::vector<Label> labels_of(std::size_t ones, std::size_t zeros) {
  std::vector<Label> l(ones, 1);
  l.insert(l.end(), zeros, 0);
  return l;
}

}  // namespace

TEST(RunTrial, QueriesEveryNodeOnceOnConnectedGraph) {
  const FullGraph g = small_sybil();
  for (const char* s : {"mod", "tn", "random", "ml-base"}) {
    const TrialResult t = run_trial(g, small_config(s), 5);
    const auto q = all_queried(t);
    EXPECT_EQ(q.size(), g.size()) << s;
    EXPECT_EQ(std::set<NodeId>(q.begin(), q.end()).size(), q.size()) << s;
    EXPECT_EQ(t.rounds.back().targets_cum, g.target_count()) << s;
    EXPECT_DOUBLE_EQ(coverage_curve(t).back().value, 1.0) << s;
  }
}

TEST(RunTrial, RoundSizesFollowSchedule) {
  const FullGraph g = small_sybil();
  ExperimentConfig cfg = small_config("tn");
  cfg.rounds = 6;
  const TrialResult t = run_trial(g, cfg, 3);
  ASSERT_EQ(t.rounds.size(), 7u);
  EXPECT_EQ(t.rounds[0].queried.size(), cfg.m0);
  EXPECT_EQ(t.seed_queries, cfg.m0);
  for (std::size_t r = 1; r < t.rounds.size(); ++r) EXPECT_EQ(t.rounds[r].queried.size(), cfg.mk);
  EXPECT_EQ(t.rounds.back().queries_cum, cfg.m0 + 6 * cfg.mk);
}

TEST(RunTrial, CountersAreConsistentAndMonotone) {
  const FullGraph g = small_sybil();
  const TrialResult t = run_trial(g, small_config("bandit2"), 9);
  std::size_t q = 0, found = 0;
  for (const RoundLog& r : t.rounds) {
    q += r.queried.size();
    for (std::size_t i = 0; i < r.queried.size(); ++i) {
      EXPECT_EQ(r.labels[i], g.label(r.queried[i]));
      found += r.labels[i];
    }
    EXPECT_EQ(r.queries_cum, q);
    EXPECT_EQ(r.targets_cum, found);
    EXPECT_EQ(r.slot_arm.size(), r.queried.size());
    for (int a : r.slot_arm) EXPECT_TRUE(r.round == 0 ? a == -1 : (a == 0 || a == 1));
  }
  EXPECT_EQ(t.arm_names, (std::vector<std::string>{"ml-base", "ml-deepgl"}));
}

TEST(RunTrial, ReplayIsBitExact) {
  const FullGraph g = small_sybil();
  for (const char* s : {"random", "bandit2", "oracle-deepgl"}) {
    ExperimentConfig cfg = small_config(s);
    cfg.rounds = 5;
    expect_same(run_trial(g, cfg, 21), run_trial(g, cfg, 21));
  }
}

TEST(RunTrial, DifferentSeedsDiffer) {
  const FullGraph g = small_sybil();
  const ExperimentConfig cfg = small_config("random");
  EXPECT_NE(all_queried(run_trial(g, cfg, 1)), all_queried(run_trial(g, cfg, 2)));
}

TEST(RunTrial, QueryBudgetStopsExactly) {
  const FullGraph g = small_sybil();
  ExperimentConfig cfg = small_config("mod");
  cfg.max_queries = 57;
  const TrialResult t = run_trial(g, cfg, 4);
  EXPECT_EQ(t.rounds.back().queries_cum, 57u);
  cfg.count_seed = false;
  EXPECT_EQ(run_trial(g, cfg, 4).rounds.back().queries_cum, 57u + cfg.m0);
  cfg.count_seed = true;
  cfg.max_queries = 10;
  EXPECT_THROW(run_trial(g, cfg, 4), ConfigError);
}

TEST(RunTrial, DisconnectedGraphStopsWhenBorderEmpties) {
  const FullGraph g = small_sybil(0);
  const TrialResult t = run_trial(g, small_config("tn"), 6);
  const auto q = all_queried(t);
  EXPECT_EQ(q.size(), g.size() / 2);
  // Without attack links the walk stays in one half.
  for (NodeId v : q) EXPECT_EQ(g.label(v), g.label(q.front()));
}

TEST(RunTrial, SeedOnlyWhenM0CoversTheGraph) {
  const FullGraph g = FullGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  FullGraph labelled = g;
  labelled.set_labels({0, 1, 0, 1});
  ExperimentConfig cfg = small_config("mod");
  cfg.m0 = 4;
  const TrialResult t = run_trial(labelled, cfg, 1);
  ASSERT_EQ(t.rounds.size(), 1u);
  EXPECT_EQ(t.seed_queries, 4u);
  EXPECT_DOUBLE_EQ(coverage_curve(t).front().value, 1.0);
  cfg.m0 = 5;
  EXPECT_THROW(run_trial(labelled, cfg, 1), Error);
}

TEST(RunTrial, RetrainScheduleChangesModelUse) {
  const FullGraph g = small_sybil();
  ExperimentConfig every = small_config("ml-base");
  ExperimentConfig once = every;
  once.retrain_every = 0;
  ExperimentConfig rare = every;
  rare.retrain_every = 1000;
  const TrialResult a = run_trial(g, once, 8), b = run_trial(g, rare, 8);
  // Retraining every 1000 rounds never retrains after round 1 on this graph.
  expect_same(a, b);
  EXPECT_NE(all_queried(a), all_queried(run_trial(g, every, 8)));
}

TEST(RunTrial, InvertedArmRanksBackwards) {
  const FullGraph g = small_sybil();
  ExperimentConfig cfg = small_config("ml-base");
  cfg.rounds = 4;
  auto good = strategy_arms("ml-base", cfg.classifier);
  auto bad = good;
  bad[0].inverted = true;
  const TrialResult a = run_trial(g, cfg, good, 2), b = run_trial(g, cfg, bad, 2);
  EXPECT_GT(a.rounds.back().targets_cum, b.rounds.back().targets_cum);
}

TEST(RunTrial, ConfigErrors) {
  const FullGraph g = small_sybil();
  ExperimentConfig cfg = small_config("mod");
  cfg.m0 = 0;
  EXPECT_THROW(run_trial(g, cfg, 1), ConfigError);
  cfg = small_config("mod");
  cfg.mk = 0;
  EXPECT_THROW(run_trial(g, cfg, 1), ConfigError);
  cfg = small_config("nope");
  EXPECT_THROW(run_trial(g, cfg, 1), ConfigError);
  cfg = small_config("mod");
  cfg.trials = 0;
  EXPECT_THROW(run_trials(g, cfg), ConfigError);
  EXPECT_THROW(run_trial(g, small_config("mod"), {}, 1), ConfigError);
}

TEST(RunTrials, ParallelMatchesSequential) {
  const FullGraph g = small_sybil();
  ExperimentConfig cfg = small_config("bandit2");
  cfg.rounds = 4;
  cfg.trials = 4;
  const auto seq = run_trials(g, cfg);
  cfg.parallel_trials = 3;
  const auto par = run_trials(g, cfg);
  ASSERT_EQ(seq.size(), par.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_EQ(seq[i].seed, trial_seed(cfg.seed, i));
    expect_same(seq[i], par[i]);
  }
}

TEST(RunTrials, RandomStrategyTracksBaseRate) {
  Rng rng(13);
  FullGraph g = oracle::random_graph(2000, 0.004, rng);
  std::vector<Label> labels(2000, 0);
  for (std::size_t v = 0; v < 200; ++v) labels[v] = 1;
  std::shuffle(labels.begin(), labels.end(), rng);
  g.set_labels(labels);
  ExperimentConfig cfg = small_config("random");
  cfg.m0 = 100;
  cfg.mk = 100;
  cfg.trials = 10;
  std::vector<Curve> cov, prec;
  for (const TrialResult& t : run_trials(g, cfg)) {
    cov.push_back(coverage_curve(t));
    prec.push_back(precision_curve(t));
  }
  const std::vector<double> grid = {0.1, 0.2, 0.3, 0.5, 0.7, 0.9};
  const auto c = aggregate_trials(cov, grid);
  const auto p = aggregate_trials(prec, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(c.mean[i], grid[i], 0.03) << grid[i];
    EXPECT_NEAR(p.mean[i], 0.1, 0.03) << grid[i];
  }
}

TEST(Metrics, QueriesToFractionMatchesRecount) {
  Rng rng(17);
  std::bernoulli_distribution coin(0.3);
  std::uniform_int_distribution<std::size_t> len(1, 12), rounds(1, 8);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::vector<Label>> r(rounds(rng));
    std::size_t targets = 0;
    for (auto& round : r) {
      round.resize(len(rng));
      for (Label& l : round) targets += (l = coin(rng));
    }
    const std::size_t total = targets + i % 3;
    if (total == 0) continue;
    const TrialResult t = synthetic(200, total, r);
    for (double p : {0.1, 0.5, 0.9, 1.0}) {
      const auto need = static_cast<std::size_t>(std::ceil(p * static_cast<double>(total) - 1e-9));
      std::optional<std::size_t> expected;
      std::size_t q = 0, found = 0;
      for (const auto& round : r) {
        for (Label l : round) {
          ++q;
          found += l;
          if (!expected && found >= need) expected = q;
        }
      }
      EXPECT_EQ(queries_to_fraction(t, p), expected);
    }
  }
}

TEST(Metrics, CurvesMatchRecount) {
  const TrialResult t = synthetic(20, 5, {labels_of(1, 3), labels_of(2, 2), labels_of(0, 4)});
  const Curve c = coverage_curve(t), p = precision_curve(t);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c[0].value, 0.2);
  EXPECT_DOUBLE_EQ(c[1].value, 0.6);
  EXPECT_DOUBLE_EQ(c[2].value, 0.6);
  EXPECT_DOUBLE_EQ(c[1].fraction_queried, 0.4);
  EXPECT_DOUBLE_EQ(p[0].value, 0.25);
  EXPECT_DOUBLE_EQ(p[1].value, 3.0 / 8);
  EXPECT_DOUBLE_EQ(p[2].value, 0.25);
}

TEST(Metrics, CurveEdgeCases) {
  EXPECT_DOUBLE_EQ(coverage_curve(synthetic(10, 2, {labels_of(2, 1)})).front().value, 1.0);
  for (const auto& pt : precision_curve(synthetic(10, 4, {labels_of(2, 0), labels_of(2, 0)}))) {
    EXPECT_DOUBLE_EQ(pt.value, 1.0);
  }
  for (const auto& pt : precision_curve(synthetic(10, 4, {labels_of(0, 2), labels_of(0, 3)}))) {
    EXPECT_DOUBLE_EQ(pt.value, 0.0);
  }
  EXPECT_THROW(coverage_curve(synthetic(10, 0, {labels_of(0, 2)})), Error);
  EXPECT_THROW(precision_curve(synthetic(10, 0, {labels_of(0, 2)})), Error);
}

TEST(Metrics, NormalizedCost) {
  std::vector<Label> slow(1400, 0), fast(1000, 0);
  slow.back() = 1;
  fast.back() = 1;
  const TrialResult a = synthetic(5000, 1, {slow}), b = synthetic(5000, 1, {fast});
  EXPECT_DOUBLE_EQ(*normalized_query_cost(a, b, 0.9), 1.4);
  EXPECT_DOUBLE_EQ(*normalized_query_cost(a, a, 0.9), 1.0);
  const TrialResult never = synthetic(5000, 2, {fast});
  EXPECT_FALSE(normalized_query_cost(never, b, 1.0).has_value());
  EXPECT_FALSE(normalized_query_cost(b, never, 1.0).has_value());
  EXPECT_THROW(normalized_query_cost(a, b, 0.0), Error);
}

TEST(Metrics, AggregateExamples) {
  const Curve one = {{10, 0.1, 0.3}, {20, 0.2, 0.5}};
  const auto single = aggregate_trials({one});
  EXPECT_EQ(single.mean, (std::vector<double>{0.3, 0.5}));
  EXPECT_EQ(single.stddev, (std::vector<double>{0.0, 0.0}));
  const auto same = aggregate_trials({one, one, one});
  EXPECT_EQ(same.mean, single.mean);
  const Curve lo = {{10, 0.1, 0.2}}, hi = {{10, 0.1, 0.4}};
  const auto mixed = aggregate_trials({lo, hi});
  EXPECT_DOUBLE_EQ(mixed.mean[0], 0.3);
  EXPECT_NEAR(mixed.stddev[0], 0.1, 1e-12);
  EXPECT_THROW(aggregate_trials({}), Error);
}

TEST(Metrics, StepInterpolation) {
  const Curve c = {{10, 0.1, 0.3}, {20, 0.2, 0.5}};
  EXPECT_DOUBLE_EQ(step_value(c, 0.05), 0.0);
  EXPECT_DOUBLE_EQ(step_value(c, 0.1), 0.3);
  EXPECT_DOUBLE_EQ(step_value(c, 0.15), 0.3);
  EXPECT_DOUBLE_EQ(step_value(c, 0.9), 0.5);
}

TEST(Inputs, TaskLabels) {
  Rng rng(19);
  const FullGraph g = oracle::random_graph(50, 0.1, rng);
  ExperimentConfig cfg;
  cfg.task = Task::periphery;
  EXPECT_EQ(apply_task(g, cfg).target_count(), 5u);
  cfg.task = Task::broker;
  EXPECT_THROW(apply_task(g, cfg), ConfigError);
  cfg.task = Task::sybil;
  cfg.attack_links = 10;
  EXPECT_EQ(apply_task(g, cfg).size(), 100u);
  EXPECT_EQ(parse_task("source"), Task::source);
  EXPECT_THROW(parse_task("bogus"), ConfigError);
}

TEST(Inputs, MissingFiles) {
  ExperimentConfig cfg;
  EXPECT_THROW(load_experiment_graph(cfg), ConfigError);
  cfg.dataset = "/nonexistent/edges.txt";
  EXPECT_THROW(load_experiment_graph(cfg), ConfigError);
}

TEST(Strategies, NamesResolve) {
  for (const std::string& s : strategy_names()) EXPECT_FALSE(strategy_arms(s, {}).empty()) << s;
  EXPECT_EQ(strategy_arms("bandit6", {}).size(), 6u);
  EXPECT_EQ(strategy_arms("oracle", {})[0].topology, Topology::full);
}
