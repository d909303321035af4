#include "pipestash/rule_index.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "support/oracle.hpp"

namespace pipestash {
namespace {

using testing::make_run;
using testing::mods;
using testing::rule;

std::vector<ModuleSeq> prefixes_of(const std::vector<SubPipeline>& subs) {
  std::vector<ModuleSeq> out;
  for (const auto& s : subs) out.push_back(s.prefix);
  return out;
}

TEST(EnumeratePrefixes, ProperPrefixesOfSamplePipeline) {
  const auto subs = enumerate_prefixes(make_run("D1", {"P1", "P3", "P4", "P2"}, 1), {});
  EXPECT_EQ(prefixes_of(subs),
            (std::vector<ModuleSeq>{mods({"P1"}), mods({"P1", "P3"}),
                                    mods({"P1", "P3", "P4"})}));
  for (const auto& s : subs) EXPECT_EQ(s.dataset.str(), "D1");
}

TEST(EnumeratePrefixes, SingleModuleRunHasNone) {
  EXPECT_TRUE(enumerate_prefixes(make_run("D1", {"P1"}, 1), {}).empty());
  EXPECT_EQ(enumerate_prefixes(make_run("D1", {"P1"}, 1), {true}).size(), 1u);
}

TEST(EnumeratePrefixes, IncludeFull) {
  const auto subs = enumerate_prefixes(make_run("D2", {"P2", "P3", "P4"}, 1), {true});
  EXPECT_EQ(prefixes_of(subs),
            (std::vector<ModuleSeq>{mods({"P2"}), mods({"P2", "P3"}),
                                    mods({"P2", "P3", "P4"})}));
}

TEST(BuildIndex, SampleDatasetSupports) {
  const RuleIndex index = build_index(testing::sample_history(), {});
  EXPECT_EQ(index.dataset_support(DatasetId("D1")), 8u);
  EXPECT_EQ(index.dataset_support(DatasetId("D2")), 5u);
  EXPECT_EQ(index.itemset_total(), 13u);
  EXPECT_EQ(index.rule_count(), 11u);
}

TEST(BuildIndex, EmptyHistory) {
  const RuleIndex index = build_index({}, {});
  EXPECT_EQ(index.rule_count(), 0u);
  EXPECT_EQ(index.support(DatasetId("D1"), mods({"A"})), 0u);
  EXPECT_EQ(index.dataset_support(DatasetId("D1")), 0u);
  EXPECT_FALSE(index.stats(rule("D1", {"A"})).has_value());
  EXPECT_TRUE(index.distinct_rules().empty());
}

TEST(BuildIndex, SingleTwoModuleRun) {
  History h;
  h.runs.push_back(make_run("D1", {"A", "B"}, 1));
  const RuleIndex index = build_index(h, {});
  EXPECT_EQ(index.dataset_support(DatasetId("D1")), 1u);
  EXPECT_EQ(index.support(DatasetId("D1"), mods({"A"})), 1u);
  EXPECT_EQ(index.support(DatasetId("D1"), mods({"A", "B"})), 0u);
}

TEST(AppendRun, SampleRunThreeGrowsD1) {
  const History sample = testing::sample_history();
  RuleIndex index = build_index(testing::first_runs(sample, 2), {});
  EXPECT_EQ(index.dataset_support(DatasetId("D1")), 3u);
  index = append_run(std::move(index), sample.runs[2]);
  EXPECT_EQ(index.dataset_support(DatasetId("D1")), 8u);
}

TEST(AppendRun, UnseenDataset) {
  RuleIndex index = build_index(testing::sample_history(), {});
  index.append(make_run("D9", {"A", "B"}, 5));
  EXPECT_EQ(index.dataset_support(DatasetId("D9")), 1u);
  EXPECT_EQ(index.datasets().size(), 3u);
}

TEST(AppendRun, MatchesFreshBuild) {
  const History sample = testing::sample_history();
  RuleIndex incremental(MiningOptions{});
  for (const auto& run : sample.runs) incremental = append_run(incremental, run);
  EXPECT_EQ(incremental, build_index(sample, {}));
  EXPECT_FALSE(incremental == build_index(sample, {true}));
  EXPECT_FALSE(incremental == build_index(testing::first_runs(sample, 3), {}));
}

TEST(RuleStats, SampleValues) {
  const RuleIndex index = build_index(testing::sample_history(), {});
  const auto d2p2 = rule_stats(index, rule("D2", {"P2"}));
  ASSERT_TRUE(d2p2);
  EXPECT_EQ(d2p2->support, 2u);
  EXPECT_TRUE(d2p2->confidence().identical(Rational(2, 5)));

  const auto d1p1 = rule_stats(index, rule("D1", {"P1"}));
  ASSERT_TRUE(d1p1);
  EXPECT_EQ(d1p1->support, 2u);
  EXPECT_TRUE(d1p1->confidence().identical(Rational(2, 8)));

  EXPECT_FALSE(rule_stats(index, rule("D1", {"X", "P1"})));
  EXPECT_FALSE(rule_stats(index, rule("D1", {"P3", "P1"})));
  EXPECT_FALSE(rule_stats(index, rule("D3", {"P1"})));
}

TEST(DistinctRules, SampleDatasets) {
  const RuleIndex index = build_index(testing::sample_history(), {});
  std::set<ModuleSeq> d1;
  for (const auto& [r, s] : distinct_rules(index, DatasetId("D1"))) {
    d1.insert(r.consequent);
  }
  EXPECT_EQ(d1, (std::set<ModuleSeq>{
                    mods({"P1"}), mods({"P1", "P3"}), mods({"P1", "P3", "P4"}),
                    mods({"P1", "P2"}), mods({"P1", "P2", "P3"}),
                    mods({"P1", "P2", "P3", "P4"}),
                    mods({"P1", "P2", "P3", "P4", "P7"})}));
  EXPECT_EQ(distinct_rules(index, DatasetId("D2")).size(), 4u);
  EXPECT_EQ(distinct_rules(index).size(), 11u);
  EXPECT_TRUE(distinct_rules(index, DatasetId("D9")).empty());
}

// Oracle equivalence: every answer the trie gives (including absent rules
// drawn from reversed and shuffled sequences) matches a count over the
// explicit itemset list.
TEST(RuleIndexProperty, MatchesBruteForce) {
  std::mt19937_64 rng(20240601);
  for (int iter = 0; iter < 300; ++iter) {
    const History h = testing::random_history(rng);
    for (bool full : {false, true}) {
      const MiningOptions options{full};
      const RuleIndex index = build_index(h, options);
      const auto itemsets = testing::materialize_itemsets(h, options);

      std::vector<AssociationRule> probes;
      for (const auto& r : h.runs) {
        for (std::size_t len = 1; len <= r.modules.size(); ++len) {
          ModuleSeq p(r.modules.begin(), r.modules.begin() + len);
          probes.push_back({r.dataset, p});
          std::reverse(p.begin(), p.end());
          probes.push_back({r.dataset, p});
          probes.push_back({DatasetId("D9"), p});
        }
      }
      for (const auto& probe : probes) {
        std::vector<std::string> consequent;
        for (const auto& m : probe.consequent) consequent.push_back(m.str());
        const auto expected =
            testing::brute_force_stats(itemsets, probe.antecedent.str(), consequent);
        const auto actual = index.stats(probe);
        EXPECT_EQ(index.support(probe.antecedent, probe.consequent), expected.support);
        EXPECT_EQ(index.dataset_support(probe.antecedent), expected.dataset_support);
        if (expected.support == 0) {
          EXPECT_FALSE(actual);
        } else {
          ASSERT_TRUE(actual);
          EXPECT_TRUE(actual->confidence().identical(
              Rational(expected.support, expected.dataset_support)));
        }
      }

      // Completeness: the distinct rules are exactly the distinct itemsets.
      std::map<std::pair<std::string, std::vector<std::string>>, std::uint64_t> counts;
      for (const auto& item : itemsets) ++counts[{item.dataset, item.prefix}];
      const RuleList rules = index.distinct_rules();
      ASSERT_EQ(rules.size(), counts.size());
      for (const auto& [r, s] : rules) {
        std::vector<std::string> consequent;
        for (const auto& m : r.consequent) consequent.push_back(m.str());
        EXPECT_EQ((counts[{r.antecedent.str(), consequent}]), s.support);
      }
    }
  }
}

TEST(RuleIndexProperty, ConservationAndMonotonicity) {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    const History h = testing::random_history(rng);
    const RuleIndex index = build_index(h, {});
    for (const DatasetId& d : index.datasets()) {
      std::uint64_t sum = 0;
      for (const auto& [r, s] : index.distinct_rules(d)) {
        sum += s.support;
        EXPECT_GE(s.support, 1u);
        EXPECT_LE(s.support, s.dataset_support);
        if (r.consequent.size() > 1) {
          const std::span<const ModuleId> parent(r.consequent.data(),
                                                 r.consequent.size() - 1);
          EXPECT_GE(index.support(d, parent), s.support);
        }
      }
      EXPECT_EQ(sum, index.dataset_support(d));
    }
  }
}

TEST(RuleIndexProperty, ReversalGivesDisjointLongConsequents) {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 200; ++iter) {
    // Distinct modules: a random permutation of an alphabet prefix.
    ModuleSeq modules;
    const std::size_t len = 2 + rng() % 6;
    std::vector<int> ids(8);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t i = 0; i < len; ++i) {
      modules.emplace_back("M" + std::to_string(ids[i]));
    }
    ModuleSeq reversed(modules.rbegin(), modules.rend());
    History forward{{PipelineRun{"a", DatasetId("D"), modules, 1}}};
    History backward{{PipelineRun{"b", DatasetId("D"), reversed, 1}}};
    std::set<ModuleSeq> f, b;
    for (const auto& [r, s] : build_index(forward, {true}).distinct_rules()) {
      if (r.consequent.size() >= 2) f.insert(r.consequent);
    }
    for (const auto& [r, s] : build_index(backward, {true}).distinct_rules()) {
      if (r.consequent.size() >= 2) b.insert(r.consequent);
    }
    for (const auto& c : f) EXPECT_EQ(b.count(c), 0u);
  }
}

TEST(RuleIndexProperty, IncrementalEqualsBatch) {
  std::mt19937_64 rng(4242);
  for (int iter = 0; iter < 200; ++iter) {
    const History h = testing::random_history(rng);
    for (bool full : {false, true}) {
      RuleIndex folded(MiningOptions{full});
      for (const auto& run : h.runs) folded = append_run(std::move(folded), run);
      EXPECT_EQ(folded, build_index(h, {full}));
    }
  }
}

}  // namespace
}  // namespace pipestash
