#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pipestash/model.hpp"

namespace pipestash {

struct MiningOptions {
  // Also count the complete pipeline as an itemset. Off by default: a run's
  // final output is delivered anyway, so only proper prefixes are
  // candidates for materialization.
  bool include_full_pipeline = false;

  friend bool operator==(const MiningOptions&, const MiningOptions&) = default;
};

/// Leading prefixes of `run`, shortest first: lengths 1..L-1, or 1..L with
/// `include_full_pipeline`.
std::vector<SubPipeline> enumerate_prefixes(const PipelineRun& run,
                                            const MiningOptions& options);

/// Number of itemsets `enumerate_prefixes` yields for a run of `length`.
std::size_t itemset_count(std::size_t length,
                          const MiningOptions& options) noexcept;

using RuleList = std::vector<std::pair<AssociationRule, RuleStats>>;

/// Per-dataset prefix trie of itemset counts.
///
/// The node reached by walking `consequent` from the root of the
/// `antecedent` trie holds support(antecedent => consequent). The dataset
/// total (the confidence denominator) is the number of itemsets with that
/// antecedent, which equals the sum of all node counts in its trie.
class RuleIndex {
 public:
  explicit RuleIndex(MiningOptions options = {}) : options_(options) {}

  const MiningOptions& options() const noexcept { return options_; }

  /// Counts every itemset of `run`.
  void append(const PipelineRun& run);

  std::uint64_t dataset_support(const DatasetId& dataset) const;
  std::uint64_t support(const DatasetId& dataset,
                        std::span<const ModuleId> consequent) const;

  /// Absent when the exact ordered consequent never occurred.
  std::optional<RuleStats> stats(const DatasetId& dataset,
                                 std::span<const ModuleId> consequent) const;
  std::optional<RuleStats> stats(const AssociationRule& rule) const {
    return stats(rule.antecedent, rule.consequent);
  }

  /// Support of every leading prefix of `modules` (index i is the prefix of
  /// length i+1). Trailing zeros are omitted once the walk leaves the trie.
  std::vector<std::uint64_t> path_supports(
      const DatasetId& dataset, std::span<const ModuleId> modules) const;

  /// One entry per trie node, in depth-first order with children visited in
  /// token order. `dataset` restricts to one antecedent.
  RuleList distinct_rules(const std::optional<DatasetId>& dataset = {}) const;

  /// Datasets with at least one itemset, sorted.
  std::vector<DatasetId> datasets() const;
  std::size_t rule_count() const noexcept;
  std::uint64_t itemset_total() const noexcept;

  friend bool operator==(const RuleIndex& a, const RuleIndex& b);

 private:
  struct Node {
    std::uint64_t count = 0;
    std::map<ModuleId, std::uint32_t> children;
  };
  struct Trie {
    std::vector<Node> nodes{Node{}};  // nodes[0] is the root
    std::uint64_t total = 0;
  };

  static bool same_subtree(const Trie& a, std::uint32_t ia, const Trie& b,
                           std::uint32_t ib);
  const Node* find(const DatasetId& dataset,
                   std::span<const ModuleId> consequent) const;

  MiningOptions options_;
  std::map<DatasetId, Trie> tries_;
  std::size_t rule_count_ = 0;
};

RuleIndex build_index(const History& history, const MiningOptions& options);

/// Value-returning form of RuleIndex::append.
RuleIndex append_run(RuleIndex index, const PipelineRun& run);

std::optional<RuleStats> rule_stats(const RuleIndex& index,
                                    const AssociationRule& rule);

RuleList distinct_rules(const RuleIndex& index,
                        const std::optional<DatasetId>& dataset = {});

}  // namespace pipestash
