#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pipestash/model.hpp"
#include "pipestash/rule_index.hpp"
#include "pipestash/store.hpp"

namespace pipestash {

struct RankedRule {
  AssociationRule rule;
  RuleStats stats;
  std::size_t rank = 0;  // 1-based
};

/// Strict weak order used for ranking: confidence descending, support
/// descending, longer consequent first (a longer prefix subsumes the
/// shorter ones it extends), then antecedent and consequent tokens
/// ascending.
bool ranks_before(const AssociationRule& a, const RuleStats& sa,
                  const AssociationRule& b, const RuleStats& sb);

std::vector<RankedRule> rank_rules(RuleList rules);

struct ReuseSuggestion {
  AssociationRule rule;
  RuleStats stats;
  bool stored = false;
  std::optional<std::string> store_key;  // set iff stored
};

/// Ranked rules of `dataset` whose consequent strictly extends
/// `current_prefix`, at most `top_k`, each flagged against `manifest`.
/// An unknown dataset yields an empty list.
std::vector<ReuseSuggestion> recommend_reuse(
    const RuleIndex& index, const StoreManifest& manifest,
    const DatasetId& dataset, std::span<const ModuleId> current_prefix,
    std::size_t top_k);

enum class StoreMode { kStoreAll, kArgmaxConfidence, kStoreNone };

std::string_view to_string(StoreMode mode);

struct StoreDecision {
  StoreMode mode = StoreMode::kStoreAll;
  std::vector<SubPipeline> store_points;

  friend bool operator==(const StoreDecision&, const StoreDecision&) = default;
};

struct StoreOptions {
  // Store points kept in argmax mode.
  std::size_t top_k = 1;
};

/// Where to materialize intermediates of a just-completed `run`.
///
/// `index` must already count `run`. When every itemset of the dataset comes
/// from this run all confidences are equal and every prefix is stored;
/// otherwise the prefix with the highest confidence wins, ties going to the
/// longer prefix.
StoreDecision recommend_store(const RuleIndex& index, const PipelineRun& run,
                              const MiningOptions& options,
                              const StoreOptions& store_options = {});

}  // namespace pipestash
