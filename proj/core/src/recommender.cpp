#include "pipestash/recommender.hpp"

#include <algorithm>

namespace pipestash {

bool ranks_before(const AssociationRule& a, const RuleStats& sa,
                  const AssociationRule& b, const RuleStats& sb) {
  if (auto c = sa.confidence() <=> sb.confidence(); c != 0) return c > 0;
  if (sa.support != sb.support) return sa.support > sb.support;
  if (a.consequent.size() != b.consequent.size()) {
    return a.consequent.size() > b.consequent.size();
  }
  return a < b;
}

std::vector<RankedRule> rank_rules(RuleList rules) {
  std::sort(rules.begin(), rules.end(), [](const auto& x, const auto& y) {
    return ranks_before(x.first, x.second, y.first, y.second);
  });
  std::vector<RankedRule> out;
  out.reserve(rules.size());
  for (auto& [rule, stats] : rules) {
    out.push_back(RankedRule{std::move(rule), stats, out.size() + 1});
  }
  return out;
}

std::vector<ReuseSuggestion> recommend_reuse(
    const RuleIndex& index, const StoreManifest& manifest,
    const DatasetId& dataset, std::span<const ModuleId> current_prefix,
    std::size_t top_k) {
  RuleList candidates;
  for (auto& entry : index.distinct_rules(dataset)) {
    const ModuleSeq& consequent = entry.first.consequent;
    if (consequent.size() > current_prefix.size() &&
        starts_with(consequent, current_prefix)) {
      candidates.push_back(std::move(entry));
    }
  }
  std::vector<ReuseSuggestion> out;
  for (auto& ranked : rank_rules(std::move(candidates))) {
    if (out.size() >= top_k) break;
    ReuseSuggestion s{std::move(ranked.rule), ranked.stats, false, std::nullopt};
    const ManifestEntry* hit = manifest.lookup(dataset, s.rule.consequent);
    if (hit && hit->stored) {
      s.stored = true;
      s.store_key = hit->key.text();
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string_view to_string(StoreMode mode) {
  switch (mode) {
    case StoreMode::kStoreAll: return "store-all";
    case StoreMode::kArgmaxConfidence: return "argmax-confidence";
    case StoreMode::kStoreNone: return "store-none";
  }
  return "unknown";
}

StoreDecision recommend_store(const RuleIndex& index, const PipelineRun& run,
                              const MiningOptions& options,
                              const StoreOptions& store_options) {
  std::vector<SubPipeline> prefixes = enumerate_prefixes(run, options);
  const std::uint64_t own = prefixes.size();
  if (prefixes.empty() || index.dataset_support(run.dataset) <= own) {
    return StoreDecision{StoreMode::kStoreAll, std::move(prefixes)};
  }

  const std::vector<std::uint64_t> supports =
      index.path_supports(run.dataset, run.modules);
  const std::uint64_t total = index.dataset_support(run.dataset);
  std::vector<std::pair<std::size_t, Rational>> scored;
  scored.reserve(prefixes.size());
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    const std::uint64_t support = i < supports.size() ? supports[i] : 0;
    scored.emplace_back(i, Rational{support, total});
  }
  // Prefixes of one run differ only in length, so the lexicographic
  // tie-break never fires here.
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (auto c = a.second <=> b.second; c != 0) return c > 0;
    return a.first > b.first;
  });

  StoreDecision decision{StoreMode::kArgmaxConfidence, {}};
  const std::size_t keep = std::min(std::max<std::size_t>(store_options.top_k, 1),
                                    scored.size());
  for (std::size_t i = 0; i < keep; ++i) {
    decision.store_points.push_back(std::move(prefixes[scored[i].first]));
  }
  return decision;
}

}  // namespace pipestash
