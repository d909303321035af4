#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pipestash/model.hpp"
#include "pipestash/recommender.hpp"
#include "pipestash/rule_index.hpp"

namespace pipestash {

enum class LedgerOutcome { kGain, kLossWaste, kLossMiss, kNoEffect };

struct LedgerDeltas {
  std::uint64_t gain = 0;
  std::uint64_t loss_waste = 0;  // stored, not reused
  std::uint64_t loss_miss = 0;   // reusable, not stored
  std::uint64_t no_effect = 0;

  std::uint64_t loss() const noexcept { return loss_waste + loss_miss; }
  std::uint64_t events() const noexcept { return gain + loss() + no_effect; }

  void add(LedgerOutcome outcome) noexcept;
  LedgerDeltas& operator+=(const LedgerDeltas& other) noexcept;
  friend bool operator==(const LedgerDeltas&, const LedgerDeltas&) = default;
};

/// One store decision (stored or not) for one prefix of one run.
struct LedgerEntry {
  AssociationRule rule;
  bool stored = false;
  std::uint64_t created_seq = 0;
  std::uint64_t gain = 0;
  std::uint64_t loss_waste = 0;
  std::uint64_t loss_miss = 0;
  std::uint64_t no_effect = 0;

  std::uint64_t loss() const noexcept { return loss_waste + loss_miss; }

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

/// How a newly arrived run scores against one earlier decision.
LedgerOutcome classify(const LedgerEntry& entry, const PipelineRun& run) noexcept;

/// Scores `run` against every entry, bumping exactly one counter each.
/// Returns the per-entry outcomes in ledger order.
std::vector<LedgerOutcome> step_update(std::span<LedgerEntry> ledger,
                                       const PipelineRun& run);

enum class Policy { kRisp, kStoreAll, kStoreNone };

std::string_view to_string(Policy policy);
std::optional<Policy> parse_policy(std::string_view text);

struct Frame {
  std::uint64_t seq = 0;
  LedgerDeltas totals;  // cumulative

  /// gain/loss, absent while loss is zero.
  std::optional<Rational> ratio() const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct ReplayReport {
  Policy policy = Policy::kRisp;
  MiningOptions options;
  std::vector<Frame> frames;  // one per run from the second run on

  friend bool operator==(const ReplayReport&, const ReplayReport&) = default;
};

/// Evolving-history evaluation of a storing policy.
///
/// Each advance() indexes the run, scores it against the ledger built by
/// earlier runs, then applies the policy and adds one ledger entry per
/// itemset of the run. Ledger bookkeeping is aggregated per (dataset,
/// module prefix), so a step costs O(run length) regardless of ledger size;
/// ledger() reconstructs the per-entry counters on demand.
class Replayer {
 public:
  struct Step {
    std::uint64_t seq = 0;
    bool evaluated = false;  // false for the first run
    LedgerDeltas deltas;
    StoreDecision decision;
  };

  explicit Replayer(Policy policy = Policy::kRisp, MiningOptions options = {},
                    StoreOptions store_options = {});

  Step advance(const PipelineRun& run);

  const RuleIndex& index() const noexcept { return index_; }
  const ReplayReport& report() const noexcept { return report_; }
  const LedgerDeltas& totals() const noexcept { return totals_; }
  std::size_t runs() const noexcept { return runs_; }
  std::size_t ledger_size() const noexcept { return entries_.size(); }

  std::vector<LedgerEntry> ledger() const;

 private:
  struct MatchNode {
    std::uint64_t matches = 0;  // later runs of the dataset passing through
    std::uint64_t stored = 0;   // ledger entries at this node
    std::uint64_t unstored = 0;
    std::map<ModuleId, std::uint32_t> children;
  };
  struct MatchTrie {
    std::vector<MatchNode> nodes{MatchNode{}};
    std::uint64_t arrivals = 0;
    std::uint64_t stored_entries = 0;
  };
  struct EntryRecord {
    AssociationRule rule;
    bool stored;
    std::uint64_t created_seq;
    std::size_t created_frame;
    std::uint32_t node;
    std::uint64_t matches_at;
    std::uint64_t arrivals_at;
  };

  StoreDecision decide(const PipelineRun& run) const;

  Policy policy_;
  MiningOptions options_;
  StoreOptions store_options_;
  RuleIndex index_;
  std::map<DatasetId, MatchTrie> matches_;
  std::vector<EntryRecord> entries_;
  LedgerDeltas totals_;
  std::size_t runs_ = 0;
  ReplayReport report_;
};

/// Throws Error(kEmptyHistory).
ReplayReport replay(const History& history, Policy policy,
                    const MiningOptions& options);

std::vector<std::pair<std::uint64_t, std::optional<Rational>>> ratio_series(
    const ReplayReport& report);

std::string report_to_json(const ReplayReport& report);
std::string report_to_csv(const ReplayReport& report);

}  // namespace pipestash
