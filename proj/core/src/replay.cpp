#include "pipestash/replay.hpp"

#include <sstream>

#include "json_util.hpp"
#include "pipestash/error.hpp"

namespace pipestash {

using detail::json;

void LedgerDeltas::add(LedgerOutcome outcome) noexcept {
  switch (outcome) {
    case LedgerOutcome::kGain: ++gain; break;
    case LedgerOutcome::kLossWaste: ++loss_waste; break;
    case LedgerOutcome::kLossMiss: ++loss_miss; break;
    case LedgerOutcome::kNoEffect: ++no_effect; break;
  }
}

LedgerDeltas& LedgerDeltas::operator+=(const LedgerDeltas& other) noexcept {
  gain += other.gain;
  loss_waste += other.loss_waste;
  loss_miss += other.loss_miss;
  no_effect += other.no_effect;
  return *this;
}

LedgerOutcome classify(const LedgerEntry& entry, const PipelineRun& run) noexcept {
  if (entry.rule.antecedent != run.dataset) return LedgerOutcome::kNoEffect;
  const bool match = starts_with(run.modules, entry.rule.consequent);
  if (entry.stored) return match ? LedgerOutcome::kGain : LedgerOutcome::kLossWaste;
  return match ? LedgerOutcome::kLossMiss : LedgerOutcome::kNoEffect;
}

std::vector<LedgerOutcome> step_update(std::span<LedgerEntry> ledger,
                                       const PipelineRun& run) {
  std::vector<LedgerOutcome> out;
  out.reserve(ledger.size());
  for (LedgerEntry& entry : ledger) {
    const LedgerOutcome outcome = classify(entry, run);
    switch (outcome) {
      case LedgerOutcome::kGain: ++entry.gain; break;
      case LedgerOutcome::kLossWaste: ++entry.loss_waste; break;
      case LedgerOutcome::kLossMiss: ++entry.loss_miss; break;
      case LedgerOutcome::kNoEffect: ++entry.no_effect; break;
    }
    out.push_back(outcome);
  }
  return out;
}

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::kRisp: return "risp";
    case Policy::kStoreAll: return "store-all";
    case Policy::kStoreNone: return "store-none";
  }
  return "unknown";
}

std::optional<Policy> parse_policy(std::string_view text) {
  for (Policy p : {Policy::kRisp, Policy::kStoreAll, Policy::kStoreNone}) {
    if (to_string(p) == text) return p;
  }
  return std::nullopt;
}

std::optional<Rational> Frame::ratio() const {
  if (totals.loss() == 0) return std::nullopt;
  return Rational{totals.gain, totals.loss()};
}

Replayer::Replayer(Policy policy, MiningOptions options,
                   StoreOptions store_options)
    : policy_(policy),
      options_(options),
      store_options_(store_options),
      index_(options) {
  report_.policy = policy;
  report_.options = options;
}

StoreDecision Replayer::decide(const PipelineRun& run) const {
  switch (policy_) {
    case Policy::kRisp:
      return recommend_store(index_, run, options_, store_options_);
    case Policy::kStoreAll:
      return StoreDecision{StoreMode::kStoreAll, enumerate_prefixes(run, options_)};
    case Policy::kStoreNone:
      return StoreDecision{StoreMode::kStoreNone, {}};
  }
  return {};
}

Replayer::Step Replayer::advance(const PipelineRun& run) {
  Step step;
  step.seq = run.seq;
  ++runs_;
  index_.append(run);

  MatchTrie& trie = matches_[run.dataset];

  if (runs_ > 1) {
    // Entries of this dataset on the run's path were reused (or missed);
    // stored entries of this dataset off the path were wasted; everything
    // else saw no effect.
    LedgerDeltas d;
    std::uint32_t at = 0;
    for (const ModuleId& module : run.modules) {
      auto it = trie.nodes[at].children.find(module);
      if (it == trie.nodes[at].children.end()) break;
      at = it->second;
      d.gain += trie.nodes[at].stored;
      d.loss_miss += trie.nodes[at].unstored;
    }
    d.loss_waste = trie.stored_entries - d.gain;
    d.no_effect = entries_.size() - d.gain - d.loss_waste - d.loss_miss;
    step.evaluated = true;
    step.deltas = d;
    totals_ += d;
    report_.frames.push_back(Frame{run.seq, totals_});
  }

  // Record this run as a potential match for later ledger lookups.
  std::vector<std::uint32_t> path;
  path.reserve(run.modules.size());
  std::uint32_t at = 0;
  for (const ModuleId& module : run.modules) {
    auto it = trie.nodes[at].children.find(module);
    std::uint32_t next;
    if (it == trie.nodes[at].children.end()) {
      next = static_cast<std::uint32_t>(trie.nodes.size());
      trie.nodes[at].children.emplace(module, next);
      trie.nodes.emplace_back();
    } else {
      next = it->second;
    }
    ++trie.nodes[next].matches;
    path.push_back(next);
    at = next;
  }
  ++trie.arrivals;

  step.decision = decide(run);
  std::vector<bool> stored(run.modules.size() + 1, false);
  for (const SubPipeline& point : step.decision.store_points) {
    stored[point.prefix.size()] = true;
  }
  const std::size_t count = itemset_count(run.modules.size(), options_);
  for (std::size_t len = 1; len <= count; ++len) {
    const std::uint32_t node = path[len - 1];
    MatchNode& m = trie.nodes[node];
    if (stored[len]) {
      ++m.stored;
      ++trie.stored_entries;
    } else {
      ++m.unstored;
    }
    entries_.push_back(EntryRecord{
        AssociationRule{run.dataset, ModuleSeq(run.modules.begin(),
                                               run.modules.begin() + len)},
        stored[len], run.seq, runs_, node, m.matches, trie.arrivals});
  }
  return step;
}

std::vector<LedgerEntry> Replayer::ledger() const {
  std::vector<LedgerEntry> out;
  out.reserve(entries_.size());
  for (const EntryRecord& e : entries_) {
    const MatchTrie& trie = matches_.at(e.rule.antecedent);
    const std::uint64_t elapsed = runs_ - e.created_frame;
    const std::uint64_t matched = trie.nodes[e.node].matches - e.matches_at;
    const std::uint64_t arrived = trie.arrivals - e.arrivals_at;
    LedgerEntry entry{e.rule, e.stored, e.created_seq, 0, 0, 0, 0};
    if (e.stored) {
      entry.gain = matched;
      entry.loss_waste = arrived - matched;
    } else {
      entry.loss_miss = matched;
    }
    entry.no_effect = elapsed - entry.gain - entry.loss();
    out.push_back(std::move(entry));
  }
  return out;
}

ReplayReport replay(const History& history, Policy policy,
                    const MiningOptions& options) {
  if (history.runs.empty()) {
    throw Error(ErrorCode::kEmptyHistory, "nothing to replay");
  }
  Replayer replayer(policy, options);
  for (const PipelineRun& run : history.runs) replayer.advance(run);
  return replayer.report();
}

std::vector<std::pair<std::uint64_t, std::optional<Rational>>> ratio_series(
    const ReplayReport& report) {
  std::vector<std::pair<std::uint64_t, std::optional<Rational>>> out;
  out.reserve(report.frames.size());
  for (const Frame& f : report.frames) out.emplace_back(f.seq, f.ratio());
  return out;
}

std::string report_to_json(const ReplayReport& report) {
  json frames = json::array();
  for (const Frame& f : report.frames) {
    frames.push_back(json{{"seq", f.seq},
                          {"gain", f.totals.gain},
                          {"lossWaste", f.totals.loss_waste},
                          {"lossMiss", f.totals.loss_miss},
                          {"loss", f.totals.loss()},
                          {"noEffect", f.totals.no_effect},
                          {"ratio", detail::to_json(f.ratio())}});
  }
  const json doc{
      {"policy", std::string(to_string(report.policy))},
      {"options",
       json{{"includeFullPipeline", report.options.include_full_pipeline}}},
      {"frames", std::move(frames)}};
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const ReplayReport& report) {
  std::ostringstream out;
  out << "seq,gain,lossWaste,lossMiss,loss,noEffect,ratio\n";
  for (const Frame& f : report.frames) {
    out << f.seq << ',' << f.totals.gain << ',' << f.totals.loss_waste << ','
        << f.totals.loss_miss << ',' << f.totals.loss() << ','
        << f.totals.no_effect << ',';
    if (auto r = f.ratio()) out << to_string(*r);
    out << '\n';
  }
  return out.str();
}

}  // namespace pipestash
