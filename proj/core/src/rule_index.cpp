#include "pipestash/rule_index.hpp"

#include <algorithm>

namespace pipestash {

std::size_t itemset_count(std::size_t length,
                          const MiningOptions& options) noexcept {
  if (options.include_full_pipeline) return length;
  return length == 0 ? 0 : length - 1;
}

std::vector<SubPipeline> enumerate_prefixes(const PipelineRun& run,
                                            const MiningOptions& options) {
  const std::size_t n = itemset_count(run.modules.size(), options);
  std::vector<SubPipeline> out;
  out.reserve(n);
  for (std::size_t len = 1; len <= n; ++len) {
    out.push_back(SubPipeline{
        run.dataset, ModuleSeq(run.modules.begin(), run.modules.begin() + len)});
  }
  return out;
}

void RuleIndex::append(const PipelineRun& run) {
  const std::size_t n = itemset_count(run.modules.size(), options_);
  if (n == 0) return;
  Trie& trie = tries_[run.dataset];
  std::uint32_t at = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const ModuleId& module = run.modules[i];
    auto it = trie.nodes[at].children.find(module);
    std::uint32_t next;
    if (it == trie.nodes[at].children.end()) {
      next = static_cast<std::uint32_t>(trie.nodes.size());
      trie.nodes[at].children.emplace(module, next);
      trie.nodes.emplace_back();
      ++rule_count_;
    } else {
      next = it->second;
    }
    ++trie.nodes[next].count;
    at = next;
  }
  trie.total += n;
}

const RuleIndex::Node* RuleIndex::find(
    const DatasetId& dataset, std::span<const ModuleId> consequent) const {
  auto t = tries_.find(dataset);
  if (t == tries_.end() || consequent.empty()) return nullptr;
  const Trie& trie = t->second;
  std::uint32_t at = 0;
  for (const ModuleId& module : consequent) {
    auto it = trie.nodes[at].children.find(module);
    if (it == trie.nodes[at].children.end()) return nullptr;
    at = it->second;
  }
  return &trie.nodes[at];
}

std::uint64_t RuleIndex::dataset_support(const DatasetId& dataset) const {
  auto t = tries_.find(dataset);
  return t == tries_.end() ? 0 : t->second.total;
}

std::uint64_t RuleIndex::support(const DatasetId& dataset,
                                 std::span<const ModuleId> consequent) const {
  const Node* node = find(dataset, consequent);
  return node ? node->count : 0;
}

std::optional<RuleStats> RuleIndex::stats(
    const DatasetId& dataset, std::span<const ModuleId> consequent) const {
  const Node* node = find(dataset, consequent);
  if (!node) return std::nullopt;
  return RuleStats{node->count, dataset_support(dataset)};
}

std::vector<std::uint64_t> RuleIndex::path_supports(
    const DatasetId& dataset, std::span<const ModuleId> modules) const {
  std::vector<std::uint64_t> out;
  auto t = tries_.find(dataset);
  if (t == tries_.end()) return out;
  const Trie& trie = t->second;
  std::uint32_t at = 0;
  for (const ModuleId& module : modules) {
    auto it = trie.nodes[at].children.find(module);
    if (it == trie.nodes[at].children.end()) break;
    at = it->second;
    out.push_back(trie.nodes[at].count);
  }
  return out;
}

RuleList RuleIndex::distinct_rules(const std::optional<DatasetId>& dataset) const {
  RuleList out;
  auto emit = [&out](const DatasetId& id, const Trie& trie) {
    ModuleSeq path;
    // Iterative DFS; each frame is (node, next child iterator).
    using ChildIt = std::map<ModuleId, std::uint32_t>::const_iterator;
    std::vector<std::pair<std::uint32_t, ChildIt>> stack;
    stack.emplace_back(0, trie.nodes[0].children.begin());
    while (!stack.empty()) {
      auto& [node, it] = stack.back();
      if (it == trie.nodes[node].children.end()) {
        stack.pop_back();
        if (!path.empty()) path.pop_back();
        continue;
      }
      const auto [module, child] = *it;
      ++it;
      path.push_back(module);
      out.emplace_back(AssociationRule{id, path},
                       RuleStats{trie.nodes[child].count, trie.total});
      stack.emplace_back(child, trie.nodes[child].children.begin());
    }
  };
  if (dataset) {
    auto t = tries_.find(*dataset);
    if (t != tries_.end()) emit(t->first, t->second);
  } else {
    for (const auto& [id, trie] : tries_) emit(id, trie);
  }
  return out;
}

std::vector<DatasetId> RuleIndex::datasets() const {
  std::vector<DatasetId> out;
  out.reserve(tries_.size());
  for (const auto& [id, trie] : tries_) out.push_back(id);
  return out;
}

std::size_t RuleIndex::rule_count() const noexcept { return rule_count_; }

std::uint64_t RuleIndex::itemset_total() const noexcept {
  std::uint64_t total = 0;
  for (const auto& [id, trie] : tries_) total += trie.total;
  return total;
}

bool RuleIndex::same_subtree(const Trie& a, std::uint32_t ia, const Trie& b,
                             std::uint32_t ib) {
  const Node& na = a.nodes[ia];
  const Node& nb = b.nodes[ib];
  if (na.count != nb.count || na.children.size() != nb.children.size()) {
    return false;
  }
  auto ja = na.children.begin();
  auto jb = nb.children.begin();
  for (; ja != na.children.end(); ++ja, ++jb) {
    if (ja->first != jb->first) return false;
    if (!same_subtree(a, ja->second, b, jb->second)) return false;
  }
  return true;
}

bool operator==(const RuleIndex& a, const RuleIndex& b) {
  if (a.options_ != b.options_ || a.rule_count_ != b.rule_count_ ||
      a.tries_.size() != b.tries_.size()) {
    return false;
  }
  auto ia = a.tries_.begin();
  auto ib = b.tries_.begin();
  for (; ia != a.tries_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.total != ib->second.total) {
      return false;
    }
    if (!RuleIndex::same_subtree(ia->second, 0, ib->second, 0)) return false;
  }
  return true;
}

RuleIndex build_index(const History& history, const MiningOptions& options) {
  RuleIndex index(options);
  for (const PipelineRun& run : history.runs) index.append(run);
  return index;
}

RuleIndex append_run(RuleIndex index, const PipelineRun& run) {
  index.append(run);
  return index;
}

std::optional<RuleStats> rule_stats(const RuleIndex& index,
                                    const AssociationRule& rule) {
  return index.stats(rule);
}

RuleList distinct_rules(const RuleIndex& index,
                        const std::optional<DatasetId>& dataset) {
  return index.distinct_rules(dataset);
}

}  // namespace pipestash
