#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "pipestash/model.hpp"
#include "pipestash/rule_index.hpp"

namespace pipestash {

enum class HistoryFormat {
  kLines,  // one JSON object per line
  kDsl,    // "D1: P1-P3-P4"
};

/// ".dsl" and ".txt" map to kDsl; anything else to kLines.
HistoryFormat infer_format(const std::filesystem::path& path);

/// One JSON record per line: {"id"?, "dataset", "modules", "seq"?}. Blank
/// lines are skipped; a missing seq is the 1-based line number. Throws
/// Error with the line number attached.
History parse_history_lines(std::string_view text);

/// `<dataset>: <mod>-<mod>-...` per line; `#` starts a comment. Every
/// grammar or token problem is reported as kMalformedRecord.
History parse_history_dsl(std::string_view text);

History parse_history(std::string_view text, HistoryFormat format);

/// Throws Error(kIoFailure) when the file cannot be read.
History load_history(const std::filesystem::path& path,
                     std::optional<HistoryFormat> format = std::nullopt);

/// One record (with trailing newline) in the given format. DSL separates
/// modules with '-', so a module containing '-' throws Error(kBadToken).
std::string format_run(const PipelineRun& run, HistoryFormat format);

std::string to_lines(const History& history);
/// Drops ids and seqs; they are regenerated on parse.
std::string to_dsl(const History& history);

/// Rule-export JSON document. Datasets sorted, rules in rank order. With
/// `dataset` set only that dataset is listed (with zero support and no rules
/// if it was never seen).
std::string export_rules(const RuleIndex& index,
                         const std::optional<DatasetId>& dataset = std::nullopt);

}  // namespace pipestash
