#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pipestash {

/// True when `text` is a non-empty run of `[A-Za-z0-9_.-]`.
bool is_valid_token(std::string_view text) noexcept;

/// Opaque identifier with validated spelling. `Tag` keeps datasets and
/// modules from being mixed up.
template <typename Tag>
class Token {
 public:
  /// Throws Error(kBadToken) unless `text` is a valid token.
  explicit Token(std::string text);

  const std::string& str() const noexcept { return text_; }

  friend bool operator==(const Token&, const Token&) = default;
  friend auto operator<=>(const Token&, const Token&) = default;

 private:
  std::string text_;
};

struct DatasetTag {};
struct ModuleTag {};

using DatasetId = Token<DatasetTag>;
using ModuleId = Token<ModuleTag>;
using ModuleSeq = std::vector<ModuleId>;

extern template class Token<DatasetTag>;
extern template class Token<ModuleTag>;

/// Joins module tokens with `sep`, e.g. "P1-P3-P4".
std::string join(std::span<const ModuleId> modules, std::string_view sep = "-");

/// Validates every token; throws Error(kBadToken) on the first bad one.
ModuleSeq to_modules(std::span<const std::string> tokens);

/// True when `prefix` is a leading segment of `sequence` (equality included).
bool starts_with(std::span<const ModuleId> sequence,
                 std::span<const ModuleId> prefix) noexcept;

/// One historical execution of a pipeline.
struct PipelineRun {
  std::string id;
  DatasetId dataset;
  ModuleSeq modules;
  std::uint64_t seq = 0;

  friend bool operator==(const PipelineRun&, const PipelineRun&) = default;
};

/// Runs in arrival order; `seq` strictly increasing.
struct History {
  std::vector<PipelineRun> runs;

  std::uint64_t last_seq() const noexcept {
    return runs.empty() ? 0 : runs.back().seq;
  }

  friend bool operator==(const History&, const History&) = default;
};

/// A dataset plus a leading prefix of one run's modules.
struct SubPipeline {
  DatasetId dataset;
  ModuleSeq prefix;

  friend bool operator==(const SubPipeline&, const SubPipeline&) = default;
  friend auto operator<=>(const SubPipeline&, const SubPipeline&) = default;
};

/// dataset => ordered module prefix. Equality is order-sensitive.
struct AssociationRule {
  DatasetId antecedent;
  ModuleSeq consequent;

  friend bool operator==(const AssociationRule&,
                         const AssociationRule&) = default;
  friend auto operator<=>(const AssociationRule&,
                          const AssociationRule&) = default;
};

std::string to_string(const AssociationRule& rule);

/// Non-negative fraction kept as the original integer pair. Comparison is
/// exact, so 2/8 == 1/4 and 2/8 != 2/7.
class Rational {
 public:
  Rational(std::uint64_t num, std::uint64_t den);

  std::uint64_t num() const noexcept { return num_; }
  std::uint64_t den() const noexcept { return den_; }

  /// Same value and same spelling.
  bool identical(const Rational& other) const noexcept {
    return num_ == other.num_ && den_ == other.den_;
  }

  friend bool operator==(const Rational& a, const Rational& b) noexcept;
  friend std::strong_ordering operator<=>(const Rational& a,
                                          const Rational& b) noexcept;

 private:
  std::uint64_t num_;
  std::uint64_t den_;
};

std::string to_string(const Rational& value);

struct RuleStats {
  std::uint64_t support = 0;
  std::uint64_t dataset_support = 0;

  Rational confidence() const { return {support, dataset_support}; }

  friend bool operator==(const RuleStats&, const RuleStats&) = default;
};

/// Unvalidated run record as it comes off the wire.
struct RawRun {
  std::optional<std::string> id;
  std::string dataset;
  std::vector<std::string> modules;
  std::optional<std::int64_t> seq;
};

/// Checks tokens and sequencing against the runs already in `context`.
/// A missing seq becomes `context.last_seq() + 1`; a missing id becomes
/// "wf-<seq>". Throws Error with kEmptyModules, kBadToken or kDuplicateSeq
/// (also used when seq does not exceed the last one).
PipelineRun validate_run(const RawRun& candidate, const History& context = {});

}  // namespace pipestash

template <typename Tag>
struct std::hash<pipestash::Token<Tag>> {
  std::size_t operator()(const pipestash::Token<Tag>& token) const noexcept {
    return std::hash<std::string>{}(token.str());
  }
};
