#include "pipestash/model.hpp"

#include <algorithm>
#include <unordered_set>

#include "pipestash/error.hpp"

namespace pipestash {

bool is_valid_token(std::string_view text) noexcept {
  if (text.empty()) return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-';
  });
}

template <typename Tag>
Token<Tag>::Token(std::string text) : text_(std::move(text)) {
  if (!is_valid_token(text_)) {
    throw Error(ErrorCode::kBadToken, "invalid token '" + text_ + "'");
  }
}

template class Token<DatasetTag>;
template class Token<ModuleTag>;

std::string join(std::span<const ModuleId> modules, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < modules.size(); ++i) {
    if (i) out += sep;
    out += modules[i].str();
  }
  return out;
}

ModuleSeq to_modules(std::span<const std::string> tokens) {
  ModuleSeq out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.emplace_back(t);
  return out;
}

bool starts_with(std::span<const ModuleId> sequence,
                 std::span<const ModuleId> prefix) noexcept {
  return prefix.size() <= sequence.size() &&
         std::equal(prefix.begin(), prefix.end(), sequence.begin());
}

std::string to_string(const AssociationRule& rule) {
  return rule.antecedent.str() + " => (" + join(rule.consequent, ", ") + ")";
}

Rational::Rational(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
  if (den_ == 0) throw std::invalid_argument("Rational with zero denominator");
}

namespace {
__extension__ typedef unsigned __int128 Wide;
}  // namespace

bool operator==(const Rational& a, const Rational& b) noexcept {
  return Wide{a.num_} * b.den_ == Wide{b.num_} * a.den_;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
  const Wide lhs = Wide{a.num_} * b.den_;
  const Wide rhs = Wide{b.num_} * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string to_string(const Rational& value) {
  return std::to_string(value.num()) + "/" + std::to_string(value.den());
}

PipelineRun validate_run(const RawRun& candidate, const History& context) {
  if (candidate.modules.empty()) {
    throw Error(ErrorCode::kEmptyModules, "run has no modules");
  }
  DatasetId dataset(candidate.dataset);
  ModuleSeq modules = to_modules(candidate.modules);

  std::uint64_t seq = context.last_seq() + 1;
  if (candidate.seq) {
    if (*candidate.seq < 1) {
      throw Error(ErrorCode::kDuplicateSeq,
                  "seq must be >= 1, got " + std::to_string(*candidate.seq));
    }
    seq = static_cast<std::uint64_t>(*candidate.seq);
    if (seq <= context.last_seq()) {
      const bool duplicate =
          std::any_of(context.runs.begin(), context.runs.end(),
                      [seq](const PipelineRun& r) { return r.seq == seq; });
      throw Error(ErrorCode::kDuplicateSeq,
                  duplicate ? "seq " + std::to_string(seq) + " already used"
                            : "seq " + std::to_string(seq) +
                                  " does not follow " +
                                  std::to_string(context.last_seq()));
    }
  }

  std::string id = candidate.id.value_or("wf-" + std::to_string(seq));
  if (id.empty()) throw Error(ErrorCode::kBadToken, "empty run id");
  return PipelineRun{std::move(id), std::move(dataset), std::move(modules), seq};
}

}  // namespace pipestash
