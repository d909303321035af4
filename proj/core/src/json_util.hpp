#pragma once

// Shared JSON encoders for the documents the library emits. Private to core.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "pipestash/model.hpp"
#include "pipestash/rule_index.hpp"

namespace pipestash::detail {

using nlohmann::json;

inline json to_json(std::span<const ModuleId> modules) {
  json out = json::array();
  for (const auto& m : modules) out.push_back(m.str());
  return out;
}

inline json to_json(const Rational& value) {
  return json{{"num", value.num()}, {"den", value.den()}};
}

inline json to_json(const std::optional<Rational>& value) {
  return value ? to_json(*value) : json(nullptr);
}

json rules_document(const RuleIndex& index,
                    const std::optional<DatasetId>& dataset);

// Reads a required array of token strings.
std::vector<std::string> string_array(const json& doc, const char* field);

}  // namespace pipestash::detail
