#include "pipestash/ingestion.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "pipestash/error.hpp"
#include "pipestash/recommender.hpp"

namespace pipestash {

using detail::json;

namespace detail {

std::vector<std::string> string_array(const json& doc, const char* field) {
  // get<> throws type_error for anything but an array of strings.
  return doc.at(field).get<std::vector<std::string>>();
}

json rules_document(const RuleIndex& index,
                    const std::optional<DatasetId>& dataset) {
  json datasets = json::object();
  std::vector<DatasetId> ids =
      dataset ? std::vector<DatasetId>{*dataset} : index.datasets();
  for (const DatasetId& id : ids) {
    json rules = json::array();
    for (const RankedRule& r : rank_rules(index.distinct_rules(id))) {
      rules.push_back(json{{"consequent", to_json(r.rule.consequent)},
                           {"support", r.stats.support},
                           {"confidence", to_json(r.stats.confidence())}});
    }
    datasets[id.str()] =
        json{{"support", index.dataset_support(id)}, {"rules", std::move(rules)}};
  }
  return json{{"datasets", std::move(datasets)}};
}

}  // namespace detail

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Calls fn(line_number, line) for each line, numbering from 1.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t number = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    std::string_view line = text.substr(0, end);
    ++number;
    fn(number, line);
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
}

}  // namespace

HistoryFormat infer_format(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  return (ext == ".dsl" || ext == ".txt") ? HistoryFormat::kDsl
                                          : HistoryFormat::kLines;
}

History parse_history_lines(std::string_view text) {
  History history;
  for_each_line(text, [&history](std::size_t number, std::string_view line) {
    line = trim(line);
    if (line.empty()) return;
    RawRun raw;
    try {
      const json doc = json::parse(line);
      if (!doc.is_object()) {
        throw Error(ErrorCode::kMalformedRecord, "record is not an object", number);
      }
      raw.dataset = doc.at("dataset").get<std::string>();
      raw.modules = detail::string_array(doc, "modules");
      if (auto it = doc.find("id"); it != doc.end() && !it->is_null()) {
        raw.id = it->get<std::string>();
      }
      if (auto it = doc.find("seq"); it != doc.end() && !it->is_null()) {
        raw.seq = it->get<std::int64_t>();
      } else {
        raw.seq = static_cast<std::int64_t>(number);
      }
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kMalformedRecord, ex.what(), number);
    }
    try {
      history.runs.push_back(validate_run(raw, history));
    } catch (const Error& ex) {
      throw Error(ex.code(), ex.message(), number);
    }
  });
  return history;
}

History parse_history_dsl(std::string_view text) {
  History history;
  for_each_line(text, [&history](std::size_t number, std::string_view line) {
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) return;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedRecord, "expected '<dataset>: <modules>'",
                  number);
    }
    RawRun raw;
    raw.dataset = std::string(trim(line.substr(0, colon)));
    std::string_view rest = trim(line.substr(colon + 1));
    if (rest.empty()) {
      throw Error(ErrorCode::kMalformedRecord, "no modules after ':'", number);
    }
    while (true) {
      const auto dash = rest.find('-');
      raw.modules.emplace_back(trim(rest.substr(0, dash)));
      if (dash == std::string_view::npos) break;
      rest.remove_prefix(dash + 1);
    }
    try {
      history.runs.push_back(validate_run(raw, history));
    } catch (const Error& ex) {
      throw Error(ErrorCode::kMalformedRecord, ex.message(), number);
    }
  });
  return history;
}

History parse_history(std::string_view text, HistoryFormat format) {
  return format == HistoryFormat::kDsl ? parse_history_dsl(text)
                                       : parse_history_lines(text);
}

History load_history(const std::filesystem::path& path,
                     std::optional<HistoryFormat> format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_history(buf.str(), format.value_or(infer_format(path)));
}

std::string format_run(const PipelineRun& run, HistoryFormat format) {
  if (format == HistoryFormat::kDsl) {
    for (const ModuleId& m : run.modules) {
      if (m.str().find('-') != std::string::npos) {
        throw Error(ErrorCode::kBadToken,
                    "module '" + m.str() + "' cannot be written in DSL form");
      }
    }
    return run.dataset.str() + ": " + join(run.modules) + "\n";
  }
  const json doc{{"id", run.id},
                 {"dataset", run.dataset.str()},
                 {"modules", detail::to_json(run.modules)},
                 {"seq", run.seq}};
  return doc.dump() + "\n";
}

std::string to_lines(const History& history) {
  std::string out;
  for (const auto& run : history.runs) out += format_run(run, HistoryFormat::kLines);
  return out;
}

std::string to_dsl(const History& history) {
  std::string out;
  for (const auto& run : history.runs) out += format_run(run, HistoryFormat::kDsl);
  return out;
}

std::string export_rules(const RuleIndex& index,
                         const std::optional<DatasetId>& dataset) {
  return detail::rules_document(index, dataset).dump(2) + "\n";
}

}  // namespace pipestash
