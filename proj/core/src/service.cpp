#include "pipestash/service.hpp"

#include <fstream>

#include "json_util.hpp"
#include "pipestash/error.hpp"

namespace pipestash {

namespace fs = std::filesystem;
using detail::json;

namespace {

constexpr const char* kManifestFile = "manifest.json";

std::string synthetic_payload(const StoreKey& key) {
  return "pipestash-intermediate\n" + key.text() + "\n";
}

json decision_to_json(const StoreDecision& decision) {
  json points = json::array();
  for (const SubPipeline& p : decision.store_points) {
    points.push_back(detail::to_json(p.prefix));
  }
  return json{{"mode", std::string(to_string(decision.mode))},
              {"storePoints", std::move(points)}};
}

json deltas_to_json(const LedgerDeltas& d) {
  return json{{"gain", d.gain},
              {"lossWaste", d.loss_waste},
              {"lossMiss", d.loss_miss},
              {"noEffect", d.no_effect}};
}

HttpResponse json_response(int status, const json& doc) {
  return HttpResponse{status, doc.dump(2) + "\n"};
}

HttpResponse error_response(int status, std::string_view message) {
  return json_response(status, json{{"error", std::string(message)}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kKeyConflict: return 409;
    case ErrorCode::kIoFailure: return 500;
    case ErrorCode::kEmptyModules:
    case ErrorCode::kBadToken:
    case ErrorCode::kDuplicateSeq:
    case ErrorCode::kMalformedRecord: return 400;
    default: return 500;
  }
}

std::optional<std::string> query_param(std::string_view query,
                                       std::string_view name) {
  std::size_t start = 0;
  while (start <= query.size()) {
    std::size_t end = query.find('&', start);
    if (end == std::string_view::npos) end = query.size();
    const std::string_view pair = query.substr(start, end - start);
    std::string_view key = pair;
    std::string_view value;
    if (const auto eq = pair.find('='); eq != std::string_view::npos) {
      key = pair.substr(0, eq);
      value = pair.substr(eq + 1);
    }
    if (!pair.empty() && key == name) return std::string(value);
    start = end + 1;
  }
  return std::nullopt;
}

json parse_body(std::string_view body) {
  json doc = json::parse(body);
  if (!doc.is_object()) {
    throw Error(ErrorCode::kMalformedRecord, "request body must be an object");
  }
  return doc;
}

}  // namespace

std::string snapshot_metrics(const ServiceState& state) {
  const LedgerDeltas& t = state.replayer.totals();
  std::optional<Rational> ratio;
  if (t.loss() > 0) ratio = Rational{t.gain, t.loss()};
  const json doc{{"runs", state.history.runs.size()},
                 {"rules", state.replayer.index().rule_count()},
                 {"gain", t.gain},
                 {"lossWaste", t.loss_waste},
                 {"lossMiss", t.loss_miss},
                 {"loss", t.loss()},
                 {"noEffect", t.no_effect},
                 {"ratio", detail::to_json(ratio)},
                 {"storedEntries", state.manifest.size()}};
  return doc.dump(2) + "\n";
}

std::string suggestions_json(const std::vector<ReuseSuggestion>& suggestions) {
  json items = json::array();
  for (const ReuseSuggestion& s : suggestions) {
    json item{{"consequent", detail::to_json(s.rule.consequent)},
              {"support", s.stats.support},
              {"confidence", detail::to_json(s.stats.confidence())},
              {"stored", s.stored}};
    if (s.store_key) item["storeKey"] = *s.store_key;
    items.push_back(std::move(item));
  }
  return json{{"suggestions", std::move(items)}}.dump(2) + "\n";
}

std::string store_decision_json(const StoreDecision& decision) {
  return decision_to_json(decision).dump(2) + "\n";
}

ApiService::ApiService(ServiceConfig config) : config_(std::move(config)) {
  auto state = std::make_shared<ServiceState>(
      ServiceState{{}, Replayer(config_.policy, config_.options), {}});

  if (config_.store_dir) blobs_ = BlobStore(*config_.store_dir);
  if (config_.manifest_path) {
    state->manifest = load_manifest(*config_.manifest_path);
  } else if (config_.store_dir) {
    const fs::path manifest_path = *config_.store_dir / kManifestFile;
    std::error_code ec;
    if (fs::exists(manifest_path, ec)) state->manifest = load_manifest(manifest_path);
  }

  History history;
  if (config_.history_path) {
    history_format_ =
        config_.history_format.value_or(infer_format(*config_.history_path));
    std::error_code ec;
    if (fs::exists(*config_.history_path, ec)) {
      history = load_history(*config_.history_path, history_format_);
    }
  }
  // A manifest given explicitly is taken as-is; otherwise it is rebuilt from
  // the decisions the policy makes while folding the history, hits included.
  const bool materialize = !config_.manifest_path;
  if (materialize) {
    for (const auto& [text, entry] : state->manifest.entries()) {
      if (entry.hits == 0) continue;
      ManifestEntry reset = entry;
      reset.hits = 0;
      state->manifest.upsert(std::move(reset));
    }
  }
  for (PipelineRun& run : history.runs) apply(*state, std::move(run), materialize);

  if (config_.store_dir) {
    save_manifest(state->manifest, *config_.store_dir / kManifestFile);
  }
  state_ = std::move(state);
}

std::shared_ptr<const ServiceState> ApiService::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return state_;
}

void ApiService::publish(std::shared_ptr<const ServiceState> next) {
  std::lock_guard lock(snapshot_mutex_);
  state_ = std::move(next);
}

SubmitResult ApiService::apply(ServiceState& state, PipelineRun run,
                               bool materialize) {
  Replayer::Step step = state.replayer.advance(run);
  if (!materialize) {
    state.history.runs.push_back(run);
    return SubmitResult{std::move(run), std::move(step.decision), step.deltas};
  }

  // Stored intermediates this run could have started from.
  for (std::size_t len = 1; len <= run.modules.size(); ++len) {
    StoreKey key{run.dataset,
                 ModuleSeq(run.modules.begin(), run.modules.begin() + len)};
    const ManifestEntry* entry = state.manifest.lookup(key);
    if (entry && entry->stored && entry->created_seq < run.seq) {
      state.manifest.record_hit(key);
    }
  }
  for (const SubPipeline& point : step.decision.store_points) {
    StoreKey key{point.dataset, point.prefix};
    put_intermediate(state.manifest, blobs_, key, synthetic_payload(key), run.seq);
  }
  state.history.runs.push_back(run);
  return SubmitResult{std::move(run), std::move(step.decision), step.deltas};
}

SubmitResult ApiService::submit(const RawRun& raw) {
  std::lock_guard writer(writer_mutex_);
  auto next = std::make_shared<ServiceState>(*snapshot());
  PipelineRun run = validate_run(raw, next->history);
  SubmitResult result = apply(*next, run, true);

  if (config_.history_path) {
    std::ofstream out(*config_.history_path, std::ios::app | std::ios::binary);
    out << format_run(result.run, history_format_);
    if (!out) {
      throw Error(ErrorCode::kIoFailure,
                  "cannot append to " + config_.history_path->string());
    }
  }
  if (config_.store_dir) {
    save_manifest(next->manifest, *config_.store_dir / kManifestFile);
  }
  publish(std::move(next));
  return result;
}

std::vector<ReuseSuggestion> ApiService::suggest(
    const DatasetId& dataset, std::span<const ModuleId> prefix,
    std::optional<std::size_t> top_k) const {
  auto state = snapshot();
  return recommend_reuse(state->replayer.index(), state->manifest, dataset,
                         prefix, top_k.value_or(config_.default_top_k));
}

StoreDecision ApiService::preview_store(const DatasetId& dataset,
                                        std::span<const ModuleId> modules) const {
  auto state = snapshot();
  PipelineRun run{"preview", dataset, ModuleSeq(modules.begin(), modules.end()),
                  state->history.last_seq() + 1};
  switch (config_.policy) {
    case Policy::kRisp: {
      RuleIndex index = state->replayer.index();
      index.append(run);
      return recommend_store(index, run, config_.options);
    }
    case Policy::kStoreAll:
      return StoreDecision{StoreMode::kStoreAll, enumerate_prefixes(run, config_.options)};
    case Policy::kStoreNone:
      return StoreDecision{StoreMode::kStoreNone, {}};
  }
  return {};
}

HttpResponse ApiService::handle(std::string_view method, std::string_view target,
                                std::string_view body) {
  std::string_view path = target;
  std::string_view query;
  if (const auto q = target.find('?'); q != std::string_view::npos) {
    path = target.substr(0, q);
    query = target.substr(q + 1);
  }
  try {
    return route(method, path, query, body);
  } catch (const json::exception& ex) {
    return error_response(400, ex.what());
  } catch (const Error& ex) {
    return error_response(status_for(ex.code()), ex.what());
  } catch (const std::exception& ex) {
    return error_response(500, ex.what());
  }
}

HttpResponse ApiService::route(std::string_view method, std::string_view path,
                               std::string_view query, std::string_view body) {
  const bool get = method == "GET";
  const bool post = method == "POST";

  if (path == "/health") {
    if (!get) return error_response(405, "method not allowed");
    return json_response(200, json{{"ok", true}});
  }
  if (path == "/rules") {
    if (!get) return error_response(405, "method not allowed");
    std::optional<DatasetId> dataset;
    if (auto d = query_param(query, "dataset")) dataset.emplace(*d);
    return HttpResponse{
        200, export_rules(snapshot()->replayer.index(), dataset)};
  }
  if (path == "/metrics") {
    if (!get) return error_response(405, "method not allowed");
    return HttpResponse{200, snapshot_metrics(*snapshot())};
  }
  if (path == "/replay/report") {
    if (!get) return error_response(405, "method not allowed");
    return HttpResponse{200, report_to_json(snapshot()->replayer.report())};
  }
  if (path == "/pipelines") {
    if (!post) return error_response(405, "method not allowed");
    const json doc = parse_body(body);
    RawRun raw;
    raw.dataset = doc.at("dataset").get<std::string>();
    raw.modules = detail::string_array(doc, "modules");
    if (auto it = doc.find("id"); it != doc.end() && !it->is_null()) {
      raw.id = it->get<std::string>();
    }
    SubmitResult result = submit(raw);
    return json_response(200, json{{"seq", result.run.seq},
                                   {"storeDecision", decision_to_json(result.decision)},
                                   {"ledgerDeltas", deltas_to_json(result.deltas)}});
  }
  if (path == "/recommend/reuse") {
    if (!post) return error_response(405, "method not allowed");
    const json doc = parse_body(body);
    const DatasetId dataset(doc.at("dataset").get<std::string>());
    ModuleSeq prefix;
    if (auto it = doc.find("prefix"); it != doc.end() && !it->is_null()) {
      prefix = to_modules(it->get<std::vector<std::string>>());
    }
    std::optional<std::size_t> top_k;
    if (auto it = doc.find("topK"); it != doc.end() && !it->is_null()) {
      const auto k = it->get<std::int64_t>();
      if (k < 1) return error_response(400, "topK must be >= 1");
      top_k = static_cast<std::size_t>(k);
    }
    return HttpResponse{200, suggestions_json(suggest(dataset, prefix, top_k))};
  }
  if (path == "/recommend/store") {
    if (!post) return error_response(405, "method not allowed");
    const json doc = parse_body(body);
    const DatasetId dataset(doc.at("dataset").get<std::string>());
    const ModuleSeq modules = to_modules(detail::string_array(doc, "modules"));
    if (modules.empty()) return error_response(400, "modules must be non-empty");
    return HttpResponse{200, store_decision_json(preview_store(dataset, modules))};
  }
  return error_response(404, "no route for " + std::string(path));
}

}  // namespace pipestash
