#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pipestash/ingestion.hpp"
#include "pipestash/model.hpp"
#include "pipestash/recommender.hpp"
#include "pipestash/replay.hpp"
#include "pipestash/rule_index.hpp"
#include "pipestash/store.hpp"

namespace pipestash {

struct ServiceConfig {
  // Loaded at startup when the file exists; accepted runs are appended.
  std::optional<std::filesystem::path> history_path;
  std::optional<HistoryFormat> history_format;
  // Holds manifest.json and blobs/. Without it everything stays in memory.
  std::optional<std::filesystem::path> store_dir;
  // Read-only manifest to start from instead of <store_dir>/manifest.json.
  std::optional<std::filesystem::path> manifest_path;
  MiningOptions options;
  Policy policy = Policy::kRisp;
  std::size_t default_top_k = 10;
};

/// Everything a reader sees; never mutated once published.
struct ServiceState {
  History history;
  Replayer replayer;
  StoreManifest manifest;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct SubmitResult {
  PipelineRun run;
  StoreDecision decision;
  LedgerDeltas deltas;
};

/// JSON document with cumulative ledger totals, ratio, run and rule counts.
std::string snapshot_metrics(const ServiceState& state);

/// {"suggestions": [...]} as returned by POST /recommend/reuse.
std::string suggestions_json(const std::vector<ReuseSuggestion>& suggestions);

/// JSON form of a store decision: {"mode", "storePoints": [[...]]}.
std::string store_decision_json(const StoreDecision& decision);

/// Request handling for the HTTP facade, independent of any transport.
///
/// Reads work on an immutable snapshot. Submissions are serialized: each
/// one is applied to a private copy of the state (index append, ledger
/// step, store decision, manifest update), persisted, then published in a
/// single pointer swap.
class ApiService {
 public:
  explicit ApiService(ServiceConfig config);

  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  /// `target` is the request path with an optional query string.
  HttpResponse handle(std::string_view method, std::string_view target,
                      std::string_view body);

  std::shared_ptr<const ServiceState> snapshot() const;

  std::vector<ReuseSuggestion> suggest(
      const DatasetId& dataset, std::span<const ModuleId> prefix,
      std::optional<std::size_t> top_k = std::nullopt) const;

  /// Store decision `run` would get if submitted now; no state change.
  StoreDecision preview_store(const DatasetId& dataset,
                              std::span<const ModuleId> modules) const;

  /// Throws Error on invalid input, kKeyConflict or kIoFailure; the
  /// published state is untouched on failure.
  SubmitResult submit(const RawRun& raw);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  SubmitResult apply(ServiceState& state, PipelineRun run, bool materialize);
  void publish(std::shared_ptr<const ServiceState> next);
  HttpResponse route(std::string_view method, std::string_view path,
                     std::string_view query, std::string_view body);

  ServiceConfig config_;
  HistoryFormat history_format_ = HistoryFormat::kLines;
  BlobStore blobs_;  // guarded by writer_mutex_
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const ServiceState> state_;
  std::mutex writer_mutex_;
};

}  // namespace pipestash
