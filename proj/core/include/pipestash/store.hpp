#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pipestash/model.hpp"

namespace pipestash {

/// (dataset, prefix) address of a materialized intermediate result.
/// Canonical text form: "D1/P1-P3".
struct StoreKey {
  DatasetId dataset;
  ModuleSeq prefix;

  std::string text() const;

  friend bool operator==(const StoreKey&, const StoreKey&) = default;
};

struct ManifestEntry {
  StoreKey key;
  std::optional<std::string> blob_ref;  // "sha256:<hex>"
  std::uint64_t created_seq = 0;
  std::uint64_t hits = 0;
  bool stored = false;  // false: decision recorded, blob absent

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

/// "sha256:<lowercase hex>" of `payload`.
std::string content_ref(std::string_view payload);

/// Blob bytes named by content hash. With a root directory blobs live in
/// `<root>/blobs/<hex>`; without one they are held in memory.
class BlobStore {
 public:
  BlobStore() = default;
  explicit BlobStore(std::filesystem::path root);

  /// Writes `payload` (no-op if already present) and returns its ref.
  /// Throws Error(kIoFailure).
  std::string put(std::string_view payload);
  bool contains(std::string_view ref) const;
  /// Throws Error(kMissingKey) for an unknown ref.
  std::string read(std::string_view ref) const;

  const std::optional<std::filesystem::path>& root() const noexcept {
    return root_;
  }

 private:
  std::filesystem::path path_for(std::string_view ref) const;

  std::optional<std::filesystem::path> root_;
  std::map<std::string, std::string, std::less<>> memory_;
};

/// Keyed collection of manifest entries, ordered by canonical key text.
/// Map keys are internal; use ManifestEntry::key.
class StoreManifest {
 public:
  using Entries = std::map<std::string, ManifestEntry, std::less<>>;

  const Entries& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  /// Exact ordered-prefix match.
  const ManifestEntry* lookup(const DatasetId& dataset,
                              std::span<const ModuleId> prefix) const;
  const ManifestEntry* lookup(const StoreKey& key) const;

  /// Inserts or replaces the entry under its key.
  void upsert(ManifestEntry entry);

  /// Throws Error(kMissingKey).
  const ManifestEntry& record_hit(const StoreKey& key);

  /// Marks the entry as not stored and drops its blob ref. Hits are kept.
  void tombstone(const StoreKey& key);

  friend bool operator==(const StoreManifest&, const StoreManifest&) = default;

 private:
  static std::string slot(const StoreKey& key);

  Entries entries_;
};

/// Writes the blob and upserts a stored entry. Idempotent for identical
/// payloads (the existing entry is returned untouched). A different payload
/// under a stored key throws Error(kKeyConflict) unless `overwrite`.
const ManifestEntry& put_intermediate(StoreManifest& manifest, BlobStore& blobs,
                                      const StoreKey& key,
                                      std::string_view payload,
                                      std::uint64_t created_seq,
                                      bool overwrite = false);

const ManifestEntry* lookup_intermediate(const StoreManifest& manifest,
                                         const DatasetId& dataset,
                                         std::span<const ModuleId> prefix);

const ManifestEntry& record_hit(StoreManifest& manifest, const StoreKey& key);

/// Canonical JSON document; entries sorted by key text.
std::string manifest_to_json(const StoreManifest& manifest);
/// Throws Error(kMalformedManifest).
StoreManifest manifest_from_json(std::string_view text);

/// Throws Error(kIoFailure).
void save_manifest(const StoreManifest& manifest,
                   const std::filesystem::path& path);
/// Throws Error(kIoFailure) or Error(kMalformedManifest).
StoreManifest load_manifest(const std::filesystem::path& path);

}  // namespace pipestash
