#include "pipestash/store.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "pipestash/error.hpp"

namespace pipestash {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kRefPrefix = "sha256:";

std::string hex_of(const unsigned char* data, std::size_t size) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (std::size_t i = 0; i < size; ++i) {
    out += kDigits[data[i] >> 4];
    out += kDigits[data[i] & 0xf];
  }
  return out;
}

bool is_hex_digest(std::string_view hex) {
  return hex.size() == 64 &&
         hex.find_first_not_of("0123456789abcdef") == std::string_view::npos;
}

std::string_view digest_of(std::string_view ref) {
  if (ref.substr(0, kRefPrefix.size()) != kRefPrefix) return {};
  std::string_view hex = ref.substr(kRefPrefix.size());
  return is_hex_digest(hex) ? hex : std::string_view{};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  return buf.str();
}

// Write-then-rename so readers never see a partial file.
void write_file_atomic(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoFailure, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace

std::string StoreKey::text() const { return dataset.str() + "/" + join(prefix); }

std::string content_ref(std::string_view payload) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(payload.data(), payload.size(), md.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIoFailure, "sha256 digest failed");
  }
  return std::string(kRefPrefix) + hex_of(md.data(), len);
}

BlobStore::BlobStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(*root_ / "blobs", ec);
  if (ec) {
    throw Error(ErrorCode::kIoFailure,
                "cannot create blob directory under " + root_->string());
  }
}

fs::path BlobStore::path_for(std::string_view ref) const {
  return *root_ / "blobs" / std::string(digest_of(ref));
}

std::string BlobStore::put(std::string_view payload) {
  std::string ref = content_ref(payload);
  if (!root_) {
    memory_.try_emplace(ref, payload);
    return ref;
  }
  const fs::path path = path_for(ref);
  std::error_code ec;
  if (!fs::exists(path, ec)) write_file_atomic(path, payload);
  return ref;
}

bool BlobStore::contains(std::string_view ref) const {
  if (digest_of(ref).empty()) return false;
  if (!root_) return memory_.find(ref) != memory_.end();
  std::error_code ec;
  return fs::exists(path_for(ref), ec);
}

std::string BlobStore::read(std::string_view ref) const {
  if (!contains(ref)) {
    throw Error(ErrorCode::kMissingKey, "no blob " + std::string(ref));
  }
  if (!root_) return memory_.find(ref)->second;
  return read_file(path_for(ref));
}

const ManifestEntry* StoreManifest::lookup(
    const DatasetId& dataset, std::span<const ModuleId> prefix) const {
  return lookup(StoreKey{dataset, ModuleSeq(prefix.begin(), prefix.end())});
}

std::string StoreManifest::slot(const StoreKey& key) {
  // Canonical text first so entries iterate in canonical order; the '/'
  // joined tail keeps keys distinct when module tokens contain '-'.
  return key.text() + '\n' + join(key.prefix, "/");
}

const ManifestEntry* StoreManifest::lookup(const StoreKey& key) const {
  if (key.prefix.empty()) return nullptr;
  auto it = entries_.find(slot(key));
  return it == entries_.end() ? nullptr : &it->second;
}

void StoreManifest::upsert(ManifestEntry entry) {
  std::string text = slot(entry.key);
  entries_.insert_or_assign(std::move(text), std::move(entry));
}

const ManifestEntry& StoreManifest::record_hit(const StoreKey& key) {
  auto it = entries_.find(slot(key));
  if (it == entries_.end()) {
    throw Error(ErrorCode::kMissingKey, "no manifest entry " + key.text());
  }
  ++it->second.hits;
  return it->second;
}

void StoreManifest::tombstone(const StoreKey& key) {
  auto it = entries_.find(slot(key));
  if (it == entries_.end()) {
    throw Error(ErrorCode::kMissingKey, "no manifest entry " + key.text());
  }
  it->second.stored = false;
  it->second.blob_ref.reset();
}

const ManifestEntry& put_intermediate(StoreManifest& manifest, BlobStore& blobs,
                                      const StoreKey& key,
                                      std::string_view payload,
                                      std::uint64_t created_seq,
                                      bool overwrite) {
  if (key.prefix.empty()) {
    throw Error(ErrorCode::kEmptyModules, "store key has an empty prefix");
  }
  const std::string ref = content_ref(payload);
  const ManifestEntry* existing = manifest.lookup(key);
  if (existing && existing->stored && existing->blob_ref == ref &&
      blobs.contains(ref)) {
    return *existing;
  }
  if (existing && existing->blob_ref && *existing->blob_ref != ref &&
      !overwrite) {
    throw Error(ErrorCode::kKeyConflict,
                key.text() + " already holds " + *existing->blob_ref);
  }
  blobs.put(payload);
  ManifestEntry entry{key, ref, created_seq, existing ? existing->hits : 0, true};
  manifest.upsert(std::move(entry));
  return *manifest.lookup(key);
}

const ManifestEntry* lookup_intermediate(const StoreManifest& manifest,
                                         const DatasetId& dataset,
                                         std::span<const ModuleId> prefix) {
  return manifest.lookup(dataset, prefix);
}

const ManifestEntry& record_hit(StoreManifest& manifest, const StoreKey& key) {
  return manifest.record_hit(key);
}

std::string manifest_to_json(const StoreManifest& manifest) {
  json entries = json::array();
  for (const auto& [text, e] : manifest.entries()) {
    json prefix = json::array();
    for (const auto& m : e.key.prefix) prefix.push_back(m.str());
    entries.push_back(json{{"dataset", e.key.dataset.str()},
                           {"prefix", std::move(prefix)},
                           {"blob", e.blob_ref ? json(*e.blob_ref) : json(nullptr)},
                           {"createdSeq", e.created_seq},
                           {"hits", e.hits},
                           {"stored", e.stored}});
  }
  return json{{"entries", std::move(entries)}}.dump(2) + "\n";
}

StoreManifest manifest_from_json(std::string_view text) {
  StoreManifest manifest;
  try {
    const json doc = json::parse(text);
    for (const json& e : doc.at("entries")) {
      ManifestEntry entry{
          StoreKey{DatasetId(e.at("dataset").get<std::string>()),
                   to_modules(e.at("prefix").get<std::vector<std::string>>())},
          std::nullopt, e.at("createdSeq").get<std::uint64_t>(),
          e.at("hits").get<std::uint64_t>(), e.at("stored").get<bool>()};
      if (entry.key.prefix.empty()) {
        throw Error(ErrorCode::kMalformedManifest, "entry with empty prefix");
      }
      const json& blob = e.at("blob");
      if (!blob.is_null()) {
        auto ref = blob.get<std::string>();
        if (digest_of(ref).empty()) {
          throw Error(ErrorCode::kMalformedManifest, "bad blob ref " + ref);
        }
        entry.blob_ref = std::move(ref);
      }
      if (entry.stored && !entry.blob_ref) {
        throw Error(ErrorCode::kMalformedManifest,
                    entry.key.text() + " is stored but has no blob");
      }
      if (manifest.lookup(entry.key)) {
        throw Error(ErrorCode::kMalformedManifest,
                    "duplicate key " + entry.key.text());
      }
      manifest.upsert(std::move(entry));
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::kMalformedManifest, ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kMalformedManifest) throw;
    throw Error(ErrorCode::kMalformedManifest, ex.what());
  }
  return manifest;
}

void save_manifest(const StoreManifest& manifest, const fs::path& path) {
  write_file_atomic(path, manifest_to_json(manifest));
}

StoreManifest load_manifest(const fs::path& path) {
  return manifest_from_json(read_file(path));
}

}  // namespace pipestash
