#include "pipestash/store.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pipestash/error.hpp"
#include "support/oracle.hpp"

namespace pipestash {
namespace {

namespace fs = std::filesystem;
using testing::mods;

StoreKey key(const char* dataset, std::initializer_list<const char*> tokens) {
  return StoreKey{DatasetId(dataset), mods(tokens)};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kEmptyHistory;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pipestash-store-" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST(StoreKey, CanonicalText) {
  EXPECT_EQ(key("D1", {"P1", "P3"}).text(), "D1/P1-P3");
}

TEST(ContentRef, Sha256) {
  EXPECT_EQ(content_ref(""),
            "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(content_ref("abc"),
            "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(PutIntermediate, StoresAndLooksUp) {
  StoreManifest manifest;
  BlobStore blobs;
  const ManifestEntry& e = put_intermediate(manifest, blobs, key("D1", {"P1"}), "x", 1);
  EXPECT_TRUE(e.stored);
  EXPECT_EQ(e.blob_ref, content_ref("x"));
  EXPECT_EQ(e.created_seq, 1u);
  EXPECT_EQ(blobs.read(*e.blob_ref), "x");
  const ModuleSeq p1 = mods({"P1"});
  ASSERT_NE(lookup_intermediate(manifest, DatasetId("D1"), p1), nullptr);
}

TEST(PutIntermediate, IdempotentForSamePayload) {
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D1", {"P1"}), "x", 1);
  record_hit(manifest, key("D1", {"P1"}));
  const StoreManifest before = manifest;
  put_intermediate(manifest, blobs, key("D1", {"P1"}), "x", 9);
  EXPECT_EQ(manifest, before);
}

TEST(PutIntermediate, ConflictAndOverwrite) {
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D1", {"P1"}), "x", 1);
  record_hit(manifest, key("D1", {"P1"}));
  EXPECT_EQ(code_of([&] {
              put_intermediate(manifest, blobs, key("D1", {"P1"}), "y", 2);
            }),
            ErrorCode::kKeyConflict);
  const ManifestEntry& e =
      put_intermediate(manifest, blobs, key("D1", {"P1"}), "y", 2, true);
  EXPECT_EQ(e.blob_ref, content_ref("y"));
  EXPECT_EQ(e.hits, 1u);
}

TEST(PutIntermediate, TombstonedKeyAcceptsNewPayload) {
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D1", {"P1"}), "x", 1);
  manifest.tombstone(key("D1", {"P1"}));
  EXPECT_FALSE(manifest.lookup(key("D1", {"P1"}))->stored);
  EXPECT_TRUE(put_intermediate(manifest, blobs, key("D1", {"P1"}), "y", 3).stored);
}

TEST(Lookup, OrderSensitive) {
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D1", {"P1", "P3"}), "x", 1);
  const ModuleSeq reversed = mods({"P3", "P1"});
  const ModuleSeq shorter = mods({"P1"});
  EXPECT_EQ(lookup_intermediate(manifest, DatasetId("D1"), reversed), nullptr);
  EXPECT_EQ(lookup_intermediate(manifest, DatasetId("D1"), shorter), nullptr);
  EXPECT_EQ(lookup_intermediate(manifest, DatasetId("D2"), mods({"P1", "P3"})),
            nullptr);
}

TEST(Lookup, DashInTokenIsNotASeparator) {
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D1", {"A-B"}), "x", 1);
  put_intermediate(manifest, blobs, key("D1", {"A", "B"}), "y", 2);
  EXPECT_EQ(manifest.size(), 2u);
  EXPECT_EQ(manifest.lookup(key("D1", {"A-B"}))->blob_ref, content_ref("x"));
  EXPECT_EQ(manifest.lookup(key("D1", {"A", "B"}))->blob_ref, content_ref("y"));
  EXPECT_EQ(manifest_from_json(manifest_to_json(manifest)), manifest);
}

TEST(RecordHit, CountsAndRejectsMissing) {
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D1", {"P1"}), "x", 1);
  record_hit(manifest, key("D1", {"P1"}));
  EXPECT_EQ(record_hit(manifest, key("D1", {"P1"})).hits, 2u);
  EXPECT_EQ(code_of([&] { record_hit(manifest, key("D1", {"P9"})); }),
            ErrorCode::kMissingKey);
  EXPECT_EQ(code_of([&] { blobs.read(content_ref("nope")); }), ErrorCode::kMissingKey);
}

TEST(ManifestJson, RoundTripAndCanonical) {
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D2", {"P2"}), "b", 2);
  put_intermediate(manifest, blobs, key("D1", {"P1", "P3"}), "a", 1);
  manifest.upsert(ManifestEntry{key("D1", {"P9"}), std::nullopt, 4, 0, false});
  record_hit(manifest, key("D2", {"P2"}));
  const std::string text = manifest_to_json(manifest);
  EXPECT_EQ(manifest_from_json(text), manifest);
  EXPECT_EQ(manifest_to_json(manifest_from_json(text)), text);
  EXPECT_LT(text.find("\"D1\""), text.find("\"D2\""));
}

TEST(ManifestJson, Malformed) {
  for (const char* bad : {"", "{", "[]", "{\"entries\": 3}",
                          "{\"entries\": [{\"dataset\": \"D1\"}]}"}) {
    EXPECT_EQ(code_of([bad] { manifest_from_json(bad); }),
              ErrorCode::kMalformedManifest)
        << bad;
  }
}

TEST_F(TempDir, SaveLoadRoundTrip) {
  StoreManifest manifest;
  BlobStore blobs(dir_);
  put_intermediate(manifest, blobs, key("D1", {"P1"}), "payload", 1);
  EXPECT_TRUE(fs::exists(dir_ / "blobs"));
  const fs::path path = dir_ / "manifest.json";
  save_manifest(manifest, path);
  EXPECT_EQ(load_manifest(path), manifest);

  BlobStore reopened(dir_);
  const std::string ref = *manifest.lookup(key("D1", {"P1"}))->blob_ref;
  EXPECT_TRUE(reopened.contains(ref));
  EXPECT_EQ(reopened.read(ref), "payload");
}

TEST_F(TempDir, LoadFailures) {
  EXPECT_EQ(code_of([&] { load_manifest(dir_ / "absent.json"); }),
            ErrorCode::kIoFailure);
  StoreManifest manifest;
  BlobStore blobs;
  put_intermediate(manifest, blobs, key("D1", {"P1"}), "x", 1);
  const std::string text = manifest_to_json(manifest);
  const fs::path path = dir_ / "truncated.json";
  std::ofstream(path) << text.substr(0, text.size() / 2);
  EXPECT_EQ(code_of([&] { load_manifest(path); }), ErrorCode::kMalformedManifest);
}

// Content addressing: equal payloads share a ref, distinct payloads do not.
TEST(ContentRefProperty, RandomPayloads) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> byte(0, 255);
  BlobStore blobs;
  std::map<std::string, std::string> seen;
  for (int i = 0; i < 500; ++i) {
    std::string payload(rng() % 40, '\0');
    for (char& c : payload) c = static_cast<char>(byte(rng));
    const std::string ref = blobs.put(payload);
    EXPECT_EQ(ref, content_ref(payload));
    EXPECT_EQ(blobs.read(ref), payload);
    auto [it, inserted] = seen.emplace(ref, payload);
    if (!inserted) EXPECT_EQ(it->second, payload);
  }
}

}  // namespace
}  // namespace pipestash
