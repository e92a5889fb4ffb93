#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "iov/crypto.hpp"
#include "iov/error.hpp"

namespace iov::net {

/// Entry of an RSU's named-content directory.
struct DirectoryEntry {
  std::string name;
  /// Lower-case hex SHA-256 of the content bytes.
  std::string hash;
  std::uint64_t size_bytes = 0;
  /// Seconds since the Unix epoch.
  std::int64_t last_modified = 0;
  std::string content_class;

  bool operator==(const DirectoryEntry&) const = default;
};

/// Name -> entry map. Serializes to canonical key-sorted JSON, which is the
/// byte string the RSU signs.
class ContentDirectory {
 public:
  void put(DirectoryEntry entry);
  /// Adds an entry whose hash and size are computed from `content`.
  const DirectoryEntry& publish(const std::string& name, std::span<const std::uint8_t> content,
                                std::int64_t last_modified, const std::string& content_class);

  const DirectoryEntry* find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  /// True when `content` hashes to the entry recorded under `name`.
  bool matches(const std::string& name, std::span<const std::uint8_t> content) const;

  std::string serialize() const;
  static ContentDirectory parse(const std::string& json_text);

  crypto::Bytes sign(const crypto::SigningKey& key) const;
  bool verify(std::span<const std::uint8_t, 32> public_key,
              std::span<const std::uint8_t> signature) const;

  const std::map<std::string, DirectoryEntry>& entries() const { return entries_; }

 private:
  std::map<std::string, DirectoryEntry> entries_;
};

/// Thrown by cache operations on names absent from the directory.
class NotInDirectory : public Error {
 public:
  explicit NotInDirectory(const std::string& name)
      : Error("not in directory: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

/// Popularity-counted (LFU) content store of one RSU.
class ContentCache {
 public:
  struct AdmitResult {
    bool admitted = false;
    std::optional<std::string> evicted;
  };

  ContentCache(const ContentDirectory& directory, std::size_t capacity);

  /// Returns true on a hit. Every lookup bumps the entry's popularity.
  bool lookup(const std::string& name);
  /// Inserts under capacity; when full, evicts the least popular cached entry
  /// (ties to the lexicographically smallest name) if `name` is strictly more
  /// popular, otherwise leaves the cache unchanged.
  AdmitResult admit(const std::string& name);

  std::uint64_t popularity(const std::string& name) const;
  bool cached(const std::string& name) const { return cached_.count(name) != 0; }
  std::size_t size() const { return cached_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  void require_known(const std::string& name) const;

  const ContentDirectory* directory_;
  std::size_t capacity_;
  std::map<std::string, std::uint64_t> popularity_;
  std::set<std::string> cached_;
};

/// Named, integrity-tagged piece of a content object.
struct Chunk {
  std::string name;
  std::uint32_t index = 0;
  std::string hash;
  crypto::Bytes bytes;

  bool verify() const;
};

inline constexpr std::size_t kBytesPerMegabyte = 1'000'000;

/// Splits `bytes` into ceil(len / chunk_bytes) chunks; empty content yields a
/// single empty chunk. Throws InputError for chunk_bytes == 0.
std::vector<Chunk> chunk_content(const std::string& name, std::span<const std::uint8_t> bytes,
                                 std::size_t chunk_bytes = kBytesPerMegabyte);

/// Concatenates chunks in index order. Throws InputError on a hash mismatch,
/// a gap in the indices, or mixed names.
crypto::Bytes reassemble(std::vector<Chunk> chunks);

}  // namespace iov::net
