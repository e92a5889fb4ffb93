#include "iov/content.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "iov/error.hpp"

namespace iov::net {

void ContentDirectory::put(DirectoryEntry entry) {
  auto name = entry.name;
  entries_[name] = std::move(entry);
}

const DirectoryEntry& ContentDirectory::publish(const std::string& name,
                                                std::span<const std::uint8_t> content,
                                                std::int64_t last_modified,
                                                const std::string& content_class) {
  DirectoryEntry e{name, crypto::sha256_hex(content), content.size(), last_modified,
                   content_class};
  entries_[name] = std::move(e);
  return entries_.at(name);
}

const DirectoryEntry* ContentDirectory::find(const std::string& name) const {
  auto it = entries_.find(name);
  return it == entries_.end() ? nullptr : &it->second;
}

bool ContentDirectory::matches(const std::string& name,
                               std::span<const std::uint8_t> content) const {
  const auto* e = find(name);
  return e && e->size_bytes == content.size() && e->hash == crypto::sha256_hex(content);
}

std::string ContentDirectory::serialize() const {
  // nlohmann::json objects are std::map backed, so keys come out sorted.
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, e] : entries_) {
    j[name] = {{"class", e.content_class},
               {"hash", e.hash},
               {"last_modified", e.last_modified},
               {"size", e.size_bytes}};
  }
  return j.dump();
}

ContentDirectory ContentDirectory::parse(const std::string& json_text) {
  ContentDirectory dir;
  const auto j = nlohmann::json::parse(json_text);
  for (const auto& [name, e] : j.items()) {
    dir.put({name, e.at("hash").get<std::string>(), e.at("size").get<std::uint64_t>(),
             e.at("last_modified").get<std::int64_t>(), e.at("class").get<std::string>()});
  }
  return dir;
}

crypto::Bytes ContentDirectory::sign(const crypto::SigningKey& key) const {
  return key.sign(crypto::as_bytes(serialize()));
}

bool ContentDirectory::verify(std::span<const std::uint8_t, 32> public_key,
                              std::span<const std::uint8_t> signature) const {
  return crypto::verify_signature(public_key, crypto::as_bytes(serialize()), signature);
}

ContentCache::ContentCache(const ContentDirectory& directory, std::size_t capacity)
    : directory_(&directory), capacity_(capacity) {}

void ContentCache::require_known(const std::string& name) const {
  if (!directory_->contains(name)) throw NotInDirectory(name);
}

bool ContentCache::lookup(const std::string& name) {
  require_known(name);
  ++popularity_[name];
  return cached(name);
}

ContentCache::AdmitResult ContentCache::admit(const std::string& name) {
  require_known(name);
  AdmitResult result;
  if (cached(name)) {
    result.admitted = true;
    return result;
  }
  if (capacity_ == 0) return result;
  if (cached_.size() < capacity_) {
    cached_.insert(name);
    result.admitted = true;
    return result;
  }
  // std::set iterates names ascending, so min_element keeps the smallest name on ties.
  auto victim = std::min_element(cached_.begin(), cached_.end(),
                                 [&](const std::string& a, const std::string& b) {
                                   return popularity(a) < popularity(b);
                                 });
  if (popularity(name) <= popularity(*victim)) return result;
  result.evicted = *victim;
  cached_.erase(victim);
  cached_.insert(name);
  result.admitted = true;
  return result;
}

std::uint64_t ContentCache::popularity(const std::string& name) const {
  auto it = popularity_.find(name);
  return it == popularity_.end() ? 0 : it->second;
}

bool Chunk::verify() const { return crypto::sha256_hex(bytes) == hash; }

std::vector<Chunk> chunk_content(const std::string& name, std::span<const std::uint8_t> bytes,
                                 std::size_t chunk_bytes) {
  if (chunk_bytes == 0) throw InputError("chunk size must be positive");
  std::vector<Chunk> chunks;
  const std::size_t count = bytes.empty() ? 1 : (bytes.size() + chunk_bytes - 1) / chunk_bytes;
  chunks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t begin = i * chunk_bytes;
    const std::size_t end = std::min(bytes.size(), begin + chunk_bytes);
    Chunk c;
    c.name = name;
    c.index = static_cast<std::uint32_t>(i);
    c.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(std::min(begin, bytes.size())),
                   bytes.begin() + static_cast<std::ptrdiff_t>(end));
    c.hash = crypto::sha256_hex(c.bytes);
    chunks.push_back(std::move(c));
  }
  return chunks;
}

crypto::Bytes reassemble(std::vector<Chunk> chunks) {
  std::sort(chunks.begin(), chunks.end(),
            [](const Chunk& a, const Chunk& b) { return a.index < b.index; });
  crypto::Bytes out;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const Chunk& c = chunks[i];
    if (c.index != i) throw InputError("missing chunk " + std::to_string(i));
    if (c.name != chunks.front().name) throw InputError("chunk belongs to " + c.name);
    if (!c.verify()) throw InputError("hash mismatch in chunk " + std::to_string(i));
    out.insert(out.end(), c.bytes.begin(), c.bytes.end());
  }
  return out;
}

}  // namespace iov::net
