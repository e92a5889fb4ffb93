#pragma once

// Hybrid content protection: the content is sealed under a fresh AES-256-GCM
// key and the key travels as a KP-ABE ciphertext in a trailer.
//
// Sealed file layout (all integers little-endian):
//
//   body     nonce[12] | AES-GCM ciphertext | tag[16]
//   trailer  magic "IOVKPABE" | u8 version (=1)
//            | u32 ct_len | ct_bytes[ct_len]
//            | u16 attr_count | { u16 len | utf8[len] } * attr_count
//            | u16 period_count | { u8 depth | u16 component * depth } * period_count
//   footer   u32 trailer_len
//
// ct_bytes is the element sequence C_0 | C_0' | { C_{0,tau} | C_{1,tau} } in
// trailer period order, each element as u16 len | bytes.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "iov/crypto.hpp"
#include "iov/kpabe/scheme.hpp"

namespace iov::kpabe {

class MalformedSealedFile : public Error {
 public:
  using Error::Error;
};

inline constexpr std::array<std::uint8_t, 8> kSealMagic = {'I', 'O', 'V', 'K', 'P', 'A', 'B', 'E'};
inline constexpr std::uint8_t kSealVersion = 1;

enum class OpenStatus : std::uint8_t { Ok, AttributeMismatch, TimeMismatch, AuthenticationFailed };

struct OpenOutcome {
  OpenStatus status = OpenStatus::Ok;
  crypto::Bytes content;

  bool ok() const { return status == OpenStatus::Ok; }
};

namespace wire {

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void raw(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void blob16(std::span<const std::uint8_t> b) {
    if (b.size() > 0xffff) throw InputError("field too long for u16 length prefix");
    u16(static_cast<std::uint16_t>(b.size()));
    raw(b);
  }
  crypto::Bytes take() { return std::move(out_); }

 private:
  crypto::Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint16_t u16() {
    auto b = need(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    auto b = need(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }
  std::span<const std::uint8_t> raw(std::size_t n) { return need(n); }
  std::span<const std::uint8_t> blob16() { return need(u16()); }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> need(std::size_t n) {
    if (in_.size() - pos_ < n) throw MalformedSealedFile("truncated sealed file");
    auto out = in_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace wire

template <BilinearGroup G>
crypto::Bytes serialize_ciphertext_elements(const Ciphertext<G>& ct) {
  wire::Writer w;
  w.blob16(G::to_bytes(ct.c0));
  w.blob16(G::to_bytes(ct.c0_prime));
  for (const auto& part : ct.period_parts) {
    w.blob16(G::to_bytes(part.c0));
    w.blob16(G::to_bytes(part.c1));
  }
  return w.take();
}

/// Encrypts `content` under a fresh AES key and appends the KP-ABE trailer.
template <BilinearGroup G>
crypto::Bytes hybrid_seal(std::span<const std::uint8_t> content, const PublicParams<G>& pk,
                          const PeriodSet& periods, const AttributeSet& attributes, Rng& rng) {
  if (content.empty()) throw InputError("refusing to seal empty content");
  std::array<std::uint8_t, 32> key{};
  std::array<std::uint8_t, 12> nonce{};
  for (auto& b : key) b = static_cast<std::uint8_t>(rng());
  for (auto& b : nonce) b = static_cast<std::uint8_t>(rng());

  const auto ct = encrypt<G>(pk, G::encode_message(key), periods, attributes, rng);
  crypto::Bytes out = crypto::aes256gcm_seal(key, nonce, content);

  wire::Writer t;
  t.raw(kSealMagic);
  t.u8(kSealVersion);
  const auto elements = serialize_ciphertext_elements(ct);
  t.u32(static_cast<std::uint32_t>(elements.size()));
  t.raw(elements);
  t.u16(static_cast<std::uint16_t>(attributes.size()));
  for (const auto& a : attributes) t.blob16(crypto::as_bytes(a));
  t.u16(static_cast<std::uint16_t>(periods.size()));
  for (const auto& node : periods) {
    t.u8(static_cast<std::uint8_t>(node.path.size()));
    for (int c : node.path) t.u16(static_cast<std::uint16_t>(c));
  }
  const auto trailer = t.take();
  out.insert(out.end(), trailer.begin(), trailer.end());
  wire::Writer footer;
  footer.u32(static_cast<std::uint32_t>(trailer.size()));
  const auto f = footer.take();
  out.insert(out.end(), f.begin(), f.end());
  return out;
}

/// Splits a sealed file into its AES body and parsed ciphertext.
template <BilinearGroup G>
std::pair<std::span<const std::uint8_t>, Ciphertext<G>> parse_sealed(
    std::span<const std::uint8_t> sealed) {
  if (sealed.size() < 4) throw MalformedSealedFile("sealed file too short");
  wire::Reader footer(sealed.subspan(sealed.size() - 4));
  const std::uint32_t trailer_len = footer.u32();
  if (trailer_len > sealed.size() - 4) throw MalformedSealedFile("trailer length exceeds file");
  const std::size_t body_len = sealed.size() - 4 - trailer_len;
  wire::Reader r(sealed.subspan(body_len, trailer_len));

  const auto magic = r.raw(kSealMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kSealMagic.begin())) {
    throw MalformedSealedFile("bad magic");
  }
  if (r.u8() != kSealVersion) throw MalformedSealedFile("unsupported version");
  const auto elements = r.raw(r.u32());

  Ciphertext<G> ct;
  const std::uint16_t attr_count = r.u16();
  for (std::uint16_t i = 0; i < attr_count; ++i) {
    const auto b = r.blob16();
    ct.attributes.emplace(b.begin(), b.end());
  }
  const std::uint16_t period_count = r.u16();
  for (std::uint16_t i = 0; i < period_count; ++i) {
    PeriodNode node;
    const std::uint8_t depth = r.u8();
    if (depth > 3) throw MalformedSealedFile("period deeper than the time tree");
    for (std::uint8_t j = 0; j < depth; ++j) node.path.push_back(r.u16());
    ct.periods.push_back(std::move(node));
  }
  if (!r.done()) throw MalformedSealedFile("trailing bytes in trailer");

  try {
    wire::Reader e(elements);
    ct.c0 = G::gt_from_bytes(e.blob16());
    ct.c0_prime = G::g1_from_bytes(e.blob16());
    for (const auto& node : ct.periods) {
      typename Ciphertext<G>::PeriodComponent part;
      part.node = node;
      part.c0 = G::g1_from_bytes(e.blob16());
      part.c1 = G::g1_from_bytes(e.blob16());
      ct.period_parts.push_back(std::move(part));
    }
    if (!e.done()) throw MalformedSealedFile("trailing bytes in ciphertext");
  } catch (const MalformedSealedFile&) {
    throw;
  } catch (const Error& err) {
    throw MalformedSealedFile(std::string("bad group element: ") + err.what());
  }
  return {sealed.subspan(0, body_len), std::move(ct)};
}

/// Recovers the content. KP-ABE failures are reported before the AES body is
/// touched; a tampered body reports AuthenticationFailed.
template <BilinearGroup G>
OpenOutcome hybrid_open(std::span<const std::uint8_t> sealed, const PublicParams<G>& pk,
                        const PrivateKey<G>& sk) {
  auto [body, ct] = parse_sealed<G>(sealed);
  const auto dec = decrypt<G>(pk, ct, sk);
  if (dec.status == DecryptStatus::AttributeMismatch) return {OpenStatus::AttributeMismatch, {}};
  if (dec.status == DecryptStatus::TimeMismatch) return {OpenStatus::TimeMismatch, {}};
  const auto key = G::decode_message(*dec.message);
  if (!key) return {OpenStatus::AuthenticationFailed, {}};
  auto plain = crypto::aes256gcm_open(*key, body);
  if (!plain) return {OpenStatus::AuthenticationFailed, {}};
  return {OpenStatus::Ok, std::move(*plain)};
}

}  // namespace iov::kpabe
