#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iov::crypto {

using Bytes = std::vector<std::uint8_t>;

inline std::span<const std::uint8_t> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data);
/// Lower-case hex of the SHA-256 digest (64 characters).
std::string sha256_hex(std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> data);
std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws iov::InputError on malformed input.
Bytes base64_decode(std::string_view text);

/// Ed25519 signing key pair; 32-byte public key, 64-byte signatures.
class SigningKey {
 public:
  /// Derives a key pair from a 32-byte seed.
  explicit SigningKey(std::span<const std::uint8_t, 32> seed);

  const std::array<std::uint8_t, 32>& public_key() const { return public_key_; }
  Bytes sign(std::span<const std::uint8_t> message) const;

 private:
  std::array<std::uint8_t, 32> seed_{};
  std::array<std::uint8_t, 32> public_key_{};
};

bool verify_signature(std::span<const std::uint8_t, 32> public_key,
                      std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature);

/// AES-256-GCM. Output layout: 12-byte nonce | ciphertext | 16-byte tag.
Bytes aes256gcm_seal(std::span<const std::uint8_t, 32> key,
                     std::span<const std::uint8_t, 12> nonce,
                     std::span<const std::uint8_t> plaintext);
/// nullopt when the body is truncated or authentication fails.
std::optional<Bytes> aes256gcm_open(std::span<const std::uint8_t, 32> key,
                                    std::span<const std::uint8_t> sealed);

}  // namespace iov::crypto
