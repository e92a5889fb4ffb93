#include "iov/crypto.hpp"

#include <memory>

#include <openssl/evp.h>

#include "iov/error.hpp"

namespace iov::crypto {

namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};

using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

void check(int ok, const char* what) {
  if (ok != 1) throw Error(std::string("openssl: ") + what);
}

}  // namespace

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  check(EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr), "sha256");
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> data) { return to_hex(sha256(data)); }

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw InputError("base64: length not a multiple of 4");
  Bytes out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw InputError("base64: malformed input");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock counts padding as zero bytes.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

SigningKey::SigningKey(std::span<const std::uint8_t, 32> seed) {
  std::copy(seed.begin(), seed.end(), seed_.begin());
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed_.data(), seed_.size()));
  if (!key) throw Error("openssl: ed25519 key");
  std::size_t len = public_key_.size();
  check(EVP_PKEY_get_raw_public_key(key.get(), public_key_.data(), &len), "ed25519 public key");
}

Bytes SigningKey::sign(std::span<const std::uint8_t> message) const {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed_.data(), seed_.size()));
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!key || !ctx) throw Error("openssl: ed25519 sign setup");
  check(EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()), "sign init");
  std::size_t len = 64;
  Bytes sig(len);
  check(EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()), "sign");
  sig.resize(len);
  return sig;
}

bool verify_signature(std::span<const std::uint8_t, 32> public_key,
                      std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature) {
  PkeyPtr key(
      EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(), public_key.size()));
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!key || !ctx) return false;
  if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

Bytes aes256gcm_seal(std::span<const std::uint8_t, 32> key,
                     std::span<const std::uint8_t, 12> nonce,
                     std::span<const std::uint8_t> plaintext) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error("openssl: cipher ctx");
  check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "gcm init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, 12, nullptr), "gcm ivlen");
  check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "gcm key");

  Bytes out(12 + plaintext.size() + 16);
  std::copy(nonce.begin(), nonce.end(), out.begin());
  int len = 0;
  check(EVP_EncryptUpdate(ctx.get(), out.data() + 12, &len, plaintext.data(),
                          static_cast<int>(plaintext.size())),
        "gcm update");
  int tail = 0;
  check(EVP_EncryptFinal_ex(ctx.get(), out.data() + 12 + len, &tail), "gcm final");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, out.data() + 12 + len + tail),
        "gcm tag");
  return out;
}

std::optional<Bytes> aes256gcm_open(std::span<const std::uint8_t, 32> key,
                                    std::span<const std::uint8_t> sealed) {
  if (sealed.size() < 12 + 16) return std::nullopt;
  const std::size_t body = sealed.size() - 12 - 16;
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error("openssl: cipher ctx");
  check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr), "gcm init");
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, 12, nullptr), "gcm ivlen");
  check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), sealed.data()), "gcm key");

  Bytes out(body + 16);
  int len = 0;
  if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data() + 12,
                        static_cast<int>(body)) != 1) {
    return std::nullopt;
  }
  Bytes tag(sealed.end() - 16, sealed.end());
  check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag.data()), "gcm set tag");
  int tail = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1) return std::nullopt;
  out.resize(static_cast<std::size_t>(len + tail));
  return out;
}

}  // namespace iov::crypto
