#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "iov/error.hpp"
#include "iov/rng.hpp"

namespace iov::kpabe {

/// Element of Z_p with p = 2^521 - 1 (a Mersenne prime).
class Scalar {
 public:
  static constexpr std::size_t kBytes = 66;

  Scalar() = default;
  Scalar(long v) : value_(v) { reduce(); }  // NOLINT(google-explicit-constructor)
  explicit Scalar(mpz_class v) : value_(std::move(v)) { reduce(); }

  static const mpz_class& modulus() {
    static const mpz_class p = (mpz_class(1) << 521) - 1;
    return p;
  }

  static Scalar random(Rng& rng) {
    std::array<std::uint64_t, 9> words{};  // 576 random bits
    for (auto& w : words) w = rng();
    mpz_class v;
    mpz_import(v.get_mpz_t(), words.size(), 1, sizeof(std::uint64_t), 0, 0, words.data());
    return Scalar(std::move(v));
  }

  static Scalar random_nonzero(Rng& rng) {
    Scalar s = random(rng);
    while (s.is_zero()) s = random(rng);
    return s;
  }

  bool is_zero() const { return value_ == 0; }
  const mpz_class& value() const { return value_; }

  Scalar inverse() const {
    if (is_zero()) throw InputError("inverse of zero");
    mpz_class out;
    mpz_invert(out.get_mpz_t(), value_.get_mpz_t(), modulus().get_mpz_t());
    return Scalar(std::move(out));
  }

  friend Scalar operator+(const Scalar& a, const Scalar& b) { return Scalar(a.value_ + b.value_); }
  friend Scalar operator-(const Scalar& a, const Scalar& b) { return Scalar(a.value_ - b.value_); }
  friend Scalar operator*(const Scalar& a, const Scalar& b) { return Scalar(a.value_ * b.value_); }
  friend Scalar operator/(const Scalar& a, const Scalar& b) { return a * b.inverse(); }
  Scalar operator-() const { return Scalar(-value_); }
  Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
  Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
  Scalar& operator*=(const Scalar& b) { return *this = *this * b; }
  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value_ == b.value_; }

  /// Fixed-width big-endian encoding.
  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out(kBytes, 0);
    std::size_t count = 0;
    mpz_export(out.data(), &count, 1, 1, 1, 0, value_.get_mpz_t());
    // right-align
    std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(count), out.end());
    return out;
  }

  /// Throws InputError when the encoding is not a canonical field element.
  static Scalar from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kBytes) throw InputError("scalar encoding must be 66 bytes");
    mpz_class v;
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    if (v >= modulus()) throw InputError("scalar encoding out of range");
    Scalar s;
    s.value_ = std::move(v);
    return s;
  }

  std::string to_string() const { return value_.get_str(); }

 private:
  void reduce() {
    value_ %= modulus();
    if (value_ < 0) value_ += modulus();
  }

  mpz_class value_ = 0;
};

}  // namespace iov::kpabe
