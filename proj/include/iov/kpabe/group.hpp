#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iov/kpabe/field.hpp"
#include "iov/rng.hpp"

namespace iov::kpabe {

/// Operations the KP-ABE algorithms need from a symmetric pairing group
/// e : G1 x G1 -> GT of prime order. A production curve backend models this
/// concept alongside SymbolicGroup.
template <class G>
concept BilinearGroup = requires(const typename G::G1& a, const typename G::GT& t,
                                 const Scalar& s, Rng& rng,
                                 std::span<const std::uint8_t> bytes,
                                 std::span<const std::uint8_t, 32> message) {
  { G::generator() } -> std::same_as<typename G::G1>;
  { G::random_g1(rng) } -> std::same_as<typename G::G1>;
  { G::mul(a, a) } -> std::same_as<typename G::G1>;
  { G::pow(a, s) } -> std::same_as<typename G::G1>;
  { G::inverse(a) } -> std::same_as<typename G::G1>;
  { G::pair(a, a) } -> std::same_as<typename G::GT>;
  { G::gt_mul(t, t) } -> std::same_as<typename G::GT>;
  { G::gt_div(t, t) } -> std::same_as<typename G::GT>;
  { G::gt_pow(t, s) } -> std::same_as<typename G::GT>;
  { G::encode_message(message) } -> std::same_as<typename G::GT>;
  { G::decode_message(t) } -> std::same_as<std::optional<std::array<std::uint8_t, 32>>>;
  { G::to_bytes(a) } -> std::same_as<std::vector<std::uint8_t>>;
  { G::to_bytes(t) } -> std::same_as<std::vector<std::uint8_t>>;
  { G::g1_from_bytes(bytes) } -> std::same_as<typename G::G1>;
  { G::gt_from_bytes(bytes) } -> std::same_as<typename G::GT>;
  { a == a } -> std::convertible_to<bool>;
  { t == t } -> std::convertible_to<bool>;
};

/// Exponent-tracking backend: every element is stored as its discrete log
/// (G1 w.r.t. g, GT w.r.t. e(g, g)). Group laws become field arithmetic, so
/// the scheme's algebra can be checked exactly without curve arithmetic.
/// Offers no secrecy whatsoever.
struct SymbolicGroup {
  struct G1 {
    Scalar log;
    friend bool operator==(const G1& a, const G1& b) { return a.log == b.log; }
  };
  struct GT {
    Scalar log;
    friend bool operator==(const GT& a, const GT& b) { return a.log == b.log; }
  };

  static G1 generator() { return {Scalar(1)}; }
  static G1 random_g1(Rng& rng) { return {Scalar::random_nonzero(rng)}; }
  static G1 mul(const G1& a, const G1& b) { return {a.log + b.log}; }
  static G1 pow(const G1& a, const Scalar& s) { return {a.log * s}; }
  static G1 inverse(const G1& a) { return {-a.log}; }
  static GT pair(const G1& a, const G1& b) { return {a.log * b.log}; }
  static GT gt_mul(const GT& a, const GT& b) { return {a.log + b.log}; }
  static GT gt_div(const GT& a, const GT& b) { return {a.log - b.log}; }
  static GT gt_pow(const GT& a, const Scalar& s) { return {a.log * s}; }

  /// Maps a 256-bit message to the GT element whose exponent is the message
  /// read as a big-endian integer.
  static GT encode_message(std::span<const std::uint8_t, 32> message) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), message.size(), 1, 1, 1, 0, message.data());
    return {Scalar(std::move(v))};
  }

  /// Inverse of encode_message; nullopt for elements outside its image.
  static std::optional<std::array<std::uint8_t, 32>> decode_message(const GT& t) {
    const mpz_class& v = t.log.value();
    if (mpz_sizeinbase(v.get_mpz_t(), 2) > 256) return std::nullopt;
    std::array<std::uint8_t, 32> out{};
    auto bytes = t.log.to_bytes();
    std::copy(bytes.end() - 32, bytes.end(), out.begin());
    return out;
  }

  static std::vector<std::uint8_t> to_bytes(const G1& a) { return a.log.to_bytes(); }
  static std::vector<std::uint8_t> to_bytes(const GT& t) { return t.log.to_bytes(); }
  static G1 g1_from_bytes(std::span<const std::uint8_t> b) { return {Scalar::from_bytes(b)}; }
  static GT gt_from_bytes(std::span<const std::uint8_t> b) { return {Scalar::from_bytes(b)}; }
};

static_assert(BilinearGroup<SymbolicGroup>);

}  // namespace iov::kpabe
