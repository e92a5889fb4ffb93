#pragma once

// Time-sensitive key-policy ABE over an abstract bilinear group.
//
// Keys carry an LSSS policy and a set-cover of validity periods; ciphertexts
// carry an attribute set and the periods in which they may be opened.
// Two algebra variants are available (see docs/kpabe-algebra.md):
//
//   Algebra::Corrected     round-trips; used by default.
//   Algebra::Uncorrected   the construction without the corrections.
//                          Kept for comparison; it does not cancel.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "iov/error.hpp"
#include "iov/kpabe/field.hpp"
#include "iov/kpabe/group.hpp"
#include "iov/kpabe/lsss.hpp"
#include "iov/kpabe/time_tree.hpp"
#include "iov/rng.hpp"

namespace iov::kpabe {

class InvalidIdentity : public Error {
 public:
  using Error::Error;
};

enum class Algebra : std::uint8_t { Corrected, Uncorrected };

/// Which share is raised in the per-row key component D_i'.
enum class ShareIndex : std::uint8_t { PerRow, FirstRow };

struct Variant {
  Algebra algebra = Algebra::Corrected;
  ShareIndex share_index = ShareIndex::PerRow;

  bool operator==(const Variant&) const = default;
};

template <BilinearGroup G>
struct PublicParams {
  using G1 = typename G::G1;
  using GT = typename G::GT;

  G1 g;
  G1 g_alpha;
  G1 g_alpha_sq;
  G1 g_inv_alpha;
  G1 g_beta;
  G1 g_beta_sq;
  GT egg_alpha;
  /// h_1^beta .. h_U^beta
  std::vector<G1> h_beta;
  /// V_0 .. V_T
  std::vector<G1> v;
  AttributeUniverse universe;
  TimeTree tree;
};

/// Scheme scalars; unrelated to the market's reward/budget coefficients.
struct MasterKey {
  Scalar alpha;
  Scalar beta;
};

template <BilinearGroup G>
struct PrivateKey {
  using G1 = typename G::G1;
  using GT = typename G::GT;

  struct PeriodComponent {
    PeriodNode node;
    /// (V_0 prod_j V_j^{tau_j})^w
    G1 d;
    /// V_j^w for the levels below `node`, used to derive descendant keys.
    std::vector<G1> delegation;
  };
  struct Row {
    G1 d;        // g^{beta lambda_i}
    G1 d_prime;  // per-row identity-bound component
  };

  Variant variant;
  Scalar id;
  AccessStructure access;
  PeriodSet periods;
  GT d0;
  G1 d0_prime;
  std::vector<PeriodComponent> period_keys;
  std::vector<Row> rows;
};

template <BilinearGroup G>
struct Ciphertext {
  using G1 = typename G::G1;
  using GT = typename G::GT;

  struct PeriodComponent {
    PeriodNode node;
    G1 c0;  // g^{v_tau}
    G1 c1;  // g^{alpha x} g^{beta^2} (V_0 prod V_j^{tau'_j})^{v_tau}
  };

  GT c0;
  G1 c0_prime;
  std::vector<PeriodComponent> period_parts;
  /// Carried in the clear.
  PeriodSet periods;
  AttributeSet attributes;
};

enum class DecryptStatus : std::uint8_t { Ok, AttributeMismatch, TimeMismatch };

/// Decryption result; `message` is set only when status == Ok.
template <BilinearGroup G>
struct DecryptOutcome {
  DecryptStatus status = DecryptStatus::Ok;
  std::optional<typename G::GT> message;

  bool ok() const { return status == DecryptStatus::Ok; }
};

namespace detail {

/// V_0 prod_{j=1..k} V_j^{tau_j}
template <BilinearGroup G>
typename G::G1 time_base(const PublicParams<G>& pk, const PeriodNode& node) {
  const auto idx = pk.tree.child_indices(node);
  typename G::G1 acc = pk.v.at(0);
  for (std::size_t j = 0; j < idx.size(); ++j) acc = G::mul(acc, G::pow(pk.v.at(j + 1), Scalar(idx[j])));
  return acc;
}

template <BilinearGroup G>
typename G::G1 g1_product(const std::vector<typename G::G1>& xs, typename G::G1 seed) {
  for (const auto& x : xs) seed = G::mul(seed, x);
  return seed;
}

}  // namespace detail

/// Setup(U, T). `attributes` declares the universe; U = attributes.size().
template <BilinearGroup G>
std::pair<PublicParams<G>, MasterKey> setup(const std::vector<std::string>& attributes,
                                            const TimeTree& tree, Rng& rng) {
  if (attributes.empty()) throw InputError("setup needs at least one attribute");
  MasterKey mk{Scalar::random_nonzero(rng), Scalar::random_nonzero(rng)};
  PublicParams<G> pk;
  pk.universe = AttributeUniverse(attributes);
  pk.tree = tree;
  pk.g = G::generator();
  pk.g_alpha = G::pow(pk.g, mk.alpha);
  pk.g_alpha_sq = G::pow(pk.g, mk.alpha * mk.alpha);
  pk.g_inv_alpha = G::pow(pk.g, mk.alpha.inverse());
  pk.g_beta = G::pow(pk.g, mk.beta);
  pk.g_beta_sq = G::pow(pk.g, mk.beta * mk.beta);
  pk.egg_alpha = G::gt_pow(G::pair(pk.g, pk.g), mk.alpha);
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    pk.h_beta.push_back(G::pow(G::random_g1(rng), mk.beta));
  }
  for (int j = 0; j <= TimeTree::kDepth; ++j) pk.v.push_back(G::random_g1(rng));
  return {std::move(pk), mk};
}

/// Fresh non-zero pseudo-identity; drawn once per key issued.
inline Scalar fresh_identity(Rng& rng) { return Scalar::random_nonzero(rng); }

/// KeyGen(MK, ID, T, A).
template <BilinearGroup G>
PrivateKey<G> keygen(const PublicParams<G>& pk, const MasterKey& mk, const Scalar& id,
                     const PeriodSet& periods, const AccessStructure& access, Rng& rng,
                     Variant variant = {}) {
  if (id.is_zero()) throw InvalidIdentity("pseudo-identity must be non-zero");
  if (access.rows() == 0 || access.columns == 0) throw InputError("empty access structure");
  if (!is_antichain(periods)) throw InputError("key periods must form an antichain");
  for (const auto& a : access.rho) pk.universe.index_of(a);
  for (const auto& node : periods) pk.tree.validate(node);

  std::vector<Scalar> mask;
  mask.reserve(access.columns);
  for (std::size_t j = 0; j < access.columns; ++j) mask.push_back(Scalar::random(rng));
  const Scalar& w = mask[0];
  const auto shares = share_secret(access, mask);

  PrivateKey<G> sk;
  sk.variant = variant;
  sk.id = id;
  sk.access = access;
  sk.periods = periods;
  sk.d0 = G::gt_pow(G::pair(pk.g, pk.g), mk.alpha * w);
  sk.d0_prime = G::pow(pk.g, w / mk.alpha);
  for (const auto& node : periods) {
    typename PrivateKey<G>::PeriodComponent pc;
    pc.node = node;
    pc.d = G::pow(detail::time_base(pk, node), w);
    for (std::size_t j = node.level() + 1; j < TimeTree::kDepth; ++j) {
      pc.delegation.push_back(G::pow(pk.v.at(j), w));
    }
    sk.period_keys.push_back(std::move(pc));
  }
  for (std::size_t i = 0; i < access.rows(); ++i) {
    typename PrivateKey<G>::Row row;
    row.d = G::pow(pk.g, mk.beta * shares[i]);
    if (variant.algebra == Algebra::Corrected) {
      row.d_prime = G::pow(pk.g, shares[i] * id);
    } else {
      const Scalar& lambda = variant.share_index == ShareIndex::PerRow ? shares[i] : shares[0];
      const auto& h_beta = pk.h_beta.at(pk.universe.index_of(access.rho[i]));
      row.d_prime = G::pow(G::mul(pk.g, h_beta), lambda * id);
    }
    sk.rows.push_back(row);
  }
  return sk;
}

/// Encrypt(PK, M, T_c, S).
template <BilinearGroup G>
Ciphertext<G> encrypt(const PublicParams<G>& pk, const typename G::GT& message,
                      const PeriodSet& periods, const AttributeSet& attributes, Rng& rng) {
  for (const auto& a : attributes) {
    if (!pk.universe.contains(a)) throw UnknownAttribute(a);
  }
  if (periods.empty()) throw InputError("ciphertext needs at least one validity period");
  for (const auto& node : periods) pk.tree.validate(node);

  const Scalar x = Scalar::random(rng);
  Ciphertext<G> ct;
  ct.periods = periods;
  ct.attributes = attributes;
  ct.c0 = G::gt_mul(message, G::gt_pow(pk.egg_alpha, x));
  ct.c0_prime = G::pow(pk.g_alpha_sq, x);
  const auto g_alpha_x = G::pow(pk.g_alpha, x);
  for (const auto& node : periods) {
    const Scalar v_tau = Scalar::random(rng);
    typename Ciphertext<G>::PeriodComponent part;
    part.node = node;
    part.c0 = G::pow(pk.g, v_tau);
    part.c1 = G::mul(G::mul(g_alpha_x, pk.g_beta_sq), G::pow(detail::time_base(pk, node), v_tau));
    ct.period_parts.push_back(std::move(part));
  }
  return ct;
}

/// Decrypt(CT, SK). Attribute and validity checks run first and return a
/// typed failure without touching the group elements.
template <BilinearGroup G>
DecryptOutcome<G> decrypt(const PublicParams<G>& pk, const Ciphertext<G>& ct,
                          const PrivateKey<G>& sk) {
  using G1 = typename G::G1;
  using GT = typename G::GT;

  const auto omega = lsss_satisfy(sk.access, ct.attributes);
  if (!omega) return {DecryptStatus::AttributeMismatch, std::nullopt};
  // Use the first ciphertext node that lies under one of the key's nodes.
  const typename Ciphertext<G>::PeriodComponent* target_ptr = nullptr;
  auto key_it = sk.period_keys.end();
  for (const auto& part : ct.period_parts) {
    key_it = std::find_if(sk.period_keys.begin(), sk.period_keys.end(),
                          [&](const auto& pc) { return pc.node.is_prefix_of(part.node); });
    if (key_it != sk.period_keys.end()) {
      target_ptr = &part;
      break;
    }
  }
  if (!target_ptr) return {DecryptStatus::TimeMismatch, std::nullopt};
  const auto& target = *target_ptr;

  G1 d_time = key_it->d;
  if (sk.variant.algebra == Algebra::Corrected) {
    // Delegate the key node down to the ciphertext node.
    const auto idx = pk.tree.child_indices(target.node);
    for (std::size_t level = key_it->node.level(); level < target.node.level(); ++level) {
      const auto& step = key_it->delegation.at(level - key_it->node.level());
      d_time = G::mul(d_time, G::pow(step, Scalar(idx[level])));
    }
  }

  const Scalar id_inv = sk.id.inverse();
  GT numerator = G::gt_mul(ct.c0, G::gt_mul(G::pair(d_time, target.c0),
                                            G::pair(ct.c0_prime, sk.d0_prime)));
  GT denominator = G::pair(ct.c0_prime, pk.g_inv_alpha);
  for (std::size_t i = 0; i < sk.rows.size(); ++i) {
    const Scalar& w_i = (*omega)[i];
    if (w_i.is_zero()) continue;
    G1 k;
    if (sk.variant.algebra == Algebra::Corrected) {
      k = G::inverse(pk.g_beta);
    } else {
      const auto& h_beta = pk.h_beta.at(pk.universe.index_of(sk.access.rho[i]));
      k = G::inverse(G::mul(pk.g_beta, h_beta));
    }
    const GT attr = G::pair(target.c1, G::pow(sk.rows[i].d_prime, w_i * id_inv));
    const GT blind = G::gt_pow(G::pair(sk.rows[i].d, k), w_i);
    denominator = G::gt_mul(denominator, G::gt_mul(attr, blind));
  }
  return {DecryptStatus::Ok, G::gt_div(numerator, denominator)};
}

}  // namespace iov::kpabe
