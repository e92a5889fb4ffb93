#pragma once

// Canonical JSON (key-sorted) for parameters, keys and ciphertexts. Group
// elements and scalars are base64 of their fixed-width byte encodings.

#include <string>

#include <nlohmann/json.hpp>

#include "iov/crypto.hpp"
#include "iov/kpabe/scheme.hpp"

namespace iov::kpabe::json {

using nlohmann::json;

inline std::string b64(const std::vector<std::uint8_t>& bytes) { return crypto::base64_encode(bytes); }
inline crypto::Bytes unb64(const json& j) { return crypto::base64_decode(j.get<std::string>()); }

inline json scalar_to_json(const Scalar& s) { return b64(s.to_bytes()); }
inline Scalar scalar_from_json(const json& j) { return Scalar::from_bytes(unb64(j)); }

template <BilinearGroup G>
json g1_list(const std::vector<typename G::G1>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(b64(G::to_bytes(x)));
  return out;
}

template <BilinearGroup G>
std::vector<typename G::G1> g1_list_from(const json& j) {
  std::vector<typename G::G1> out;
  for (const auto& x : j) out.push_back(G::g1_from_bytes(unb64(x)));
  return out;
}

inline json periods_to_json(const PeriodSet& periods) {
  json out = json::array();
  for (const auto& p : periods) out.push_back(p.to_string());
  return out;
}

inline PeriodSet periods_from_json(const json& j) {
  PeriodSet out;
  for (const auto& p : j) out.push_back(PeriodNode::parse(p.get<std::string>()));
  return out;
}

inline json access_to_json(const AccessStructure& a) {
  json rows = json::array();
  for (const auto& row : a.matrix) {
    json r = json::array();
    for (const auto& x : row) r.push_back(scalar_to_json(x));
    rows.push_back(std::move(r));
  }
  return {{"columns", a.columns}, {"matrix", rows}, {"rho", a.rho}};
}

inline AccessStructure access_from_json(const json& j) {
  AccessStructure a;
  a.columns = j.at("columns").get<std::size_t>();
  a.rho = j.at("rho").get<std::vector<std::string>>();
  for (const auto& row : j.at("matrix")) {
    std::vector<Scalar> r;
    for (const auto& x : row) r.push_back(scalar_from_json(x));
    a.matrix.push_back(std::move(r));
  }
  return a;
}

template <BilinearGroup G>
json to_json(const PublicParams<G>& pk) {
  return {{"attributes", pk.universe.names()},
          {"egg_alpha", b64(G::to_bytes(pk.egg_alpha))},
          {"g", b64(G::to_bytes(pk.g))},
          {"g_alpha", b64(G::to_bytes(pk.g_alpha))},
          {"g_alpha_sq", b64(G::to_bytes(pk.g_alpha_sq))},
          {"g_beta", b64(G::to_bytes(pk.g_beta))},
          {"g_beta_sq", b64(G::to_bytes(pk.g_beta_sq))},
          {"g_inv_alpha", b64(G::to_bytes(pk.g_inv_alpha))},
          {"h_beta", g1_list<G>(pk.h_beta)},
          {"tree", {{"first_year", pk.tree.first_year()}, {"years", pk.tree.years()}}},
          {"v", g1_list<G>(pk.v)}};
}

template <BilinearGroup G>
PublicParams<G> public_params_from_json(const json& j) {
  PublicParams<G> pk;
  auto g1 = [&](const char* k) { return G::g1_from_bytes(unb64(j.at(k))); };
  pk.universe = AttributeUniverse(j.at("attributes").get<std::vector<std::string>>());
  pk.tree = TimeTree(j.at("tree").at("first_year").get<int>(), j.at("tree").at("years").get<int>());
  pk.g = g1("g");
  pk.g_alpha = g1("g_alpha");
  pk.g_alpha_sq = g1("g_alpha_sq");
  pk.g_inv_alpha = g1("g_inv_alpha");
  pk.g_beta = g1("g_beta");
  pk.g_beta_sq = g1("g_beta_sq");
  pk.egg_alpha = G::gt_from_bytes(unb64(j.at("egg_alpha")));
  pk.h_beta = g1_list_from<G>(j.at("h_beta"));
  pk.v = g1_list_from<G>(j.at("v"));
  if (pk.h_beta.size() != pk.universe.size()) throw InputError("h_beta count != attribute count");
  if (pk.v.size() != TimeTree::kDepth + 1) throw InputError("V count must be depth + 1");
  return pk;
}

inline json to_json(const MasterKey& mk) {
  return {{"alpha", scalar_to_json(mk.alpha)}, {"beta", scalar_to_json(mk.beta)}};
}

inline MasterKey master_key_from_json(const json& j) {
  return {scalar_from_json(j.at("alpha")), scalar_from_json(j.at("beta"))};
}

template <BilinearGroup G>
json to_json(const PrivateKey<G>& sk) {
  json periods = json::array();
  for (const auto& pc : sk.period_keys) {
    periods.push_back({{"d", b64(G::to_bytes(pc.d))},
                       {"delegation", g1_list<G>(pc.delegation)},
                       {"node", pc.node.to_string()}});
  }
  json rows = json::array();
  for (const auto& r : sk.rows) {
    rows.push_back({{"d", b64(G::to_bytes(r.d))}, {"d_prime", b64(G::to_bytes(r.d_prime))}});
  }
  return {{"access", access_to_json(sk.access)},
          {"algebra", sk.variant.algebra == Algebra::Corrected ? "corrected" : "uncorrected"},
          {"d0", b64(G::to_bytes(sk.d0))},
          {"d0_prime", b64(G::to_bytes(sk.d0_prime))},
          {"id", scalar_to_json(sk.id)},
          {"period_keys", periods},
          {"periods", periods_to_json(sk.periods)},
          {"rows", rows},
          {"share_index", sk.variant.share_index == ShareIndex::PerRow ? "per-row" : "first-row"}};
}

template <BilinearGroup G>
PrivateKey<G> private_key_from_json(const json& j) {
  PrivateKey<G> sk;
  sk.variant.algebra =
      j.at("algebra").get<std::string>() == "corrected" ? Algebra::Corrected : Algebra::Uncorrected;
  sk.variant.share_index =
      j.at("share_index").get<std::string>() == "per-row" ? ShareIndex::PerRow : ShareIndex::FirstRow;
  sk.id = scalar_from_json(j.at("id"));
  sk.access = access_from_json(j.at("access"));
  sk.periods = periods_from_json(j.at("periods"));
  sk.d0 = G::gt_from_bytes(unb64(j.at("d0")));
  sk.d0_prime = G::g1_from_bytes(unb64(j.at("d0_prime")));
  for (const auto& pc : j.at("period_keys")) {
    sk.period_keys.push_back({PeriodNode::parse(pc.at("node").get<std::string>()),
                              G::g1_from_bytes(unb64(pc.at("d"))),
                              g1_list_from<G>(pc.at("delegation"))});
  }
  for (const auto& r : j.at("rows")) {
    sk.rows.push_back({G::g1_from_bytes(unb64(r.at("d"))), G::g1_from_bytes(unb64(r.at("d_prime")))});
  }
  return sk;
}

}  // namespace iov::kpabe::json
