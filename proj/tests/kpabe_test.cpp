#include <gtest/gtest.h>

#include "iov/kpabe/hybrid.hpp"
#include "iov/kpabe/scheme.hpp"
#include "iov/kpabe/serialize.hpp"

namespace iov::kpabe {
namespace {

using G = SymbolicGroup;

const std::vector<std::string> kAttributes{"subscriber", "premium", "maps", "video"};

PeriodSet cover(const TimeTree& tree, const char* a, const char* b) {
  return tree.set_cover(Date::parse(a), Date::parse(b));
}

G::GT random_message(Rng& rng) { return G::gt_pow(G::pair(G::generator(), G::generator()), Scalar::random(rng)); }

struct Fixture {
  TimeTree tree;
  Rng rng{42};
  PublicParams<G> pk;
  MasterKey mk;

  Fixture() { std::tie(pk, mk) = setup<G>(kAttributes, tree, rng); }

  PrivateKey<G> key(const char* formula, const PeriodSet& periods, Variant v = {}) {
    return keygen<G>(pk, mk, fresh_identity(rng), periods, formula_to_lsss(formula, &pk.universe), rng, v);
  }
};

TEST(Setup, ElementCounts) {
  Rng rng(1);
  const auto [pk, mk] = setup<G>({"A", "B", "C"}, TimeTree{}, rng);
  EXPECT_EQ(pk.h_beta.size(), 3u);
  EXPECT_EQ(pk.v.size(), 5u);
}

TEST(Setup, Bilinearity) {
  Rng rng(2);
  const auto [pk, mk] = setup<G>({"A"}, TimeTree{}, rng);
  EXPECT_EQ(G::pair(pk.g_alpha, pk.g), pk.egg_alpha);
  EXPECT_EQ(G::pair(pk.g_alpha, pk.g), G::gt_pow(G::pair(pk.g, pk.g), mk.alpha));
  const Scalar a = Scalar::random(rng), b = Scalar::random(rng);
  EXPECT_EQ(G::pair(G::pow(pk.g, a), G::pow(pk.g, b)), G::gt_pow(G::pair(pk.g, pk.g), a * b));
}

TEST(Setup, SeedsGiveDistinctSecrets) {
  Rng r1(1), r2(2);
  EXPECT_NE(setup<G>({"A"}, TimeTree{}, r1).second.alpha, setup<G>({"A"}, TimeTree{}, r2).second.alpha);
  EXPECT_THROW(setup<G>({}, TimeTree{}, r1), InputError);
}

TEST(Message, EncodeDecodeRoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::array<std::uint8_t, 32> m{};
    for (auto& b : m) b = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(G::decode_message(G::encode_message(m)), m);
  }
}

TEST(Keygen, OneComponentPerPeriodNode) {
  Fixture f;
  const auto periods = cover(f.tree, "2022-07-01", "2022-09-02");
  ASSERT_EQ(periods.size(), 4u);
  const auto sk = f.key("subscriber AND maps", periods);
  EXPECT_EQ(sk.period_keys.size(), 4u);
  EXPECT_EQ(sk.rows.size(), 2u);
}

TEST(Keygen, Deterministic) {
  TimeTree tree;
  auto make = [&] {
    Rng rng(9);
    const auto [pk, mk] = setup<G>(kAttributes, tree, rng);
    const auto sk = keygen<G>(pk, mk, Scalar(77), cover(tree, "2022-01-01", "2022-01-31"),
                              formula_to_lsss("premium"), rng);
    return json::to_json(sk).dump();
  };
  EXPECT_EQ(make(), make());
}

TEST(Keygen, FreshIdentities) {
  Fixture f;
  const auto periods = cover(f.tree, "2022-01-01", "2022-01-31");
  const auto a = f.key("premium", periods);
  const auto b = f.key("premium", periods);
  EXPECT_NE(a.id, b.id);
}

TEST(Keygen, Rejections) {
  Fixture f;
  const auto periods = cover(f.tree, "2022-01-01", "2022-01-31");
  const auto access = formula_to_lsss("premium");
  EXPECT_THROW(keygen<G>(f.pk, f.mk, Scalar(0), periods, access, f.rng), InvalidIdentity);
  EXPECT_THROW(keygen<G>(f.pk, f.mk, Scalar(5), PeriodSet{PeriodNode::parse("2022"), PeriodNode::parse("2022-01")},
                         access, f.rng),
               InputError);
  EXPECT_THROW(keygen<G>(f.pk, f.mk, Scalar(5), periods, formula_to_lsss("nonsense"), f.rng), UnknownAttribute);
}

TEST(Encrypt, Shape) {
  Fixture f;
  const auto m = random_message(f.rng);
  const PeriodSet periods{PeriodNode::parse("2022-08"), PeriodNode::parse("2022-09-01")};
  const auto a = encrypt<G>(f.pk, m, periods, {"subscriber"}, f.rng);
  const auto b = encrypt<G>(f.pk, m, periods, {"subscriber"}, f.rng);
  EXPECT_EQ(a.period_parts.size(), 2u);
  EXPECT_EQ(a.periods, periods);
  EXPECT_NE(a.c0, b.c0);
  EXPECT_THROW(encrypt<G>(f.pk, m, periods, {"unknown"}, f.rng), UnknownAttribute);
  EXPECT_THROW(encrypt<G>(f.pk, m, {}, {"subscriber"}, f.rng), InputError);
}

TEST(Decrypt, RoundTripAcrossLevels) {
  Fixture f;
  const auto sk = f.key("subscriber AND (maps OR video)", cover(f.tree, "2022-07-01", "2022-09-02"));
  for (const char* node : {"2022-07", "2022-08-15", "2022-09-02", "2022-07-31"}) {
    const auto m = random_message(f.rng);
    const auto ct = encrypt<G>(f.pk, m, {PeriodNode::parse(node)}, {"subscriber", "video"}, f.rng);
    const auto out = decrypt<G>(f.pk, ct, sk);
    ASSERT_TRUE(out.ok()) << node;
    EXPECT_EQ(*out.message, m) << node;
  }
}

TEST(Decrypt, YearKeyOpensDay) {
  Fixture f;
  const auto sk = f.key("premium", {PeriodNode::parse("2023")});
  const auto m = random_message(f.rng);
  const auto ct = encrypt<G>(f.pk, m, {PeriodNode::parse("2023-11-30")}, {"premium"}, f.rng);
  EXPECT_EQ(*decrypt<G>(f.pk, ct, sk).message, m);
}

TEST(Decrypt, TimeMismatch) {
  Fixture f;
  const auto sk = f.key("subscriber", cover(f.tree, "2022-07-01", "2022-09-02"));
  const auto ct = encrypt<G>(f.pk, random_message(f.rng), {PeriodNode::parse("2022-09-03")},
                             {"subscriber"}, f.rng);
  const auto out = decrypt<G>(f.pk, ct, sk);
  EXPECT_EQ(out.status, DecryptStatus::TimeMismatch);
  EXPECT_FALSE(out.message.has_value());
  // A coarser ciphertext node than the key's cover is also refused.
  const auto month = encrypt<G>(f.pk, random_message(f.rng), {PeriodNode::parse("2022-09")},
                                {"subscriber"}, f.rng);
  EXPECT_EQ(decrypt<G>(f.pk, month, sk).status, DecryptStatus::TimeMismatch);
}

TEST(Decrypt, UsesAnyCoveredCiphertextNode) {
  Fixture f;
  const auto sk = f.key("subscriber", {PeriodNode::parse("2022-08")});
  const auto m = random_message(f.rng);
  const auto ct = encrypt<G>(f.pk, m, {PeriodNode::parse("2022-07"), PeriodNode::parse("2022-08-05")},
                             {"subscriber"}, f.rng);
  EXPECT_EQ(*decrypt<G>(f.pk, ct, sk).message, m);
}

TEST(Decrypt, AttributeMismatch) {
  Fixture f;
  const auto sk = f.key("subscriber AND premium", cover(f.tree, "2022-01-01", "2022-12-31"));
  const auto ct = encrypt<G>(f.pk, random_message(f.rng), {PeriodNode::parse("2022-05")},
                             {"subscriber"}, f.rng);
  EXPECT_EQ(decrypt<G>(f.pk, ct, sk).status, DecryptStatus::AttributeMismatch);
}

TEST(Decrypt, UncorrectedAlgebraDoesNotCancel) {
  Fixture f;
  int recovered = 0;
  for (int i = 0; i < 20; ++i) {
    const auto sk = f.key("subscriber AND maps", {PeriodNode::parse("2022-06-01")},
                          {Algebra::Uncorrected, ShareIndex::PerRow});
    const auto m = random_message(f.rng);
    const auto ct = encrypt<G>(f.pk, m, {PeriodNode::parse("2022-06-01")}, {"subscriber", "maps"}, f.rng);
    const auto out = decrypt<G>(f.pk, ct, sk);
    ASSERT_TRUE(out.ok());
    recovered += *out.message == m;
  }
  EXPECT_EQ(recovered, 0);
}

TEST(Hybrid, RoundTrip) {
  Fixture f;
  const crypto::Bytes content(5000, 0x5a);
  const auto sealed = hybrid_seal<G>(content, f.pk, {PeriodNode::parse("2022-08")}, {"subscriber", "maps"}, f.rng);
  const auto sk = f.key("subscriber AND maps", cover(f.tree, "2022-07-01", "2022-09-02"));
  const auto out = hybrid_open<G>(sealed, f.pk, sk);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(out.content, content);
}

TEST(Hybrid, BodyCorruptionFailsAuthentication) {
  Fixture f;
  const crypto::Bytes content(300, 0x11);
  const auto sealed = hybrid_seal<G>(content, f.pk, {PeriodNode::parse("2022-08")}, {"subscriber"}, f.rng);
  const auto sk = f.key("subscriber", {PeriodNode::parse("2022")});
  const std::size_t body = 12 + content.size() + 16;
  for (std::size_t i = 0; i < body; i += 7) {
    auto bad = sealed;
    bad[i] ^= 0x80;
    ASSERT_EQ(hybrid_open<G>(bad, f.pk, sk).status, OpenStatus::AuthenticationFailed) << i;
  }
}

TEST(Hybrid, ExpiredKeyRefusedBeforeBody) {
  Fixture f;
  const crypto::Bytes content(100, 0x22);
  auto sealed = hybrid_seal<G>(content, f.pk, {PeriodNode::parse("2022-09-03")}, {"subscriber"}, f.rng);
  sealed[0] ^= 1;  // body corrupted too: the time gate must answer first
  const auto sk = f.key("subscriber", cover(f.tree, "2022-07-01", "2022-09-02"));
  EXPECT_EQ(hybrid_open<G>(sealed, f.pk, sk).status, OpenStatus::TimeMismatch);
}

TEST(Hybrid, MalformedTrailers) {
  Fixture f;
  const crypto::Bytes content(64, 0x33);
  const auto sealed = hybrid_seal<G>(content, f.pk, {PeriodNode::parse("2022-08")}, {"subscriber"}, f.rng);
  const auto sk = f.key("subscriber", {PeriodNode::parse("2022")});
  EXPECT_THROW(hybrid_open<G>(crypto::Bytes{1, 2}, f.pk, sk), MalformedSealedFile);
  auto bad_magic = sealed;
  bad_magic[12 + 64 + 16] ^= 0xff;
  EXPECT_THROW(hybrid_open<G>(bad_magic, f.pk, sk), MalformedSealedFile);
  auto bad_len = sealed;
  bad_len[bad_len.size() - 1] = 0xff;
  EXPECT_THROW(hybrid_open<G>(bad_len, f.pk, sk), MalformedSealedFile);
  auto truncated = sealed;
  truncated.erase(truncated.end() - 10, truncated.end() - 4);
  EXPECT_THROW(hybrid_open<G>(truncated, f.pk, sk), MalformedSealedFile);
  EXPECT_THROW(hybrid_seal<G>(crypto::Bytes{}, f.pk, {PeriodNode::parse("2022-08")}, {"subscriber"}, f.rng),
               InputError);
}

TEST(Serialize, KeysAndParamsRoundTrip) {
  Fixture f;
  const auto sk = f.key("subscriber AND (maps OR video)", cover(f.tree, "2022-07-01", "2022-09-02"));
  const auto pk2 = json::public_params_from_json<G>(nlohmann::json::parse(json::to_json(f.pk).dump()));
  const auto sk2 = json::private_key_from_json<G>(nlohmann::json::parse(json::to_json(sk).dump()));
  const auto mk2 = json::master_key_from_json(nlohmann::json::parse(json::to_json(f.mk).dump()));
  EXPECT_EQ(json::to_json(pk2), json::to_json(f.pk));
  EXPECT_EQ(json::to_json(sk2), json::to_json(sk));
  EXPECT_EQ(mk2.alpha, f.mk.alpha);
  const auto m = random_message(f.rng);
  const auto ct = encrypt<G>(pk2, m, {PeriodNode::parse("2022-08-08")}, {"subscriber", "maps"}, f.rng);
  EXPECT_EQ(*decrypt<G>(pk2, ct, sk2).message, m);
}

}  // namespace
}  // namespace iov::kpabe
