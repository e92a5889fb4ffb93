// iov-bazaar: experiment runner, figure builder and KP-ABE key/content tool.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>

#include "iov/error.hpp"
#include "iov/experiment.hpp"
#include "iov/kpabe/hybrid.hpp"
#include "iov/kpabe/scheme.hpp"
#include "iov/kpabe/serialize.hpp"

namespace fs = std::filesystem;
using namespace iov;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

using Group = kpabe::SymbolicGroup;

/// Raised for failures that are neither bad input nor a library error, such
/// as a sealed file that does not open.
struct RuntimeFailure : Error {
  using Error::Error;
};

crypto::Bytes read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError(p.string(), "cannot open");
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_bytes(const fs::path& p, std::span<const std::uint8_t> bytes) {
  std::ofstream f(p, std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("cannot write " + p.string());
}

nlohmann::json read_json(const fs::path& p) {
  const auto bytes = read_bytes(p);
  try {
    return nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(p.string(), e.what());
  }
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  const auto text = j.dump(2) + "\n";
  write_bytes(p, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

// Key material parsing errors are input errors, not runtime failures.
template <typename F>
auto parse_key(const fs::path& p, F&& from_json) {
  const auto j = read_json(p);
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(p.string(), e.what());
  }
}

Rng make_rng(const std::optional<std::uint64_t>& seed) {
  return Rng(seed ? *seed : (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}());
}

const char* describe(kpabe::OpenStatus s) {
  switch (s) {
    case kpabe::OpenStatus::Ok: return "ok";
    case kpabe::OpenStatus::AttributeMismatch: return "key policy not satisfied by the content attributes";
    case kpabe::OpenStatus::TimeMismatch: return "key validity does not cover the content period";
    case kpabe::OpenStatus::AuthenticationFailed: return "content failed authentication";
  }
  return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incentive-driven content market for vehicular networks"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Train or evaluate one mechanism and write metrics");
  std::string config_path;
  std::uint64_t seed = 0;
  std::optional<std::string> mechanism, name;
  std::optional<std::uint32_t> epochs;
  std::string out_dir = "runs";
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Base seed; seed k of the sweep uses seed + k")->required();
  run->add_option("--mechanism", mechanism, "madrl, random, second-price or double-auction");
  run->add_option("--name", name, "Run name (overrides the config)");
  run->add_option("--epochs", epochs, "Epoch count (overrides the config)");
  run->add_option("--out", out_dir, "Parent directory of run directories")->capture_default_str();

  // figures
  auto* figs = app.add_subcommand("figures", "Summarise every metrics.csv under a directory");
  std::string figures_dir;
  figs->add_option("dir", figures_dir, "Directory holding run directories")->required();

  // kpabe
  auto* kp = app.add_subcommand("kpabe", "Time-limited attribute-based content protection");
  kp->require_subcommand(1);
  std::optional<std::uint64_t> kp_seed;
  std::string pk_path = "pk.json", mk_path = "mk.json", key_path, in_path, out_path;
  std::vector<std::string> attributes, periods;
  std::string policy, from, to;

  auto* setup = kp->add_subcommand("setup", "Create public parameters and the master key");
  setup->add_option("--attributes", attributes, "Attribute universe")->required()->delimiter(',');
  setup->add_option("--pk", pk_path)->capture_default_str();
  setup->add_option("--mk", mk_path)->capture_default_str();
  setup->add_option("--seed", kp_seed);

  auto* keygen = kp->add_subcommand("keygen", "Issue a key for a policy and a validity window");
  keygen->add_option("--pk", pk_path)->capture_default_str();
  keygen->add_option("--mk", mk_path)->capture_default_str();
  keygen->add_option("--policy", policy, "Boolean formula over attributes, e.g. \"a AND (b OR c)\"")->required();
  keygen->add_option("--from", from, "First valid day, YYYY-MM-DD")->required();
  keygen->add_option("--to", to, "Last valid day, YYYY-MM-DD")->required();
  keygen->add_option("--out", out_path, "Key file")->required();
  keygen->add_option("--seed", kp_seed);

  auto* seal = kp->add_subcommand("seal", "Encrypt content under attributes and periods");
  seal->add_option("--pk", pk_path)->capture_default_str();
  seal->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
  seal->add_option("--out", out_path)->required();
  seal->add_option("--attributes", attributes)->required()->delimiter(',');
  seal->add_option("--period", periods, "YYYY, YYYY-MM or YYYY-MM-DD; repeatable")->required();
  seal->add_option("--seed", kp_seed);

  auto* open = kp->add_subcommand("open", "Decrypt sealed content with a key");
  open->add_option("--pk", pk_path)->capture_default_str();
  open->add_option("--key", key_path)->required();
  open->add_option("--in", in_path)->required()->check(CLI::ExistingFile);
  open->add_option("--out", out_path)->required();

  auto* cover = kp->add_subcommand("cover", "Print the minimal period cover of a day range");
  cover->add_option("--from", from)->required();
  cover->add_option("--to", to)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (run->parsed()) {
      auto cfg = experiment::load_config(config_path);
      if (mechanism) cfg.mechanism = *mechanism;
      if (name) cfg.name = *name;
      if (epochs) cfg.epochs = *epochs;
      cfg.validate();
      const auto dir = experiment::run(cfg, seed, out_dir, &std::cerr);
      std::cout << dir.string() << "\n";
    } else if (figs->parsed()) {
      for (const auto& p : experiment::figures(figures_dir, std::cerr)) std::cout << p.string() << "\n";
    } else if (setup->parsed()) {
      auto rng = make_rng(kp_seed);
      const auto [pk, mk] = kpabe::setup<Group>(attributes, kpabe::TimeTree{}, rng);
      write_json(pk_path, kpabe::json::to_json(pk));
      write_json(mk_path, kpabe::json::to_json(mk));
    } else if (keygen->parsed()) {
      auto rng = make_rng(kp_seed);
      const auto pk = parse_key(pk_path, kpabe::json::public_params_from_json<Group>);
      const auto mk = parse_key(mk_path, kpabe::json::master_key_from_json);
      const auto window = pk.tree.set_cover(kpabe::Date::parse(from), kpabe::Date::parse(to));
      const auto sk = kpabe::keygen<Group>(pk, mk, kpabe::fresh_identity(rng), window,
                                           kpabe::formula_to_lsss(policy, &pk.universe), rng);
      write_json(out_path, kpabe::json::to_json(sk));
    } else if (seal->parsed()) {
      auto rng = make_rng(kp_seed);
      const auto pk = parse_key(pk_path, kpabe::json::public_params_from_json<Group>);
      kpabe::PeriodSet nodes;
      for (const auto& p : periods) nodes.push_back(kpabe::PeriodNode::parse(p));
      write_bytes(out_path, kpabe::hybrid_seal<Group>(read_bytes(in_path), pk, nodes,
                                                      kpabe::AttributeSet(attributes.begin(), attributes.end()), rng));
    } else if (open->parsed()) {
      const auto pk = parse_key(pk_path, kpabe::json::public_params_from_json<Group>);
      const auto sk = parse_key(key_path, kpabe::json::private_key_from_json<Group>);
      const auto out = kpabe::hybrid_open<Group>(read_bytes(in_path), pk, sk);
      if (!out.ok()) throw RuntimeFailure(describe(out.status));
      write_bytes(out_path, out.content);
    } else if (cover->parsed()) {
      for (const auto& node : kpabe::TimeTree{}.set_cover(kpabe::Date::parse(from), kpabe::Date::parse(to))) {
        std::cout << node.to_string() << "\n";
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InputError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const RangeError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const kpabe::UnknownAttribute& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const kpabe::UnsupportedFormula& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return 0;
}
