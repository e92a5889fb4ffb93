#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iov/auction.hpp"
#include "iov/gossip.hpp"
#include "iov/market.hpp"
#include "iov/net.hpp"
#include "iov/nn.hpp"
#include "iov/rng.hpp"

namespace iov::marl {

using market::Submarket;
using market::VehicleId;

struct EnvConfig {
  market::PopulationConfig population;
  net::RateConfig rates;
  net::MobilityConfig mobility;
  std::uint32_t slots_per_episode = 100;
  double slot_seconds = 1.0;
  double chunk_mb = 1.0;
  /// Weight of the squared budget in the reward.
  double alpha = 0.1;
  auction::UrgentMode urgent_mode = auction::UrgentMode::HighestAsk;
  double rsu_service_mbps = 150.0;
  double gossip_range_m = 200.0;
  std::uint32_t gossip_rounds_per_slot = 1;

  std::uint32_t vehicles() const { return population.vehicles; }
  std::uint32_t rsus() const { return population.rsus; }
  std::size_t observation_size() const { return rsus() + 3; }
  std::size_t state_size() const { return 4 * static_cast<std::size_t>(rsus()); }
};

/// Scales applied to raw observation entries.
struct ObservationScale {
  double vehicles = 1.0;
  /// Largest trade price seen so far in the episode, 1 if none.
  double max_price = 1.0;
  double max_direct_mbps = 1.0;
  double max_coop_mbps = 1.0;
};

struct Observation {
  /// counts per RSU, last price at own RSU, own direct rate, own best cooperative rate
  std::vector<double> raw;
  std::vector<double> features;
};

/// Assembles a buyer's observation. The price comes from the vehicle's own
/// gossip table; a missing price is 0.
Observation observe(VehicleId vehicle, const market::MarketState& state,
                    const gossip::PriceTable& table, const net::LinkRates& rates,
                    const ObservationScale& scale);

double reward(double social_welfare, double budget, double latency_s, double alpha);

std::vector<double> discounted_return(std::span<const double> rewards, double gamma);

/// GAE(lambda) advantages; `values` has one more entry than `rewards` (the
/// bootstrap value, 0 at episode end).
std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                   double gamma, double lambda);

/// Everything the environment observed and produced in one slot.
struct SlotResult {
  double reward = 0.0;
  double social_welfare = 0.0;
  double budget = 0.0;
  double latency_s = 0.0;
  std::vector<double> rsu_budgets;
  auction::AuctionOutcome outcome;
  std::uint32_t urgent_buyers = 0;
  std::uint32_t mundane_buyers = 0;
};

/// One simulated road network: mobility, attachment, role sampling, link
/// rates, market clearing, queues and price gossip, advanced slot by slot.
class MarketEnv {
 public:
  MarketEnv(EnvConfig config, std::uint64_t seed);

  /// Fresh vehicle placement, empty tables and queues, first slot sampled.
  void reset();

  const EnvConfig& config() const { return config_; }
  const market::MarketState& state() const { return state_; }
  const net::LinkRates& rates() const { return rates_; }
  const std::vector<gossip::PriceTable>& tables() const { return tables_; }
  std::uint32_t slot() const { return slot_; }
  bool done() const { return slot_ >= config_.slots_per_episode; }

  /// One observation per buyer, in state().buyers order.
  std::vector<Observation> observations() const;
  /// Per RSU: buyer count / V, seller count / V, last price / max price,
  /// queue estimate in seconds.
  std::vector<double> global_state() const;

  /// Applies one entry choice per buyer (state().buyers order), clears the
  /// market and advances to the next slot.
  SlotResult step(std::span<const Submarket> choices);

 private:
  void sample_slot();
  ObservationScale scale() const;

  EnvConfig config_;
  Rng rng_;
  net::Topology topology_;
  market::MarketState state_;
  net::LinkRates rates_;
  std::vector<gossip::PriceTable> tables_;
  std::vector<net::RsuQueue> queues_;
  std::vector<std::optional<double>> last_price_;
  double max_price_ = 0.0;
  std::uint32_t slot_ = 0;
};

struct PpoConfig {
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.02;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double gamma = 0.95;
  bool use_gae = false;
  double gae_lambda = 0.95;
  bool normalize_advantages = true;
  std::uint32_t update_epochs = 4;
  std::uint32_t minibatches = 4;
  double max_grad_norm = 0.5;
};

/// Action probabilities (urgent, mundane).
std::vector<double> policy_forward(const nn::Mlp& policy, std::span<const double> observation);
double value_forward(const nn::Mlp& critic, std::span<const double> global_state);

/// min(r A, clip(r, 1 - eps, 1 + eps) A)
double clip_ratio(double ratio, double eps);
double clipped_surrogate(double ratio, double advantage, double eps);

struct PolicySample {
  std::vector<double> observation;
  int action = 0;
  double old_log_prob = 0.0;
  double advantage = 0.0;
  /// Which policy produced the action (0 under parameter sharing).
  std::size_t agent = 0;
};

struct ValueSample {
  std::vector<double> state;
  double target = 0.0;
};

struct Batch {
  std::vector<PolicySample> policy;
  std::vector<ValueSample> value;

  bool empty() const { return policy.empty() && value.empty(); }
};

struct LossReport {
  double total = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
};

/// Gradient buffers matching a set of policies and the critic.
struct Gradients {
  std::vector<std::vector<double>> policy;
  std::vector<double> critic;

  Gradients(std::span<const nn::Mlp> policies, const nn::Mlp& critic);
  double norm() const;
  void scale(double factor);
};

/// Total loss = -mean(surrogate) - entropy_coef * mean(entropy)
///              + value_coef * mean((V - target)^2).
/// Policy sample i is scored by policies[sample.agent]. When `grads` is given
/// the analytic gradient is accumulated into it.
LossReport ppo_loss(const Batch& batch, std::span<const nn::Mlp> policies, const nn::Mlp& critic,
                    const PpoConfig& config, Gradients* grads = nullptr);

/// Running mean and variance of value targets; the critic regresses
/// standardized targets.
class ValueNormalizer {
 public:
  void update(std::span<const double> targets);
  double normalize(double x) const { return (x - mean_) / stddev(); }
  double denormalize(double x) const { return x * stddev() + mean_; }
  double stddev() const;

  nlohmann::json to_json() const;
  static ValueNormalizer from_json(const nlohmann::json& j);

 private:
  double count_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

/// Policies (one, or one per vehicle), shared critic and their optimizers.
class Learner {
 public:
  Learner(const EnvConfig& env, const PpoConfig& ppo, std::vector<std::size_t> hidden,
          bool share_parameters, Rng& init_rng);

  const PpoConfig& config() const { return ppo_; }
  bool shared() const { return policies_.size() == 1; }
  const nn::Mlp& policy_for(VehicleId v) const;
  std::size_t agent_index(VehicleId v) const { return shared() ? 0 : market::index(v); }
  const std::vector<nn::Mlp>& policies() const { return policies_; }
  const nn::Mlp& critic() const { return critic_; }
  /// Critic estimate in reward units.
  double value(std::span<const double> global_state) const;

  /// Clipped-surrogate update over `update_epochs` passes of shuffled
  /// minibatches. An empty batch is a no-op.
  LossReport update(const Batch& batch, Rng& rng);

  nlohmann::json checkpoint() const;
  static Learner from_checkpoint(const nlohmann::json& j, const EnvConfig& env, const PpoConfig& ppo);

 private:
  Learner() = default;
  void init_optimizers();

  PpoConfig ppo_;
  std::vector<nn::Mlp> policies_;
  std::vector<nn::SgdMomentum> policy_opt_;
  nn::Mlp critic_;
  nn::SgdMomentum critic_opt_;
  ValueNormalizer value_norm_;
};

/// Per-slot means over a set of episodes.
struct Metrics {
  double reward = 0.0;
  double social_welfare = 0.0;
  double budget = 0.0;
  double latency_s = 0.0;
  double entropy = 0.0;
  std::uint64_t slots = 0;
};

enum class Mechanism : std::uint8_t { Madrl, Random, SecondPrice, DoubleAuction };

std::string to_string(Mechanism m);
/// Accepts "madrl", "random", "second-price", "double-auction" and the
/// "-only" spellings of the last two.
Mechanism mechanism_from_string(const std::string& name);

/// Fixed-rule entry choices for every buyer of the current slot.
std::vector<Submarket> baseline_choices(Mechanism kind, const market::MarketState& state, Rng& rng);

/// Invoked after every slot; used by tests and diagnostics.
using SlotObserver = std::function<void(const MarketEnv&, const SlotResult&)>;

Metrics run_baseline(Mechanism kind, const EnvConfig& env, std::uint32_t episodes, std::uint64_t seed,
                     const SlotObserver& observer = {});

/// Rolls out the learner's stochastic policy without updating it.
Metrics evaluate_policy(const Learner& learner, const EnvConfig& env, std::uint32_t episodes,
                        std::uint64_t seed);

struct TrainConfig {
  EnvConfig env;
  PpoConfig ppo;
  std::vector<std::size_t> hidden{64, 64};
  bool share_parameters = true;
  std::uint32_t epochs = 500;
  std::uint32_t episodes_per_epoch = 8;
};

struct EpochMetrics {
  std::uint32_t epoch = 0;
  Metrics metrics;
  LossReport loss;
};

/// Bulk-synchronous trainer: roll out `episodes_per_epoch` episodes with the
/// current policy, then apply one PPO update.
class Trainer {
 public:
  Trainer(TrainConfig config, std::uint64_t seed);

  EpochMetrics run_epoch();
  std::uint32_t epoch() const { return epoch_; }
  const Learner& learner() const { return learner_; }
  const TrainConfig& config() const { return config_; }

 private:
  TrainConfig config_;
  std::uint64_t seed_;
  Rng rng_;
  Learner learner_;
  std::uint32_t epoch_ = 0;
};

}  // namespace iov::marl
