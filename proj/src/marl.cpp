#include "iov/marl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iov/error.hpp"

namespace iov::marl {

namespace {

std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng r(seed);
  return r.split(stream)();
}

double entropy_of(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

// Fisher-Yates on our own draws; std::shuffle's algorithm is unspecified.
void shuffle(std::vector<std::size_t>& xs, Rng& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[rng.index(i)]);
}

int sample_action(std::span<const double> probs, Rng& rng) {
  return rng.uniform01() < probs[0] ? 0 : 1;
}

}  // namespace

Observation observe(VehicleId vehicle, const market::MarketState& state,
                    const gossip::PriceTable& table, const net::LinkRates& rates,
                    const ObservationScale& scale) {
  Observation obs;
  const auto rsu = state.rsu_of(vehicle);
  for (std::uint32_t n = 0; n < state.rsu_count; ++n) {
    obs.raw.push_back(state.participants_at(market::RsuId{n}));
  }
  obs.raw.push_back(gossip::last_price(table, rsu).value_or(0.0));
  obs.raw.push_back(rates.direct.at(market::index(vehicle)));
  obs.raw.push_back(rates.best_coop(vehicle));

  obs.features = obs.raw;
  const std::size_t n = state.rsu_count;
  for (std::size_t i = 0; i < n; ++i) obs.features[i] /= scale.vehicles;
  obs.features[n] /= scale.max_price;
  obs.features[n + 1] /= scale.max_direct_mbps;
  obs.features[n + 2] /= scale.max_coop_mbps;
  return obs;
}

double reward(double social_welfare, double budget, double latency_s, double alpha) {
  return social_welfare - alpha * budget * budget - latency_s;
}

std::vector<double> discounted_return(std::span<const double> rewards, double gamma) {
  if (gamma < 0.0 || gamma > 1.0) throw ConfigError("gamma", "must lie in [0, 1]");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    acc = rewards[t] + gamma * acc;
    out[t] = acc;
  }
  return out;
}

std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values,
                                   double gamma, double lambda) {
  if (values.size() != rewards.size() + 1) {
    throw ConfigError("values", "need one bootstrap value past the last reward");
  }
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    const double delta = rewards[t] + gamma * values[t + 1] - values[t];
    acc = delta + gamma * lambda * acc;
    out[t] = acc;
  }
  return out;
}

// --- environment ---

MarketEnv::MarketEnv(EnvConfig config, std::uint64_t seed) : config_(std::move(config)), rng_(seed) {
  if (config_.vehicles() == 0) throw ConfigError("vehicles", "must be positive");
  if (config_.rsus() != 4) throw ConfigError("rsus", "the arena layout has exactly 4 RSUs");
  if (config_.slots_per_episode == 0) throw ConfigError("slots_per_episode", "must be positive");
  if (config_.alpha < 0.0) throw ConfigError("alpha", "must be non-negative");
  reset();
}

void MarketEnv::reset() {
  topology_ = net::Topology::default_grid();
  net::populate(topology_, config_.vehicles(), config_.mobility, rng_);
  tables_.assign(config_.vehicles(), {});
  queues_.assign(config_.rsus(), net::RsuQueue(config_.rsu_service_mbps));
  last_price_.assign(config_.rsus(), std::nullopt);
  max_price_ = 0.0;
  slot_ = 0;
  sample_slot();
}

void MarketEnv::sample_slot() {
  const auto attachment = net::attach_all(topology_);
  state_ = market::sample_population(config_.population, rng_, attachment);
  rates_ = net::sample_rates(topology_, state_, config_.rates, rng_);
}

ObservationScale MarketEnv::scale() const {
  return {static_cast<double>(config_.vehicles()), max_price_ > 0.0 ? max_price_ : 1.0,
          config_.rates.direct_max_mbps, config_.rates.coop_max_mbps};
}

std::vector<Observation> MarketEnv::observations() const {
  std::vector<Observation> out;
  out.reserve(state_.buyers.size());
  const auto s = scale();
  for (const auto& b : state_.buyers) {
    out.push_back(observe(b.id, state_, tables_[market::index(b.id)], rates_, s));
  }
  return out;
}

std::vector<double> MarketEnv::global_state() const {
  std::vector<double> out;
  out.reserve(config_.state_size());
  const double v = config_.vehicles();
  const double price_scale = max_price_ > 0.0 ? max_price_ : 1.0;
  for (std::uint32_t n = 0; n < config_.rsus(); ++n) {
    const market::RsuId rsu{n};
    out.push_back(state_.buyers_at(rsu) / v);
    out.push_back(state_.sellers_at(rsu) / v);
    out.push_back(last_price_[n].value_or(0.0) / price_scale);
    out.push_back(net::queue_estimate(queues_[n]));
  }
  return out;
}

SlotResult MarketEnv::step(std::span<const Submarket> choices) {
  if (done()) throw Error("episode finished; call reset()");
  if (choices.size() != state_.buyers.size()) {
    throw ConfigError("choices", "expected one entry choice per buyer");
  }
  for (std::size_t i = 0; i < choices.size(); ++i) state_.buyers[i].entry = choices[i];

  SlotResult r;
  r.urgent_buyers = static_cast<std::uint32_t>(
      std::count(choices.begin(), choices.end(), Submarket::Urgent));
  r.mundane_buyers = static_cast<std::uint32_t>(choices.size()) - r.urgent_buyers;
  r.outcome = auction::clear_market(state_, config_.urgent_mode);
  r.social_welfare = auction::social_welfare(r.outcome, state_);
  for (std::uint32_t n = 0; n < config_.rsus(); ++n) {
    r.rsu_budgets.push_back(auction::local_budget(r.outcome, market::RsuId{n}));
  }
  r.budget = auction::global_budget(r.rsu_budgets);
  r.latency_s = net::transmission_latency(r.outcome, state_, rates_, config_.chunk_mb);
  r.reward = reward(r.social_welfare, r.budget, r.latency_s, config_.alpha);

  // Unmatched buyers fall back to a direct download from their RSU.
  for (const auto& b : state_.buyers) {
    if (!r.outcome.trade_for_buyer(b.id)) {
      queues_[market::index(state_.rsu_of(b.id))].enqueue(
          b.id, net::request_megabits(b.chunks_requested, config_.chunk_mb));
    }
  }
  for (auto& q : queues_) q.serve(config_.slot_seconds);

  for (const auto& t : r.outcome.trades) {
    last_price_[market::index(t.rsu)] = t.buyer_payment;
    max_price_ = std::max(max_price_, t.buyer_payment);
  }
  // Each RSU announces its latest price to the vehicles it serves; vehicles
  // then spread what they know to their V2V neighbours.
  const auto origin_base = config_.vehicles();
  for (std::uint32_t v = 0; v < config_.vehicles(); ++v) {
    const auto rsu = state_.rsu_of(VehicleId{v});
    if (const auto& p = last_price_[market::index(rsu)]) {
      gossip::record_price(tables_[v], rsu, *p, {slot_, 0}, origin_base + market::index(rsu));
    }
  }
  const auto graph = gossip::GossipGraph::from_topology(topology_, config_.gossip_range_m);
  for (std::uint32_t i = 0; i < config_.gossip_rounds_per_slot; ++i) {
    tables_ = gossip::gossip_round(graph, tables_, rng_);
  }

  ++slot_;
  if (!done()) {
    topology_ = net::step_mobility(topology_, config_.slot_seconds, rng_, config_.mobility);
    sample_slot();
  }
  return r;
}

// --- networks and loss ---

std::vector<double> policy_forward(const nn::Mlp& policy, std::span<const double> observation) {
  if (policy.output_size() != 2) throw ConfigError("policy", "must emit two logits");
  const auto logits = policy.forward(observation);
  return nn::softmax(logits);
}

double value_forward(const nn::Mlp& critic, std::span<const double> global_state) {
  if (critic.output_size() != 1) throw ConfigError("critic", "must emit one value");
  return critic.forward(global_state)[0];
}

double clip_ratio(double ratio, double eps) { return std::clamp(ratio, 1.0 - eps, 1.0 + eps); }

double clipped_surrogate(double ratio, double advantage, double eps) {
  return std::min(ratio * advantage, clip_ratio(ratio, eps) * advantage);
}

Gradients::Gradients(std::span<const nn::Mlp> policies, const nn::Mlp& critic_net)
    : critic(critic_net.parameter_count(), 0.0) {
  for (const auto& p : policies) policy.emplace_back(p.parameter_count(), 0.0);
}

double Gradients::norm() const {
  double sq = 0.0;
  for (const auto& g : policy) {
    for (double x : g) sq += x * x;
  }
  for (double x : critic) sq += x * x;
  return std::sqrt(sq);
}

void Gradients::scale(double factor) {
  for (auto& g : policy) {
    for (double& x : g) x *= factor;
  }
  for (double& x : critic) x *= factor;
}

LossReport ppo_loss(const Batch& batch, std::span<const nn::Mlp> policies, const nn::Mlp& critic,
                    const PpoConfig& config, Gradients* grads) {
  LossReport report;
  if (!batch.policy.empty()) {
    const double inv_n = 1.0 / static_cast<double>(batch.policy.size());
    nn::Mlp::Tape tape;
    for (const auto& s : batch.policy) {
      const auto& net = policies[s.agent];
      const auto logits = net.forward(s.observation, grads ? &tape : nullptr);
      const auto p = nn::softmax(logits);
      const double top = std::max(logits[0], logits[1]);
      const double lse = top + std::log(std::exp(logits[0] - top) + std::exp(logits[1] - top));
      const double log_p = logits[static_cast<std::size_t>(s.action)] - lse;
      const double ratio = std::exp(log_p - s.old_log_prob);
      const double h = entropy_of(p);
      report.policy_loss -= clipped_surrogate(ratio, s.advantage, config.clip) * inv_n;
      report.entropy += h * inv_n;

      if (grads) {
        // d(min)/d(ratio) is A on the unclipped branch and 0 once clipped.
        const double unclipped = ratio * s.advantage;
        const double clipped = clip_ratio(ratio, config.clip) * s.advantage;
        const double d_ratio = unclipped <= clipped ? s.advantage : 0.0;
        std::vector<double> d_logits(2);
        for (std::size_t k = 0; k < 2; ++k) {
          const double onehot = k == static_cast<std::size_t>(s.action) ? 1.0 : 0.0;
          const double surrogate_term = -inv_n * d_ratio * ratio * (onehot - p[k]);
          const double entropy_term =
              config.entropy_coef * inv_n * p[k] * (std::log(std::max(p[k], 1e-300)) + h);
          d_logits[k] = surrogate_term + entropy_term;
        }
        net.backward(tape, d_logits, grads->policy[s.agent]);
      }
    }
  }
  if (!batch.value.empty()) {
    const double inv_m = 1.0 / static_cast<double>(batch.value.size());
    nn::Mlp::Tape tape;
    for (const auto& s : batch.value) {
      const double v = critic.forward(s.state, grads ? &tape : nullptr)[0];
      const double err = v - s.target;
      report.value_loss += err * err * inv_m;
      if (grads) {
        const double d = config.value_coef * 2.0 * err * inv_m;
        critic.backward(tape, std::span<const double>(&d, 1), grads->critic);
      }
    }
  }
  report.total = report.policy_loss - config.entropy_coef * report.entropy +
                 config.value_coef * report.value_loss;
  return report;
}

void ValueNormalizer::update(std::span<const double> targets) {
  for (double x : targets) {
    count_ += 1.0;
    const double d = x - mean_;
    mean_ += d / count_;
    m2_ += d * (x - mean_);
  }
}

double ValueNormalizer::stddev() const {
  if (count_ < 2.0) return 1.0;
  return std::max(std::sqrt(m2_ / count_), 1e-6);
}

nlohmann::json ValueNormalizer::to_json() const {
  return {{"count", count_}, {"m2", m2_}, {"mean", mean_}};
}

ValueNormalizer ValueNormalizer::from_json(const nlohmann::json& j) {
  ValueNormalizer n;
  n.count_ = j.at("count").get<double>();
  n.mean_ = j.at("mean").get<double>();
  n.m2_ = j.at("m2").get<double>();
  return n;
}

// --- learner ---

Learner::Learner(const EnvConfig& env, const PpoConfig& ppo, std::vector<std::size_t> hidden,
                 bool share_parameters, Rng& init_rng)
    : ppo_(ppo) {
  auto sizes = [&](std::size_t in, std::size_t out) {
    std::vector<std::size_t> s{in};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(out);
    return s;
  };
  const std::size_t agents = share_parameters ? 1 : env.vehicles();
  for (std::size_t i = 0; i < agents; ++i) {
    nn::Mlp p(sizes(env.observation_size(), 2));
    p.init(init_rng, 0.01);
    policies_.push_back(std::move(p));
  }
  critic_ = nn::Mlp(sizes(env.state_size(), 1));
  critic_.init(init_rng);
  init_optimizers();
}

void Learner::init_optimizers() {
  policy_opt_.assign(policies_.size(), nn::SgdMomentum(ppo_.learning_rate, ppo_.momentum));
  critic_opt_ = nn::SgdMomentum(ppo_.learning_rate, ppo_.momentum);
}

const nn::Mlp& Learner::policy_for(VehicleId v) const { return policies_.at(agent_index(v)); }

double Learner::value(std::span<const double> global_state) const {
  return value_norm_.denormalize(value_forward(critic_, global_state));
}

LossReport Learner::update(const Batch& batch, Rng& rng) {
  if (batch.empty()) return {};

  std::vector<double> targets;
  for (const auto& s : batch.value) targets.push_back(s.target);
  value_norm_.update(targets);
  Batch normalized = batch;
  for (auto& s : normalized.value) s.target = value_norm_.normalize(s.target);

  std::vector<std::size_t> pidx(normalized.policy.size());
  std::vector<std::size_t> vidx(normalized.value.size());
  std::iota(pidx.begin(), pidx.end(), 0);
  std::iota(vidx.begin(), vidx.end(), 0);
  const std::size_t parts = std::max<std::uint32_t>(1, ppo_.minibatches);

  LossReport last;
  for (std::uint32_t epoch = 0; epoch < ppo_.update_epochs; ++epoch) {
    shuffle(pidx, rng);
    shuffle(vidx, rng);
    for (std::size_t part = 0; part < parts; ++part) {
      Batch mini;
      for (std::size_t i = part * pidx.size() / parts; i < (part + 1) * pidx.size() / parts; ++i) {
        mini.policy.push_back(normalized.policy[pidx[i]]);
      }
      for (std::size_t i = part * vidx.size() / parts; i < (part + 1) * vidx.size() / parts; ++i) {
        mini.value.push_back(normalized.value[vidx[i]]);
      }
      if (mini.empty()) continue;
      Gradients g(policies_, critic_);
      last = ppo_loss(mini, policies_, critic_, ppo_, &g);
      if (ppo_.max_grad_norm > 0.0) {
        const double n = g.norm();
        if (n > ppo_.max_grad_norm) g.scale(ppo_.max_grad_norm / n);
      }
      for (std::size_t a = 0; a < policies_.size(); ++a) {
        policy_opt_[a].step(policies_[a].parameters(), g.policy[a]);
      }
      critic_opt_.step(critic_.parameters(), g.critic);
    }
  }
  return last;
}

nlohmann::json Learner::checkpoint() const {
  nlohmann::json policies = nlohmann::json::array();
  for (const auto& p : policies_) policies.push_back(p.to_json());
  return {{"critic", critic_.to_json()},
          {"policies", policies},
          {"value_normalizer", value_norm_.to_json()}};
}

Learner Learner::from_checkpoint(const nlohmann::json& j, const EnvConfig& env, const PpoConfig& ppo) {
  Learner l;
  l.ppo_ = ppo;
  for (const auto& p : j.at("policies")) l.policies_.push_back(nn::Mlp::from_json(p));
  l.critic_ = nn::Mlp::from_json(j.at("critic"));
  l.value_norm_ = ValueNormalizer::from_json(j.at("value_normalizer"));
  if (l.policies_.empty() || l.policies_[0].input_size() != env.observation_size()) {
    throw ConfigError("checkpoint.policies", "does not match the observation size");
  }
  if (l.critic_.input_size() != env.state_size()) {
    throw ConfigError("checkpoint.critic", "does not match the global state size");
  }
  l.init_optimizers();
  return l;
}

// --- mechanisms ---

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Madrl: return "madrl";
    case Mechanism::Random: return "random";
    case Mechanism::SecondPrice: return "second-price";
    case Mechanism::DoubleAuction: return "double-auction";
  }
  return "unknown";
}

Mechanism mechanism_from_string(const std::string& name) {
  if (name == "madrl") return Mechanism::Madrl;
  if (name == "random") return Mechanism::Random;
  if (name == "second-price" || name == "second-price-only") return Mechanism::SecondPrice;
  if (name == "double-auction" || name == "double-auction-only") return Mechanism::DoubleAuction;
  throw ConfigError("mechanism", "unknown mechanism '" + name + "'");
}

std::vector<Submarket> baseline_choices(Mechanism kind, const market::MarketState& state, Rng& rng) {
  std::vector<Submarket> out;
  out.reserve(state.buyers.size());
  for (std::size_t i = 0; i < state.buyers.size(); ++i) {
    switch (kind) {
      case Mechanism::Random:
        out.push_back(rng.bernoulli(0.5) ? Submarket::Mundane : Submarket::Urgent);
        break;
      case Mechanism::SecondPrice: out.push_back(Submarket::Urgent); break;
      case Mechanism::DoubleAuction: out.push_back(Submarket::Mundane); break;
      case Mechanism::Madrl: throw ConfigError("mechanism", "madrl is not a fixed-rule baseline");
    }
  }
  return out;
}

namespace {

void accumulate(Metrics& m, const SlotResult& r) {
  m.reward += r.reward;
  m.social_welfare += r.social_welfare;
  m.budget += r.budget;
  m.latency_s += r.latency_s;
  ++m.slots;
}

void finish(Metrics& m, double entropy_sum, std::uint64_t decisions) {
  if (m.slots > 0) {
    const double n = static_cast<double>(m.slots);
    m.reward /= n;
    m.social_welfare /= n;
    m.budget /= n;
    m.latency_s /= n;
  }
  m.entropy = decisions > 0 ? entropy_sum / static_cast<double>(decisions) : 0.0;
}

}  // namespace

Metrics run_baseline(Mechanism kind, const EnvConfig& env, std::uint32_t episodes, std::uint64_t seed,
                     const SlotObserver& observer) {
  Metrics m;
  Rng choice_rng = Rng(seed).split(0xc401ce);
  const double h = kind == Mechanism::Random ? std::log(2.0) : 0.0;
  std::uint64_t decisions = 0;
  for (std::uint32_t e = 0; e < episodes; ++e) {
    MarketEnv sim(env, episode_seed(seed, e));
    while (!sim.done()) {
      const auto choices = baseline_choices(kind, sim.state(), choice_rng);
      decisions += choices.size();
      const auto r = sim.step(choices);
      accumulate(m, r);
      if (observer) observer(sim, r);
    }
  }
  finish(m, h * static_cast<double>(decisions), decisions);
  return m;
}

Metrics evaluate_policy(const Learner& learner, const EnvConfig& env, std::uint32_t episodes,
                        std::uint64_t seed) {
  Metrics m;
  Rng choice_rng = Rng(seed).split(0xe7a1);
  double entropy_sum = 0.0;
  std::uint64_t decisions = 0;
  for (std::uint32_t e = 0; e < episodes; ++e) {
    MarketEnv sim(env, episode_seed(seed, e));
    while (!sim.done()) {
      const auto obs = sim.observations();
      std::vector<Submarket> choices;
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto p = policy_forward(learner.policy_for(sim.state().buyers[i].id), obs[i].features);
        entropy_sum += entropy_of(p);
        choices.push_back(static_cast<Submarket>(sample_action(p, choice_rng)));
      }
      decisions += choices.size();
      accumulate(m, sim.step(choices));
    }
  }
  finish(m, entropy_sum, decisions);
  return m;
}

// --- trainer ---

Trainer::Trainer(TrainConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      seed_(seed),
      rng_(Rng(seed).split(0x7a1)),
      learner_([&] {
        Rng init = Rng(seed).split(0x1417);
        return Learner(config_.env, config_.ppo, config_.hidden, config_.share_parameters, init);
      }()) {
  if (config_.episodes_per_epoch == 0) throw ConfigError("episodes_per_epoch", "must be positive");
}

EpochMetrics Trainer::run_epoch() {
  EpochMetrics out;
  out.epoch = epoch_;
  Batch batch;
  double entropy_sum = 0.0;
  std::uint64_t decisions = 0;
  const auto& ppo = config_.ppo;

  for (std::uint32_t e = 0; e < config_.episodes_per_epoch; ++e) {
    const std::uint64_t stream =
        (static_cast<std::uint64_t>(epoch_) + 1) * 1'000'003ULL + e;
    MarketEnv sim(config_.env, episode_seed(seed_, stream));
    std::vector<double> rewards;
    std::vector<std::vector<double>> states;
    std::vector<std::size_t> sample_slot;
    const std::size_t first = batch.policy.size();

    while (!sim.done()) {
      const auto obs = sim.observations();
      states.push_back(sim.global_state());
      std::vector<Submarket> choices;
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const auto id = sim.state().buyers[i].id;
        const auto p = policy_forward(learner_.policy_for(id), obs[i].features);
        const int a = sample_action(p, rng_);
        entropy_sum += entropy_of(p);
        choices.push_back(static_cast<Submarket>(a));
        batch.policy.push_back({obs[i].features, a, std::log(p[static_cast<std::size_t>(a)]), 0.0,
                                learner_.agent_index(id)});
        sample_slot.push_back(rewards.size());
      }
      decisions += choices.size();
      const auto r = sim.step(choices);
      accumulate(out.metrics, r);
      rewards.push_back(r.reward);
    }

    const auto returns = discounted_return(rewards, ppo.gamma);
    std::vector<double> values;
    for (const auto& s : states) values.push_back(learner_.value(s));
    std::vector<double> advantages(rewards.size());
    if (ppo.use_gae) {
      auto v = values;
      v.push_back(0.0);
      advantages = gae_advantages(rewards, v, ppo.gamma, ppo.gae_lambda);
    } else {
      for (std::size_t t = 0; t < rewards.size(); ++t) advantages[t] = returns[t] - values[t];
    }
    for (std::size_t i = first; i < batch.policy.size(); ++i) {
      batch.policy[i].advantage = advantages[sample_slot[i - first]];
    }
    for (std::size_t t = 0; t < states.size(); ++t) {
      const double target = ppo.use_gae ? advantages[t] + values[t] : returns[t];
      batch.value.push_back({states[t], target});
    }
  }

  if (ppo.normalize_advantages && batch.policy.size() > 1) {
    double mean = 0.0;
    for (const auto& s : batch.policy) mean += s.advantage;
    mean /= static_cast<double>(batch.policy.size());
    double var = 0.0;
    for (const auto& s : batch.policy) var += (s.advantage - mean) * (s.advantage - mean);
    const double sd = std::sqrt(var / static_cast<double>(batch.policy.size()));
    for (auto& s : batch.policy) s.advantage = (s.advantage - mean) / (sd + 1e-8);
  }

  finish(out.metrics, entropy_sum, decisions);
  out.loss = learner_.update(batch, rng_);
  ++epoch_;
  return out;
}

}  // namespace iov::marl
