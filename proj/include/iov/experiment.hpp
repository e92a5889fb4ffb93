#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iov/marl.hpp"

namespace iov::experiment {

/// Resolved experiment configuration. Every field has a default, so `{}` is a
/// valid config file; unknown keys are rejected.
struct ExperimentConfig {
  std::string name = "default";
  std::string mechanism = "madrl";
  /// One run per vehicle count and seed.
  std::vector<std::uint32_t> vehicles{40};
  std::uint32_t seeds = 1;
  std::uint32_t rsus = 4;
  std::uint32_t slots_per_episode = 100;
  std::uint32_t epochs = 500;
  std::uint32_t episodes_per_epoch = 8;

  double alpha = 0.1;
  double gamma = 0.95;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  double clip = 0.2;
  double entropy_coef = 0.02;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  std::uint32_t update_epochs = 4;
  std::uint32_t minibatches = 4;
  std::vector<std::uint32_t> hidden{64, 64};

  double kappa = 0.07;
  int max_chunks = 10;
  double max_power_mw = 10.0;
  double direct_min_mbps = 5.0;
  double direct_max_mbps = 25.0;
  double coop_min_mbps = 10.0;
  double coop_max_mbps = 50.0;
  double v2v_range_m = 200.0;
  double chunk_mb = 1.0;
  double rsu_service_mbps = 150.0;
  /// "highest-ask" or "lowest-ask".
  std::string urgent_mode = "highest-ask";

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  marl::TrainConfig train_config(std::uint32_t vehicle_count) const;
};

/// Throws ConfigError for unknown keys, wrong types and failed validation.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

/// One line of metrics.csv.
struct MetricsRow {
  std::string mechanism;
  std::uint32_t vehicles = 0;
  std::uint64_t seed = 0;
  std::uint32_t epoch = 0;
  marl::Metrics metrics;
};

inline constexpr const char* kMetricsHeader =
    "mechanism,vehicles,seed,epoch,reward,social_welfare,budget,latency_s,entropy";

std::string format_row(const MetricsRow& row);
/// Reads a metrics.csv written by run(); throws Error on a schema mismatch.
std::vector<MetricsRow> read_metrics(const std::filesystem::path& csv);

/// Per-epoch metrics for one (vehicle count, seed). A baseline "epoch" is
/// `episodes_per_epoch` fresh episodes under the fixed rule. `on_epoch`
/// receives each row as it is produced.
std::vector<MetricsRow> run_single(const ExperimentConfig& config, std::uint32_t vehicles,
                                   std::uint64_t seed, nlohmann::json* checkpoint = nullptr,
                                   const std::function<void(const MetricsRow&)>& on_epoch = {});

/// Runs every (vehicle count, seed) of `config` and writes
/// <out>/<name>/{config.json, metrics.csv, checkpoint/, figures/}.
/// Returns the run directory.
std::filesystem::path run(const ExperimentConfig& config, std::uint64_t seed,
                          const std::filesystem::path& out, std::ostream* log = nullptr);

/// Aggregates every metrics.csv under `dir` into fig4..fig8 CSVs and SVG
/// charts in <dir>/figures. Missing mechanisms are reported on `warn`.
/// Returns the files written.
std::vector<std::filesystem::path> figures(const std::filesystem::path& dir, std::ostream& warn);

}  // namespace iov::experiment
