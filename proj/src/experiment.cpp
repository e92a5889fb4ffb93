#include "iov/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "iov/error.hpp"

namespace iov::experiment {

namespace fs = std::filesystem;

namespace {

// Binds every config key to its member so parsing, dumping and the unknown-key
// check share one list.
template <typename F>
void for_each_field(ExperimentConfig& c, F&& f) {
  f("name", c.name);
  f("mechanism", c.mechanism);
  f("vehicles", c.vehicles);
  f("seeds", c.seeds);
  f("rsus", c.rsus);
  f("slots_per_episode", c.slots_per_episode);
  f("epochs", c.epochs);
  f("episodes_per_epoch", c.episodes_per_epoch);
  f("alpha", c.alpha);
  f("gamma", c.gamma);
  f("learning_rate", c.learning_rate);
  f("momentum", c.momentum);
  f("clip", c.clip);
  f("entropy_coef", c.entropy_coef);
  f("value_coef", c.value_coef);
  f("max_grad_norm", c.max_grad_norm);
  f("update_epochs", c.update_epochs);
  f("minibatches", c.minibatches);
  f("hidden", c.hidden);
  f("kappa", c.kappa);
  f("max_chunks", c.max_chunks);
  f("max_power_mw", c.max_power_mw);
  f("direct_min_mbps", c.direct_min_mbps);
  f("direct_max_mbps", c.direct_max_mbps);
  f("coop_min_mbps", c.coop_min_mbps);
  f("coop_max_mbps", c.coop_max_mbps);
  f("v2v_range_m", c.v2v_range_m);
  f("chunk_mb", c.chunk_mb);
  f("rsu_service_mbps", c.rsu_service_mbps);
  f("urgent_mode", c.urgent_mode);
}

auction::UrgentMode urgent_mode_from(const std::string& s) {
  if (s == "highest-ask") return auction::UrgentMode::HighestAsk;
  if (s == "lowest-ask") return auction::UrgentMode::LowestAsk;
  throw ConfigError("urgent_mode", "expected highest-ask or lowest-ask, got '" + s + "'");
}

void require_positive(const char* field, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(field, "must be positive");
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error("cannot write " + path.string());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..") {
    throw ConfigError("name", "must be a plain directory name");
  }
  marl::mechanism_from_string(mechanism);
  if (vehicles.empty()) throw ConfigError("vehicles", "need at least one vehicle count");
  for (auto v : vehicles) {
    if (v < 2) throw ConfigError("vehicles", "each count must be at least 2");
  }
  if (seeds == 0) throw ConfigError("seeds", "must be positive");
  if (rsus != 4) throw ConfigError("rsus", "the road grid has exactly 4 RSUs");
  if (slots_per_episode == 0) throw ConfigError("slots_per_episode", "must be positive");
  if (epochs == 0) throw ConfigError("epochs", "must be positive");
  if (episodes_per_epoch == 0) throw ConfigError("episodes_per_epoch", "must be positive");
  require_positive("alpha", alpha);
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma", "must lie in (0, 1]");
  require_positive("learning_rate", learning_rate);
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum", "must lie in [0, 1)");
  if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("clip", "must lie in (0, 1)");
  require_positive("entropy_coef", entropy_coef);
  require_positive("value_coef", value_coef);
  if (!(max_grad_norm >= 0.0)) throw ConfigError("max_grad_norm", "must be non-negative (0 disables)");
  if (update_epochs == 0) throw ConfigError("update_epochs", "must be positive");
  if (minibatches == 0) throw ConfigError("minibatches", "must be positive");
  if (hidden.empty() || std::find(hidden.begin(), hidden.end(), 0u) != hidden.end()) {
    throw ConfigError("hidden", "need at least one non-empty hidden layer");
  }
  require_positive("kappa", kappa);
  if (max_chunks < 1) throw ConfigError("max_chunks", "must be positive");
  require_positive("max_power_mw", max_power_mw);
  require_positive("direct_min_mbps", direct_min_mbps);
  if (direct_max_mbps < direct_min_mbps) throw ConfigError("direct_max_mbps", "below direct_min_mbps");
  require_positive("coop_min_mbps", coop_min_mbps);
  if (coop_max_mbps < coop_min_mbps) throw ConfigError("coop_max_mbps", "below coop_min_mbps");
  require_positive("v2v_range_m", v2v_range_m);
  require_positive("chunk_mb", chunk_mb);
  require_positive("rsu_service_mbps", rsu_service_mbps);
  urgent_mode_from(urgent_mode);
}

marl::TrainConfig ExperimentConfig::train_config(std::uint32_t vehicle_count) const {
  marl::TrainConfig t;
  auto& env = t.env;
  env.population.vehicles = vehicle_count;
  env.population.rsus = rsus;
  env.population.kappa = kappa;
  env.population.max_chunks = max_chunks;
  env.population.max_power_mw = max_power_mw;
  env.rates = {direct_min_mbps, direct_max_mbps, coop_min_mbps, coop_max_mbps, v2v_range_m};
  env.slots_per_episode = slots_per_episode;
  env.chunk_mb = chunk_mb;
  env.alpha = alpha;
  env.urgent_mode = urgent_mode_from(urgent_mode);
  env.rsu_service_mbps = rsu_service_mbps;
  env.gossip_range_m = v2v_range_m;

  auto& ppo = t.ppo;
  ppo.clip = clip;
  ppo.value_coef = value_coef;
  ppo.entropy_coef = entropy_coef;
  ppo.learning_rate = learning_rate;
  ppo.momentum = momentum;
  ppo.gamma = gamma;
  ppo.update_epochs = update_epochs;
  ppo.minibatches = minibatches;
  ppo.max_grad_norm = max_grad_norm;

  t.hidden.assign(hidden.begin(), hidden.end());
  t.epochs = epochs;
  t.episodes_per_epoch = episodes_per_epoch;
  return t;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("(root)", "expected a JSON object");
  ExperimentConfig c;
  std::set<std::string> known;
  for_each_field(c, [&](const char* key, auto& field) {
    known.insert(key);
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
      it->get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(key, "wrong type: " + it->dump());
    }
  });
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError(key, "unknown field");
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  auto copy = c;
  for_each_field(copy, [&](const char* key, const auto& field) { j[key] = field; });
  return j;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config", "cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

std::string format_row(const MetricsRow& r) {
  const auto& m = r.metrics;
  return r.mechanism + "," + std::to_string(r.vehicles) + "," + std::to_string(r.seed) + "," +
         std::to_string(r.epoch) + "," + fmt(m.reward) + "," + fmt(m.social_welfare) + "," +
         fmt(m.budget) + "," + fmt(m.latency_s) + "," + fmt(m.entropy);
}

std::vector<MetricsRow> read_metrics(const fs::path& csv) {
  std::ifstream f(csv);
  if (!f) throw Error("cannot read " + csv.string());
  std::string line;
  if (!std::getline(f, line) || line != kMetricsHeader) {
    throw Error(csv.string() + ": unexpected header");
  }
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    try {
      if (cells.size() != 9) throw std::invalid_argument("column count");
      MetricsRow r;
      r.mechanism = cells[0];
      r.vehicles = static_cast<std::uint32_t>(std::stoul(cells[1]));
      r.seed = std::stoull(cells[2]);
      r.epoch = static_cast<std::uint32_t>(std::stoul(cells[3]));
      r.metrics.reward = std::stod(cells[4]);
      r.metrics.social_welfare = std::stod(cells[5]);
      r.metrics.budget = std::stod(cells[6]);
      r.metrics.latency_s = std::stod(cells[7]);
      r.metrics.entropy = std::stod(cells[8]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      throw Error(csv.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  return rows;
}

std::vector<MetricsRow> run_single(const ExperimentConfig& config, std::uint32_t vehicles,
                                   std::uint64_t seed, nlohmann::json* checkpoint,
                                   const std::function<void(const MetricsRow&)>& on_epoch) {
  const auto kind = marl::mechanism_from_string(config.mechanism);
  const auto tc = config.train_config(vehicles);
  const auto name = marl::to_string(kind);
  std::vector<MetricsRow> rows;
  auto emit = [&](std::uint32_t epoch, const marl::Metrics& m) {
    rows.push_back({name, vehicles, seed, epoch, m});
    if (on_epoch) on_epoch(rows.back());
  };

  if (kind == marl::Mechanism::Madrl) {
    marl::Trainer trainer(tc, seed);
    for (std::uint32_t e = 0; e < tc.epochs; ++e) emit(e, trainer.run_epoch().metrics);
    if (checkpoint) *checkpoint = trainer.learner().checkpoint();
  } else {
    Rng root(seed);
    for (std::uint32_t e = 0; e < tc.epochs; ++e) {
      emit(e, marl::run_baseline(kind, tc.env, tc.episodes_per_epoch, root.split(e)()));
    }
  }
  return rows;
}

fs::path run(const ExperimentConfig& config, std::uint64_t seed, const fs::path& out, std::ostream* log) {
  config.validate();
  const fs::path dir = out / config.name;
  fs::create_directories(dir / "figures");
  write_file(dir / "config.json", to_json(config).dump(2) + "\n");

  std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  csv << kMetricsHeader << '\n';
  for (auto v : config.vehicles) {
    for (std::uint32_t k = 0; k < config.seeds; ++k) {
      const std::uint64_t s = seed + k;
      nlohmann::json ck;
      run_single(config, v, s, &ck, [&](const MetricsRow& row) {
        csv << format_row(row) << '\n';
        if (log && (row.epoch % 50 == 0 || row.epoch + 1 == config.epochs)) {
          *log << row.mechanism << " V=" << v << " seed=" << s << " epoch " << row.epoch
               << " reward " << fmt(row.metrics.reward) << '\n';
        }
      });
      csv.flush();
      if (!ck.is_null()) {
        fs::create_directories(dir / "checkpoint");
        write_file(dir / "checkpoint" / ("v" + std::to_string(v) + "-seed" + std::to_string(s) + ".json"),
                   ck.dump() + "\n");
      }
    }
  }
  if (!csv) throw Error("cannot write " + (dir / "metrics.csv").string());
  return dir;
}

namespace {

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  s.n = xs.size();
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  for (double x : xs) s.stddev += (x - s.mean) * (x - s.mean);
  s.stddev = xs.size() > 1 ? std::sqrt(s.stddev / static_cast<double>(xs.size() - 1)) : 0.0;
  return s;
}

double field(const marl::Metrics& m, const std::string& name) {
  if (name == "reward") return m.reward;
  if (name == "social_welfare") return m.social_welfare;
  if (name == "budget") return m.budget;
  return m.latency_s;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, Stat>> points;
};

// Minimal line chart: one polyline per series, axes with min/max labels.
std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    for (const auto& [x, st] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, st.mean - st.stddev);
      y1 = std::max(y1, st.mean + st.stddev);
    }
  }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double w = 640, h = 400, left = 70, right = 150, top = 40, bottom = 50;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n"
    << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
    << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << left << "\" y=\"" << h - bottom + 15 << "\">" << fmt(x0) << "</text>\n"
    << "<text x=\"" << w - right << "\" y=\"" << h - bottom + 15 << "\" text-anchor=\"end\">" << fmt(x1)
    << "</text>\n"
    << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n"
    << "<text x=\"" << left - 5 << "\" y=\"" << top + 5 << "\" text-anchor=\"end\">" << fmt(y1) << "</text>\n"
    << "<text x=\"" << left - 5 << "\" y=\"" << h - bottom << "\" text-anchor=\"end\">" << fmt(y0) << "</text>\n"
    << "<text x=\"15\" y=\"" << (top + h - bottom) / 2 << "\" transform=\"rotate(-90 15 "
    << (top + h - bottom) / 2 << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* c = colors[i % 5];
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, st] : series[i].points) o << fmt(px(x)) << "," << fmt(py(st.mean)) << " ";
    o << "\"/>\n";
    o << "<text x=\"" << w - right + 10 << "\" y=\"" << top + 15 * (i + 1) << "\" fill=\"" << c << "\">"
      << series[i].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

constexpr std::uint32_t kFinalWindow = 20;

}  // namespace

std::vector<fs::path> figures(const fs::path& dir, std::ostream& warn) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + " is not a directory");
  std::vector<MetricsRow> rows;
  std::vector<fs::path> sources;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.csv") sources.push_back(entry.path());
  }
  std::sort(sources.begin(), sources.end());
  for (const auto& p : sources) {
    auto r = read_metrics(p);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (rows.empty()) throw Error("no metrics.csv with data under " + dir.string());

  std::set<std::string> present;
  for (const auto& r : rows) present.insert(r.mechanism);
  for (const char* m : {"madrl", "random", "second-price", "double-auction"}) {
    if (!present.contains(m)) warn << "warning: no runs for mechanism " << m << "; its series is omitted\n";
  }

  // (mechanism, V, seed) -> rows ordered by epoch
  std::map<std::tuple<std::string, std::uint32_t, std::uint64_t>, std::map<std::uint32_t, marl::Metrics>> runs;
  for (const auto& r : rows) runs[{r.mechanism, r.vehicles, r.seed}][r.epoch] = r.metrics;

  const fs::path out = dir / "figures";
  fs::create_directories(out);
  std::vector<fs::path> written;
  auto emit = [&](const std::string& file, const std::string& text) {
    write_file(out / file, text);
    written.push_back(out / file);
  };

  // Convergence curve at the most common vehicle count, 40 when present.
  std::map<std::uint32_t, std::size_t> per_v;
  for (const auto& [key, _] : runs) ++per_v[std::get<1>(key)];
  std::uint32_t curve_v = per_v.contains(40) ? 40 : per_v.begin()->first;
  {
    std::map<std::string, std::map<std::uint32_t, std::vector<double>>> by_epoch;
    for (const auto& [key, epochs] : runs) {
      if (std::get<1>(key) != curve_v) continue;
      for (const auto& [e, m] : epochs) by_epoch[std::get<0>(key)][e].push_back(m.reward);
    }
    std::string csv = "mechanism,vehicles,epoch,reward_mean,reward_std,seeds\n";
    std::vector<Series> series;
    for (const auto& [mech, epochs] : by_epoch) {
      series.push_back({mech, {}});
      for (const auto& [e, xs] : epochs) {
        const auto s = stat_of(xs);
        csv += mech + "," + std::to_string(curve_v) + "," + std::to_string(e) + "," + fmt(s.mean) + "," +
               fmt(s.stddev) + "," + std::to_string(s.n) + "\n";
        series.back().points.emplace_back(e, s);
      }
    }
    emit("fig4_convergence.csv", csv);
    emit("fig4_convergence.svg",
         svg_chart("Reward per slot vs epoch (V=" + std::to_string(curve_v) + ")", "epoch", "reward", series));
  }

  // Final value of each run = mean over its last kFinalWindow epochs.
  const std::pair<const char*, const char*> metrics[] = {{"fig5_reward", "reward"},
                                                         {"fig6_social_welfare", "social_welfare"},
                                                         {"fig7_budget", "budget"},
                                                         {"fig8_latency", "latency_s"}};
  for (const auto& [fig, metric] : metrics) {
    std::map<std::string, std::map<std::uint32_t, std::vector<double>>> by_v;
    for (const auto& [key, epochs] : runs) {
      double sum = 0.0;
      std::uint32_t n = 0;
      for (auto it = epochs.rbegin(); it != epochs.rend() && n < kFinalWindow; ++it, ++n) {
        sum += field(it->second, metric);
      }
      by_v[std::get<0>(key)][std::get<1>(key)].push_back(sum / n);
    }
    std::string csv = std::string("mechanism,vehicles,") + metric + "_mean," + metric + "_std,seeds\n";
    std::vector<Series> series;
    for (const auto& [mech, vs] : by_v) {
      series.push_back({mech, {}});
      for (const auto& [v, xs] : vs) {
        const auto s = stat_of(xs);
        csv += mech + "," + std::to_string(v) + "," + fmt(s.mean) + "," + fmt(s.stddev) + "," +
               std::to_string(s.n) + "\n";
        series.back().points.emplace_back(v, s);
      }
    }
    emit(std::string(fig) + "_vs_vehicles.csv", csv);
    emit(std::string(fig) + "_vs_vehicles.svg",
         svg_chart(std::string(metric) + " per slot vs vehicles", "vehicles", metric, series));
  }
  return written;
}

}  // namespace iov::experiment
