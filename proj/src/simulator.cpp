#include "gossip/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace gossip::sim {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection; exact for any bound.
  std::uint64_t x = next();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = next();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Rng::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

// ---------------------------------------------------------------------------
// Config

void SimConfig::validate() const {
  params.validate();
  if (batches < 2) {
    throw Error(ErrorCode::TooFewBatches, "batches must be at least 2, got " +
                                              std::to_string(batches));
  }
  if (measure_events < batches) {
    throw Error(ErrorCode::InvalidConfig, "measure_events must be >= batches");
  }
  if (warmup_events < 0) throw Error(ErrorCode::InvalidConfig, "warmup_events must be >= 0");
  if (subset_sizes.empty()) throw Error(ErrorCode::InvalidConfig, "subset_sizes is empty");
  for (int k : subset_sizes) {
    if (k < 1 || k > params.n) {
      throw Error(ErrorCode::KOutOfRange, "subset size " + std::to_string(k) +
                                              " outside 1.." + std::to_string(params.n));
    }
  }
}

SimConfig parse_sim_config(const std::string& text, const std::filesystem::path& base_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");

  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) {
      throw Error(ErrorCode::InvalidConfig, std::string("missing field \"") + key + "\"");
    }
    return doc[key];
  };

  std::optional<GeneratorMatrix> generator;
  if (doc.contains("generator")) {
    generator = parse_generator_json(doc["generator"].dump());
  } else if (doc.contains("generator_file")) {
    std::filesystem::path file = doc["generator_file"].get<std::string>();
    if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
    generator = load_generator_json(file);
  } else {
    throw Error(ErrorCode::InvalidConfig, "need \"generator\" or \"generator_file\"");
  }

  try {
    SimConfig cfg{
        .generator = *generator,
        .params = NetworkParams{require("n").get<int>(), require("lambda_s").get<double>(),
                                require("lambda").get<double>()},
        .seed = require("seed").get<std::uint64_t>(),
        .warmup_events = 0,
        .measure_events = require("measure_events").get<std::int64_t>(),
        .subset_sizes = {},
        .batches = doc.value("batches", 20),
    };
    cfg.warmup_events = doc.value("warmup_events", cfg.measure_events / 10);
    if (doc.contains("subset_sizes")) {
      cfg.subset_sizes = doc["subset_sizes"].get<std::vector<int>>();
    } else {
      cfg.subset_sizes = {1, cfg.params.n};
      if (cfg.params.n == 1) cfg.subset_sizes.pop_back();
    }
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config field type: ") + e.what());
  }
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sim_config(buf.str(), path.parent_path());
}

std::string sim_config_json(const SimConfig& cfg) {
  nlohmann::ordered_json doc;
  const auto& g = cfg.generator.rates();
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < g.rows(); ++i) rows.emplace_back(g.row(i).begin(), g.row(i).end());
  doc["generator"] = {{"states", g.rows()}, {"rates", rows}};
  doc["n"] = cfg.params.n;
  doc["lambda_s"] = cfg.params.lambda_s;
  doc["lambda"] = cfg.params.lambda;
  doc["seed"] = cfg.seed;
  doc["warmup_events"] = cfg.warmup_events;
  doc["measure_events"] = cfg.measure_events;
  doc["subset_sizes"] = cfg.subset_sizes;
  doc["batches"] = cfg.batches;
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Dynamics

WorldState init_state(const SimConfig& cfg, Rng& rng) {
  const auto pi = stationary_distribution(cfg.generator);
  const double u = rng.uniform();
  std::size_t q = 0;
  double acc = pi[0];
  while (q + 1 < pi.size() && u >= acc) acc += pi[++q];

  WorldState s;
  s.source = q;
  const auto n = static_cast<std::size_t>(cfg.params.n);
  s.version.assign(n, 0);
  s.content.assign(n, q);
  return s;
}

EventSampler::EventSampler(const GeneratorMatrix& g, const NetworkParams& p)
    : p_(p), exit_(g.exit_rates()), jump_cdf_(g.size()) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j == i || g.rate(i, j) <= 0.0) continue;
      acc += g.rate(i, j);
      jump_cdf_[i].emplace_back(acc, j);
    }
  }
}

double EventSampler::total_rate(std::size_t source) const {
  return exit_[source] + p_.lambda_s + p_.n * p_.lambda;
}

Event EventSampler::sample(const WorldState& state, Rng& rng) const {
  const double nu = exit_[state.source];
  const double total = total_rate(state.source);
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateRun, "total event rate is zero");

  Event e;
  e.dt = rng.exponential(total);
  const double pick = rng.uniform() * total;
  const auto n = static_cast<std::uint64_t>(p_.n);
  if (pick < nu) {
    e.kind = EventKind::SourceTransition;
    const auto& cdf = jump_cdf_[state.source];
    const double u = pick;  // uniform on [0, nu)
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u,
                               [](double v, const auto& entry) { return v < entry.first; });
    if (it == cdf.end()) it = std::prev(cdf.end());
    e.to_state = it->second;
  } else if (pick < nu + p_.lambda_s) {
    e.kind = EventKind::Push;
    e.target = rng.below(n);
  } else {
    e.kind = EventKind::Gossip;
    // Ordered pair (i, j), i != j, uniformly among n(n-1).
    e.sender = rng.below(n);
    const std::size_t other = rng.below(n - 1);
    e.target = other >= e.sender ? other + 1 : other;
  }
  return e;
}

bool apply_event(WorldState& state, const Event& e) {
  state.time += e.dt;
  switch (e.kind) {
    case EventKind::SourceTransition:
      state.source = e.to_state;
      ++state.source_version;
      return false;
    case EventKind::Push: {
      const bool changed = state.version[e.target] != state.source_version;
      state.version[e.target] = state.source_version;
      state.content[e.target] = state.source;
      return changed;
    }
    case EventKind::Gossip:
      if (state.version[e.sender] > state.version[e.target]) {
        state.version[e.target] = state.version[e.sender];
        state.content[e.target] = state.content[e.sender];
        return true;
      }
      return false;
  }
  return false;
}

Event step(WorldState& state, const EventSampler& sampler, Rng& rng) {
  const Event e = sampler.sample(state, rng);
  apply_event(state, e);
  return e;
}

// ---------------------------------------------------------------------------
// Measurement

Accumulator::Accumulator(std::size_t states, int n, std::vector<int> subset_sizes)
    : states_(states), n_(n), ks_(std::move(subset_sizes)) {
  std::sort(ks_.begin(), ks_.end());
  ks_.erase(std::unique(ks_.begin(), ks_.end()), ks_.end());
  reset();
}

void Accumulator::reset() {
  time_ = 0.0;
  freshest_accurate_.assign(ks_.size(), 0.0);
  subset_fresh_.assign(ks_.size(), 0.0);
  fresh_mode_.assign(ks_.size() * states_, 0.0);
  count_.assign(ks_.size() * states_, 0.0);
  joint_.assign(ks_.size(), 0.0);
  accuracy_ = 0.0;
  accuracy_mode_.assign(states_, 0.0);
  scratch_.assign(states_, 0.0);
}

Accumulator& Accumulator::operator+=(const Accumulator& other) {
  if (other.ks_ != ks_ || other.states_ != states_) {
    throw Error(ErrorCode::ModeMismatch, "accumulators measure different quantities");
  }
  auto add = [](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  };
  time_ += other.time_;
  add(freshest_accurate_, other.freshest_accurate_);
  add(subset_fresh_, other.subset_fresh_);
  add(fresh_mode_, other.fresh_mode_);
  add(count_, other.count_);
  add(joint_, other.joint_);
  accuracy_ += other.accuracy_;
  add(accuracy_mode_, other.accuracy_mode_);
  return *this;
}

void Accumulator::observe(const WorldState& state, double dt) {
  time_ += dt;
  const std::size_t q = state.source;
  const auto n = static_cast<std::size_t>(n_);

  // One prefix scan serves every requested subset {1..k}. The freshest node is
  // the lowest index holding the prefix maximum version.
  std::size_t best = 0;
  std::size_t ki = 0;
  std::size_t accurate = 0;
  std::size_t fresh_accurate = 0;
  auto& counts = scratch_;
  std::fill(counts.begin(), counts.end(), 0.0);
  for (std::size_t i = 0; i < n && ki < ks_.size(); ++i) {
    if (state.version[i] > state.version[best]) best = i;
    const bool acc = state.content[i] == q;
    accurate += acc;
    fresh_accurate += acc && state.version[i] == state.source_version;
    counts[state.content[i]] += 1.0;
    if (i + 1 == static_cast<std::size_t>(ks_[ki])) {
      freshest_accurate_[ki] += dt * (state.content[best] == q);
      const bool fresh = state.version[best] == state.source_version;
      subset_fresh_[ki] += dt * fresh;
      fresh_mode_[ki * states_ + q] += dt * fresh;
      for (std::size_t c = 0; c < states_; ++c) count_[ki * states_ + c] += dt * counts[c];
      joint_[ki] += dt * static_cast<double>(fresh_accurate) / static_cast<double>(i + 1);
      ++ki;
    }
  }
  // Whole-network accuracy.
  for (std::size_t i = static_cast<std::size_t>(ks_.empty() ? 0 : ks_.back()); i < n; ++i) {
    accurate += state.content[i] == q;
  }
  const double frac = static_cast<double>(accurate) / static_cast<double>(n);
  accuracy_ += dt * frac;
  accuracy_mode_[q] += dt * frac;
}

namespace {

struct Slot {
  std::string quantity;
  int index;
};

// Names and order of the reported quantities for one configuration.
std::vector<Slot> report_layout(const Accumulator& acc, int n) {
  std::vector<Slot> out;
  const auto& ks = acc.subset_sizes();
  const int m = static_cast<int>(acc.states());
  for (int k : ks) out.push_back({"f", k});
  for (int k : ks) out.push_back({"fresh", k});
  for (int k : ks)
    for (int q = 1; q <= m; ++q) out.push_back({"g_mode_k" + std::to_string(k), q});
  for (int k : ks) out.push_back({"G_product", k});
  for (int k : ks) out.push_back({"G_joint", k});
  for (int k : ks)
    for (int q = 1; q <= m; ++q) out.push_back({"n_count_k" + std::to_string(k), q});
  out.push_back({"c", n});
  for (int q = 1; q <= m; ++q) out.push_back({"c_mode", q});
  return out;
}

// Time averages in report_layout order.
std::vector<double> averages(const Accumulator& acc) {
  std::vector<double> out;
  const double t = acc.time();
  const std::size_t m = acc.states();
  const std::size_t nk = acc.subset_sizes().size();
  for (std::size_t k = 0; k < nk; ++k) out.push_back(acc.freshest_accurate(k) / t);
  for (std::size_t k = 0; k < nk; ++k) out.push_back(acc.subset_fresh(k) / t);
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t q = 0; q < m; ++q) out.push_back(acc.fresh_mode(k, q) / t);
  for (std::size_t k = 0; k < nk; ++k) {
    double g = 0.0;
    for (std::size_t q = 0; q < m; ++q) g += (acc.accuracy_mode(q) / t) * (acc.fresh_mode(k, q) / t);
    out.push_back(g);
  }
  for (std::size_t k = 0; k < nk; ++k) out.push_back(acc.joint_fresh_accurate(k) / t);
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t q = 0; q < m; ++q) out.push_back(acc.content_count(k, q) / t);
  out.push_back(acc.accuracy() / t);
  for (std::size_t q = 0; q < m; ++q) out.push_back(acc.accuracy_mode(q) / t);
  return out;
}

}  // namespace

double batch_stderr(std::span<const double> batch_means) {
  const std::size_t b = batch_means.size();
  if (b < 2) throw Error(ErrorCode::TooFewBatches, "need at least 2 batches");
  const double mean = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) / b;
  double ss = 0.0;
  for (double x : batch_means) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(b - 1));
  return sd / std::sqrt(static_cast<double>(b));
}

SimReport run(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  WorldState state = init_state(cfg, rng);
  const EventSampler sampler(cfg.generator, cfg.params);

  for (std::int64_t i = 0; i < cfg.warmup_events; ++i) step(state, sampler, rng);

  const std::size_t m = cfg.generator.size();
  Accumulator batch(m, cfg.params.n, cfg.subset_sizes);
  std::vector<std::vector<double>> per_batch;
  per_batch.reserve(static_cast<std::size_t>(cfg.batches));

  Accumulator total(m, cfg.params.n, cfg.subset_sizes);

  SimReport report;
  std::int64_t done = 0;
  for (int b = 0; b < cfg.batches; ++b) {
    const std::int64_t end = cfg.measure_events * (b + 1) / cfg.batches;
    batch.reset();
    for (; done < end; ++done) {
      const Event e = sampler.sample(state, rng);
      batch.observe(state, e.dt);
      const bool changed = apply_event(state, e);
      switch (e.kind) {
        case EventKind::SourceTransition: ++report.counts.source; break;
        case EventKind::Push: ++report.counts.push; break;
        case EventKind::Gossip:
          ++report.counts.gossip;
          report.counts.gossip_accepted += changed;
          break;
      }
    }
    per_batch.push_back(averages(batch));
    total += batch;
  }

  const auto layout = report_layout(total, cfg.params.n);
  const auto overall = averages(total);
  std::vector<double> column(per_batch.size());
  for (std::size_t s = 0; s < layout.size(); ++s) {
    for (std::size_t b = 0; b < per_batch.size(); ++b) column[b] = per_batch[b][s];
    report.estimates.push_back(
        Estimate{layout[s].quantity, layout[s].index, overall[s], batch_stderr(column)});
  }
  report.batches = cfg.batches;
  report.sim_time = total.time();
  return report;
}

// ---------------------------------------------------------------------------
// Report I/O

const Estimate& SimReport::get(const std::string& quantity, int index) const {
  for (const auto& e : estimates) {
    if (e.quantity == quantity && e.index == index) return e;
  }
  throw Error(ErrorCode::InvalidParams,
              "no estimate " + quantity + "[" + std::to_string(index) + "] in report");
}

std::optional<Estimate> SimReport::find(const std::string& quantity, int index) const {
  for (const auto& e : estimates) {
    if (e.quantity == quantity && e.index == index) return e;
  }
  return std::nullopt;
}

std::string report_csv(const SimReport& report) {
  std::ostringstream out;
  out << "quantity,k_or_q,estimate,stderr,batches,sim_time\n";
  out << std::setprecision(17);
  for (const auto& e : report.estimates) {
    out << e.quantity << ',' << e.index << ',' << e.value << ',' << e.std_error << ','
        << report.batches << ',' << report.sim_time << '\n';
  }
  return out.str();
}

SimReport parse_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "quantity,k_or_q,estimate,stderr,batches,sim_time") {
    throw Error(ErrorCode::InvalidConfig, "unexpected report header");
  }
  SimReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 6) throw Error(ErrorCode::InvalidConfig, "bad report row: " + line);
    try {
      report.estimates.push_back(
          Estimate{fields[0], std::stoi(fields[1]), std::stod(fields[2]), std::stod(fields[3])});
      report.batches = std::stoi(fields[4]);
      report.sim_time = std::stod(fields[5]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidConfig, "bad report row: " + line);
    }
  }
  return report;
}

}  // namespace gossip::sim
