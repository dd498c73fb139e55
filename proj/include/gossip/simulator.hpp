#pragma once

// Continuous-time event-driven simulation of a source CTMC pushing to a
// fully connected gossip network with freshness-based acceptance.
//
// Ages are kept implicitly as version counters: the source holds V_0 and each
// node holds (V_i, S_i). A source transition bumps V_0 only, so every node
// ages by one without touching the node array.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gossip/markov_core.hpp"

namespace gossip::sim {

/// SplitMix64 seeding into xoshiro256**. Both are published, small and
/// bit-reproducible across platforms, unlike std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on {0, ..., bound - 1}.
  std::uint64_t below(std::uint64_t bound);
  double exponential(double rate);

 private:
  std::uint64_t s_[4];
};

struct SimConfig {
  GeneratorMatrix generator;
  NetworkParams params;
  std::uint64_t seed = 1;
  std::int64_t warmup_events = 0;
  std::int64_t measure_events = 0;
  std::vector<int> subset_sizes;
  int batches = 20;

  /// Throws InvalidConfig / TooFewBatches / KOutOfRange on violations.
  void validate() const;
};

/// Parses the JSON config. `base_dir` resolves a relative "generator_file".
/// A missing warmup_events defaults to 10% of measure_events.
SimConfig parse_sim_config(const std::string& text, const std::filesystem::path& base_dir = {});
SimConfig load_sim_config(const std::filesystem::path& path);
/// Config echo used for the provenance sidecar.
std::string sim_config_json(const SimConfig& cfg);

struct WorldState {
  std::size_t source = 0;            // Q, zero-based
  std::uint64_t source_version = 0;  // V_0
  std::vector<std::uint64_t> version;
  std::vector<std::size_t> content;
  double time = 0.0;

  std::size_t nodes() const noexcept { return version.size(); }
  std::uint64_t age(std::size_t i) const { return source_version - version[i]; }
  bool accurate(std::size_t i) const { return content[i] == source; }
};

/// Synchronized start: Q drawn from pi, every node fresh and accurate.
WorldState init_state(const SimConfig& cfg, Rng& rng);

enum class EventKind : std::uint8_t { SourceTransition, Push, Gossip };

struct Event {
  EventKind kind = EventKind::SourceTransition;
  double dt = 0.0;
  std::size_t to_state = 0;  // SourceTransition
  std::size_t sender = 0;    // Gossip
  std::size_t target = 0;    // Push, Gossip
};

/// Precomputed sampling tables for one configuration.
class EventSampler {
 public:
  EventSampler(const GeneratorMatrix& g, const NetworkParams& p);

  Event sample(const WorldState& state, Rng& rng) const;
  double total_rate(std::size_t source) const;

 private:
  NetworkParams p_;
  std::vector<double> exit_;
  // jump_cdf_[i] lists (cumulative rate, destination) for leaving state i.
  std::vector<std::vector<std::pair<double, std::size_t>>> jump_cdf_;
};

/// Applies the event's reset map. Gossip is accepted only when the sender is
/// strictly fresher; equal versions carry equal content so ties are no-ops.
/// Returns false when the event left the node state unchanged.
bool apply_event(WorldState& state, const Event& e);

/// Samples and applies one event.
Event step(WorldState& state, const EventSampler& sampler, Rng& rng);

/// Time-weighted integrals of every reported indicator over one window.
class Accumulator {
 public:
  Accumulator(std::size_t states, int n, std::vector<int> subset_sizes);

  /// Adds dt times the indicators of `state`.
  void observe(const WorldState& state, double dt);
  void reset();
  /// Sums integrals of two windows over the same quantities.
  Accumulator& operator+=(const Accumulator& other);

  double time() const noexcept { return time_; }
  const std::vector<int>& subset_sizes() const noexcept { return ks_; }
  std::size_t states() const noexcept { return states_; }

  // Integrals (not yet divided by time). ki indexes subset_sizes.
  double freshest_accurate(std::size_t ki) const { return freshest_accurate_[ki]; }
  double subset_fresh(std::size_t ki) const { return subset_fresh_[ki]; }
  double fresh_mode(std::size_t ki, std::size_t m) const { return fresh_mode_[ki * states_ + m]; }
  double content_count(std::size_t ki, std::size_t q) const { return count_[ki * states_ + q]; }
  double joint_fresh_accurate(std::size_t ki) const { return joint_[ki]; }
  double accuracy() const noexcept { return accuracy_; }
  double accuracy_mode(std::size_t m) const { return accuracy_mode_[m]; }

 private:
  std::size_t states_;
  int n_;
  std::vector<int> ks_;
  double time_ = 0.0;
  std::vector<double> freshest_accurate_;
  std::vector<double> subset_fresh_;
  std::vector<double> fresh_mode_;
  std::vector<double> count_;
  std::vector<double> joint_;
  double accuracy_ = 0.0;
  std::vector<double> accuracy_mode_;
  std::vector<double> scratch_;
};

struct Estimate {
  std::string quantity;
  int index = 0;  // subset size k or 1-based content/mode q, depending on quantity
  double value = 0.0;
  double std_error = 0.0;
};

struct EventCounts {
  std::int64_t source = 0;
  std::int64_t push = 0;
  std::int64_t gossip = 0;
  std::int64_t gossip_accepted = 0;
};

/// Quantities (index meaning in parentheses):
///   f (k)              freshest node of {1..k} accurate
///   fresh (k)          freshest node of {1..k} has age 0
///   g_mode_k<K> (m)    Q = m and freshest node of {1..K} has age 0
///   G_product (k)      sum_m c^(m) g_k^(m) built from simulated parts
///   G_joint (k)        fraction of {1..k} that is both fresh and accurate
///   n_count_k<K> (q)   number of nodes in {1..K} holding q
///   c (n)              fraction of all nodes that are accurate
///   c_mode (m)         that fraction tagged with Q = m
struct SimReport {
  std::vector<Estimate> estimates;
  int batches = 0;
  double sim_time = 0.0;
  EventCounts counts;

  /// Throws InvalidParams when absent.
  const Estimate& get(const std::string& quantity, int index) const;
  std::optional<Estimate> find(const std::string& quantity, int index) const;
};

/// Sample standard deviation of batch means over sqrt(batches).
double batch_stderr(std::span<const double> batch_means);

/// Warm-up, then `measure_events` events split into contiguous batches.
SimReport run(const SimConfig& cfg);

/// `quantity,k_or_q,estimate,stderr,batches,sim_time` with a header row.
std::string report_csv(const SimReport& report);
/// Parses report_csv output back.
SimReport parse_report_csv(const std::string& csv);

}  // namespace gossip::sim
