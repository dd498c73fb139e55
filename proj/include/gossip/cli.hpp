#pragma once

// Command-line front end: analytic tables, simulation runs and
// analytic-vs-simulation sweeps, all emitted as CSV.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gossip/markov_core.hpp"
#include "gossip/simulator.hpp"

namespace gossip::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kNumericFailure = 2,
  kStrictFailure = 3,
};

/// Every analytic quantity for one parameter point. Binary sources go through
/// the 2x2 recursions, larger ones through the joint-chain construction.
struct AnalyticPoint {
  std::vector<double> f;        // f[k-1]
  std::vector<double> c_modes;  // c^(m)
  double c = 0.0;
  std::vector<double> pi;             // source stationary law
  std::vector<std::vector<double>> g;  // g[k-1][m]
  std::vector<double> G;              // G[k-1] = sum_m c^(m) g_k^(m)
};

AnalyticPoint analytic_point(const GeneratorMatrix& g, const NetworkParams& p);

enum class SweepParam { LambdaS, Lambda, K };

/// One (value, quantity) comparison between the analytic prediction and a
/// simulation estimate. Missing sides are NaN.
struct ComparisonRow {
  double value = 0.0;
  std::string quantity;
  int index = 0;
  double analytic = 0.0;
  double simulated = 0.0;
  double std_error = 0.0;

  double z() const;
  bool flagged() const;
};

struct SweepSpec {
  SweepParam parameter = SweepParam::LambdaS;
  std::vector<double> values;
  GeneratorMatrix generator;
  NetworkParams fixed;
  bool analytic = true;
  bool simulate = true;
  /// Quantity names: f, c, n_count, G_product.
  std::vector<std::string> quantities{"f"};
  int k = 1;  // subset size for f / n_count / G_product when not sweeping k
  std::int64_t events = 2'250'000;
  int batches = 30;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Runs every sweep point (concurrently) and returns rows sorted by value.
std::vector<ComparisonRow> sweep_and_compare(const SweepSpec& spec);

std::string comparison_csv(const std::vector<ComparisonRow>& rows, SweepParam param);
std::vector<ComparisonRow> parse_comparison_csv(const std::string& csv);

/// Seed for sweep point `i` derived from the base seed.
std::uint64_t point_seed(std::uint64_t base, std::size_t i);

/// Runs independent simulations concurrently, preserving input order.
std::vector<sim::SimReport> run_all(const std::vector<sim::SimConfig>& configs,
                                    unsigned threads = 0);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gossip::cli
