#pragma once

// Exact steady state of the two-node network. Unbounded version counters are
// lumped into (source state, contents, who is strictly fresher, age-0 flags),
// which is all the accuracy and freshness readouts depend on.

#include <cstdint>
#include <string>
#include <vector>

#include "gossip/markov_core.hpp"

namespace gossip::oracle {

enum class Freshness : std::uint8_t { FirstFresher, SecondFresher, Tie };

struct CompressedState {
  std::size_t q = 0;
  std::size_t s1 = 0;
  std::size_t s2 = 0;
  Freshness rel = Freshness::Tie;
  bool b1 = false;
  bool b2 = false;

  bool operator==(const CompressedState&) const = default;

  /// Content of the fresher node; node 1 on a tie.
  std::size_t freshest_content() const { return rel == Freshness::SecondFresher ? s2 : s1; }
};

struct CompressedChain {
  std::size_t source_states = 0;
  std::vector<CompressedState> states;
  Matrix rates;  // generator over `states`
};

/// Reachable closure from the synchronized start (all fresh, all accurate).
CompressedChain build_compressed_chain(const GeneratorMatrix& g, const NetworkParams& p);

struct OracleResult {
  double c = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double G1 = 0.0;  // P(node 1 accurate and age 0)
  std::vector<double> content_count;  // n^(q), sums to 2
  std::vector<double> c_modes;        // P(node 1 accurate, Q = m)
  std::vector<double> f2_modes;       // P(fresher node accurate, Q = m)
  std::vector<double> g1_modes;       // P(Q = m, node 1 age 0)
  std::vector<double> g2_modes;       // P(Q = m, some node age 0)
};

OracleResult oracle_solve(const CompressedChain& chain);

/// One state per line, for debugging.
std::string chain_csv(const CompressedChain& chain);

}  // namespace gossip::oracle
