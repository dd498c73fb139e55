#pragma once

// Steady-state accuracy for a two-state source: the mode-tagged freshness
// recursion over subset size, the average-accuracy system, the asymptotic
// regimes and the scalar recursion for a symmetric source.

#include <vector>

#include "gossip/markov_core.hpp"

namespace gossip::binary {

/// Expectation split by source mode: v1 is tagged with Q=1, v2 with Q=2.
struct ModeTaggedPair {
  double v1 = 0.0;
  double v2 = 0.0;

  double sum() const noexcept { return v1 + v2; }
};

struct FreshnessProfile {
  /// by_k[k-1] holds (f_k^(1), f_k^(2)) for k = 1..n.
  std::vector<ModeTaggedPair> by_k;

  int n() const noexcept { return static_cast<int>(by_k.size()); }
  const ModeTaggedPair& at(int k) const { return by_k.at(static_cast<std::size_t>(k - 1)); }
  double f(int k) const { return at(k).sum(); }
};

struct AccuracyReport {
  ModeTaggedPair modes;  // c^(1), c^(2)
  ModeTaggedPair f2;     // freshness input used in the solve
  double c() const noexcept { return modes.sum(); }
};

/// Binary chain rates, q12 = rate 1->2 and q21 = rate 2->1.
struct BinarySource {
  double q12 = 0.0;
  double q21 = 0.0;

  double total() const noexcept { return q12 + q21; }
  double pi1() const { return q21 / total(); }
  double pi2() const { return q12 / total(); }

  static BinarySource from(const GeneratorMatrix& g);
};

/// Closed-form f_n (whole network, no outside gossip).
ModeTaggedPair boundary_fn(double q12, double q21, double lambda_s);

/// Backward recursion W_k f_k = v_k + beta_k f_{k+1}, k = n-1..1.
FreshnessProfile freshness_recursion(double q12, double q21, const NetworkParams& p);

/// Solves Wbar c = b + lambda f2.
AccuracyReport average_accuracy(double q12, double q21, const NetworkParams& p,
                                const ModeTaggedPair& f2);

/// freshness_recursion followed by average_accuracy.
AccuracyReport solve_accuracy(double q12, double q21, const NetworkParams& p);

enum class Regime { LsInf, LsZero, LInf, LZero };

/// Exact limit of the average accuracy. The rate being sent to its limit is
/// ignored; the other one is read from `p`.
AccuracyReport limit_accuracy(double q12, double q21, const NetworkParams& p, Regime regime);

/// Scalar recursion for q12 = q21 = q; index k-1 holds f_{k,sym}.
std::vector<double> symmetric_freshness(double q, const NetworkParams& p);

/// Average accuracy of a symmetric source given f_{2,sym}.
double symmetric_accuracy(double q, const NetworkParams& p, double f2sym);

}  // namespace gossip::binary
