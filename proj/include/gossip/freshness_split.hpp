#pragma once

// Splits accuracy into "accurate because fresh" and "accurate but stale".
//
// g_k^(m) = P(Q = m, freshest node of A_k has version age 0) obeys an exact
// backward recursion in k. The fresh-and-accurate fraction is reported in
// product form G_k = sum_m c^(m) g_k^(m).

#include <span>
#include <vector>

#include "gossip/markov_core.hpp"

namespace gossip::split {

struct FreshnessOccupancy {
  /// g[k-1][m]
  std::vector<std::vector<double>> g;

  int n() const noexcept { return static_cast<int>(g.size()); }
  const std::vector<double>& at(int k) const { return g.at(static_cast<std::size_t>(k - 1)); }
  double total(int k) const;
};

struct SplitRow {
  int k = 0;
  double fresh_accurate = 0.0;  // G_k
  double stale_accurate = 0.0;  // c - G_k
  std::vector<double> per_mode;  // c^(m) g_k^(m)
};

struct SplitReport {
  double c = 0.0;
  std::vector<SplitRow> rows;  // rows[k-1]

  const SplitRow& at(int k) const { return rows.at(static_cast<std::size_t>(k - 1)); }
};

FreshnessOccupancy g_recursion(const GeneratorMatrix& g, const NetworkParams& p);

/// Diagonal coefficient matrices (A_k, B_k) with g_k = A_k pi + B_k g_{k+1}.
struct BinaryStepMatrices {
  Matrix a;
  Matrix b;
};
BinaryStepMatrices binary_step_matrices(const GeneratorMatrix& g, const NetworkParams& p, int k);

/// Combines g with mode-tagged accuracies of matching dimension.
SplitReport fresh_accurate_fraction(const FreshnessOccupancy& g, std::span<const double> c_modes);

enum class Regime { LsInf, LsZero, LInf, LZero };

FreshnessOccupancy g_limits(const GeneratorMatrix& g, const NetworkParams& p, Regime regime);

}  // namespace gossip::split
