#include "gossip/freshness_split.hpp"

#include <stdexcept>
#include <numeric>

namespace gossip::split {

double FreshnessOccupancy::total(int k) const {
  const auto& v = at(k);
  return std::accumulate(v.begin(), v.end(), 0.0);
}

FreshnessOccupancy g_recursion(const GeneratorMatrix& g, const NetworkParams& p) {
  p.validate();
  const std::size_t m = g.size();
  const auto pi = stationary_distribution(g);
  const auto& nu = g.exit_rates();

  FreshnessOccupancy out;
  out.g.assign(static_cast<std::size_t>(p.n), std::vector<double>(m, 0.0));
  for (int k = p.n; k >= 1; --k) {
    const auto [alpha, beta, gamma] = rate_triple(p, k);
    auto& row = out.g[static_cast<std::size_t>(k - 1)];
    for (std::size_t mode = 0; mode < m; ++mode) {
      const double inflow = k == p.n ? 0.0 : beta * out.at(k + 1)[mode];
      row[mode] = (alpha * pi[mode] + inflow) / (nu[mode] + alpha + beta);
    }
  }
  return out;
}

BinaryStepMatrices binary_step_matrices(const GeneratorMatrix& g, const NetworkParams& p, int k) {
  if (g.size() != 2) throw Error(ErrorCode::ModeMismatch, "binary form needs M = 2");
  const auto [alpha, beta, gamma] = rate_triple(p, k);
  BinaryStepMatrices out{Matrix(2, 2), Matrix(2, 2)};
  for (std::size_t mode = 0; mode < 2; ++mode) {
    const double d = g.exit_rate(mode) + alpha + beta;
    out.a(mode, mode) = alpha / d;
    out.b(mode, mode) = beta / d;
  }
  return out;
}

SplitReport fresh_accurate_fraction(const FreshnessOccupancy& g, std::span<const double> c_modes) {
  SplitReport out;
  out.c = std::accumulate(c_modes.begin(), c_modes.end(), 0.0);
  for (int k = 1; k <= g.n(); ++k) {
    const auto& gk = g.at(k);
    if (gk.size() != c_modes.size()) {
      throw Error(ErrorCode::ModeMismatch, "g has " + std::to_string(gk.size()) +
                                               " modes, c has " + std::to_string(c_modes.size()));
    }
    SplitRow row;
    row.k = k;
    row.per_mode.resize(gk.size());
    for (std::size_t m = 0; m < gk.size(); ++m) row.per_mode[m] = c_modes[m] * gk[m];
    row.fresh_accurate = std::accumulate(row.per_mode.begin(), row.per_mode.end(), 0.0);
    row.stale_accurate = out.c - row.fresh_accurate;
    if (row.stale_accurate < -1e-12) {
      throw std::logic_error("fresh-and-accurate fraction exceeds accuracy at k=" +
                             std::to_string(k));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

FreshnessOccupancy g_limits(const GeneratorMatrix& g, const NetworkParams& p, Regime regime) {
  p.validate();
  const std::size_t m = g.size();
  const auto pi = stationary_distribution(g);
  FreshnessOccupancy out;
  out.g.assign(static_cast<std::size_t>(p.n), std::vector<double>(m, 0.0));
  for (int k = 1; k <= p.n; ++k) {
    auto& row = out.g[static_cast<std::size_t>(k - 1)];
    const double alpha_k = rate_triple(p, k).alpha;
    for (std::size_t mode = 0; mode < m; ++mode) {
      const double nu = g.exit_rate(mode);
      switch (regime) {
        case Regime::LsInf: row[mode] = pi[mode]; break;
        case Regime::LsZero: row[mode] = 0.0; break;
        // Fast gossip makes every subset look like the whole network.
        case Regime::LInf: row[mode] = p.lambda_s * pi[mode] / (nu + p.lambda_s); break;
        case Regime::LZero: row[mode] = alpha_k * pi[mode] / (nu + alpha_k); break;
      }
    }
  }
  return out;
}

}  // namespace gossip::split
