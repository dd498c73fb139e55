#pragma once

// Reference computations for the tests. Everything here is derived from the
// model directly and shares no code path with the library solvers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace testing_support {

using Dense = std::vector<std::vector<double>>;

inline const Dense kFourState = {
    {-1.0, 0.25, 0.15, 0.6},
    {0.4, -0.85, 0.3, 0.15},
    {0.2, 0.85, -1.15, 0.1},
    {0.15, 0.25, 0.45, -0.85},
};

// Gauss-Jordan with full pivoting.
inline std::vector<double> gauss_jordan(Dense a, std::vector<double> b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j)
        if (std::abs(a[i][j]) > std::abs(a[pr][pc])) pr = i, pc = j;
    if (std::abs(a[pr][pc]) < 1e-300) throw std::runtime_error("gauss_jordan: singular");
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (auto& row : a) std::swap(row[k], row[pc]);
    std::swap(col[k], col[pc]);
    const double piv = a[k][k];
    for (std::size_t j = 0; j < n; ++j) a[k][j] /= piv;
    b[k] /= piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || a[i][k] == 0.0) continue;
      const double f = a[i][k];
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[col[k]] = b[k];
  return x;
}

// Stationary law by power iteration on the uniformized chain P = I + Q/L.
inline std::vector<double> power_stationary(const Dense& q, double tol = 1e-15,
                                            int max_iter = 2'000'000) {
  const std::size_t n = q.size();
  double lam = 0.0;
  for (std::size_t i = 0; i < n; ++i) lam = std::max(lam, -q[i][i]);
  lam *= 1.05;
  std::vector<double> x(n, 1.0 / static_cast<double>(n)), y(n);
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = x[j];
      for (std::size_t i = 0; i < n; ++i) s += x[i] * q[i][j] / lam;
      y[j] = s;
    }
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(y[j] - x[j]));
    x.swap(y);
    if (diff < tol) break;
  }
  return x;
}

// First-moment balance equations for x_k(m, r) = P(Q = m, freshest of A_k
// holds r), written out entry by entry and solved with gauss_jordan:
//   0 = sum_j q_jm x(j,r) - nu_m x(m,r) + alpha (pi_m [m==r] - x(m,r))
//       + beta (x_{k+1}(m,r) - x(m,r))
// Returns f[k-1] = sum_m x_k(m, m) and x[k-1] flattened as m*M + r.
struct MomentSolution {
  std::vector<double> f;
  std::vector<std::vector<double>> x;
};

inline MomentSolution moment_freshness(const Dense& q, int n, double lambda_s, double lambda) {
  const std::size_t m = q.size();
  const auto pi = power_stationary(q);
  MomentSolution out;
  out.f.assign(static_cast<std::size_t>(n), 0.0);
  out.x.assign(static_cast<std::size_t>(n), std::vector<double>(m * m, 0.0));
  for (int k = n; k >= 1; --k) {
    const double alpha = k * lambda_s / n;
    const double beta = static_cast<double>(k) * (n - k) * lambda / (n - 1);
    Dense a(m * m, std::vector<double>(m * m, 0.0));
    std::vector<double> rhs(m * m, 0.0);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t row = s * m + r;
        a[row][row] += -q[s][s] + alpha + beta;
        for (std::size_t j = 0; j < m; ++j)
          if (j != s) a[row][j * m + r] -= q[j][s];
        rhs[row] = alpha * pi[s] * (s == r ? 1.0 : 0.0);
        if (k < n) rhs[row] += beta * out.x[static_cast<std::size_t>(k)][row];
      }
    }
    auto sol = gauss_jordan(a, rhs);
    double f = 0.0;
    for (std::size_t s = 0; s < m; ++s) f += sol[s * m + s];
    out.f[static_cast<std::size_t>(k - 1)] = f;
    out.x[static_cast<std::size_t>(k - 1)] = std::move(sol);
  }
  return out;
}

// Binary mode-tagged freshness by Gauss-Seidel sweeps of the balance equations
//   (q12 + a + b) x1 + q21 x2 = q21 pi2 + a pi1 + b y1
//   q12 x1 + (q21 + a + b) x2 = q12 pi1 + a pi2 + b y2
// where y = f_{k+1} (zero when k = n).
struct Pair {
  double v1 = 0.0;
  double v2 = 0.0;
};

inline Pair binary_mode_fixed_point(double q12, double q21, double a, double b, Pair y) {
  const double pi1 = q21 / (q12 + q21), pi2 = q12 / (q12 + q21);
  Pair x{pi1 / 2, pi2 / 2};
  for (int it = 0; it < 200000; ++it) {
    const Pair old = x;
    x.v1 = (q21 * pi2 + a * pi1 + b * y.v1 - q21 * x.v2) / (q12 + a + b);
    x.v2 = (q12 * pi1 + a * pi2 + b * y.v2 - q12 * x.v1) / (q21 + a + b);
    if (std::abs(x.v1 - old.v1) + std::abs(x.v2 - old.v2) < 1e-16) break;
  }
  return x;
}

inline std::vector<Pair> binary_freshness_oracle(double q12, double q21, int n, double lambda_s,
                                                 double lambda) {
  std::vector<Pair> f(static_cast<std::size_t>(n));
  Pair next{};
  for (int k = n; k >= 1; --k) {
    const double a = k * lambda_s / n;
    const double b = static_cast<double>(k) * (n - k) * lambda / (n - 1);
    next = binary_mode_fixed_point(q12, q21, a, b, next);
    f[static_cast<std::size_t>(k - 1)] = next;
  }
  return f;
}

// A random irreducible generator: a directed cycle plus random extra edges.
inline Dense random_generator(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> rate(0.05, 2.0);
  std::bernoulli_distribution extra(0.5);
  Dense q(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    q[i][(i + 1) % m] = rate(rng);
    for (std::size_t j = 0; j < m; ++j)
      if (j != i && q[i][j] == 0.0 && extra(rng)) q[i][j] = rate(rng);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) s += q[i][j];
    q[i][i] = -s;
  }
  return q;
}

}  // namespace testing_support
