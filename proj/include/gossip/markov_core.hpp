#pragma once

// Dense linear algebra, CTMC generators and the per-subset rate model shared
// by the analytic solvers, the exact oracle and the simulator.

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "gossip/error.hpp"

namespace gossip {

/// Row-major dense matrix. Small and boring on purpose: the largest system
/// solved anywhere is M^2 x M^2 with M <= 40.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  Matrix transposed() const;
  Matrix& operator+=(const Matrix& other);

  /// Max absolute row sum.
  double norm_inf() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

double norm_inf(std::span<const double> v);

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws SingularSystem when a pivot falls below 1e-14 * ||A||_inf.
std::vector<double> solve_linear(const Matrix& a, std::span<const double> b);

/// Validated CTMC rate matrix. Off-diagonals are nonnegative, rows sum to
/// zero and the positive-rate digraph is strongly connected.
class GeneratorMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-9;

  std::size_t size() const noexcept { return rates_.rows(); }
  const Matrix& rates() const noexcept { return rates_; }
  double rate(std::size_t i, std::size_t j) const { return rates_(i, j); }

  /// Exit rates nu_m = -q_mm.
  const std::vector<double>& exit_rates() const noexcept { return exit_rates_; }
  double exit_rate(std::size_t m) const { return exit_rates_[m]; }

  /// Same chain with every rate multiplied by `factor` > 0.
  GeneratorMatrix scaled(double factor) const;

  /// Binary chain with q12 = `q12`, q21 = `q21`.
  static GeneratorMatrix binary(double q12, double q21);

 private:
  friend GeneratorMatrix validate_generator(const Matrix& raw);
  GeneratorMatrix(Matrix rates, std::vector<double> exit_rates)
      : rates_(std::move(rates)), exit_rates_(std::move(exit_rates)) {}

  Matrix rates_;
  std::vector<double> exit_rates_;
};

/// Checks shape, sign, row sums (supplied diagonal must match the negated
/// off-diagonal sum to 1e-9) and irreducibility. The stored diagonal is the
/// recomputed one so rows sum to zero exactly.
GeneratorMatrix validate_generator(const Matrix& raw);

/// Reads `{"states": M, "rates": [[...], ...]}` and validates it.
GeneratorMatrix load_generator_json(const std::filesystem::path& path);
GeneratorMatrix parse_generator_json(const std::string& text);

/// True when the digraph with an edge i->j for every adj(i,j) > 0 (i != j)
/// is strongly connected.
bool strongly_connected(const Matrix& adj);

struct StationaryDistribution {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

/// Solves pi Q = 0 with sum(pi) = 1. The last balance equation is replaced by
/// the normalization row and the dense system is solved directly.
StationaryDistribution stationary_distribution(const GeneratorMatrix& g);

/// Same solve for an arbitrary square rate matrix with zero row sums that is
/// not required to be validated (joint chains, the exact oracle).
std::vector<double> stationary_of_rates(const Matrix& rates);

/// ||pi Q||_inf.
double stationary_residual(const Matrix& rates, std::span<const double> pi);

struct RateTriple {
  double alpha = 0.0;  // source pushes into the subset
  double beta = 0.0;   // gossip from outside into the subset
  double gamma = 0.0;  // gossip inside the subset
};

struct NetworkParams {
  int n = 2;
  double lambda_s = 0.0;
  double lambda = 0.0;

  /// Per-node source push rate.
  double mu() const noexcept { return lambda_s / n; }

  /// Throws InvalidParams unless n >= 2 and both rates are finite and >= 0.
  void validate() const;
};

/// alpha_k = k ls / n, beta_k = k(n-k) l/(n-1), gamma_k = k(k-1) l/(n-1).
RateTriple rate_triple(const NetworkParams& p, int k);

}  // namespace gossip
