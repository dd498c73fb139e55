#include "gossip/markov_core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace gossip {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::DegenerateChain: return "DegenerateChain";
    case ErrorCode::AllRatesZero: return "AllRatesZero";
    case ErrorCode::ZeroModeMass: return "ZeroModeMass";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::NotTwoNodes: return "NotTwoNodes";
    case ErrorCode::TooFewBatches: return "TooFewBatches";
    case ErrorCode::DegenerateRun: return "DegenerateRun";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// Matrix

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) {
      throw Error(ErrorCode::BadShape, "ragged rows");
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorCode::BadShape, "matrix sum dimension mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

double Matrix::norm_inf() const {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (double v : row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::BadShape, "matrix-vector mismatch");
  std::vector<double> y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    y[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
  }
  return y;
}

double norm_inf(std::span<const double> v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

std::vector<double> solve_linear(const Matrix& a, std::span<const double> b) {
  const std::size_t d = a.rows();
  if (d == 0 || a.cols() != d || b.size() != d) {
    throw Error(ErrorCode::BadShape, "solve_linear needs a nonempty square system");
  }
  const double threshold = 1e-14 * a.norm_inf();
  Matrix lu = a;
  std::vector<double> x(b.begin(), b.end());

  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    double best = std::abs(lu(col, col));
    for (std::size_t r = col + 1; r < d; ++r) {
      if (std::abs(lu(r, col)) > best) {
        best = std::abs(lu(r, col));
        pivot = r;
      }
    }
    if (!(best > threshold)) {
      throw Error(ErrorCode::SingularSystem,
                  "pivot " + std::to_string(best) + " at column " + std::to_string(col));
    }
    if (pivot != col) {
      std::swap_ranges(lu.row(col).begin(), lu.row(col).end(), lu.row(pivot).begin());
      std::swap(x[col], x[pivot]);
    }
    const double inv = 1.0 / lu(col, col);
    for (std::size_t r = col + 1; r < d; ++r) {
      const double factor = lu(r, col) * inv;
      if (factor == 0.0) continue;
      auto target = lu.row(r);
      const auto source = lu.row(col);
      for (std::size_t c = col; c < d; ++c) target[c] -= factor * source[c];
      x[r] -= factor * x[col];
    }
  }

  for (std::size_t i = d; i-- > 0;) {
    double s = x[i];
    for (std::size_t c = i + 1; c < d; ++c) s -= lu(i, c) * x[c];
    x[i] = s / lu(i, i);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Generators

bool strongly_connected(const Matrix& adj) {
  const std::size_t n = adj.rows();
  if (n == 0) return false;
  auto reaches_all = [&](bool reverse) {
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    std::size_t count = 1;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (v == u || seen[v]) continue;
        const double w = reverse ? adj(v, u) : adj(u, v);
        if (w > 0.0) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  // Strongly connected iff node 0 reaches everyone and everyone reaches 0.
  return reaches_all(false) && reaches_all(true);
}

GeneratorMatrix validate_generator(const Matrix& raw) {
  const std::size_t m = raw.rows();
  if (raw.cols() != m || m < 2) {
    throw Error(ErrorCode::BadShape, "generator must be square with at least 2 states");
  }
  Matrix rates = raw;
  std::vector<double> exit(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double v = raw(i, j);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::BadShape, "non-finite rate in row " + std::to_string(i));
      }
      if (i == j) continue;
      if (v < 0.0) {
        throw Error(ErrorCode::NegativeRate, "q(" + std::to_string(i) + "," +
                                                 std::to_string(j) + ") < 0");
      }
      off += v;
    }
    const double tol = GeneratorMatrix::kRowSumTolerance * std::max(1.0, off);
    if (std::abs(raw(i, i) + off) > tol) {
      throw Error(ErrorCode::RowSumViolation, "row " + std::to_string(i) + " sums to " +
                                                  std::to_string(raw(i, i) + off));
    }
    rates(i, i) = -off;
    exit[i] = off;
  }
  if (!strongly_connected(rates)) {
    throw Error(ErrorCode::Reducible, "positive-rate graph is not strongly connected");
  }
  return GeneratorMatrix(std::move(rates), std::move(exit));
}

GeneratorMatrix GeneratorMatrix::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw Error(ErrorCode::InvalidParams, "scale factor must be positive");
  }
  Matrix r = rates_;
  for (std::size_t i = 0; i < r.rows(); ++i)
    for (double& v : r.row(i)) v *= factor;
  return validate_generator(r);
}

GeneratorMatrix GeneratorMatrix::binary(double q12, double q21) {
  return validate_generator(Matrix::from_rows({{-q12, q12}, {q21, -q21}}));
}

GeneratorMatrix parse_generator_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadShape, std::string("generator JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rates") || !doc["rates"].is_array()) {
    throw Error(ErrorCode::BadShape, "generator JSON needs a \"rates\" array");
  }
  std::vector<std::vector<double>> rows;
  for (const auto& r : doc["rates"]) {
    if (!r.is_array()) throw Error(ErrorCode::BadShape, "rates must be an array of arrays");
    std::vector<double> row;
    for (const auto& v : r) {
      if (!v.is_number()) throw Error(ErrorCode::BadShape, "rates must be numeric");
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  if (doc.contains("states")) {
    if (!doc["states"].is_number_integer() ||
        doc["states"].get<long long>() != static_cast<long long>(rows.size())) {
      throw Error(ErrorCode::BadShape, "\"states\" does not match the rates matrix");
    }
  }
  return validate_generator(Matrix::from_rows(rows));
}

GeneratorMatrix load_generator_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open generator file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_generator_json(buf.str());
}

// ---------------------------------------------------------------------------
// Stationary solves

std::vector<double> stationary_of_rates(const Matrix& rates) {
  const std::size_t d = rates.rows();
  if (d == 0 || rates.cols() != d) throw Error(ErrorCode::BadShape, "rates must be square");
  // Q^T pi^T = 0 with the last equation swapped for sum(pi) = 1.
  Matrix a = rates.transposed();
  for (double& v : a.row(d - 1)) v = 1.0;
  std::vector<double> rhs(d, 0.0);
  rhs[d - 1] = 1.0;
  auto pi = solve_linear(a, rhs);
  // Round-off can leave tiny negatives on states with no mass.
  for (double& p : pi) {
    if (p < 0.0 && p > -1e-13) p = 0.0;
  }
  return pi;
}

double stationary_residual(const Matrix& rates, std::span<const double> pi) {
  std::vector<double> r(rates.cols(), 0.0);
  for (std::size_t i = 0; i < rates.rows(); ++i)
    for (std::size_t j = 0; j < rates.cols(); ++j) r[j] += pi[i] * rates(i, j);
  return norm_inf(r);
}

StationaryDistribution stationary_distribution(const GeneratorMatrix& g) {
  return StationaryDistribution{stationary_of_rates(g.rates())};
}

// ---------------------------------------------------------------------------
// Network rates

void NetworkParams::validate() const {
  if (n < 2) throw Error(ErrorCode::InvalidParams, "n must be at least 2");
  if (!std::isfinite(lambda_s) || lambda_s < 0.0) {
    throw Error(ErrorCode::InvalidParams, "lambda_s must be finite and nonnegative");
  }
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw Error(ErrorCode::InvalidParams, "lambda must be finite and nonnegative");
  }
}

RateTriple rate_triple(const NetworkParams& p, int k) {
  if (k < 1 || k > p.n) {
    throw Error(ErrorCode::KOutOfRange,
                "k=" + std::to_string(k) + " outside 1.." + std::to_string(p.n));
  }
  const double kd = k;
  const double nd = p.n;
  return RateTriple{
      .alpha = kd * p.lambda_s / nd,
      .beta = kd * (nd - kd) * p.lambda / (nd - 1.0),
      .gamma = kd * (kd - 1.0) * p.lambda / (nd - 1.0),
  };
}

}  // namespace gossip
