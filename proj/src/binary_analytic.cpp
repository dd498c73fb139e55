#include "gossip/binary_analytic.hpp"

#include <array>
#include <cmath>

namespace gossip::binary {
namespace {

void check_chain(double q12, double q21) {
  if (!(q12 > 0.0) || !(q21 > 0.0) || !std::isfinite(q12) || !std::isfinite(q21)) {
    throw Error(ErrorCode::DegenerateChain, "binary chain needs q12 > 0 and q21 > 0");
  }
}

// Solves [[q12 + d, q21], [q12, q21 + d]] x = rhs through the shared solver.
ModeTaggedPair solve_mode_system(double q12, double q21, double diag_extra,
                                 std::array<double, 2> rhs) {
  const Matrix w = Matrix::from_rows({{q12 + diag_extra, q21}, {q12, q21 + diag_extra}});
  const auto x = solve_linear(w, rhs);
  return {x[0], x[1]};
}

}  // namespace

BinarySource BinarySource::from(const GeneratorMatrix& g) {
  if (g.size() != 2) throw Error(ErrorCode::ModeMismatch, "expected a two-state generator");
  return {g.rate(0, 1), g.rate(1, 0)};
}

ModeTaggedPair boundary_fn(double q12, double q21, double lambda_s) {
  if (!(q12 + q21 > 0.0)) throw Error(ErrorCode::DegenerateChain, "q12 + q21 = 0");
  if (!(lambda_s >= 0.0)) throw Error(ErrorCode::InvalidParams, "lambda_s must be >= 0");
  const double s = q12 + q21;
  if (std::isinf(lambda_s)) return {q21 / s, q12 / s};
  const double denom = s * (lambda_s + s);
  return {q21 * (lambda_s + q21) / denom, q12 * (lambda_s + q12) / denom};
}

FreshnessProfile freshness_recursion(double q12, double q21, const NetworkParams& p) {
  check_chain(q12, q21);
  p.validate();
  if (p.lambda_s == 0.0 && p.lambda == 0.0) {
    throw Error(ErrorCode::AllRatesZero, "lambda_s and lambda cannot both be zero");
  }
  const BinarySource src{q12, q21};
  const double pi1 = src.pi1();
  const double pi2 = src.pi2();

  FreshnessProfile out;
  out.by_k.resize(static_cast<std::size_t>(p.n));
  out.by_k.back() = boundary_fn(q12, q21, p.lambda_s);
  for (int k = p.n - 1; k >= 1; --k) {
    const auto [alpha, beta, gamma] = rate_triple(p, k);
    const auto& next = out.at(k + 1);
    out.by_k[static_cast<std::size_t>(k - 1)] =
        solve_mode_system(q12, q21, alpha + beta,
                          {q21 * pi2 + alpha * pi1 + beta * next.v1,
                           q12 * pi1 + alpha * pi2 + beta * next.v2});
  }
  return out;
}

AccuracyReport average_accuracy(double q12, double q21, const NetworkParams& p,
                                const ModeTaggedPair& f2) {
  check_chain(q12, q21);
  p.validate();
  const BinarySource src{q12, q21};
  const double mu = p.mu();
  const double lambda = p.lambda;
  AccuracyReport r;
  r.f2 = f2;
  r.modes = solve_mode_system(q12, q21, mu + lambda,
                              {q21 * src.pi2() + mu * src.pi1() + lambda * f2.v1,
                               q12 * src.pi1() + mu * src.pi2() + lambda * f2.v2});
  return r;
}

AccuracyReport solve_accuracy(double q12, double q21, const NetworkParams& p) {
  const auto profile = freshness_recursion(q12, q21, p);
  return average_accuracy(q12, q21, p, profile.at(2));
}

AccuracyReport limit_accuracy(double q12, double q21, const NetworkParams& p, Regime regime) {
  check_chain(q12, q21);
  const BinarySource src{q12, q21};
  const double s = src.total();
  AccuracyReport r;
  switch (regime) {
    case Regime::LsInf:
      r.modes = {src.pi1(), src.pi2()};
      r.f2 = r.modes;
      break;
    case Regime::LInf:
      r.modes = boundary_fn(q12, q21, p.lambda_s);
      r.f2 = r.modes;
      break;
    case Regime::LZero: {
      const double mu = p.mu();
      const double denom = s * (s + mu);
      r.modes = {q21 * (q21 + mu) / denom, q12 * (q12 + mu) / denom};
      break;
    }
    case Regime::LsZero: {
      if (!(p.lambda > 0.0)) {
        throw Error(ErrorCode::DegenerateChain, "the lambda_s -> 0 limit needs lambda > 0");
      }
      NetworkParams silent = p;
      silent.lambda_s = 0.0;
      r.f2 = freshness_recursion(q12, q21, silent).at(2);
      r.modes = solve_mode_system(q12, q21, p.lambda,
                                  {q21 * src.pi2() + p.lambda * r.f2.v1,
                                   q12 * src.pi1() + p.lambda * r.f2.v2});
      break;
    }
  }
  return r;
}

std::vector<double> symmetric_freshness(double q, const NetworkParams& p) {
  check_chain(q, q);
  p.validate();
  std::vector<double> f(static_cast<std::size_t>(p.n));
  f.back() = (q + p.lambda_s) / (2.0 * q + p.lambda_s);
  for (int k = p.n - 1; k >= 1; --k) {
    const auto [alpha, beta, gamma] = rate_triple(p, k);
    const double next = f[static_cast<std::size_t>(k)];
    f[static_cast<std::size_t>(k - 1)] = (q + alpha + beta * next) / (2.0 * q + alpha + beta);
  }
  return f;
}

double symmetric_accuracy(double q, const NetworkParams& p, double f2sym) {
  check_chain(q, q);
  p.validate();
  const double mu = p.mu();
  return (q + mu + p.lambda * f2sym) / (2.0 * q + mu + p.lambda);
}

}  // namespace gossip::binary
