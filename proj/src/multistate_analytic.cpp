#include "gossip/multistate_analytic.hpp"

#include <optional>

namespace gossip::multistate {

double JointStationary::source_marginal(std::size_t q) const {
  double s = 0.0;
  for (std::size_t r = 0; r < states; ++r) s += at(q, r);
  return s;
}

double JointStationary::accuracy() const {
  double s = 0.0;
  for (std::size_t q = 0; q < states; ++q) s += at(q, q);
  return s;
}

Matrix build_src_component(const GeneratorMatrix& g) {
  const std::size_t m = g.size();
  const JointStateIndex idx{m};
  Matrix out(idx.size(), idx.size());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t j = 0; j < m; ++j) {
        if (j == i) continue;
        out(idx(i, r), idx(j, r)) = g.rate(i, j);
      }
      out(idx(i, r), idx(i, r)) = -g.exit_rate(i);
    }
  }
  return out;
}

Matrix build_push_component(double alpha, std::size_t states) {
  const JointStateIndex idx{states};
  Matrix out(idx.size(), idx.size());
  if (alpha == 0.0) return out;
  for (std::size_t i = 0; i < states; ++i) {
    for (std::size_t r = 0; r < states; ++r) {
      if (r == i) continue;
      out(idx(i, r), idx(i, i)) = alpha;
      out(idx(i, r), idx(i, r)) = -alpha;
    }
  }
  return out;
}

ConditionalContent conditional_content(const JointStationary& next) {
  const std::size_t m = next.states;
  ConditionalContent out{Matrix(m, m)};
  for (std::size_t q = 0; q < m; ++q) {
    const double mass = next.source_marginal(q);
    if (mass < 1e-14) {
      throw Error(ErrorCode::ZeroModeMass, "source state " + std::to_string(q + 1) +
                                               " carries no stationary mass");
    }
    for (std::size_t r = 0; r < m; ++r) out.probs(q, r) = next.at(q, r) / mass;
  }
  return out;
}

Matrix build_out_component(double beta, const ConditionalContent& p) {
  const std::size_t m = p.probs.rows();
  const JointStateIndex idx{m};
  Matrix out(idx.size(), idx.size());
  if (beta == 0.0) return out;
  for (std::size_t q = 0; q < m; ++q) {
    for (std::size_t r = 0; r < m; ++r) {
      double leave = 0.0;
      for (std::size_t r2 = 0; r2 < m; ++r2) {
        if (r2 == r) continue;
        const double rate = beta * p.probs(q, r2);
        out(idx(q, r), idx(q, r2)) = rate;
        leave += rate;
      }
      out(idx(q, r), idx(q, r)) = -leave;
    }
  }
  return out;
}

Matrix assemble_joint_generator(const GeneratorMatrix& g, const NetworkParams& p, int k,
                                const ConditionalContent* next) {
  const auto rates = rate_triple(p, k);
  Matrix qk = build_src_component(g);
  qk += build_push_component(rates.alpha, g.size());
  if (rates.beta > 0.0) {
    if (next == nullptr) {
      throw Error(ErrorCode::InvalidParams, "outsider gossip needs the (k+1) conditional law");
    }
    qk += build_out_component(rates.beta, *next);
  }
  return qk;
}

BackwardResult backward_construct(const GeneratorMatrix& g, const NetworkParams& p) {
  p.validate();
  const std::size_t m = g.size();
  if (m > kMaxStates) {
    throw Error(ErrorCode::StateSpaceTooLarge,
                "M=" + std::to_string(m) + " exceeds the dense ceiling of " +
                    std::to_string(kMaxStates));
  }
  if (!(p.lambda_s > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "the joint-chain construction needs lambda_s > 0");
  }

  BackwardResult out;
  out.pi.resize(static_cast<std::size_t>(p.n));
  out.f.resize(static_cast<std::size_t>(p.n));

  std::optional<ConditionalContent> next;
  for (int k = p.n; k >= 1; --k) {
    const Matrix qk = assemble_joint_generator(g, p, k, next ? &*next : nullptr);
    JointStationary pi{m, stationary_of_rates(qk)};
    const auto slot = static_cast<std::size_t>(k - 1);
    out.f[slot] = pi.accuracy();
    if (k > 1) next = conditional_content(pi);
    out.pi[slot] = std::move(pi);
  }
  return out;
}

std::vector<double> mode_tagged_accuracy(const JointStationary& pi1) {
  std::vector<double> c(pi1.states);
  for (std::size_t q = 0; q < pi1.states; ++q) c[q] = pi1.at(q, q);
  return c;
}

double node_count_content(int k, int n, const StationaryDistribution& pi, std::size_t q) {
  if (k < 1 || k > n) {
    throw Error(ErrorCode::KOutOfRange,
                "k=" + std::to_string(k) + " outside 1.." + std::to_string(n));
  }
  if (q >= pi.size()) throw Error(ErrorCode::ModeMismatch, "content index out of range");
  // P(freshest node of A_k holds q) = pi_q for every k, in particular for a
  // single node.
  return k * pi[q];
}

}  // namespace gossip::multistate
