#pragma once

// Joint chain of (source state, content of the freshest subset node) for an
// M-state source, assembled subset size by subset size from k = n down to 1.

#include <cstddef>
#include <vector>

#include "gossip/markov_core.hpp"

namespace gossip::multistate {

/// Largest source accepted by the joint-chain solver (M^2 = 1600 states).
inline constexpr std::size_t kMaxStates = 40;

/// Zero-based (q, r) <-> q*M + r, i.e. (1,1),(1,2),...,(M,M).
struct JointStateIndex {
  std::size_t states;

  std::size_t operator()(std::size_t q, std::size_t r) const noexcept { return q * states + r; }
  std::size_t source_of(std::size_t idx) const noexcept { return idx / states; }
  std::size_t content_of(std::size_t idx) const noexcept { return idx % states; }
  std::size_t size() const noexcept { return states * states; }
};

struct JointStationary {
  std::size_t states = 0;
  std::vector<double> probs;  // indexed by JointStateIndex

  double at(std::size_t q, std::size_t r) const { return probs[q * states + r]; }
  /// sum_r pi_{q,r}
  double source_marginal(std::size_t q) const;
  /// sum_q pi_{q,q}
  double accuracy() const;
};

/// Row-stochastic p_{r|q}.
struct ConditionalContent {
  Matrix probs;
};

Matrix build_src_component(const GeneratorMatrix& g);
Matrix build_push_component(double alpha, std::size_t states);
ConditionalContent conditional_content(const JointStationary& next);
Matrix build_out_component(double beta, const ConditionalContent& p);

struct BackwardResult {
  /// pi[k-1] is the joint stationary law for subset size k.
  std::vector<JointStationary> pi;
  /// f[k-1] = sum_q pi^(k)_{q,q}.
  std::vector<double> f;

  int n() const noexcept { return static_cast<int>(f.size()); }
  const JointStationary& pi_at(int k) const { return pi.at(static_cast<std::size_t>(k - 1)); }
  double f_at(int k) const { return f.at(static_cast<std::size_t>(k - 1)); }
};

/// Joint generator for subset size k given p^(k+1) (ignored when beta_k = 0).
Matrix assemble_joint_generator(const GeneratorMatrix& g, const NetworkParams& p, int k,
                                const ConditionalContent* next);

/// Builds every Q_k and pi^(k) from k = n down to 1. Needs lambda_s > 0.
BackwardResult backward_construct(const GeneratorMatrix& g, const NetworkParams& p);

/// c^(m) = pi^(1)_{m,m}; sums to f_1 which is the average accuracy.
std::vector<double> mode_tagged_accuracy(const JointStationary& pi1);

/// Expected number of nodes of a k-subset holding content q: k * pi_q.
double node_count_content(int k, int n, const StationaryDistribution& pi, std::size_t q);

}  // namespace gossip::multistate
