#include "gossip/exact_oracle.hpp"

#include <stdexcept>
#include <deque>
#include <map>
#include <sstream>
#include <utility>

namespace gossip::oracle {
namespace {

std::uint64_t encode(const CompressedState& s, std::size_t m) {
  std::uint64_t key = s.q;
  key = key * m + s.s1;
  key = key * m + s.s2;
  key = key * 3 + static_cast<std::uint64_t>(s.rel);
  key = key * 2 + s.b1;
  key = key * 2 + s.b2;
  return key;
}

void check_invariants(const CompressedState& s) {
  if (s.rel == Freshness::Tie && (s.s1 != s.s2 || s.b1 != s.b2)) {
    throw std::logic_error("tied nodes must share content and age flag");
  }
  if (s.b1 && s.b2 && s.rel != Freshness::Tie) {
    throw std::logic_error("two age-0 nodes must be tied");
  }
}

// Every transition out of `s` that changes the state.
std::vector<std::pair<CompressedState, double>> successors(const CompressedState& s,
                                                           const GeneratorMatrix& g,
                                                           const NetworkParams& p) {
  std::vector<std::pair<CompressedState, double>> out;
  const std::size_t m = g.size();

  for (std::size_t j = 0; j < m; ++j) {
    if (j == s.q || g.rate(s.q, j) <= 0.0) continue;
    CompressedState t = s;
    t.q = j;
    t.b1 = t.b2 = false;
    out.emplace_back(t, g.rate(s.q, j));
  }

  const double push = p.lambda_s / 2.0;
  if (push > 0.0) {
    for (int node = 0; node < 2; ++node) {
      CompressedState t = s;
      const bool other_fresh = node == 0 ? s.b2 : s.b1;
      (node == 0 ? t.s1 : t.s2) = s.q;
      (node == 0 ? t.b1 : t.b2) = true;
      t.rel = other_fresh ? Freshness::Tie
                          : (node == 0 ? Freshness::FirstFresher : Freshness::SecondFresher);
      if (!(t == s)) out.emplace_back(t, push);
    }
  }

  // n = 2 so each ordered pair fires at lambda / (n - 1) = lambda.
  if (p.lambda > 0.0) {
    if (s.rel == Freshness::FirstFresher) {
      CompressedState t = s;
      t.s2 = s.s1;
      t.b2 = s.b1;
      t.rel = Freshness::Tie;
      out.emplace_back(t, p.lambda);
    } else if (s.rel == Freshness::SecondFresher) {
      CompressedState t = s;
      t.s1 = s.s2;
      t.b1 = s.b2;
      t.rel = Freshness::Tie;
      out.emplace_back(t, p.lambda);
    }
  }
  return out;
}

}  // namespace

CompressedChain build_compressed_chain(const GeneratorMatrix& g, const NetworkParams& p) {
  if (p.n != 2) {
    throw Error(ErrorCode::NotTwoNodes, "exact oracle supports n = 2 only, got n = " +
                                            std::to_string(p.n));
  }
  p.validate();
  const std::size_t m = g.size();

  CompressedChain chain;
  chain.source_states = m;
  std::map<std::uint64_t, std::size_t> index;
  std::vector<std::vector<std::pair<std::size_t, double>>> edges;

  auto intern = [&](const CompressedState& s) {
    const auto key = encode(s, m);
    const auto [it, inserted] = index.emplace(key, chain.states.size());
    if (inserted) {
      check_invariants(s);
      chain.states.push_back(s);
      edges.emplace_back();
    }
    return std::pair{it->second, inserted};
  };

  const CompressedState start{0, 0, 0, Freshness::Tie, true, true};
  std::deque<std::size_t> frontier{intern(start).first};
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop_front();
    const CompressedState s = chain.states[u];
    for (const auto& [t, rate] : successors(s, g, p)) {
      const auto [v, fresh] = intern(t);
      if (fresh) frontier.push_back(v);
      edges[u].emplace_back(v, rate);
    }
  }

  const std::size_t d = chain.states.size();
  chain.rates = Matrix(d, d);
  for (std::size_t u = 0; u < d; ++u) {
    double out = 0.0;
    for (const auto& [v, rate] : edges[u]) {
      chain.rates(u, v) += rate;
      out += rate;
    }
    chain.rates(u, u) = -out;
  }
  return chain;
}

OracleResult oracle_solve(const CompressedChain& chain) {
  const auto pi = stationary_of_rates(chain.rates);
  const std::size_t m = chain.source_states;
  OracleResult r;
  r.content_count.assign(m, 0.0);
  r.c_modes.assign(m, 0.0);
  r.f2_modes.assign(m, 0.0);
  r.g1_modes.assign(m, 0.0);
  r.g2_modes.assign(m, 0.0);

  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const auto& s = chain.states[i];
    const double w = pi[i];
    const bool acc1 = s.s1 == s.q;
    const bool acc2 = s.s2 == s.q;
    r.c += w * (acc1 + acc2) / 2.0;
    r.f1 += w * acc1;
    r.f2 += w * (s.freshest_content() == s.q);
    r.G1 += w * (acc1 && s.b1);
    r.content_count[s.s1] += w;
    r.content_count[s.s2] += w;
    r.c_modes[s.q] += w * acc1;
    r.f2_modes[s.q] += w * (s.freshest_content() == s.q);
    r.g1_modes[s.q] += w * s.b1;
    r.g2_modes[s.q] += w * (s.b1 || s.b2);
  }
  return r;
}

std::string chain_csv(const CompressedChain& chain) {
  std::ostringstream out;
  out << "index,q,s1,s2,rel,b1,b2\n";
  static constexpr const char* kRel[] = {"first", "second", "tie"};
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const auto& s = chain.states[i];
    out << i << ',' << s.q + 1 << ',' << s.s1 + 1 << ',' << s.s2 + 1 << ','
        << kRel[static_cast<int>(s.rel)] << ',' << s.b1 << ',' << s.b2 << '\n';
  }
  return out.str();
}

}  // namespace gossip::oracle
