#include <doctest.h>

#include "error_check.hpp"
#include "gossip/binary_analytic.hpp"
#include "gossip/exact_oracle.hpp"
#include "gossip/multistate_analytic.hpp"
#include "support.hpp"

using namespace gossip;
using namespace gossip::oracle;
namespace ts = testing_support;

TEST_SUITE("exact_oracle") {

TEST_CASE("reachable state counts") {
  // Consistent tuples: tie with both age-0 (M), tie with both stale (M^2),
  // strictly fresher node age-0 (2 M^2) or stale (2 M^3). All are reachable.
  const auto count = [](std::size_t m) { return m + 3 * m * m + 2 * m * m * m; };
  const auto bin = build_compressed_chain(GeneratorMatrix::binary(0.25, 0.75), {2, 1.0, 1.0});
  CHECK(bin.states.size() == count(2));
  const auto four = build_compressed_chain(validate_generator(Matrix::from_rows(ts::kFourState)),
                                           {2, 1.0, 1.0});
  CHECK(four.states.size() == count(4));
  for (std::size_t i = 0; i < four.rates.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < four.rates.cols(); ++j) s += four.rates(i, j);
    CHECK(std::abs(s) < 1e-12);
  }
  const auto csv = chain_csv(bin);
  CHECK(csv.rfind("index,q,s1,s2,rel,b1,b2\n0,1,1,1,tie,1,1\n", 0) == 0);
}

TEST_CASE("binary source matches the recursions") {
  for (double ls : {0.1, 1.0, 10.0}) {
    for (double l : {0.1, 1.0, 10.0}) {
      const NetworkParams p{2, ls, l};
      const auto r = oracle_solve(build_compressed_chain(GeneratorMatrix::binary(0.25, 0.75), p));
      const auto prof = binary::freshness_recursion(0.25, 0.75, p);
      const auto acc = binary::average_accuracy(0.25, 0.75, p, prof.at(2));
      CHECK(r.f1 == doctest::Approx(prof.f(1)).epsilon(1e-10));
      CHECK(r.f2 == doctest::Approx(prof.f(2)).epsilon(1e-10));
      CHECK(r.c == doctest::Approx(acc.c()).epsilon(1e-10));
      CHECK(r.c_modes[0] == doctest::Approx(acc.modes.v1).epsilon(1e-10));
      CHECK(r.f2_modes[1] == doctest::Approx(prof.at(2).v2).epsilon(1e-10));
      CHECK(r.content_count[0] == doctest::Approx(2 * 0.75).epsilon(1e-10));
      CHECK(r.content_count[1] == doctest::Approx(2 * 0.25).epsilon(1e-10));
    }
  }
}

TEST_CASE("four-state source matches the joint chain") {
  const auto g = validate_generator(Matrix::from_rows(ts::kFourState));
  const auto pi = stationary_distribution(g);
  for (double l : {0.1, 1.0, 10.0}) {
    const NetworkParams p{2, 1.0, l};
    const auto r = oracle_solve(build_compressed_chain(g, p));
    const auto res = multistate::backward_construct(g, p);
    CHECK(r.f1 == doctest::Approx(res.f_at(1)).epsilon(1e-10));
    CHECK(r.f2 == doctest::Approx(res.f_at(2)).epsilon(1e-10));
    for (std::size_t q = 0; q < 4; ++q)
      CHECK(r.content_count[q] == doctest::Approx(2 * pi[q]).epsilon(1e-10));
  }
}

TEST_CASE("fresh nodes are accurate") {
  const auto r = oracle_solve(
      build_compressed_chain(GeneratorMatrix::binary(0.25, 0.75), {2, 1.0, 1.0}));
  double g1 = 0.0;
  for (double v : r.g1_modes) g1 += v;
  CHECK(r.G1 == doctest::Approx(g1).epsilon(1e-12));
}

TEST_CASE("oracle needs two nodes") {
  CHECK_ERROR_CODE(build_compressed_chain(GeneratorMatrix::binary(1, 1), {3, 1.0, 1.0}),
                   ErrorCode::NotTwoNodes);
}

}

TEST_SUITE("exact_oracle") {

TEST_CASE("transition rules") {
  const auto chain = build_compressed_chain(GeneratorMatrix::binary(0.25, 0.75), {2, 1.0, 1.0});
  const auto find = [&](const CompressedState& s) {
    for (std::size_t i = 0; i < chain.states.size(); ++i)
      if (chain.states[i] == s) return i;
    FAIL("state not reachable");
    return std::size_t{0};
  };
  // Tied nodes: gossip is a no-op, so only source moves and pushes leave.
  const auto tie = find({0, 1, 1, Freshness::Tie, false, false});
  const auto first = find({0, 0, 1, Freshness::FirstFresher, true, false});
  CHECK(chain.rates(tie, first) == doctest::Approx(0.5));
  CHECK(chain.rates(tie, tie) == doctest::Approx(-(0.25 + 1.0)));
  // Push to node 1 while node 2 is age 0 ties them at the source state, and
  // so does node 2 gossiping its fresh copy to node 1.
  const auto second = find({0, 1, 0, Freshness::SecondFresher, false, true});
  const auto both = find({0, 0, 0, Freshness::Tie, true, true});
  CHECK(chain.rates(second, both) == doctest::Approx(0.5 + 1.0));
  // The fresher node gossips to the other at rate lambda.
  const auto caught_up = find({0, 0, 0, Freshness::Tie, false, false});
  const auto stale_first = find({0, 0, 1, Freshness::FirstFresher, false, false});
  CHECK(chain.rates(stale_first, caught_up) == doctest::Approx(1.0));
}

TEST_CASE("no gossip reduces to the single-node closed form") {
  const auto r = oracle_solve(
      build_compressed_chain(GeneratorMatrix::binary(0.25, 0.75), {2, 1.0, 0.0}));
  const double mu = 0.5;
  CHECK(r.f1 == doctest::Approx((0.75 * (0.75 + mu) + 0.25 * (0.25 + mu)) / (1.0 + mu)).epsilon(1e-12));
}

}
