#include <doctest.h>

#include <optional>
#include <random>

#include "error_check.hpp"
#include "gossip/binary_analytic.hpp"
#include "gossip/multistate_analytic.hpp"
#include "support.hpp"

using namespace gossip;
using namespace gossip::multistate;
namespace ts = testing_support;

namespace {
GeneratorMatrix four_state() { return validate_generator(Matrix::from_rows(ts::kFourState)); }
const std::vector<double> kGrid{0.1, 0.5, 1.0, 5.0, 10.0};
}  // namespace

TEST_SUITE("multistate_analytic") {

TEST_CASE("joint-state index layout") {
  const JointStateIndex idx{3};
  CHECK(idx.size() == 9);
  CHECK(idx(0, 0) == 0);
  CHECK(idx(0, 2) == 2);
  CHECK(idx(2, 1) == 7);
  CHECK(idx.source_of(7) == 2);
  CHECK(idx.content_of(7) == 1);
}

TEST_CASE("component matrices are generators") {
  const auto g = four_state();
  const NetworkParams p{10, 1.5, 2.0};
  const auto res = backward_construct(g, p);
  for (int k = 1; k <= p.n; ++k) {
    std::optional<ConditionalContent> next;
    if (k < p.n) next = conditional_content(res.pi_at(k + 1));
    const auto qk = assemble_joint_generator(g, p, k, next ? &*next : nullptr);
    for (std::size_t i = 0; i < qk.rows(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < qk.cols(); ++j) {
        s += qk(i, j);
        if (i != j) CHECK(qk(i, j) >= 0.0);
      }
      CHECK(std::abs(s) < 1e-12);
    }
    CHECK(stationary_residual(qk, res.pi_at(k).probs) < 1e-12);
  }
  CHECK_ERROR_CODE(assemble_joint_generator(g, p, 3, nullptr), ErrorCode::InvalidParams);
}

TEST_CASE("construction matches the first-moment balance equations") {
  std::mt19937_64 rng(99);
  std::vector<ts::Dense> sources{ts::kFourState};
  for (std::size_t m : {3u, 5u}) sources.push_back(ts::random_generator(m, rng));
  for (const auto& q : sources) {
    const auto g = validate_generator(Matrix::from_rows(q));
    for (double ls : {0.1, 1.0, 10.0}) {
      for (double l : {0.1, 1.0, 10.0}) {
        const NetworkParams p{6, ls, l};
        const auto res = backward_construct(g, p);
        const auto ref = ts::moment_freshness(q, p.n, ls, l);
        for (int k = 1; k <= p.n; ++k) {
          CHECK(res.f_at(k) == doctest::Approx(ref.f[static_cast<std::size_t>(k - 1)]).epsilon(1e-9));
          const auto& x = ref.x[static_cast<std::size_t>(k - 1)];
          for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(std::abs(res.pi_at(k).probs[i] - x[i]) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("source marginal is preserved at every subset size") {
  const auto g = four_state();
  const auto pi = stationary_distribution(g);
  for (double l : kGrid) {
    const auto res = backward_construct(g, {10, 1.0, l});
    for (int k = 1; k <= 10; ++k)
      for (std::size_t q = 0; q < 4; ++q)
        CHECK(res.pi_at(k).source_marginal(q) == doctest::Approx(pi[q]).epsilon(1e-10));
  }
}

TEST_CASE("two-state sources agree with the matrix recursion") {
  for (double ls : kGrid) {
    for (double l : kGrid) {
      const NetworkParams p{10, ls, l};
      const auto res = backward_construct(GeneratorMatrix::binary(0.25, 0.75), p);
      const auto prof = binary::freshness_recursion(0.25, 0.75, p);
      for (int k = 1; k <= p.n; ++k) {
        CHECK(std::abs(res.f_at(k) - prof.f(k)) < 1e-10);
        CHECK(std::abs(res.pi_at(k).at(0, 0) - prof.at(k).v1) < 1e-10);
      }
      const auto c = mode_tagged_accuracy(res.pi_at(1));
      const auto acc = binary::solve_accuracy(0.25, 0.75, p);
      CHECK(std::abs(c[0] - acc.modes.v1) < 1e-10);
      CHECK(std::abs(c[1] - acc.modes.v2) < 1e-10);
    }
  }
}

TEST_CASE("time rescaling of every rate leaves the joint law unchanged") {
  const auto g = four_state();
  const auto base = backward_construct(g, {5, 1.0, 2.0});
  const auto scaled = backward_construct(g.scaled(4.0), {5, 4.0, 8.0});
  for (int k = 1; k <= 5; ++k) CHECK(std::abs(base.f_at(k) - scaled.f_at(k)) < 1e-11);
}

TEST_CASE("content counts scale with subset size") {
  const auto pi = stationary_distribution(four_state());
  for (int k = 1; k <= 10; ++k)
    for (std::size_t q = 0; q < 4; ++q)
      CHECK(node_count_content(k, 10, pi, q) == doctest::Approx(k * pi[q]));
  CHECK_ERROR_CODE(node_count_content(0, 10, pi, 0), ErrorCode::KOutOfRange);
  CHECK_ERROR_CODE(node_count_content(11, 10, pi, 0), ErrorCode::KOutOfRange);
  CHECK_ERROR_CODE(node_count_content(1, 10, pi, 4), ErrorCode::ModeMismatch);
}

TEST_CASE("multistate error paths") {
  const auto g = four_state();
  CHECK_ERROR_CODE(backward_construct(g, {10, 0.0, 1.0}), ErrorCode::InvalidParams);
  Matrix big(41, 41);
  for (std::size_t i = 0; i < 41; ++i) {
    big(i, (i + 1) % 41) = 1.0;
    big(i, i) = -1.0;
  }
  CHECK_ERROR_CODE(backward_construct(validate_generator(big), {3, 1.0, 1.0}),
                   ErrorCode::StateSpaceTooLarge);
  JointStationary empty_mode{2, {0.5, 0.5, 0.0, 0.0}};
  CHECK_ERROR_CODE(conditional_content(empty_mode), ErrorCode::ZeroModeMass);
}

}

TEST_SUITE("multistate_analytic") {

TEST_CASE("component placement") {
  const auto src = build_src_component(GeneratorMatrix::binary(0.25, 0.75));
  REQUIRE(src.rows() == 4);
  // Source moves change q and keep r.
  CHECK(src(0, 2) == 0.25);  // (1,1) -> (2,1)
  CHECK(src(1, 3) == 0.25);  // (1,2) -> (2,2)
  CHECK(src(3, 1) == 0.75);  // (2,2) -> (1,2)
  CHECK(src(0, 1) == 0.0);

  const auto push = build_push_component(1.0, 2);
  CHECK(push(1, 0) == 1.0);
  CHECK(push(1, 1) == -1.0);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(push(0, j) == 0.0);
    CHECK(push(3, j) == 0.0);
  }
  CHECK(build_push_component(0.0, 3).norm_inf() == 0.0);

  ConditionalContent uniform{Matrix(3, 3, 1.0 / 3.0)};
  CHECK(build_out_component(0.0, uniform).norm_inf() == 0.0);
  ConditionalContent diag{Matrix::identity(2)};
  const auto out = build_out_component(2.0, diag);
  CHECK(out(1, 0) == 2.0);   // (1,2) -> (1,1)
  CHECK(out(0, 1) == 0.0);
  CHECK(out(0, 0) == 0.0);
  CHECK(out(2, 3) == 2.0);   // (2,1) -> (2,2)
}

TEST_CASE("conditional content") {
  JointStationary uniform{3, std::vector<double>(9, 1.0 / 9.0)};
  const auto p = conditional_content(uniform);
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t r = 0; r < 3; ++r) CHECK(p.probs(q, r) == doctest::Approx(1.0 / 3.0));

  const NetworkParams params{10, 1.0, 1.0};
  const auto res = backward_construct(GeneratorMatrix::binary(0.25, 0.75), params);
  const auto prof = binary::freshness_recursion(0.25, 0.75, params);
  const auto cond = conditional_content(res.pi_at(4));
  CHECK(cond.probs(0, 0) == doctest::Approx(prof.at(4).v1 / 0.75).epsilon(1e-10));
  CHECK(cond.probs(0, 0) + cond.probs(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("whole-network law against power iteration") {
  const auto g = four_state();
  const NetworkParams p{10, 1.0, 1.0};
  const auto qn = assemble_joint_generator(g, p, p.n, nullptr);
  ts::Dense dense(qn.rows(), std::vector<double>(qn.cols()));
  for (std::size_t i = 0; i < qn.rows(); ++i)
    for (std::size_t j = 0; j < qn.cols(); ++j) dense[i][j] = qn(i, j);
  const auto ref = ts::power_stationary(dense);
  const auto res = backward_construct(g, p);
  for (std::size_t i = 0; i < ref.size(); ++i)
    CHECK(std::abs(res.pi_at(p.n).probs[i] - ref[i]) < 1e-9);
}

TEST_CASE("mode-tagged accuracy is bounded and sums to f_1") {
  const auto g = four_state();
  const auto pi = stationary_distribution(g);
  const auto res = backward_construct(g, {10, 1.0, 1.0});
  const auto c = mode_tagged_accuracy(res.pi_at(1));
  double sum = 0.0;
  for (std::size_t m = 0; m < 4; ++m) {
    CHECK(c[m] <= pi[m]);
    sum += c[m];
  }
  CHECK(sum == doctest::Approx(res.f_at(1)).epsilon(1e-14));
  double total = 0.0;
  for (std::size_t q = 0; q < 4; ++q) total += node_count_content(10, 10, pi, q);
  CHECK(total == doctest::Approx(10.0));
  CHECK(node_count_content(5, 10, StationaryDistribution{{0.25, 0.75}}, 0) == 1.25);
}

}
