#include <doctest.h>

#include <cmath>
#include <random>

#include "bpe/error.hpp"
#include "bpe/graph.hpp"
#include "bpe/operator.hpp"
#include "dense_oracle.hpp"

using namespace bpe;

namespace {

HilbertVector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<Complex> v(n);
  for (auto& c : v) c = {g(rng), g(rng)};
  return HilbertVector::from_dense(v);
}

ShiftModel example2_model(std::uint32_t k, std::uint32_t depth) {
  std::vector<double> base(depth);
  for (std::uint32_t n = 1; n <= depth; ++n) base[n - 1] = example1_weight(n);
  return build_example2(k, base, depth);
}

Eigen::VectorXcd dense(const HilbertVector& x, std::size_t n) {
  const auto v = x.to_dense(n);
  return Eigen::Map<const Eigen::VectorXcd>(v.data(), n);
}

// Vertices whose level leaves room for one application of T.
std::size_t interior_count(const ShiftGraph& g) {
  std::size_t n = 0;
  for (VertexId v = 0; v < g.size(); ++v) n += g.level(v) < g.depth();
  return n;
}

}  // namespace

TEST_CASE("shift and adjoint agree with the dense matrices") {
  const auto chain = build_example1(12);
  const auto tree = example2_model(3, 12);
  const oracle::DenseShift dchain = oracle::lacunary_chain(12);
  const oracle::DenseShift dtree = oracle::tree(3, 12);
  std::mt19937_64 rng(11);
  for (const auto* pair : {&chain, &tree}) {
    const auto& m = *pair;
    const auto& ds = pair == &chain ? dchain : dtree;
    const auto T = oracle::shift_matrix(ds);
    const std::size_t inner_n = interior_count(m.graph);
    for (int t = 0; t < 5; ++t) {
      const auto x = random_vector(rng, inner_n);
      const auto y = random_vector(rng, m.graph.size());
      const auto Tx = apply_shift(m.graph, m.weights, x);
      const auto Tsy = apply_adjoint(m.graph, m.weights, y);
      CHECK((dense(Tx, m.graph.size()) - T * dense(x, m.graph.size())).norm() < 1e-12);
      CHECK((dense(Tsy, m.graph.size()) - T.adjoint() * dense(y, m.graph.size())).norm() <
            1e-12);
      // <Tx, y> = <x, T*y>
      CHECK(std::abs(inner(Tx, y).value() - inner(x, Tsy).value()) < 1e-11);
    }
  }
}

TEST_CASE("shift refuses the last level") {
  const auto m = build_example1(6);
  try {
    apply_shift(m.graph, m.weights, HilbertVector::unit(6));
    FAIL("expected horizon-exceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HorizonExceeded);
  }
}

TEST_CASE("cauchy dual of the lacunary chain") {
  const auto m = build_example1(40);
  const auto dual = cauchy_dual(m.graph, m.weights);
  CHECK(dual.weights.lambda(0) == 0.5);
  CHECK(dual.weights.lambda(1) == 0.5);
  for (VertexId n = 2; n <= 40; ++n)
    CHECK(dual.weights.lambda(n) == 1.0 / example1_weight(n));
  CHECK(dual.weights.tail().min == 1.0);
  CHECK(dual.weights.tail().max == 2.0);
}

TEST_CASE("dual identities") {
  // T'*T = I and T*T' = I on the interior, T' agrees with the dense
  // T (T*T)^{-1}.
  for (int which = 0; which < 2; ++which) {
    const auto m = which == 0 ? build_example1(10) : example2_model(4, 10);
    const auto ds = which == 0 ? oracle::lacunary_chain(10) : oracle::tree(4, 10);
    const auto dual = cauchy_dual(m.graph, m.weights);
    const auto Td = oracle::cauchy_dual_matrix(ds);
    const std::size_t n = m.graph.size();
    std::mt19937_64 rng(5 + which);
    for (int t = 0; t < 5; ++t) {
      const auto x = random_vector(rng, interior_count(m.graph));
      const auto Tdx = apply_shift(m.graph, dual.weights, x);
      CHECK((dense(Tdx, n) - Td * dense(x, n)).norm() < 1e-12);
      const auto back = apply_adjoint(m.graph, m.weights, Tdx);
      CHECK((dense(back, n) - dense(x, n)).norm() < 1e-12);
      const auto back2 = apply_adjoint(m.graph, dual.weights,
                                       apply_shift(m.graph, m.weights, x));
      CHECK((dense(back2, n) - dense(x, n)).norm() < 1e-12);
    }
  }
}

TEST_CASE("wandering basis") {
  SUBCASE("lacunary chain") {
    const auto m = build_example1(20);
    const auto b = wandering_basis(m.graph, m.weights);
    REQUIRE(b.dim() == 1);
    CHECK(std::abs(b.vectors[0].at(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(b.vectors[0].at(1) + 1.0 / std::sqrt(2.0)) < 1e-15);
  }
  SUBCASE("trees match the dense kernel") {
    for (std::uint32_t k : {2u, 3u, 5u}) {
      const auto m = example2_model(k, 8);
      const auto b = wandering_basis(m.graph, m.weights);
      REQUIRE(b.dim() == k);
      const auto X = oracle::kernel_basis(oracle::tree(static_cast<int>(k), 8));
      REQUIRE(X.cols() == static_cast<Eigen::Index>(k));
      Eigen::MatrixXcd Y(m.graph.size(), k);
      for (std::size_t i = 0; i < k; ++i) Y.col(i) = dense(b.vectors[i], m.graph.size());
      // Orthonormal, annihilated by T*, same span as the oracle.
      CHECK((Y.adjoint() * Y - Eigen::MatrixXcd::Identity(k, k)).norm() < 1e-13);
      for (std::size_t i = 0; i < k; ++i)
        CHECK(apply_adjoint(m.graph, m.weights, b.vectors[i]).norm() < 1e-13);
      const Eigen::MatrixXcd P = X * X.adjoint();
      CHECK((P * Y - Y).norm() < 1e-12);
    }
  }
  SUBCASE("classical shift has the root only") {
    const double w[] = {2.0, 0.5};
    const auto m = build_classical(w, 6);
    const auto b = wandering_basis(m.graph, m.weights);
    REQUIRE(b.dim() == 1);
    CHECK(b.vectors[0].at(0) == Complex(1.0));
  }
}

TEST_CASE("error paths") {
  SUBCASE("branching at the horizon of a declared-bound graph") {
    const std::int64_t parents[] = {-1, 0, 1, 2, 2};
    const double weights[] = {0, 1, 1, 1, 1};
    const auto m = build_custom(parents, weights, {1.0, 1.0});
    try {
      wandering_basis(m.graph, m.weights);
      FAIL("expected infinite-kernel");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InfiniteKernel);
    }
  }
  SUBCASE("vanishing fiber norm") {
    // d_1 underflows to zero.
    const std::int64_t parents[] = {-1, 0, 1, 2};
    const double weights[] = {0, 1, 1e-200, 1};
    const auto m = build_custom(parents, weights, {1.0, 1.0});
    try {
      cauchy_dual(m.graph, m.weights);
      FAIL("expected not-left-invertible");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NotLeftInvertible);
    }
  }
  SUBCASE("tail bounds must be positive") {
    const std::int64_t parents[] = {-1, 0, 1};
    const double weights[] = {0, 1, 1};
    CHECK_THROWS_AS(build_custom(parents, weights, {0.0, 1.0}), Error);
  }
}

TEST_CASE("orthonormalizer") {
  std::mt19937_64 rng(3);
  Orthonormalizer on;
  std::vector<HilbertVector> vs;
  for (int i = 0; i < 4; ++i) vs.push_back(random_vector(rng, 6));
  for (const auto& v : vs) CHECK(on.add(v));
  CHECK_FALSE(on.add(vs[0] + vs[2]));
  CHECK(on.rank() == 4);
  CHECK(on.dropped() == 1);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::abs(inner(on.basis()[i], on.basis()[j]).value() - (i == j ? 1.0 : 0.0)) <
            1e-13);

  const auto r = orthonormalize(vs);
  CHECK(r.rank == 4);
}

TEST_CASE("singular extremes") {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(3, 2);
  A(0, 0) = 3.0;
  A(1, 1) = Complex(0.0, -0.5);
  const auto s = singular_extremes(A);
  CHECK(s.sigma_max == doctest::Approx(3.0));
  CHECK(s.sigma_min == doctest::Approx(0.5));
}
