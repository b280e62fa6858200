#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bpe/bpe_engine.hpp"
#include "bpe/error.hpp"
#include "bpe/graph.hpp"
#include "bpe/operator.hpp"
#include "bpe/spectral.hpp"
#include "dense_oracle.hpp"

using namespace bpe;

namespace {

struct Family {
  const char* name;
  ShiftModel model;
  DualWeights dual;
  WanderingBasis basis;
  oracle::DenseShift dense;
};

Family make_family(int which, std::uint32_t depth) {
  auto model = [&]() -> ShiftModel {
    if (which == 0) return build_example1(depth);
    if (which == 1) {
      std::vector<double> base(depth);
      for (std::uint32_t n = 1; n <= depth; ++n) base[n - 1] = oracle::lacunary_weight(n);
      return build_example2(3, base, depth);
    }
    const double one = 1.0;
    return build_classical(std::span<const double>(&one, 1), depth);
  }();
  auto dual = cauchy_dual(model.graph, model.weights);
  auto basis = wandering_basis(model.graph, model.weights);
  const int d = static_cast<int>(depth);
  auto dense = which == 0   ? oracle::lacunary_chain(d)
               : which == 1 ? oracle::tree(3, d)
                            : oracle::chain({1.0}, d);
  const char* names[] = {"lacunary chain", "tree k=3", "unweighted shift"};
  return {names[which], std::move(model), std::move(dual), std::move(basis), std::move(dense)};
}

// Radius of the disc inside which the evaluation series is certified.
double safe_radius(int which) { return which == 2 ? 0.8 : 0.45; }

Complex random_point(std::mt19937_64& rng, double radius) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  return std::polar(r, 2.0 * std::numbers::pi * u(rng));
}

double closed_form_b(double abs_w, int n) {
  double s = 0.0;
  for (int k = 0; k <= n; ++k) s += std::pow(abs_w, 2.0 * k);
  return std::sqrt(s);
}

Eigen::MatrixXcd basis_matrix(const std::vector<HilbertVector>& vs, std::size_t n) {
  Eigen::MatrixXcd Y(n, vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const auto d = vs[i].to_dense(n);
    Y.col(i) = Eigen::Map<const Eigen::VectorXcd>(d.data(), n);
  }
  return Y;
}

}  // namespace

TEST_CASE("moduli basis") {
  const auto cl = make_family(2, 10);
  const auto mb = moduli_basis(cl.model.graph, cl.model.weights, cl.basis, 4);
  CHECK(mb.rank() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(mb.onb[i].support_size() == 1);
    CHECK(std::abs(mb.onb[i].at(static_cast<VertexId>(i))) == doctest::Approx(1.0));
  }

  const auto e1 = make_family(0, 10);
  CHECK(moduli_basis(e1.model.graph, e1.model.weights, e1.basis, 4).rank() == 5);

  const auto e2 = make_family(1, 10);
  const auto m2 = moduli_basis(e2.model.graph, e2.model.weights, e2.basis, 2);
  CHECK(m2.rank() == 9);
  CHECK(m2.level_end == std::vector<std::size_t>{3, 6, 9});

  // Against the dense orbit QR rank.
  {
    const auto T = oracle::shift_matrix(e2.dense);
    const auto X = oracle::kernel_basis(e2.dense);
    oracle::Mat orbit(X.rows(), 3 * X.cols());
    orbit << X, T * X, T * T * X;
    CHECK(oracle::orthonormal_columns(orbit).cols() == 9);
  }

  SUBCASE("orthonormal, contains the kernel, nested") {
    auto grow = moduli_basis(e2.model.graph, e2.model.weights, e2.basis, 3);
    const auto fresh = moduli_basis(e2.model.graph, e2.model.weights, e2.basis, 6);
    for (std::uint32_t n = 3; n < 6; ++n) {
      const std::size_t before = grow.rank();
      extend_moduli_basis(e2.model.graph, e2.model.weights, grow);
      CHECK(grow.rank() >= before);
    }
    CHECK(grow.n == 6);
    CHECK(grow.rank() == fresh.rank());
    const std::size_t V = e2.model.graph.size();
    const auto Q = basis_matrix(grow.onb, V);
    const auto Qf = basis_matrix(fresh.onb, V);
    CHECK((Q.adjoint() * Q - Eigen::MatrixXcd::Identity(Q.cols(), Q.cols())).norm() < 1e-12);
    CHECK((Q * Q.adjoint() - Qf * Qf.adjoint()).norm() < 1e-10);
    const auto X = basis_matrix(e2.basis.vectors, V);
    for (Eigen::Index i = 0; i < X.cols(); ++i)
      CHECK((Q.adjoint() * X.col(i)).norm() == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK_THROWS_AS(moduli_basis(e1.model.graph, e1.model.weights, e1.basis, 9), Error);
}

TEST_CASE("S_n applied to a vector") {
  const auto cl = make_family(2, 20);
  const auto x = HilbertVector::unit(0);
  const Complex w(0.3, 0.4);
  CHECK((s_n_apply(cl.model.graph, cl.dual, w, x, 0) - x).is_zero());
  CHECK((s_n_apply(cl.model.graph, cl.dual, 0.0, x, 12) - x).is_zero());
  const auto s = s_n_apply(cl.model.graph, cl.dual, w, x, 15);
  for (int k = 0; k <= 15; ++k)
    CHECK(std::abs(s.at(k) - std::pow(std::conj(w), k)) < 1e-14);
  CHECK(s.at(16) == Complex{});
}

TEST_CASE("orthogonality of dual and forward orbits") {
  const auto e2 = make_family(1, 24);
  for (const auto& xi : e2.basis.vectors)
    for (const auto& xj : e2.basis.vectors) {
      const auto fwd = orbit(e2.model.graph, e2.model.weights, xj, 10);
      const auto bwd = orbit(e2.model.graph, e2.dual.weights, xi, 10);
      for (int k = 1; k <= 10; ++k)
        for (int j = 0; j < k; ++j)
          CHECK(std::abs(inner(bwd[k], fwd[j]).value()) < 1e-12);
    }
}

TEST_CASE("B_n at the origin and monotonicity") {
  std::mt19937_64 rng(2024);
  for (int which = 0; which < 3; ++which) {
    const auto f = make_family(which, 202);
    CAPTURE(f.name);
    const BpeEvaluator ev(f.model.graph, f.model.weights, f.dual, f.basis, 200);
    for (double v : ev.log2_b_n(0.0)) CHECK(std::abs(std::exp2(v) - 1.0) <= 1e-10);
    for (int t = 0; t < 20; ++t) {
      const Complex w = random_point(rng, 1.3);
      const auto B = ev.log2_b_n(w);
      for (std::size_t n = 0; n + 1 < B.size(); ++n) {
        // B_n <= B_{n+1} + 1e-10, compared in the log domain past double range.
        const double a = B[n], b = B[n + 1];
        if (b < 900)
          CHECK(std::exp2(a) <= std::exp2(b) + 1e-10);
        else
          CHECK(a <= b + 1e-12);
      }
    }
  }
}

TEST_CASE("closed form on the unweighted shift") {
  const auto f = make_family(2, 130);
  const BpeEvaluator ev(f.model.graph, f.model.weights, f.dual, f.basis, 128);
  for (double r : {0.3, 0.7, 0.9, 1.1}) {
    for (double theta : {0.0, 1.0}) {
      const auto B = ev.log2_b_n(std::polar(r, theta));
      for (int n = 0; n <= 128; ++n) {
        const double target = closed_form_b(r, n);
        CHECK(std::abs(std::exp2(B[n]) - target) <= 1e-10 * std::max(1.0, target));
      }
    }
  }
  const auto lin = b_n(f.model.graph, f.model.weights, f.dual, f.basis, 0.7, 128);
  CHECK(lin.back() == doctest::Approx(closed_form_b(0.7, 128)).epsilon(1e-12));
}

TEST_CASE("classification") {
  const auto f = make_family(2, 260);
  const BpeEvaluator ev(f.model.graph, f.model.weights, f.dual, f.basis, 256);
  const auto zero = classify_point(ev.log2_b_n(0.0));
  CHECK(zero.slope == doctest::Approx(0.0));
  CHECK(zero.classification == Classification::Bounded);

  const auto out = classify_point(ev.log2_b_n(1.2));
  CHECK(out.slope == doctest::Approx(std::log2(1.2)).epsilon(1e-6));
  CHECK(out.classification == Classification::Unbounded);

  const auto in = ev.log2_b_n(0.5);
  CHECK(classify_point(in).classification == Classification::Bounded);
  CHECK(std::exp2(in.back()) == doctest::Approx(1.0 / std::sqrt(0.75)).epsilon(1e-12));

  CHECK(classify_point(ev.log2_b_n(0.9)).classification == Classification::Bounded);
  CHECK(classify_point(ev.log2_b_n(1.1)).classification == Classification::Unbounded);

  // Flat but above the cap.
  std::vector<double> high(65, 50.0);
  CHECK(classify_point(high).classification == Classification::Inconclusive);
  // Slope between threshold / 4 and threshold.
  std::vector<double> slow(65);
  for (std::size_t n = 0; n < slow.size(); ++n) slow[n] = 5e-4 * n;
  CHECK(classify_point(slow).classification == Classification::Inconclusive);
  CHECK_THROWS_AS(classify_point(std::vector<double>(20, 0.0)), Error);
}

TEST_CASE("rotation invariance on rooted shifts") {
  // Rooted trees are circular through the diagonal unitary e^{i level theta}.
  for (int which : {1, 2}) {
    const auto f = make_family(which, 130);
    CAPTURE(f.name);
    const BpeEvaluator ev(f.model.graph, f.model.weights, f.dual, f.basis, 128);
    for (double r : {0.3, 0.55})
      for (double phase : {0.0, 0.4, 2.0}) {
        const Complex w = std::polar(r, phase);
        const auto ref = ev.log2_b_n(w);
        for (double theta : {std::numbers::pi / 7, std::numbers::pi / 3, std::numbers::pi}) {
          const auto rot = ev.log2_b_n(w * std::polar(1.0, theta));
          for (std::size_t n = 0; n < ref.size(); ++n)
            CHECK(std::abs(std::exp2(ref[n]) - std::exp2(rot[n])) <= 1e-8);
        }
      }
  }
}

TEST_CASE("the loop breaks rotation invariance of B_n but not of the classes") {
  const auto f = make_family(0, 130);
  const BpeEvaluator ev(f.model.graph, f.model.weights, f.dual, f.basis, 128);
  const auto small = make_family(0, 14);
  const BpeEvaluator sev(small.model.graph, small.model.weights, small.dual, small.basis, 12);
  for (double r : {0.3, 0.55}) {
    const auto ref = ev.log2_b_n(r);
    const auto cls = classify_point(ref).classification;
    for (double theta : {std::numbers::pi / 7, std::numbers::pi / 3, std::numbers::pi}) {
      const Complex w = std::polar(r, theta);
      const auto rot = ev.log2_b_n(w);
      CHECK(classify_point(rot).classification == cls);
      // The rotated values are genuinely different, and the dense matrices say so too.
      CHECK(std::abs(std::exp2(ref.back()) - std::exp2(rot.back())) > 1e-4);
      const auto lib = sev.log2_b_n(w);
      const auto dense = oracle::b_n(small.dense, w, 12);
      for (int n = 0; n <= 12; ++n) CHECK(std::abs(std::exp2(lib[n]) - dense[n]) <= 1e-10);
    }
  }
}

TEST_CASE("grids") {
  GridSpec g;
  g.rays = 4;
  g.r_min = 0.5;
  g.r_max = 1.1;
  g.r_step = 0.2;
  CHECK(g.radius_count() == 4);
  CHECK(g.width() == 4);
  CHECK(g.height() == 4);
  const auto pts = g.points();
  REQUIRE(pts.size() == 16);
  CHECK(std::abs(pts[0] - Complex(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(pts[3] - Complex(1.1, 0.0)) < 1e-12);
  CHECK(std::abs(pts[4] - Complex(0.0, 0.5)) < 1e-15);

  GridSpec c;
  c.kind = GridKind::Cartesian;
  c.nx = 3;
  c.ny = 2;
  const auto cp = c.points();
  REQUIRE(cp.size() == 6);
  CHECK(cp[0] == Complex(-1.0, 1.0));
  CHECK(cp[2] == Complex(1.0, 1.0));
  CHECK(cp[5] == Complex(1.0, -1.0));

  GridSpec empty;
  empty.rays = 0;
  CHECK_THROWS_AS(empty.validate(), Error);
  GridSpec inverted;
  inverted.r_min = 2.0;
  CHECK_THROWS_AS(inverted.validate(), Error);
}

TEST_CASE("region scans") {
  SUBCASE("unweighted shift rings") {
    const auto f = make_family(2, 258);
    GridSpec g;
    g.rays = 8;
    g.r_min = 0.5;
    g.r_max = 1.1;
    g.r_step = 0.2;
    const auto scan = scan_region(f.model.graph, f.model.weights, g, 256);
    REQUIRE(scan.samples.size() == g.size());
    for (std::size_t a = 0; a < 8; ++a) {
      CHECK(scan.samples[a * 4 + 0].classification == Classification::Bounded);
      CHECK(scan.samples[a * 4 + 2].classification == Classification::Bounded);
      CHECK(scan.samples[a * 4 + 3].classification == Classification::Unbounded);
    }
  }
  SUBCASE("lacunary chain rings inside the inner discs") {
    const auto f = make_family(0, 258);
    GridSpec g;
    g.rays = 32;
    g.r_min = 0.45;
    g.r_max = 0.6;
    g.r_step = 0.15;
    const auto scan = scan_region(f.model.graph, f.model.weights, g, 256);
    for (const auto& s : scan.samples) CHECK(s.classification == Classification::Bounded);
  }
  SUBCASE("thread count does not change the result") {
    const auto f = make_family(1, 66);
    GridSpec g;
    g.kind = GridKind::Cartesian;
    g.nx = 9;
    g.ny = 7;
    const auto a = scan_region(f.model.graph, f.model.weights, g, 64, {}, 1);
    const auto b = scan_region(f.model.graph, f.model.weights, g, 64, {}, 4);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].log2_B == b.samples[i].log2_B);
      CHECK(a.samples[i].classification == b.samples[i].classification);
    }
  }
  SUBCASE("horizon") {
    const auto f = make_family(0, 100);
    CHECK_THROWS_AS(scan_region(f.model.graph, f.model.weights, GridSpec{}, 99), Error);
  }
}

TEST_CASE("evaluation data and kernels") {
  const auto e1 = make_family(0, 300);
  const auto e2 = make_family(1, 300);
  const auto cl = make_family(2, 300);

  for (const auto* f : {&e1, &e2}) {
    const auto k00 = kernel_gram(f->model.graph, f->dual, f->basis, 0.0, 0.0, 64);
    CHECK((k00 - Eigen::MatrixXcd::Identity(k00.rows(), k00.cols())).norm() <= 1e-10);
    const auto ev = evaluation_data(f->model.graph, f->dual, f->basis, 0.0, 64);
    CHECK(ev.tail_bound == 0.0);
    for (std::size_t i = 0; i < f->basis.dim(); ++i)
      CHECK((ev.coeff_vectors[i] - f->basis.vectors[i]).is_zero());
  }

  const Complex z(0.2, -0.3), w(-0.1, 0.35);
  for (const auto* f : {&e1, &e2}) {
    const auto kzw = kernel_gram(f->model.graph, f->dual, f->basis, z, w, 200);
    const auto kwz = kernel_gram(f->model.graph, f->dual, f->basis, w, z, 200);
    CHECK((kzw - kwz.adjoint()).norm() <= 1e-12);
    const auto g = evaluation_data(f->model.graph, f->dual, f->basis, w, 200).gram;
    CHECK((g - g.adjoint()).norm() <= 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  }

  const auto kc = kernel_gram(cl.model.graph, cl.dual, cl.basis, z, w, 250);
  CHECK(std::abs(kc(0, 0) - 1.0 / (1.0 - z * std::conj(w))) < 1e-12);
  const auto gc = evaluation_data(cl.model.graph, cl.dual, cl.basis, 0.7, 250);
  CHECK(std::abs(gc.gram(0, 0) - 1.0 / (1.0 - 0.49)) < 1e-12);
  CHECK(gc.tail_rigorous);

  SUBCASE("norm of E_w* two ways") {
    const Complex p = std::polar(0.4, 0.9);
    const auto ed = evaluation_data(e1.model.graph, e1.dual, e1.basis, p, 256);
    const BpeEvaluator bev(e1.model.graph, e1.model.weights, e1.dual, e1.basis, 256);
    const auto B = bev.log2_b_n(p);
    const double sup_b = std::exp2(*std::max_element(B.begin(), B.end()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ed.gram);
    CHECK(std::abs(sup_b - std::sqrt(es.eigenvalues().maxCoeff())) <= 2 * ed.tail_bound + 1e-8);

    const BpeEvaluator cev(cl.model.graph, cl.model.weights, cl.dual, cl.basis, 256);
    const auto Bc = cev.log2_b_n(0.7);
    CHECK(std::abs(std::exp2(Bc.back()) - 1.0 / std::sqrt(1.0 - 0.49)) <= 1e-8);
  }

  SUBCASE("outside the convergence disc") {
    const auto loose = evaluation_data(e1.model.graph, e1.dual, e1.basis, 0.9, 64);
    CHECK(std::isinf(loose.tail_bound));
    try {
      evaluation_data(e1.model.graph, e1.dual, e1.basis, 0.9, 64, true);
      FAIL("expected divergent-series");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DivergentSeries);
    }
    CHECK_THROWS_AS(kernel_gram(e1.model.graph, e1.dual, e1.basis, 0.1, 0.9, 64), Error);
  }
}

TEST_CASE("adjoint eigenvectors and the Gram test") {
  const auto cl = make_family(2, 12);
  const auto e2 = make_family(1, 12);

  SUBCASE("w = 0 gives back the kernel") {
    for (const auto* f : {&cl, &e2}) {
      const auto eb = adjoint_eigenbasis(f->model.graph, f->model.weights, 0.0, 12);
      CHECK(eb.accepted_count() == f->basis.dim());
      CHECK(eb.max_residual <= 1e-10);
      const auto r = gram_test(f->basis, eb);
      CHECK(r.sigma_min == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(r.in_bpe);
      CHECK_FALSE(r.dimension_mismatch);
    }
  }
  SUBCASE("unweighted shift at 1/2") {
    const auto eb = adjoint_eigenbasis(cl.model.graph, cl.model.weights, 0.5, 12);
    REQUIRE(eb.accepted_count() == 1);
    CHECK(eb.tail_mass[0] < 1e-6);
    const auto& v = eb.vectors[0];
    for (VertexId n = 1; n <= 12; ++n)
      CHECK(std::abs(v.at(n) - 0.5 * v.at(n - 1)) < 1e-12);
    const auto r = gram_test(cl.basis, eb);
    CHECK(r.sigma_min == doctest::Approx(std::sqrt(0.75)).epsilon(1e-6));
    REQUIRE(r.dual_family.size() == 1);
    CHECK(std::abs(inner(cl.basis.vectors[0], r.dual_family[0]).value() - 1.0) < 1e-12);
  }
  SUBCASE("no eigenvector on the unit circle and beyond") {
    for (double r : {1.0, 1.1}) {
      const auto eb = adjoint_eigenbasis(cl.model.graph, cl.model.weights, r, 12);
      CHECK(eb.accepted_count() == 0);
      const auto g = gram_test(cl.basis, eb);
      CHECK(g.sigma_min == 0.0);
      CHECK_FALSE(g.in_bpe);
      CHECK(g.dimension_mismatch);
    }
  }
  SUBCASE("dual family on the tree") {
    const auto eb = adjoint_eigenbasis(e2.model.graph, e2.model.weights, Complex(0.2, 0.1), 12);
    const auto r = gram_test(e2.basis, eb);
    REQUIRE(r.dual_family.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(inner(e2.basis.vectors[i], r.dual_family[j]).value() -
                       (i == j ? 1.0 : 0.0)) < 1e-10);
  }
  CHECK_THROWS_AS(adjoint_eigenbasis(cl.model.graph, cl.model.weights, 0.1, 6), Error);
}

TEST_CASE("criteria agree on the unweighted shift") {
  const auto cl = make_family(2, 258);
  const BpeEvaluator ev(cl.model.graph, cl.model.weights, cl.dual, cl.basis, 256);
  for (double r : {0.3, 0.7, 0.9, 1.1}) {
    CAPTURE(r);
    const bool bounded =
        classify_point(ev.log2_b_n(r)).classification == Classification::Bounded;
    const auto eb = adjoint_eigenbasis(cl.model.graph, cl.model.weights, r, 12);
    const auto g = gram_test(cl.basis, eb);
    CHECK(bounded == g.in_bpe);
    CHECK(bounded == (r < 1.0));
  }
}

TEST_CASE("dense oracle equivalence") {
  for (int which = 0; which < 3; ++which) {
    const auto f = make_family(which, 12);
    CAPTURE(f.name);
    const BpeEvaluator ev(f.model.graph, f.model.weights, f.dual, f.basis, 10);
    const std::size_t V = f.model.graph.size();
    const auto Y = basis_matrix(f.basis.vectors, V);
    const auto X = oracle::kernel_basis(f.dense);
    REQUIRE(X.cols() == Y.cols());
    // Library basis in oracle coordinates; kappa transforms by congruence.
    const Eigen::MatrixXcd U = X.adjoint() * Y;
    CHECK((U.adjoint() * U - Eigen::MatrixXcd::Identity(U.cols(), U.cols())).norm() < 1e-12);

    std::mt19937_64 rng(100 + which);
    for (int t = 0; t < 10; ++t) {
      const Complex w = random_point(rng, safe_radius(which));
      const Complex z = random_point(rng, safe_radius(which));

      const auto lib = ev.log2_b_n(w);
      const auto ref = oracle::b_n(f.dense, w, 10);
      for (int n = 0; n <= 10; ++n) CHECK(std::abs(std::exp2(lib[n]) - ref[n]) <= 1e-10);

      const auto k_lib = kernel_gram(f.model.graph, f.dual, f.basis, z, w, 10);
      const auto k_ref = oracle::kernel(f.dense, z, w, 10);
      CHECK((k_lib - U.adjoint() * k_ref * U).norm() <= 1e-10);

      int eigen_dim = 0;
      const double s_ref = oracle::gram_sigma_min(f.dense, w, 12, &eigen_dim);
      const auto eb = adjoint_eigenbasis(f.model.graph, f.model.weights, w, 12);
      REQUIRE(eb.accepted_count() == static_cast<std::size_t>(eigen_dim));
      CHECK(std::abs(gram_test(f.basis, eb).sigma_min - s_ref) <= 1e-10);
    }
  }
}
