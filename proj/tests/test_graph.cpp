#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bpe/error.hpp"
#include "bpe/graph.hpp"

using namespace bpe;

namespace {

// Membership in the half-weight bands, written out independently of the
// library's bit tricks.
bool in_half_band(std::uint64_t k) {
  for (std::uint64_t m = 2; (1ull << m) + 1 <= k; ++m)
    if (k <= 3 * (1ull << (m - 1))) return true;
  return false;
}

void check_structure(const ShiftGraph& g) {
  for (VertexId v = 0; v < g.size(); ++v) {
    for (VertexId c : g.children(v)) CHECK(g.parent(c) == v);
    if (auto p = g.parent(v)) {
      const auto kids = g.children(*p);
      CHECK(std::find(kids.begin(), kids.end(), v) != kids.end());
      if (*p == v)
        CHECK(g.level(v) == 0);
      else
        CHECK(g.level(v) == g.level(*p) + 1);
    } else {
      CHECK(g.level(v) == 0);
    }
    if (!g.is_boundary(v)) CHECK_FALSE(g.children(v).empty());
  }
}

}  // namespace

TEST_CASE("lacunary chain weights") {
  CHECK(example1_weight(5) == 0.5);
  CHECK(example1_weight(6) == 0.5);
  CHECK(example1_weight(4) == 1.0);
  CHECK(example1_weight(7) == 1.0);
  CHECK(example1_weight(8) == 1.0);
  int halves = 0;
  for (int k = 1; k <= 16; ++k) halves += example1_weight(k) == 0.5;
  CHECK(halves == 6);
  for (std::uint64_t k = 0; k <= 5000; ++k)
    CHECK(example1_weight(k) == (in_half_band(k) ? 0.5 : 1.0));
}

TEST_CASE("example 1 graph") {
  const auto m = build_example1(40);
  const auto& g = m.graph;
  CHECK(g.size() == 41);
  CHECK(g.depth() == 40);
  CHECK(g.has_loop(0));
  CHECK(g.roots().empty());
  CHECK(g.children(0).size() == 2);
  CHECK(m.weights.lambda(0) == 1.0);
  CHECK(m.weights.fiber_norm_sq(0) == 2.0);
  CHECK(m.weights.lambda(5) == 0.5);
  CHECK(m.weights.fiber_norm_sq(4) == 0.25);
  CHECK(g.tail_rule() == TailRule::EventuallyLinearChain);
  REQUIRE(g.branches().size() == 1);
  CHECK(g.branches()[0].size() == 41);
  check_structure(g);
  CHECK_THROWS_AS(build_example1(1), Error);
}

TEST_CASE("example 2 tree") {
  std::vector<double> base(30);
  for (int n = 1; n <= 30; ++n) base[n - 1] = example1_weight(n);
  const auto m = build_example2(3, base, 30);
  const auto& g = m.graph;
  CHECK(g.children(0).size() == 3);
  CHECK(g.is_root(0));
  CHECK(g.size() == 1 + 3 * 30);
  CHECK(g.branches().size() == 3);
  for (std::size_t b = 1; b < 3; ++b)
    for (std::size_t l = 1; l < g.branches()[b].size(); ++l)
      CHECK(m.weights.lambda(g.branches()[b][l]) == 1.0);
  for (std::size_t l = 1; l <= 30; ++l)
    CHECK(m.weights.lambda(g.branches()[0][l]) == base[l - 1]);
  CHECK(g.label(1) == "(1,1)");
  CHECK(g.label(3) == "(1,3)");
  CHECK(std::isnan(m.weights.lambda(0)));
  CHECK(m.weights.fiber_norm_sq(0) == doctest::Approx(1.0 + 1.0 + 1.0));
  check_structure(g);

  CHECK_THROWS_AS(build_example2(0, base, 30), Error);
  std::vector<double> bad = base;
  bad[3] = 0.0;
  CHECK_THROWS_AS(build_example2(3, bad, 30), Error);
  CHECK_THROWS_AS(build_example2(3, base, 31), Error);
}

TEST_CASE("example 2 with k = 1 is a plain chain") {
  std::vector<double> ones(10, 1.0);
  const auto m = build_example2(1, ones, 10);
  CHECK(m.graph.size() == 11);
  for (VertexId v = 1; v < 11; ++v) {
    CHECK(m.weights.lambda(v) == 1.0);
    CHECK(m.graph.children(v - 1).size() == 1);
  }
}

TEST_CASE("classical shift") {
  const double w[] = {1.0, 0.5, 1.0};
  const auto m = build_classical(w, 5);
  CHECK(m.graph.size() == 6);
  CHECK(m.graph.depth() == 5);
  CHECK(m.weights.fiber_norm_sq(0) == 1.0);
  CHECK(m.weights.fiber_norm_sq(1) == 0.25);
  CHECK(m.weights.lambda(5) == 1.0);
  for (VertexId v = 0; v < 6; ++v) CHECK(m.graph.level(v) == v);
  check_structure(m.graph);
  CHECK_THROWS_AS(build_classical(std::span<const double>{}, 5), Error);
}

TEST_CASE("custom graphs") {
  // Two roots, the first with a fiber of size two.
  const std::int64_t parents[] = {-1, -1, 0, 0, 1, 2, 3, 4};
  const double weights[] = {0, 0, 1, 2, 1, 1, 1, 1};
  const auto m = build_custom(parents, weights, {0.5, 2.0});
  CHECK(m.graph.roots().size() == 2);
  CHECK(m.graph.depth() == 2);
  CHECK(m.graph.tail_rule() == TailRule::DeclaredBound);
  CHECK(m.weights.fiber_norm_sq(0) == 5.0);
  check_structure(m.graph);

  const std::int64_t out_of_order[] = {-1, 2, 0};
  const double w3[] = {0, 1, 1};
  CHECK_THROWS_AS(build_custom(out_of_order, w3, {1, 1}), Error);
  const std::int64_t starved[] = {-1, 0, 0, 1};
  const double w4[] = {0, 1, 1, 1};
  // Vertex 2 sits below the horizon with no children.
  CHECK_THROWS_AS(build_custom(starved, w4, {1, 1}), Error);
}

TEST_CASE("materialize_support") {
  const auto m = build_example1(10);
  const auto s = materialize_support(m.graph, 4);
  CHECK(s == std::vector<VertexId>{0, 1, 2, 3, 4});
  try {
    materialize_support(m.graph, 11);
    FAIL("expected horizon-exceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HorizonExceeded);
  }
}

TEST_CASE("level ranges are contiguous") {
  std::vector<double> base(12, 1.0);
  const auto m = build_example2(4, base, 12);
  VertexId next = 0;
  for (std::uint32_t l = 0; l <= 12; ++l)
    for (VertexId v : m.graph.level_vertices(l)) CHECK(v == next++);
  CHECK(next == m.graph.size());
}
