#include "bpe/operator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "bpe/error.hpp"

namespace bpe {

HilbertVector apply_shift(const ShiftGraph& graph,
                          const WeightAssignment& weights,
                          const HilbertVector& x) {
  std::vector<HilbertVector::Entry> out;
  out.reserve(x.support_size() + 1);
  for (const auto& e : x.entries()) {
    if (graph.is_boundary(e.vertex))
      fail(ErrorCode::HorizonExceeded,
           "shift applied to a vector touching the horizon (vertex " +
               graph.label(e.vertex) + ", depth " +
               std::to_string(graph.depth()) + ")");
    for (VertexId c : graph.children(e.vertex))
      out.push_back({c, weights.lambda(c) * e.amplitude});
  }
  return HilbertVector::from_entries(std::move(out), x.log2_scale());
}

HilbertVector apply_adjoint(const ShiftGraph& graph,
                            const WeightAssignment& weights,
                            const HilbertVector& x) {
  std::vector<HilbertVector::Entry> out;
  out.reserve(x.support_size());
  for (const auto& e : x.entries()) {
    const auto p = graph.parent(e.vertex);
    if (!p) continue;
    out.push_back({*p, weights.lambda(e.vertex) * e.amplitude});
  }
  return HilbertVector::from_entries(std::move(out), x.log2_scale());
}

DualWeights cauchy_dual(const ShiftGraph& graph,
                        const WeightAssignment& weights) {
  const auto& tail = weights.tail();
  if (!(weights.min_fiber_norm_sq() > 0.0) || !(tail.min > 0.0))
    fail(ErrorCode::NotLeftInvertible,
         "inf of the fiber norms vanishes; T is not left-invertible");

  std::vector<double> dual(graph.size(), std::nan(""));
  for (VertexId u = 0; u < graph.size(); ++u) {
    const auto p = graph.parent(u);
    if (!p) continue;
    dual[u] = weights.lambda(u) / weights.fiber_norm_sq(*p);
  }

  TailBounds dual_tail;
  if (graph.tail_rule() == TailRule::EventuallyLinearChain) {
    // Chains past the horizon have singleton fibers: lambda' = 1 / lambda.
    dual_tail = {1.0 / tail.max, 1.0 / tail.min};
  } else {
    const double d_hi = std::max(weights.max_fiber_norm_sq(), tail.max * tail.max);
    const double d_lo = std::min(weights.min_fiber_norm_sq(), tail.min * tail.min);
    dual_tail = {tail.min / d_hi, tail.max / d_lo};
  }
  return {WeightAssignment(graph, std::move(dual), dual_tail)};
}

WanderingBasis wandering_basis(const ShiftGraph& graph,
                               const WeightAssignment& weights) {
  if (graph.tail_rule() == TailRule::DeclaredBound && graph.depth() > 0) {
    for (VertexId v : graph.level_vertices(graph.depth() - 1))
      if (graph.children(v).size() > 1)
        fail(ErrorCode::InfiniteKernel,
             "branching reaches the horizon; ker T* is not certified finite");
  }

  WanderingBasis basis;
  for (VertexId r : graph.roots()) basis.vectors.push_back(HilbertVector::unit(r));

  for (VertexId v = 0; v < graph.size(); ++v) {
    if (graph.is_boundary(v)) continue;
    const auto fiber = graph.children(v);
    const std::size_t s = fiber.size();
    if (s < 2) continue;

    // Householder reflection taking the unit weight vector a to -e_1; its
    // columns 2..s span the orthocomplement of a inside the fiber.
    std::vector<double> u(s);
    double norm_a = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      u[j] = weights.lambda(fiber[j]);
      norm_a += u[j] * u[j];
    }
    norm_a = std::sqrt(norm_a);
    for (double& x : u) x /= norm_a;
    u[0] += 1.0;
    double uu = 0.0;
    for (double x : u) uu += x * x;

    for (std::size_t col = 1; col < s; ++col) {
      std::vector<HilbertVector::Entry> entries;
      for (std::size_t j = 0; j < s; ++j) {
        double h = (j == col ? 1.0 : 0.0) - 2.0 * u[j] * u[col] / uu;
        entries.push_back({fiber[j], {h, 0.0}});
      }
      // Phase convention: first nonzero coordinate positive.
      auto first = std::find_if(entries.begin(), entries.end(), [](const auto& e) {
        return std::abs(e.amplitude.real()) > 1e-15;
      });
      if (first != entries.end() && first->amplitude.real() < 0)
        for (auto& e : entries) e.amplitude = -e.amplitude;
      basis.vectors.push_back(HilbertVector::from_entries(std::move(entries)));
    }
  }
  return basis;
}

std::optional<std::uint32_t> support_level(const ShiftGraph& graph,
                                           const HilbertVector& x) {
  const auto v = x.max_vertex();
  if (!v) return std::nullopt;
  return graph.level(*v);
}

std::optional<std::uint32_t> min_support_level(const ShiftGraph& graph,
                                               const HilbertVector& x) {
  const auto v = x.min_vertex();
  if (!v) return std::nullopt;
  return graph.level(*v);
}

bool Orthonormalizer::add(const HilbertVector& v) {
  if (v.is_zero()) {
    ++dropped_;
    return false;
  }
  HilbertVector w = v.normalized();
  for (int pass = 0; pass < 2; ++pass) {
    for (const HilbertVector& q : basis_) {
      ScaledComplex c = inner(w, q);
      if (c.is_zero()) continue;
      c.mantissa = -c.mantissa;
      w = axpy(c, q, w);
    }
  }
  if (!(w.norm() >= tol_)) {
    ++dropped_;
    return false;
  }
  basis_.push_back(w.normalized());
  return true;
}

Orthonormalized orthonormalize(std::span<const HilbertVector> vectors,
                               double tol) {
  Orthonormalizer gs(tol);
  for (const auto& v : vectors) gs.add(v);
  return {gs.basis(), gs.rank()};
}

SingularExtremes singular_extremes(const Eigen::MatrixXcd& matrix) {
  if (matrix.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(matrix);
  const auto& s = svd.singularValues();
  return {s(0), s(s.size() - 1)};
}

}  // namespace bpe
