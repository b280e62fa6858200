#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "bpe/graph.hpp"
#include "bpe/hilbert_vector.hpp"

namespace bpe {

/// Weights lambda' of the Cauchy dual T' = T (T*T)^{-1}, which is again a
/// shift on the same graph.
struct DualWeights {
  WeightAssignment weights;
};

/// Orthonormal basis of ker T*: parentless roots first, then the fiber
/// complements ordered by the fiber's parent.
struct WanderingBasis {
  std::vector<HilbertVector> vectors;

  std::size_t dim() const noexcept { return vectors.size(); }
};

/// (Tx)_u = lambda_u x_{parent(u)}. Throws HorizonExceeded when x touches the
/// last materialized level.
HilbertVector apply_shift(const ShiftGraph& graph,
                          const WeightAssignment& weights,
                          const HilbertVector& x);

/// (T*x)_v = sum over children u of lambda_u x_u.
HilbertVector apply_adjoint(const ShiftGraph& graph,
                            const WeightAssignment& weights,
                            const HilbertVector& x);

/// lambda'_u = lambda_u / d_{parent(u)}.
DualWeights cauchy_dual(const ShiftGraph& graph, const WeightAssignment& weights);

WanderingBasis wandering_basis(const ShiftGraph& graph,
                               const WeightAssignment& weights);

/// Highest level touched by x, or nullopt for the zero vector.
std::optional<std::uint32_t> support_level(const ShiftGraph& graph,
                                           const HilbertVector& x);
std::optional<std::uint32_t> min_support_level(const ShiftGraph& graph,
                                               const HilbertVector& x);

/// Incremental modified Gram-Schmidt with one re-orthogonalization pass.
/// A candidate is dropped when its residual, relative to its own norm,
/// falls below the tolerance.
class Orthonormalizer {
 public:
  explicit Orthonormalizer(double tol = 1e-12) : tol_(tol) {}

  /// Returns true when v extended the span.
  bool add(const HilbertVector& v);

  const std::vector<HilbertVector>& basis() const noexcept { return basis_; }
  std::size_t rank() const noexcept { return basis_.size(); }
  std::size_t dropped() const noexcept { return dropped_; }

 private:
  double tol_;
  std::vector<HilbertVector> basis_;
  std::size_t dropped_ = 0;
};

struct Orthonormalized {
  std::vector<HilbertVector> vectors;
  std::size_t rank = 0;
};

Orthonormalized orthonormalize(std::span<const HilbertVector> vectors,
                               double tol = 1e-12);

struct SingularExtremes {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

/// Largest and smallest of the min(rows, cols) singular values.
SingularExtremes singular_extremes(const Eigen::MatrixXcd& matrix);

}  // namespace bpe
