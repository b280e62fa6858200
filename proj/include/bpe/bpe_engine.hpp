#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bpe/graph.hpp"
#include "bpe/hilbert_vector.hpp"
#include "bpe/operator.hpp"
#include "bpe/spectral.hpp"

namespace bpe {

/// Orthonormal basis of M_n = span{T^k x_i : k <= n}. Level k holds the
/// vectors added when M_{k-1} was extended to M_k; they are orthogonal to
/// M_{k-1}.
struct ModuliBasis {
  std::uint32_t n = 0;
  std::vector<HilbertVector> onb;
  /// level_end[k] = number of onb vectors in M_k.
  std::vector<std::size_t> level_end;
  std::size_t dropped = 0;

  std::size_t rank() const noexcept { return onb.size(); }
};

/// Level 0 is the orthonormalized kernel basis. Each later level
/// orthonormalizes T q for the vectors q added at the previous level, which
/// spans the same M_n as the raw orbit but avoids its ill-conditioning.
ModuliBasis moduli_basis(const ShiftGraph& graph, const WeightAssignment& weights,
                         const WanderingBasis& basis, std::uint32_t n,
                         double tol = 1e-12);

/// Extends M_n to M_{n+1} in place.
void extend_moduli_basis(const ShiftGraph& graph, const WeightAssignment& weights,
                         ModuliBasis& mb, double tol = 1e-12);

/// sum_{k=0}^n conj(w)^k T'^k x.
HilbertVector s_n_apply(const ShiftGraph& graph, const DualWeights& dual,
                        Complex w, const HilbertVector& x, std::uint32_t n);

enum class Classification { Bounded, Unbounded, Inconclusive };

const char* to_string(Classification c) noexcept;

struct BpeSample {
  Complex w;
  /// log2 B_n for n = 0..N; B_n itself overflows quickly outside bpe(T).
  std::vector<double> log2_B;
  double slope = 0.0;
  Classification classification = Classification::Inconclusive;

  double B(std::size_t n) const { return std::exp2(log2_B.at(n)); }
  double B_N() const { return std::exp2(log2_B.back()); }
};

/// Precomputes M_N and the dual orbits once; evaluate() is const and safe to
/// call from several threads.
class BpeEvaluator {
 public:
  BpeEvaluator(const ShiftGraph& graph, const WeightAssignment& weights,
               const DualWeights& dual, const WanderingBasis& basis,
               std::uint32_t N);

  /// log2 B_n(w) for n = 0..N.
  std::vector<double> log2_b_n(Complex w) const;

  std::uint32_t horizon() const noexcept { return N_; }
  const ModuliBasis& moduli() const noexcept { return moduli_; }
  std::size_t kernel_dim() const noexcept { return orbits_.size(); }

 private:
  std::uint32_t N_;
  ModuliBasis moduli_;
  /// orbits_[i][k] = T'^k x_i.
  std::vector<std::vector<HilbertVector>> orbits_;
};

/// B_n(w) for n = 0..N (may contain inf where B_n overflows a double).
std::vector<double> b_n(const ShiftGraph& graph, const WeightAssignment& weights,
                        const DualWeights& dual, const WanderingBasis& basis,
                        Complex w, std::uint32_t N);

struct ClassifyThresholds {
  double tail_fraction = 0.5;
  double slope_threshold = 1e-3;
  double cap = 1e12;
};

struct PointClass {
  double slope = 0.0;
  Classification classification = Classification::Inconclusive;
};

/// Least-squares slope of log2 B_n over n in [ceil((1 - tail_fraction) N), N].
PointClass classify_point(std::span<const double> log2_B,
                          const ClassifyThresholds& th = {});

enum class GridKind { Polar, Cartesian };

const char* to_string(GridKind k) noexcept;

/// Polar grids list points ray by ray (angle 2 pi a / rays), radii
/// r_min, r_min + step, ... up to r_max. Cartesian grids list rows from
/// im_max down to im_min, each row from re_min to re_max.
struct GridSpec {
  GridKind kind = GridKind::Polar;
  std::uint32_t rays = 64;
  double r_min = 0.0;
  double r_max = 1.0;
  double r_step = 0.01;
  double re_min = -1.0, re_max = 1.0, im_min = -1.0, im_max = 1.0;
  std::uint32_t nx = 64, ny = 64;

  std::size_t radius_count() const;
  /// Heatmap width and height: radii x rays, or nx x ny.
  std::size_t width() const;
  std::size_t height() const;
  std::size_t size() const { return width() * height(); }
  std::vector<Complex> points() const;
  /// Throws Validation for an empty or malformed grid.
  void validate() const;
};

struct RegionScan {
  GridSpec grid;
  std::uint32_t N = 0;
  ClassifyThresholds thresholds;
  std::vector<BpeSample> samples;
  std::optional<SpectralReport> radii;
  std::size_t moduli_rank = 0;
  std::size_t moduli_dropped = 0;
};

/// Worker count for scans: BPE_ATLAS_THREADS when set to a positive integer,
/// else the hardware count.
unsigned scan_threads();

/// threads = 0 means scan_threads(). Results do not depend on the thread count.
RegionScan scan_region(const ShiftGraph& graph, const WeightAssignment& weights,
                       const GridSpec& grid, std::uint32_t N,
                       const ClassifyThresholds& th = {}, unsigned threads = 0);

struct EvaluationData {
  Complex w;
  std::uint32_t N = 0;
  /// Truncated E_w* x_i.
  std::vector<HilbertVector> coeff_vectors;
  /// gram(i, j) = <E_w* x_j, E_w* x_i>.
  Eigen::MatrixXcd gram;
  /// Bound on the Hilbert-Schmidt norm of the dropped series tail; inf when
  /// |w| is outside the convergence estimate.
  double tail_bound = 0.0;
  /// True when the bound comes from ||T'|| rather than the local radius.
  bool tail_rigorous = false;
};

EvaluationData evaluation_data(const ShiftGraph& graph, const DualWeights& dual,
                               const WanderingBasis& basis, Complex w,
                               std::uint32_t N, bool strict = false);

/// kappa(z, w)(i, j) = <E_w* x_j, E_z* x_i>, truncated at N. Throws
/// DivergentSeries when either point is outside the convergence estimate.
Eigen::MatrixXcd kernel_gram(const ShiftGraph& graph, const DualWeights& dual,
                             const WanderingBasis& basis, Complex z, Complex w,
                             std::uint32_t N);

struct AdjointEigenbasis {
  Complex w;
  std::uint32_t depth = 0;
  /// Unit vectors in the numerical nullspace of T* - conj(w), ordered by
  /// increasing tail mass.
  std::vector<HilbertVector> vectors;
  /// Squared l2 mass on the last two levels, per vector.
  std::vector<double> tail_mass;
  std::vector<bool> accepted;
  double max_residual = 0.0;

  std::size_t accepted_count() const;
};

/// Nullspace of (T* - conj(w)) with rows at levels < depth and columns at
/// levels <= depth, so the last level is unconstrained. A vector is accepted
/// when its tail mass is at most tail_threshold and the tail masses do not
/// grow from depth - 2 to depth.
AdjointEigenbasis adjoint_eigenbasis(const ShiftGraph& graph,
                                     const WeightAssignment& weights, Complex w,
                                     std::uint32_t depth,
                                     double tail_threshold = 0.1);

struct GramTestResult {
  double sigma_min = 0.0;
  std::size_t kernel_dim = 0;
  std::size_t eigen_dim = 0;
  bool dimension_mismatch = false;
  /// <x_i, y_j> = delta_ij; filled when sigma_min > tol and dimensions agree.
  std::vector<HilbertVector> dual_family;
  bool in_bpe = false;
};

GramTestResult gram_test(const WanderingBasis& basis,
                         const AdjointEigenbasis& eigen, double tol = 1e-8);

}  // namespace bpe
