#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bpe/graph.hpp"
#include "bpe/hilbert_vector.hpp"
#include "bpe/operator.hpp"

namespace bpe {

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Growth of one orbit: log2_norms[n] = log2 ||T^n x|| for n = 0..horizon.
struct OrbitRecord {
  HilbertVector x;
  std::uint32_t horizon = 0;
  std::vector<double> log2_norms;
};

/// T^n x for n = 0..N (canonicalized at every step).
std::vector<HilbertVector> orbit(const ShiftGraph& graph,
                                 const WeightAssignment& weights,
                                 const HilbertVector& x, std::uint32_t N);

/// Needs depth >= N + level(x) + 1; pass dual weights for T'.
OrbitRecord orbit_norms(const ShiftGraph& graph, const WeightAssignment& weights,
                        const HilbertVector& x, std::uint32_t N);

/// Sum of log2 lambda over levels a..b of one branch (0 when a > b).
double weight_product_log(const ShiftGraph& graph,
                          const WeightAssignment& weights, std::size_t branch,
                          std::uint32_t a, std::uint32_t b);

/// Dyadic decomposition n = 2^m + k (0 <= k < 2^m) with the exponent bound of
/// the lacunary chain. The ratio (2^(m-1) + alpha) / (2^m + k) is kept as the
/// exact fraction ratio_num / ratio_den (both doubled so m = 0 stays integral).
struct Example1Certificate {
  std::uint64_t n = 0;
  std::uint64_t m_n = 0;
  std::uint64_t k_n = 0;
  std::uint64_t alpha_kn = 0;
  std::uint64_t ratio_num = 0;
  std::uint64_t ratio_den = 1;
  /// 2^(m-1) + alpha - 3, the claimed log2(lambda'_1 ... lambda'_n).
  double log2_product = 0.0;

  bool within_bound() const { return 3 * ratio_num <= 2 * ratio_den; }
  bool at_bound() const { return 3 * ratio_num == 2 * ratio_den; }
  double ratio() const {
    return static_cast<double>(ratio_num) / static_cast<double>(ratio_den);
  }
};

Example1Certificate example1_certificate(std::uint64_t n);

/// Tail-max proxy for limsup ||T^n x||^(1/n): the maximum over the last
/// window_fraction of the horizon. Needs horizon >= 16.
double local_spectral_radius(const OrbitRecord& orbit,
                             double window_fraction = 0.5);

/// log2 max_v ||T^n e_v|| over vertices with level <= level_bound. For shifts
/// on a parent function T^{*n} T^n is diagonal, so this is log2 ||T^n||
/// restricted to the materialized part.
double operator_norm_log2(const ShiftGraph& graph,
                          const WeightAssignment& weights, std::uint32_t n,
                          std::uint32_t level_bound);

/// sqrt(sup_v d_v), including the tail bound; an upper bound for ||T||.
double operator_norm_bound(const ShiftGraph& graph,
                           const WeightAssignment& weights);

struct SpectralReport {
  double r_dual_estimate = 0.0;  // lower estimate of r(T')
  double r_dual_upper = 0.0;     // ||T'|| bound from the tail rule
  double r_inner = 0.0;          // 1 / r(T')
  double r_disc = 0.0;           // inf over the sphere of 1 / r_{T'}(x)
  std::vector<double> r_local;   // r_{T'}(x_i) per basis vector
  double r_local_sampled_max = 0.0;
  std::uint32_t sphere_samples = 0;
  std::uint32_t horizon = 0;
  std::uint32_t norm_power = 0;  // n used for ||T'^n||^(1/n)
  std::uint64_t seed = kDefaultSeed;
};

SpectralReport disc_radii(const ShiftGraph& graph, const DualWeights& dual,
                          const WanderingBasis& basis, std::uint32_t N,
                          std::uint32_t sphere_samples,
                          std::uint64_t seed = kDefaultSeed,
                          double window_fraction = 0.5);

/// Partial sums of sum_m lambda'_1...lambda'_{m+1} / (lambda'_0)^(m+1) along
/// the chain leaving the loop vertex, in log2.
struct SeriesReport {
  std::uint32_t M = 0;
  std::vector<double> log2_terms;
  std::vector<double> log2_partial_sums;
  double last_term_log2 = 0.0;
  double log2_sum = 0.0;
  /// Heuristic: the last term is at least the average term.
  bool diverges_at_horizon = false;
};

SeriesReport analyticity_series(const ShiftGraph& graph, const DualWeights& dual,
                                std::uint32_t M);

/// Finite-horizon view of the three conditions on lambda_1, lambda_2, ...
/// lhs: max over n in [N/2, N] of (lambda_1...lambda_n)^(-1/n).
/// rhs: over windows of length N/2 inside the supplied sequence, the largest
/// (lambda_{m+1}...lambda_{m+N/2})^(-2/N).
struct SequenceConditions {
  bool cond_i = false;
  bool cond_ii = false;
  bool cond_iii = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::uint32_t N = 0;
  std::uint32_t window = 0;
  double margin = 0.0;
};

SequenceConditions sequence_conditions(std::span<const double> lambda,
                                       std::uint32_t N, double margin = 0.01);

}  // namespace bpe
