#include "bpe/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "bpe/error.hpp"

namespace bpe {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log2_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log2(1.0 + std::exp2(lo - hi));
}

void require_orbit_horizon(const ShiftGraph& graph, const HilbertVector& x,
                           std::uint32_t N) {
  const auto lvl = support_level(graph, x).value_or(0);
  if (std::uint64_t{graph.depth()} < std::uint64_t{N} + lvl + 1)
    fail(ErrorCode::HorizonExceeded,
         "orbit of length " + std::to_string(N) + " from level " +
             std::to_string(lvl) + " needs depth >= " +
             std::to_string(std::uint64_t{N} + lvl + 1) + ", have " +
             std::to_string(graph.depth()));
}

}  // namespace

std::vector<HilbertVector> orbit(const ShiftGraph& graph,
                                 const WeightAssignment& weights,
                                 const HilbertVector& x, std::uint32_t N) {
  require_orbit_horizon(graph, x, N);
  std::vector<HilbertVector> out;
  out.reserve(N + 1);
  out.push_back(x);
  for (std::uint32_t n = 1; n <= N; ++n)
    out.push_back(apply_shift(graph, weights, out.back()));
  return out;
}

OrbitRecord orbit_norms(const ShiftGraph& graph, const WeightAssignment& weights,
                        const HilbertVector& x, std::uint32_t N) {
  require_orbit_horizon(graph, x, N);
  OrbitRecord rec{x, N, {}};
  rec.log2_norms.reserve(N + 1);
  HilbertVector v = x;
  rec.log2_norms.push_back(v.log2_norm());
  for (std::uint32_t n = 1; n <= N; ++n) {
    v = apply_shift(graph, weights, v);
    rec.log2_norms.push_back(v.log2_norm());
  }
  return rec;
}

double weight_product_log(const ShiftGraph& graph,
                          const WeightAssignment& weights, std::size_t branch,
                          std::uint32_t a, std::uint32_t b) {
  if (a > b) return 0.0;
  if (branch >= graph.branches().size())
    fail(ErrorCode::InvalidArgument, "branch index out of range");
  const auto& path = graph.branches()[branch];
  if (b >= path.size())
    fail(ErrorCode::InvalidArgument,
         "level " + std::to_string(b) + " beyond the horizon");
  double sum = 0.0;
  for (std::uint32_t l = a; l <= b; ++l) {
    const double w = weights.lambda(path[l]);
    if (std::isnan(w))
      fail(ErrorCode::InvalidArgument,
           "no weight at level " + std::to_string(l) + " (root)");
    sum += std::log2(w);
  }
  return sum;
}

Example1Certificate example1_certificate(std::uint64_t n) {
  if (n < 1 || n >= (std::uint64_t{1} << 60))
    fail(ErrorCode::InvalidArgument, "certificate needs 1 <= n < 2^60");
  Example1Certificate c;
  c.n = n;
  c.m_n = static_cast<std::uint64_t>(std::bit_width(n) - 1);
  const std::uint64_t pow_m = std::uint64_t{1} << c.m_n;
  c.k_n = n - pow_m;
  // 2 * 2^(m-1) = 2^m keeps the m = 0 case integral.
  const std::uint64_t twice_half = pow_m;
  if (2 * c.k_n <= twice_half)
    c.alpha_kn = c.k_n;
  else
    c.alpha_kn = pow_m / 2;
  c.ratio_num = twice_half + 2 * c.alpha_kn;
  c.ratio_den = 2 * (pow_m + c.k_n);
  c.log2_product = 0.5 * static_cast<double>(twice_half) +
                   static_cast<double>(c.alpha_kn) - 3.0;
  return c;
}

double local_spectral_radius(const OrbitRecord& orbit, double window_fraction) {
  if (orbit.horizon < 16 || orbit.log2_norms.size() != orbit.horizon + 1)
    fail(ErrorCode::InvalidArgument, "local radius needs an orbit horizon >= 16");
  if (!(window_fraction > 0.0 && window_fraction < 1.0))
    fail(ErrorCode::InvalidArgument, "window fraction must lie in (0, 1)");
  const auto N = orbit.horizon;
  const auto start = std::max<std::uint32_t>(
      1, static_cast<std::uint32_t>(std::ceil((1.0 - window_fraction) * N)));
  double best = kNegInf;
  for (std::uint32_t n = start; n <= N; ++n)
    best = std::max(best, orbit.log2_norms[n] / static_cast<double>(n));
  return best == kNegInf ? 0.0 : std::exp2(best);
}

double operator_norm_log2(const ShiftGraph& graph,
                          const WeightAssignment& weights, std::uint32_t n,
                          std::uint32_t level_bound) {
  if (std::uint64_t{level_bound} + n > graph.depth())
    fail(ErrorCode::HorizonExceeded,
         "||T^" + std::to_string(n) + "|| up to level " +
             std::to_string(level_bound) + " needs depth >= " +
             std::to_string(std::uint64_t{level_bound} + n));

  // h[v] = log2 ||T^m e_v||^2; the supports of T^(m-1) e_c for distinct
  // children c are disjoint, so the squares add.
  const std::size_t V = graph.size();
  std::vector<double> h(V, 0.0), next(V, kNegInf);
  std::vector<double> log2_w2(V, 0.0);
  for (VertexId v = 0; v < V; ++v)
    if (!graph.is_root(v)) log2_w2[v] = 2.0 * std::log2(weights.lambda(v));

  for (std::uint32_t m = 1; m <= n; ++m) {
    const std::uint32_t top = graph.depth() - m;
    for (std::uint32_t l = 0; l <= top; ++l) {
      for (VertexId v : graph.level_vertices(l)) {
        double acc = kNegInf;
        for (VertexId c : graph.children(v)) acc = log2_add(acc, log2_w2[c] + h[c]);
        next[v] = acc;
      }
    }
    std::swap(h, next);
  }

  double best = kNegInf;
  for (std::uint32_t l = 0; l <= level_bound; ++l)
    for (VertexId v : graph.level_vertices(l)) best = std::max(best, h[v]);
  return 0.5 * best;
}

double operator_norm_bound(const ShiftGraph& graph,
                           const WeightAssignment& weights) {
  double d = weights.max_fiber_norm_sq();
  const double t = weights.tail().max;
  if (graph.tail_rule() == TailRule::EventuallyLinearChain)
    d = std::max(d, t * t);
  else
    d = std::max(d, t * t * static_cast<double>(graph.size()));
  return std::sqrt(d);
}

SpectralReport disc_radii(const ShiftGraph& graph, const DualWeights& dual,
                          const WanderingBasis& basis, std::uint32_t N,
                          std::uint32_t sphere_samples, std::uint64_t seed,
                          double window_fraction) {
  if (basis.dim() == 0)
    fail(ErrorCode::InvalidArgument, "disc radii need a nonempty kernel basis");
  const auto& w = dual.weights;
  const std::size_t d = basis.dim();

  SpectralReport rep;
  rep.horizon = N;
  rep.sphere_samples = sphere_samples;
  rep.seed = seed;
  rep.norm_power = std::max<std::uint32_t>(1, N / 4);
  if (rep.norm_power > graph.depth())
    fail(ErrorCode::HorizonExceeded, "depth too small for ||T'^n||");
  const std::uint32_t level_bound = graph.depth() - rep.norm_power;
  rep.r_dual_estimate =
      std::exp2(operator_norm_log2(graph, w, rep.norm_power, level_bound) /
                rep.norm_power);
  rep.r_dual_upper = std::max(rep.r_dual_estimate, operator_norm_bound(graph, w));
  rep.r_inner = 1.0 / rep.r_dual_estimate;

  // ||T'^n sum c_i x_i||^2 = c* G_n c with G_n the Gram matrix of the orbits
  // at step n, kept as mantissa * 4^scale. Only the tail window is stored.
  const auto start = std::max<std::uint32_t>(
      1, static_cast<std::uint32_t>(std::ceil((1.0 - window_fraction) * N)));
  std::vector<std::vector<HilbertVector>> window(d);
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const auto& x = basis.vectors[i];
    require_orbit_horizon(graph, x, N);
    OrbitRecord rec{x, N, {}};
    HilbertVector v = x;
    rec.log2_norms.push_back(v.log2_norm());
    for (std::uint32_t n = 1; n <= N; ++n) {
      v = apply_shift(graph, w, v);
      rec.log2_norms.push_back(v.log2_norm());
      if (n >= start && sphere_samples > 0) window[i].push_back(v);
    }
    rep.r_local.push_back(local_spectral_radius(rec, window_fraction));
    worst = std::max(worst, rep.r_local.back());
  }

  std::vector<Eigen::MatrixXcd> gram;
  std::vector<std::int64_t> gram_scale;
  for (std::uint32_t n = start; n <= N && sphere_samples > 0; ++n) {
    const std::size_t t = n - start;
    std::int64_t top = std::numeric_limits<std::int64_t>::min();
    for (std::size_t i = 0; i < d; ++i)
      if (!window[i][t].is_zero()) top = std::max(top, window[i][t].log2_scale());
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(d, d);
    if (top != std::numeric_limits<std::int64_t>::min()) {
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          ScaledComplex s = inner(window[j][t], window[i][t]);
          s.exponent -= 2 * top;
          G(i, j) = s.value();
          G(j, i) = std::conj(G(i, j));
        }
    }
    gram.push_back(std::move(G));
    gram_scale.push_back(top);
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  double sampled_max = 0.0;
  for (std::uint32_t s = 0; s < sphere_samples; ++s) {
    Eigen::VectorXcd c(d);
    for (std::size_t i = 0; i < d; ++i) c(i) = {gauss(rng), gauss(rng)};
    c.normalize();
    double best = kNegInf;
    for (std::size_t t = 0; t < gram.size(); ++t) {
      const double q = (c.adjoint() * gram[t] * c)(0, 0).real();
      if (!(q > 0.0)) continue;
      const double n = static_cast<double>(start + t);
      const double log2_norm = 0.5 * std::log2(q) + static_cast<double>(gram_scale[t]);
      best = std::max(best, log2_norm / n);
    }
    if (best != kNegInf) sampled_max = std::max(sampled_max, std::exp2(best));
  }
  rep.r_local_sampled_max = sampled_max;
  worst = std::max(worst, sampled_max);
  rep.r_disc = worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
  return rep;
}

SeriesReport analyticity_series(const ShiftGraph& graph, const DualWeights& dual,
                                std::uint32_t M) {
  const auto& branches = graph.branches();
  auto it = std::find_if(branches.begin(), branches.end(), [&](const auto& b) {
    return graph.has_loop(b.front());
  });
  if (it == branches.end())
    fail(ErrorCode::InvalidArgument, "no loop at the root");
  const auto& path = *it;
  if (std::uint64_t{M} + 1 >= path.size())
    fail(ErrorCode::HorizonExceeded, "series horizon beyond the graph depth");

  const auto& w = dual.weights;
  const double log2_l0 = std::log2(w.lambda(path[0]));
  SeriesReport rep;
  rep.M = M;
  double prefix = 0.0;
  double sum = kNegInf;
  for (std::uint32_t m = 0; m <= M; ++m) {
    prefix += std::log2(w.lambda(path[m + 1]));
    const double term = prefix - static_cast<double>(m + 1) * log2_l0;
    sum = log2_add(sum, term);
    rep.log2_terms.push_back(term);
    rep.log2_partial_sums.push_back(sum);
  }
  rep.last_term_log2 = rep.log2_terms.back();
  rep.log2_sum = sum;
  rep.diverges_at_horizon =
      rep.last_term_log2 >= sum - std::log2(static_cast<double>(M) + 1.0) - 1e-12;
  return rep;
}

SequenceConditions sequence_conditions(std::span<const double> lambda,
                                       std::uint32_t N, double margin) {
  if (N < 64) fail(ErrorCode::InvalidArgument, "sequence conditions need N >= 64");
  if (lambda.size() < N)
    fail(ErrorCode::InvalidArgument, "sequence shorter than the horizon");
  SequenceConditions out;
  out.N = N;
  out.window = N / 2;
  out.margin = margin;
  out.cond_i = std::all_of(lambda.begin(), lambda.end(),
                           [](double l) { return l <= 1.0; });
  out.cond_ii = std::all_of(lambda.begin(), lambda.end(),
                            [](double l) { return l > 0.0; });
  if (!out.cond_ii) return out;

  // prefix[n] = log2(lambda_1 ... lambda_n)
  std::vector<double> prefix(lambda.size() + 1, 0.0);
  for (std::size_t i = 0; i < lambda.size(); ++i)
    prefix[i + 1] = prefix[i] + std::log2(lambda[i]);

  double lhs = kNegInf;
  for (std::uint32_t n = (N + 1) / 2; n <= N; ++n)
    lhs = std::max(lhs, -prefix[n] / static_cast<double>(n));
  double rhs = kNegInf;
  const std::size_t L = out.window;
  for (std::size_t m = 0; m + L <= lambda.size(); ++m)
    rhs = std::max(rhs, -(prefix[m + L] - prefix[m]) / static_cast<double>(L));
  out.lhs = std::exp2(lhs);
  out.rhs = std::exp2(rhs);
  out.cond_iii = out.lhs < out.rhs - margin;
  return out;
}

}  // namespace bpe
