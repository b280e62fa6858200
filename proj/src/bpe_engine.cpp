#include "bpe/bpe_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "bpe/error.hpp"

namespace bpe {
namespace {

constexpr std::int64_t kNoExp = std::numeric_limits<std::int64_t>::min();

void require_depth(const ShiftGraph& graph, std::uint32_t n, const char* what) {
  if (std::uint64_t{graph.depth()} < std::uint64_t{n} + 2)
    fail(ErrorCode::HorizonExceeded,
         std::string(what) + " at n = " + std::to_string(n) +
             " needs depth >= " + std::to_string(std::uint64_t{n} + 2) +
             ", have " + std::to_string(graph.depth()));
}

// Running Hermitian sum of outer products kept as M * 2^scale.
class ScaledGram {
 public:
  explicit ScaledGram(std::size_t d) : M_(Eigen::MatrixXcd::Zero(d, d)) {}

  void add_row(std::span<const ScaledComplex> row) {
    std::int64_t e = kNoExp;
    for (const auto& c : row)
      if (!c.is_zero()) e = std::max(e, c.exponent);
    if (e == kNoExp) return;
    Eigen::VectorXcd v(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      const auto shift = std::clamp<std::int64_t>(row[i].exponent - e, -4000, 0);
      v(i) = row[i].is_zero()
                 ? Complex{}
                 : row[i].mantissa * std::ldexp(1.0, static_cast<int>(shift));
    }
    const std::int64_t e2 = 2 * e;
    if (scale_ == kNoExp) {
      scale_ = e2;
    } else if (e2 > scale_) {
      M_ *= std::ldexp(1.0, static_cast<int>(std::max<std::int64_t>(scale_ - e2, -4000)));
      scale_ = e2;
    }
    const double f =
        std::ldexp(1.0, static_cast<int>(std::max<std::int64_t>(e2 - scale_, -4000)));
    M_.noalias() += f * (v.conjugate() * v.transpose());
  }

  double log2_lambda_max() const {
    if (scale_ == kNoExp) return -std::numeric_limits<double>::infinity();
    double top = 0.0;
    if (M_.rows() == 1) {
      top = M_(0, 0).real();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M_, Eigen::EigenvaluesOnly);
      top = es.eigenvalues().maxCoeff();
    }
    return std::log2(top) + static_cast<double>(scale_);
  }

 private:
  Eigen::MatrixXcd M_;
  std::int64_t scale_ = kNoExp;
};

// conj(w)^k as a scaled value; k * log2|w| never overflows.
ScaledComplex wbar_power(Complex w, std::uint32_t k) {
  if (k == 0) return {{1.0, 0.0}, 0};
  if (w == Complex{}) return {};
  const double theta = -std::arg(w) * static_cast<double>(k);
  return ScaledComplex::from_polar_log2(std::polar(1.0, theta),
                                        static_cast<double>(k) * std::log2(std::abs(w)));
}

std::vector<HilbertVector> dual_orbit(const ShiftGraph& graph,
                                      const DualWeights& dual,
                                      const HilbertVector& x, std::uint32_t N) {
  std::vector<HilbertVector> out;
  out.reserve(N + 1);
  out.push_back(x);
  for (std::uint32_t n = 1; n <= N; ++n)
    out.push_back(apply_shift(graph, dual.weights, out.back()));
  return out;
}

struct TailEstimate {
  double rho = 0.0;
  bool rigorous = false;
};

// Geometric ratio dominating the dropped terms of sum conj(w)^n T'^n x.
TailEstimate tail_ratio(const ShiftGraph& graph, const DualWeights& dual,
                        const std::vector<std::vector<HilbertVector>>& orbits,
                        Complex w, std::uint32_t N) {
  const double aw = std::abs(w);
  const double norm = operator_norm_bound(graph, dual.weights);
  if (aw * norm < 1.0) return {aw * norm, true};
  if (N >= 16) {
    double r = 0.0;
    for (const auto& orb : orbits) {
      OrbitRecord rec{orb.front(), N, {}};
      for (const auto& v : orb) rec.log2_norms.push_back(v.log2_norm());
      r = std::max(r, local_spectral_radius(rec, 0.5));
    }
    if (aw * r < 1.0) return {aw * r, false};
  }
  return {std::numeric_limits<double>::infinity(), false};
}

}  // namespace

void extend_moduli_basis(const ShiftGraph& graph, const WeightAssignment& weights,
                         ModuliBasis& mb, double tol) {
  require_depth(graph, mb.n + 1, "moduli basis");
  std::vector<HilbertVector> candidates;
  const std::size_t lo = mb.n == 0 ? 0 : mb.level_end[mb.n - 1];
  for (std::size_t j = lo; j < mb.level_end[mb.n]; ++j)
    candidates.push_back(apply_shift(graph, weights, mb.onb[j]));

  for (auto& c : candidates) {
    HilbertVector v = c.normalized();
    for (int pass = 0; pass < 2; ++pass)
      for (const HilbertVector& q : mb.onb) {
        ScaledComplex s = inner(v, q);
        if (s.is_zero()) continue;
        s.mantissa = -s.mantissa;
        v = axpy(s, q, v);
      }
    if (!(v.norm() >= tol)) {
      ++mb.dropped;
      continue;
    }
    mb.onb.push_back(v.normalized());
  }
  ++mb.n;
  mb.level_end.push_back(mb.onb.size());
}

ModuliBasis moduli_basis(const ShiftGraph& graph, const WeightAssignment& weights,
                         const WanderingBasis& basis, std::uint32_t n,
                         double tol) {
  require_depth(graph, n, "moduli basis");
  Orthonormalizer gs(tol);
  for (const auto& x : basis.vectors) gs.add(x);
  ModuliBasis mb;
  mb.onb = gs.basis();
  mb.dropped = gs.dropped();
  mb.level_end.push_back(mb.onb.size());
  while (mb.n < n) extend_moduli_basis(graph, weights, mb, tol);
  return mb;
}

HilbertVector s_n_apply(const ShiftGraph& graph, const DualWeights& dual,
                        Complex w, const HilbertVector& x, std::uint32_t n) {
  require_depth(graph, n, "S_n(w)");
  HilbertVector sum = x;
  if (w == Complex{}) return sum;
  HilbertVector term = x;
  for (std::uint32_t k = 1; k <= n; ++k) {
    term = apply_shift(graph, dual.weights, term);
    sum = axpy(wbar_power(w, k), term, sum);
  }
  return sum;
}

const char* to_string(Classification c) noexcept {
  switch (c) {
    case Classification::Bounded: return "BOUNDED";
    case Classification::Unbounded: return "UNBOUNDED";
    case Classification::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

BpeEvaluator::BpeEvaluator(const ShiftGraph& graph,
                           const WeightAssignment& weights,
                           const DualWeights& dual, const WanderingBasis& basis,
                           std::uint32_t N)
    : N_(N) {
  if (basis.dim() == 0)
    fail(ErrorCode::InvalidArgument, "B_n needs a nonempty kernel basis");
  require_depth(graph, N, "B_n");
  moduli_ = moduli_basis(graph, weights, basis, N);
  for (const auto& x : basis.vectors) orbits_.push_back(dual_orbit(graph, dual, x, N));
}

std::vector<double> BpeEvaluator::log2_b_n(Complex w) const {
  const std::size_t d = orbits_.size();
  std::vector<HilbertVector> S;
  for (const auto& orb : orbits_) S.push_back(orb.front());
  ScaledGram gram(d);
  std::vector<ScaledComplex> row(d);
  std::vector<double> out;
  out.reserve(N_ + 1);
  const bool moving = w != Complex{};
  // Coordinates of S_n x_i along level-k vectors stop changing once n >= k,
  // so each level contributes its rows exactly once.
  for (std::uint32_t k = 0; k <= N_; ++k) {
    if (k > 0 && moving) {
      const ScaledComplex c = wbar_power(w, k);
      for (std::size_t i = 0; i < d; ++i) S[i] = axpy(c, orbits_[i][k], S[i]);
    }
    const std::size_t lo = k == 0 ? 0 : moduli_.level_end[k - 1];
    for (std::size_t j = lo; j < moduli_.level_end[k]; ++j) {
      for (std::size_t i = 0; i < d; ++i) row[i] = inner(S[i], moduli_.onb[j]);
      gram.add_row(row);
    }
    out.push_back(0.5 * gram.log2_lambda_max());
  }
  return out;
}

std::vector<double> b_n(const ShiftGraph& graph, const WeightAssignment& weights,
                        const DualWeights& dual, const WanderingBasis& basis,
                        Complex w, std::uint32_t N) {
  const BpeEvaluator ev(graph, weights, dual, basis, N);
  auto out = ev.log2_b_n(w);
  for (double& v : out) v = std::exp2(v);
  return out;
}

PointClass classify_point(std::span<const double> log2_B,
                          const ClassifyThresholds& th) {
  if (log2_B.size() < 33)
    fail(ErrorCode::InvalidArgument, "classification needs N >= 32");
  const std::size_t N = log2_B.size() - 1;
  const auto start = static_cast<std::size_t>(
      std::ceil((1.0 - th.tail_fraction) * static_cast<double>(N)));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double cnt = 0;
  for (std::size_t n = std::min(start, N - 1); n <= N; ++n) {
    const double x = static_cast<double>(n);
    const double y = log2_B[n];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1;
  }
  PointClass pc;
  const double den = cnt * sxx - sx * sx;
  pc.slope = (cnt * sxy - sx * sy) / den;
  if (!std::isfinite(pc.slope)) pc.slope = std::numeric_limits<double>::infinity();
  if (pc.slope > th.slope_threshold)
    pc.classification = Classification::Unbounded;
  else if (pc.slope < th.slope_threshold / 4 && log2_B[N] < std::log2(th.cap))
    pc.classification = Classification::Bounded;
  else
    pc.classification = Classification::Inconclusive;
  return pc;
}

const char* to_string(GridKind k) noexcept {
  return k == GridKind::Polar ? "polar" : "cartesian";
}

std::size_t GridSpec::radius_count() const {
  if (!(r_step > 0.0) || !(r_max >= r_min)) return 0;
  return static_cast<std::size_t>(std::floor((r_max - r_min) / r_step + 1e-9)) + 1;
}

std::size_t GridSpec::width() const {
  return kind == GridKind::Polar ? radius_count() : nx;
}

std::size_t GridSpec::height() const {
  return kind == GridKind::Polar ? rays : ny;
}

std::vector<Complex> GridSpec::points() const {
  std::vector<Complex> out;
  out.reserve(size());
  if (kind == GridKind::Polar) {
    const std::size_t nr = radius_count();
    for (std::uint32_t a = 0; a < rays; ++a) {
      const double theta = 2.0 * std::numbers::pi * a / rays;
      for (std::size_t i = 0; i < nr; ++i)
        out.push_back(std::polar(r_min + static_cast<double>(i) * r_step, theta));
    }
  } else {
    for (std::uint32_t y = 0; y < ny; ++y) {
      const double im = ny == 1 ? im_max : im_max - (im_max - im_min) * y / (ny - 1);
      for (std::uint32_t x = 0; x < nx; ++x) {
        const double re = nx == 1 ? re_min : re_min + (re_max - re_min) * x / (nx - 1);
        out.push_back({re, im});
      }
    }
  }
  return out;
}

void GridSpec::validate() const {
  if (kind == GridKind::Polar) {
    if (rays == 0) fail(ErrorCode::Validation, "grid: rays must be positive");
    if (!(r_step > 0.0)) fail(ErrorCode::Validation, "grid: step must be positive");
    if (!(r_min >= 0.0) || !(r_max >= r_min) || !std::isfinite(r_max))
      fail(ErrorCode::Validation, "grid: need 0 <= r_min <= r_max");
    if (radius_count() > 100000)
      fail(ErrorCode::Validation, "grid: too many radii");
  } else {
    if (nx == 0 || ny == 0) fail(ErrorCode::Validation, "grid: nx and ny must be positive");
    if (!(re_max >= re_min) || !(im_max >= im_min) || !std::isfinite(re_max) ||
        !std::isfinite(im_max) || !std::isfinite(re_min) || !std::isfinite(im_min))
      fail(ErrorCode::Validation, "grid: empty extent");
  }
  if (size() == 0) fail(ErrorCode::Validation, "grid is empty");
}

unsigned scan_threads() {
  if (const char* env = std::getenv("BPE_ATLAS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

RegionScan scan_region(const ShiftGraph& graph, const WeightAssignment& weights,
                       const GridSpec& grid, std::uint32_t N,
                       const ClassifyThresholds& th, unsigned threads) {
  grid.validate();
  if (N < 32) fail(ErrorCode::InvalidArgument, "scan needs N >= 32");
  const DualWeights dual = cauchy_dual(graph, weights);
  const WanderingBasis basis = wandering_basis(graph, weights);
  const BpeEvaluator ev(graph, weights, dual, basis, N);

  RegionScan scan;
  scan.grid = grid;
  scan.N = N;
  scan.thresholds = th;
  scan.moduli_rank = ev.moduli().rank();
  scan.moduli_dropped = ev.moduli().dropped;
  const auto pts = grid.points();
  scan.samples.resize(pts.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    try {
      for (std::size_t i = next++; i < pts.size(); i = next++) {
        BpeSample& s = scan.samples[i];
        s.w = pts[i];
        s.log2_B = ev.log2_b_n(pts[i]);
        const auto pc = classify_point(s.log2_B, th);
        s.slope = pc.slope;
        s.classification = pc.classification;
      }
    } catch (...) {
      std::lock_guard lock(error_mu);
      if (!error) error = std::current_exception();
      next = pts.size();
    }
  };
  if (threads == 0) threads = scan_threads();
  threads = std::min<unsigned>(threads, static_cast<unsigned>(pts.size()));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return scan;
}

EvaluationData evaluation_data(const ShiftGraph& graph, const DualWeights& dual,
                               const WanderingBasis& basis, Complex w,
                               std::uint32_t N, bool strict) {
  require_depth(graph, N, "E_w*");
  EvaluationData ed;
  ed.w = w;
  ed.N = N;
  const std::size_t d = basis.dim();
  std::vector<std::vector<HilbertVector>> orbits;
  for (const auto& x : basis.vectors) orbits.push_back(dual_orbit(graph, dual, x, N));

  for (std::size_t i = 0; i < d; ++i) {
    HilbertVector sum = orbits[i][0];
    if (w != Complex{})
      for (std::uint32_t k = 1; k <= N; ++k)
        sum = axpy(wbar_power(w, k), orbits[i][k], sum);
    ed.coeff_vectors.push_back(std::move(sum));
  }

  ed.gram = Eigen::MatrixXcd::Zero(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      ed.gram(i, j) = inner(ed.coeff_vectors[j], ed.coeff_vectors[i]).value();
      ed.gram(j, i) = std::conj(ed.gram(i, j));
    }

  if (w == Complex{}) {
    ed.tail_bound = 0.0;
    ed.tail_rigorous = true;
    return ed;
  }
  const TailEstimate te = tail_ratio(graph, dual, orbits, w, N);
  ed.tail_rigorous = te.rigorous;
  if (!std::isfinite(te.rho)) {
    if (strict)
      fail(ErrorCode::DivergentSeries,
           "|w| = " + std::to_string(std::abs(w)) +
               " is outside the convergence estimate of the evaluation series");
    ed.tail_bound = std::numeric_limits<double>::infinity();
    return ed;
  }
  // ||sum_{n>N} conj(w)^n T'^n x|| <= |w|^N ||T'^N x|| rho / (1 - rho).
  double hs = 0.0;
  const double lw = std::log2(std::abs(w));
  for (const auto& orb : orbits) {
    const double t = std::exp2(static_cast<double>(N) * lw + orb.back().log2_norm()) *
                     te.rho / (1.0 - te.rho);
    hs += t * t;
  }
  ed.tail_bound = std::sqrt(hs);
  return ed;
}

Eigen::MatrixXcd kernel_gram(const ShiftGraph& graph, const DualWeights& dual,
                             const WanderingBasis& basis, Complex z, Complex w,
                             std::uint32_t N) {
  const auto ez = evaluation_data(graph, dual, basis, z, N, true);
  const auto ew = evaluation_data(graph, dual, basis, w, N, true);
  const std::size_t d = basis.dim();
  Eigen::MatrixXcd k(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      k(i, j) = inner(ew.coeff_vectors[j], ez.coeff_vectors[i]).value();
  return k;
}

std::size_t AdjointEigenbasis::accepted_count() const {
  return static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), true));
}

namespace {

struct NullspaceAtDepth {
  Eigen::MatrixXcd vectors;  // columns, rotated so tail masses ascend
  std::vector<double> tail;  // ascending
  double residual = 0.0;
};

NullspaceAtDepth truncated_nullspace(const ShiftGraph& graph,
                                     const WeightAssignment& weights, Complex w,
                                     std::uint32_t D) {
  const auto last = graph.level_vertices(D);
  const std::size_t cols = static_cast<std::size_t>(last.back()) + 1;
  const std::size_t rows = static_cast<std::size_t>(graph.level_vertices(D - 1).back()) + 1;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows, cols);
  const Complex wbar = std::conj(w);
  for (VertexId v = 0; v < rows; ++v) {
    for (VertexId c : graph.children(v)) A(v, c) += weights.lambda(c);
    A(v, v) -= wbar;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  std::vector<Eigen::Index> null_cols;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(cols); ++j)
    if (j >= s.size() || s(j) < 1e-10) null_cols.push_back(j);

  NullspaceAtDepth out;
  const auto p = static_cast<Eigen::Index>(null_cols.size());
  if (p == 0) return out;
  Eigen::MatrixXcd Nm(cols, p);
  for (Eigen::Index j = 0; j < p; ++j) Nm.col(j) = svd.matrixV().col(null_cols[j]);

  const std::size_t tail_lo =
      static_cast<std::size_t>(graph.level_vertices(D - 1).front());
  const auto tail_rows = static_cast<Eigen::Index>(cols - tail_lo);
  const Eigen::MatrixXcd B = Nm.bottomRows(tail_rows);
  Eigen::JacobiSVD<Eigen::MatrixXcd> tsvd(B, Eigen::ComputeFullV);
  const auto& ts = tsvd.singularValues();
  // Right singular vectors in reverse order give ascending tail masses.
  Eigen::MatrixXcd W(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index src = p - 1 - j;
    W.col(j) = tsvd.matrixV().col(src);
    out.tail.push_back(src < ts.size() ? ts(src) * ts(src) : 0.0);
  }
  out.vectors = Nm * W;
  out.residual = (A * out.vectors).colwise().norm().maxCoeff();
  return out;
}

}  // namespace

AdjointEigenbasis adjoint_eigenbasis(const ShiftGraph& graph,
                                     const WeightAssignment& weights, Complex w,
                                     std::uint32_t depth, double tail_threshold) {
  if (depth < 8) fail(ErrorCode::InvalidArgument, "eigenbasis needs depth >= 8");
  if (depth > graph.depth())
    fail(ErrorCode::HorizonExceeded,
         "eigenbasis depth " + std::to_string(depth) + " beyond the graph depth " +
             std::to_string(graph.depth()));
  AdjointEigenbasis eb;
  eb.w = w;
  eb.depth = depth;
  const auto n0 = truncated_nullspace(graph, weights, w, depth - 2);
  const auto n1 = truncated_nullspace(graph, weights, w, depth - 1);
  const auto n2 = truncated_nullspace(graph, weights, w, depth);
  eb.max_residual = n2.residual;
  const auto p = static_cast<std::size_t>(n2.vectors.cols());
  for (std::size_t j = 0; j < p; ++j) {
    const Eigen::VectorXcd col = n2.vectors.col(static_cast<Eigen::Index>(j));
    eb.vectors.push_back(HilbertVector::from_dense(
        std::span<const Complex>(col.data(), static_cast<std::size_t>(col.size()))));
    const double m = n2.tail[j];
    eb.tail_mass.push_back(m);
    bool ok = m <= tail_threshold;
    if (j < n1.tail.size()) ok = ok && m <= n1.tail[j] + 1e-12;
    if (j < n1.tail.size() && j < n0.tail.size())
      ok = ok && n1.tail[j] <= n0.tail[j] + 1e-12;
    eb.accepted.push_back(ok);
  }
  return eb;
}

GramTestResult gram_test(const WanderingBasis& basis,
                         const AdjointEigenbasis& eigen, double tol) {
  GramTestResult r;
  r.kernel_dim = basis.dim();
  std::vector<const HilbertVector*> acc;
  for (std::size_t j = 0; j < eigen.vectors.size(); ++j)
    if (eigen.accepted[j]) acc.push_back(&eigen.vectors[j]);
  r.eigen_dim = acc.size();
  r.dimension_mismatch = r.eigen_dim != r.kernel_dim;
  if (acc.empty() || r.kernel_dim == 0) return r;

  Eigen::MatrixXcd A(r.kernel_dim, acc.size());
  for (std::size_t i = 0; i < r.kernel_dim; ++i)
    for (std::size_t j = 0; j < acc.size(); ++j)
      A(i, j) = inner(basis.vectors[i], *acc[j]).value();
  // Fewer eigenvectors than kernel dimensions leaves P_w singular.
  r.sigma_min = acc.size() < r.kernel_dim ? 0.0 : singular_extremes(A).sigma_min;
  if (r.dimension_mismatch || !(r.sigma_min > tol)) return r;

  r.in_bpe = true;
  const Eigen::MatrixXcd B = A.inverse().conjugate();
  for (std::size_t j = 0; j < acc.size(); ++j) {
    HilbertVector y;
    for (std::size_t l = 0; l < acc.size(); ++l) {
      const auto c = B(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j));
      if (c != Complex{}) y = axpy(ScaledComplex::from(c), *acc[l], y);
    }
    r.dual_family.push_back(std::move(y));
  }
  return r;
}

}  // namespace bpe
