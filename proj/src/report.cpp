#include "bpe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <system_error>

#include <unistd.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "bpe/error.hpp"

namespace bpe {
namespace {

using nlohmann::json;

constexpr double kTwoThirdsPow = 1.5874010519681994;  // 2^(2/3)

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

void require_verify_horizon(const HorizonConfig& h) {
  if (h.depth < 2100)
    fail(ErrorCode::HorizonExceeded,
         "verification needs depth >= 2100, have " + std::to_string(h.depth));
  if (std::uint64_t{h.depth} < std::uint64_t{h.N} + 2)
    fail(ErrorCode::HorizonExceeded, "verification needs depth >= N + 2");
  if (h.N < 64) fail(ErrorCode::InvalidArgument, "verification needs N >= 64");
}

// log2 ||T^n x||^2 for n = 0..N.
std::vector<double> orbit_log2_sq(const ShiftGraph& g, const WeightAssignment& w,
                                  const HilbertVector& x, std::uint32_t N) {
  const auto rec = orbit_norms(g, w, x, N);
  std::vector<double> out;
  for (double v : rec.log2_norms) out.push_back(2.0 * v);
  return out;
}

std::filesystem::path in_dir(const std::filesystem::path& dir, const std::string& name) {
  return dir / name;
}

void write_report(const std::optional<std::filesystem::path>& out_dir,
                  const RunConfig& config, const json& report) {
  if (!out_dir) return;
  write_atomic(in_dir(*out_dir, config.output.report), report.dump(2) + "\n");
}

struct Prepared {
  ShiftModel model;
  DualWeights dual;
  WanderingBasis basis;
};

Prepared prepare(const RunConfig& config) {
  ShiftModel model = build_model(config.op);
  DualWeights dual = cauchy_dual(model.graph, model.weights);
  WanderingBasis basis = wandering_basis(model.graph, model.weights);
  return {std::move(model), std::move(dual), std::move(basis)};
}

json describe_model(Family family, std::uint32_t k, const Prepared& p) {
  const auto& g = p.model.graph;
  const auto& w = p.model.weights;
  json j = {{"family", to_string(family)},
            {"depth", g.depth()},
            {"vertices", g.size()},
            {"roots", g.roots().size()},
            {"tail_rule", to_string(g.tail_rule())},
            {"kernel_dim", p.basis.dim()},
            {"d_min", w.min_fiber_norm_sq()},
            {"d_max", w.max_fiber_norm_sq()},
            {"norm_bound", operator_norm_bound(g, w)},
            {"dual_norm_bound", operator_norm_bound(g, p.dual.weights)}};
  if (family == Family::Example2) j["k"] = k;
  return j;
}

}  // namespace

const char* to_string(Relation r) noexcept {
  switch (r) {
    case Relation::Within: return "within";
    case Relation::AtMost: return "at_most";
    case Relation::AtLeast: return "at_least";
  }
  return "?";
}

const VerificationRow& VerificationTable::add(std::string name, double target,
                                              double computed, double tolerance,
                                              Relation relation) {
  VerificationRow row{std::move(name), target, computed, tolerance, relation, false};
  switch (relation) {
    case Relation::Within:
      row.pass = std::abs(computed - target) <= tolerance;
      break;
    case Relation::AtMost:
      row.pass = computed <= target + tolerance;
      break;
    case Relation::AtLeast:
      row.pass = computed >= target - tolerance;
      break;
  }
  rows.push_back(std::move(row));
  return rows.back();
}

bool VerificationTable::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.pass; });
}

const VerificationRow* VerificationTable::find(std::string_view name) const {
  for (const auto& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

GrowthFit fit_growth_law(std::span<const double> a, std::span<const double> y) {
  if (a.size() != y.size() || a.size() < 2)
    fail(ErrorCode::InvalidArgument, "growth fit needs two equal-length series");
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = a[i] / y[i];
    A(i, 1) = 1.0 / y[i];
  }
  const Eigen::Vector2d scale(A.col(0).norm(), A.col(1).norm());
  A.col(0) /= scale(0);
  A.col(1) /= scale(1);
  const Eigen::Vector2d sol = A.colPivHouseholderQr().solve(b);
  GrowthFit fit{sol(0) / scale(0), sol(1) / scale(1), 0.0};
  for (std::size_t i = 0; i < a.size(); ++i)
    fit.max_rel_residual = std::max(
        fit.max_rel_residual, std::abs(fit.c * a[i] + fit.d - y[i]) / std::abs(y[i]));
  return fit;
}

VerificationTable verify_example1(const HorizonConfig& h) {
  require_verify_horizon(h);
  VerificationTable t;
  t.title = "example1";

  const ShiftModel model = build_example1(h.depth);
  const auto& g = model.graph;
  const DualWeights dual = cauchy_dual(g, model.weights);
  const WanderingBasis basis = wandering_basis(g, model.weights);

  double dev = 0.0;
  for (VertexId v = 0; v < g.size(); ++v) {
    const double expect = v <= 1 ? 0.5 : 1.0 / model.weights.lambda(v);
    dev = std::max(dev, std::abs(dual.weights.lambda(v) - expect));
  }
  t.add("dual weights lambda'_0 = lambda'_1 = 1/2, lambda'_n = 1/lambda_n", 0.0, dev, 0.0);
  t.add("dim ker T*", 1.0, static_cast<double>(basis.dim()), 0.0);

  // Products up to index 4096 reach past the default depth; the chain is
  // rebuilt long enough for them.
  const std::uint32_t long_depth = std::max<std::uint32_t>(h.depth, 4097);
  const ShiftModel long_model = build_example1(long_depth);
  const DualWeights long_dual = cauchy_dual(long_model.graph, long_model.weights);
  std::vector<double> prefix(4097, 0.0);
  for (std::uint32_t n = 1; n <= 4096; ++n)
    prefix[n] = prefix[n - 1] + std::log2(long_dual.weights.lambda(n));

  for (std::uint32_t n = 2; n <= 12; ++n) {
    const double computed =
        weight_product_log(long_model.graph, long_dual.weights, 0, 1, 1u << n);
    t.add("log2 product n=" + std::to_string(n),
          std::exp2(static_cast<double>(n - 1)) - 3.0, computed, 1e-12);
  }

  double max_ratio = 0.0;
  std::uint64_t missed_equality = 0;
  double formula_dev = 0.0;
  for (std::uint64_t n = 1; n <= 4096; ++n) {
    const auto c = example1_certificate(n);
    max_ratio = std::max(max_ratio, c.ratio());
    if (!c.within_bound()) max_ratio = std::max(max_ratio, 1.0);
    if (c.m_n >= 1 && c.k_n == (std::uint64_t{1} << (c.m_n - 1)) && !c.at_bound())
      ++missed_equality;
    if (n >= 3) formula_dev = std::max(formula_dev, std::abs(c.log2_product - prefix[n]));
  }
  t.add("ratio bound max over n<=4096", 2.0 / 3.0, max_ratio, 0.0, Relation::AtMost);
  t.add("ratio equality misses at k_n=2^(m_n-1)", 0.0,
        static_cast<double>(missed_equality), 0.0);
  t.add("product formula deviation 3<=n<=4096", 0.0, formula_dev, 1e-12);

  // ||T'^n (e_0 - e_1)||^2 against (n+17) (2^(2^(m-1)+alpha)/8)^2.
  const HilbertVector x = HilbertVector::from_entries({{0, {1.0, 0.0}}, {1, {-1.0, 0.0}}});
  const auto norms = orbit_log2_sq(g, dual.weights, x, 64);
  double excess = -std::numeric_limits<double>::infinity();
  for (std::uint32_t n = 3; n <= 64; ++n) {
    const auto c = example1_certificate(n);
    const double bound = std::log2(n + 17.0) + 2.0 * c.log2_product;
    excess = std::max(excess, norms[n] - bound);
  }
  t.add("log2 excess over (n+17) bound 3<=n<=64", 0.0, excess, 0.0, Relation::AtMost);

  const double r_dual_512 =
      std::exp2(operator_norm_log2(g, dual.weights, 512, h.depth - 512) / 512.0);
  t.add("r(T') via ||T'^512||^(1/512)", 2.0, r_dual_512, 1e-9);

  const SpectralReport radii =
      disc_radii(g, dual, basis, h.N, h.sphere_samples, h.seed);
  t.add("local radius r_T'(x) tail max", kTwoThirdsPow, radii.r_local.at(0), 0.02,
        Relation::AtMost);
  t.add("r_disc - r_inner", 0.1, radii.r_disc - radii.r_inner, 0.0, Relation::AtLeast);
  t.radii = radii;

  const SeriesReport series = analyticity_series(g, dual, 20);
  t.add("log2 analyticity series partial sum M=20", std::log2(1e6), series.log2_sum,
        0.0, Relation::AtLeast);
  t.add("analyticity series last term >= mean term", 1.0,
        series.diverges_at_horizon ? 1.0 : 0.0, 0.0);
  return t;
}

VerificationTable verify_example2(const HorizonConfig& h) {
  require_verify_horizon(h);
  if (h.k < 2) fail(ErrorCode::InvalidArgument, "example 2 verification needs k >= 2");
  VerificationTable t;
  t.title = "example2 k=" + std::to_string(h.k);

  const auto base = base_sequence(
      "example1-rule", std::max<std::size_t>(std::size_t{2} * h.N, h.depth));
  const ShiftModel model = build_example2(h.k, base, h.depth);
  const auto& g = model.graph;
  const auto& w = model.weights;
  const DualWeights dual = cauchy_dual(g, w);
  const WanderingBasis basis = wandering_basis(g, w);

  const VertexId root = 0;
  const double d_root = w.fiber_norm_sq(root);
  double dev1 = 0.0, dev2 = 0.0;
  for (VertexId v = 1; v < g.size(); ++v) {
    if (g.level(v) == 1)
      dev1 = std::max(dev1, std::abs(dual.weights.lambda(v) - w.lambda(v) / d_root));
    else
      dev2 = std::max(dev2, std::abs(dual.weights.lambda(v) - 1.0 / w.lambda(v)));
  }
  t.add("dual weights level 1: lambda / ||T e_root||^2", 0.0, dev1, 1e-15);
  t.add("dual weights level >= 2: 1 / lambda", 0.0, dev2, 1e-15);
  t.add("dim ker T*", static_cast<double>(h.k), static_cast<double>(basis.dim()), 0.0);

  // prefix[n] = log2(lambda_1 ... lambda_n)
  std::vector<double> prefix(base.size() + 1, 0.0);
  for (std::size_t i = 0; i < base.size(); ++i) prefix[i + 1] = prefix[i] + std::log2(base[i]);

  constexpr std::uint32_t lo = 8, hi = 512;
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    const auto& x = basis.vectors[i];
    const auto norms = orbit_log2_sq(g, dual.weights, x, hi);
    const std::uint32_t lvl = support_level(g, x).value_or(0);
    std::vector<double> y, a, a_shift;
    for (std::uint32_t n = lo; n <= hi; ++n) {
      y.push_back(std::exp2(norms[n]));
      a.push_back(std::exp2(-2.0 * prefix[n]));
      a_shift.push_back(std::exp2(-2.0 * prefix[n + lvl]));
    }
    const auto fit = fit_growth_law(a, y);
    t.add("growth law c(l_1..l_n)^-2+d rel residual x_" + std::to_string(i + 1), 0.0,
          fit.max_rel_residual, 1e-8, Relation::AtMost);
    const auto shifted = fit_growth_law(a_shift, y);
    t.add("growth law at landing level rel residual x_" + std::to_string(i + 1), 0.0,
          shifted.max_rel_residual, 1e-8, Relation::AtMost);
  }

  const auto cond = sequence_conditions(base, h.N);
  t.add("condition (i) lambda_n <= 1", 1.0, cond.cond_i ? 1.0 : 0.0, 0.0);
  t.add("condition (ii) inf lambda_n > 0", 1.0, cond.cond_ii ? 1.0 : 0.0, 0.0);
  t.add("condition (iii) lhs", kTwoThirdsPow, cond.lhs, 0.03);
  t.add("condition (iii) rhs", 2.0, cond.rhs, 0.02);
  t.add("condition (iii) lhs < rhs", 1.0, cond.cond_iii ? 1.0 : 0.0, 0.0);

  const double r_dual_512 =
      std::exp2(operator_norm_log2(g, dual.weights, 512, h.depth - 512) / 512.0);
  t.add("r(T') via ||T'^512||^(1/512)", 2.0, r_dual_512, 1e-9);
  const SpectralReport radii =
      disc_radii(g, dual, basis, h.N, h.sphere_samples, h.seed);
  t.add("r_disc - r_inner", 0.1, radii.r_disc - radii.r_inner, 0.0, Relation::AtLeast);
  t.radii = radii;
  return t;
}

std::string scan_csv(const RegionScan& scan) {
  std::string out = "re,im,abs,B_N,slope,class\n";
  char buf[160];
  for (const auto& s : scan.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", s.w.real(),
                  s.w.imag(), std::abs(s.w), s.B_N(), s.slope,
                  to_string(s.classification));
    out += buf;
  }
  return out;
}

std::string heatmap_pgm(const RegionScan& scan) {
  if (scan.samples.empty()) fail(ErrorCode::InvalidArgument, "empty scan");
  const std::size_t W = scan.grid.width(), H = scan.grid.height();
  if (W * H != scan.samples.size())
    fail(ErrorCode::InvalidArgument, "scan does not match its grid");
  double top_bounded = 0.0, top_inconclusive = 0.0;
  for (const auto& s : scan.samples) {
    const double v = std::max(0.0, s.log2_B.back());
    if (s.classification == Classification::Bounded) top_bounded = std::max(top_bounded, v);
    if (s.classification == Classification::Inconclusive && std::isfinite(v))
      top_inconclusive = std::max(top_inconclusive, v);
  }
  std::string out = "P5 " + std::to_string(W) + " " + std::to_string(H) + " 255\n";
  for (const auto& s : scan.samples) {
    const double v = std::max(0.0, s.log2_B.back());
    unsigned char px = 255;
    if (s.classification == Classification::Bounded) {
      px = top_bounded > 0.0
               ? static_cast<unsigned char>(std::lround(127.0 * v / top_bounded))
               : 0;
    } else if (s.classification == Classification::Inconclusive) {
      const double f = top_inconclusive > 0.0 && std::isfinite(v) ? v / top_inconclusive : 1.0;
      px = static_cast<unsigned char>(128 + std::lround(126.0 * f));
    }
    out.push_back(static_cast<char>(px));
  }
  return out;
}

void emit_heatmap(const RegionScan& scan, const std::filesystem::path& path) {
  write_atomic(path, heatmap_pgm(scan));
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) {
      std::filesystem::remove(tmp, ec);
      fail(ErrorCode::Io, "write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::Io, "cannot move output into place: " + path.string());
  }
}

json operator_json(const RunConfig& config, const ShiftModel& model) {
  Prepared p{model, cauchy_dual(model.graph, model.weights),
             wandering_basis(model.graph, model.weights)};
  return describe_model(config.op.family, config.op.k, p);
}

json radii_json(const SpectralReport& r) {
  return {{"r_inner", r.r_inner},
          {"r_disc", r.r_disc},
          {"r_dual", r.r_dual_estimate},
          {"r_dual_upper", r.r_dual_upper},
          {"r_local", r.r_local},
          {"r_local_sampled_max", r.r_local_sampled_max},
          {"sphere_samples", r.sphere_samples},
          {"horizon", r.horizon},
          {"norm_power", r.norm_power}};
}

json table_json(const VerificationTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"name", r.name},
                    {"target", r.target},
                    {"computed", r.computed},
                    {"tolerance", r.tolerance},
                    {"relation", to_string(r.relation)},
                    {"pass", r.pass}});
  return {{"title", t.title}, {"rows", rows}, {"all_pass", t.all_pass()}};
}

json run_describe(const RunConfig& config,
                  const std::optional<std::filesystem::path>& out_dir) {
  const Prepared p = prepare(config);
  json report = {{"operator", describe_model(config.op.family, config.op.k, p)},
                 {"seed", config.seed}};
  write_report(out_dir, config, report);
  return report;
}

json run_radii(const RunConfig& config,
               const std::optional<std::filesystem::path>& out_dir) {
  const Prepared p = prepare(config);
  const auto N = config.radii_horizon();
  const auto r = disc_radii(p.model.graph, p.dual, p.basis, N,
                            config.radii.sphere_samples, config.seed,
                            config.radii.window_fraction);
  json report = {{"operator", describe_model(config.op.family, config.op.k, p)},
                 {"radii", radii_json(r)},
                 {"horizons", {{"radii_N", N}, {"norm_power", r.norm_power}}},
                 {"seed", config.seed}};
  write_report(out_dir, config, report);
  return report;
}

json run_scan(const RunConfig& config,
              const std::optional<std::filesystem::path>& out_dir, unsigned threads) {
  const Prepared p = prepare(config);
  const auto rN = config.radii_horizon();
  const auto radii = disc_radii(p.model.graph, p.dual, p.basis, rN,
                                config.radii.sphere_samples, config.seed,
                                config.radii.window_fraction);

  const auto& s = config.scan;
  GridSpec grid;
  grid.kind = s.grid;
  const double r_max = s.r_max.value_or(1.5 * radii.r_dual_estimate);
  grid.rays = s.rays;
  grid.r_min = s.r_min;
  grid.r_max = r_max;
  grid.r_step = s.step;
  grid.nx = s.nx;
  grid.ny = s.ny;
  const auto ext = s.extent.value_or(std::array<double, 4>{-r_max, r_max, -r_max, r_max});
  grid.re_min = ext[0];
  grid.re_max = ext[1];
  grid.im_min = ext[2];
  grid.im_max = ext[3];

  RegionScan scan = scan_region(p.model.graph, p.model.weights, grid, s.N,
                                config.thresholds(), threads);
  scan.radii = radii;

  std::size_t counts[3] = {0, 0, 0};
  std::size_t consistency_violations = 0;
  for (const auto& smp : scan.samples) {
    ++counts[static_cast<int>(smp.classification)];
    if (std::abs(smp.w) < radii.r_disc - 0.02 &&
        smp.classification != Classification::Bounded)
      ++consistency_violations;
  }

  json grid_json = {{"kind", to_string(grid.kind)}, {"points", scan.samples.size()},
                    {"width", grid.width()}, {"height", grid.height()}};
  if (grid.kind == GridKind::Polar) {
    grid_json["rays"] = grid.rays;
    grid_json["r_min"] = grid.r_min;
    grid_json["r_max"] = grid.r_max;
    grid_json["step"] = grid.r_step;
    // Outer edge of the BOUNDED region along each ray (reported, not checked).
    const std::size_t nr = grid.radius_count();
    double edge_min = std::numeric_limits<double>::infinity(), edge_max = 0.0;
    for (std::uint32_t a = 0; a < grid.rays; ++a) {
      double edge = grid.r_min + static_cast<double>(nr) * grid.r_step;
      for (std::size_t i = 0; i < nr; ++i) {
        const auto& smp = scan.samples[a * nr + i];
        if (smp.classification != Classification::Bounded) {
          edge = std::abs(smp.w);
          break;
        }
      }
      edge_min = std::min(edge_min, edge);
      edge_max = std::max(edge_max, edge);
    }
    grid_json["first_non_bounded_radius"] = {{"min", edge_min}, {"max", edge_max}};
  } else {
    grid_json["nx"] = grid.nx;
    grid_json["ny"] = grid.ny;
    grid_json["extent"] = ext;
  }

  json report = {{"operator", describe_model(config.op.family, config.op.k, p)},
                 {"radii", radii_json(radii)},
                 {"horizons", {{"scan_N", s.N}, {"radii_N", rN}}},
                 {"seed", config.seed},
                 {"grid", grid_json},
                 {"thresholds",
                  {{"tail_fraction", s.tail_fraction},
                   {"slope_threshold", s.slope_threshold},
                   {"cap", s.cap}}},
                 {"counts",
                  {{"BOUNDED", counts[0]},
                   {"UNBOUNDED", counts[1]},
                   {"INCONCLUSIVE", counts[2]}}},
                 {"inner_disc_violations", consistency_violations},
                 {"moduli", {{"rank", scan.moduli_rank}, {"dropped", scan.moduli_dropped}}}};

  if (out_dir) {
    write_atomic(in_dir(*out_dir, config.output.csv), scan_csv(scan));
    json files = {{"csv", config.output.csv}};
    if (config.output.write_heatmap) {
      emit_heatmap(scan, in_dir(*out_dir, config.output.heatmap));
      files["heatmap"] = config.output.heatmap;
    }
    report["files"] = files;
    write_report(out_dir, config, report);
  }
  return report;
}

json run_kernel(const RunConfig& config,
                const std::optional<std::filesystem::path>& out_dir) {
  const Prepared p = prepare(config);
  const auto& k = config.kernel;
  const auto kappa = kernel_gram(p.model.graph, p.dual, p.basis, k.z, k.w, k.N);
  const auto ew = evaluation_data(p.model.graph, p.dual, p.basis, k.w, k.N, true);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(ew.gram, Eigen::EigenvaluesOnly);
  const double e_norm = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  const BpeEvaluator ev(p.model.graph, p.model.weights, p.dual, p.basis, k.N);
  const auto lb = ev.log2_b_n(k.w);
  const double sup_b = std::exp2(*std::max_element(lb.begin(), lb.end()));

  json report = {{"operator", describe_model(config.op.family, config.op.k, p)},
                 {"horizons", {{"kernel_N", k.N}}},
                 {"seed", config.seed},
                 {"z", complex_json(k.z)},
                 {"w", complex_json(k.w)},
                 {"kappa_zw", matrix_json(kappa)},
                 {"kappa_ww", matrix_json(ew.gram)},
                 {"E_w_norm", e_norm},
                 {"sup_B", sup_b},
                 {"tail_bound", ew.tail_bound},
                 {"tail_rigorous", ew.tail_rigorous}};
  write_report(out_dir, config, report);
  return report;
}

json run_verify(int which, const RunConfig& config,
                const std::optional<std::filesystem::path>& out_dir) {
  if (which != 1 && which != 2) fail(ErrorCode::InvalidArgument, "example must be 1 or 2");
  HorizonConfig h;
  h.depth = config.op.depth;
  h.N = config.radii_horizon();
  h.sphere_samples = config.radii.sphere_samples;
  h.seed = config.seed;
  h.k = config.op.k;
  const auto table = which == 1 ? verify_example1(h) : verify_example2(h);

  json op = {{"family", which == 1 ? "example1" : "example2"}, {"depth", h.depth}};
  if (which == 2) {
    op["k"] = h.k;
    op["base"] = "example1-rule";
  }
  json report = {{"operator", op},
                 {"radii", table.radii ? radii_json(*table.radii) : json()},
                 {"horizons", {{"depth", h.depth}, {"N", h.N}}},
                 {"seed", h.seed},
                 {"table", table_json(table)}};
  write_report(out_dir, config, report);
  return report;
}

}  // namespace bpe
