#include "bpe/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>

#include <json.hpp>

#include "bpe/error.hpp"

namespace bpe {
namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  fail(ErrorCode::Parse, "field " + path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) bad_field(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      bad_field(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

double read_double(const json& v, const std::string& path) {
  if (!v.is_number()) bad_field(path, "expected a number");
  return v.get<double>();
}

std::uint32_t read_u32(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
      v.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max())
    bad_field(path, "expected a nonnegative integer");
  return static_cast<std::uint32_t>(v.get<std::int64_t>());
}

std::uint64_t read_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad_field(path, "expected a nonnegative integer");
}

std::string read_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad_field(path, "expected a string");
  return v.get<std::string>();
}

bool read_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad_field(path, "expected true or false");
  return v.get<bool>();
}

std::vector<double> read_doubles(const json& v, const std::string& path) {
  if (!v.is_array()) bad_field(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(read_double(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::complex<double> read_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  const auto xs = read_doubles(v, path);
  if (xs.size() != 2) bad_field(path, "expected [re, im]");
  return {xs[0], xs[1]};
}

Family read_family(const json& v, const std::string& path) {
  const auto s = read_string(v, path);
  if (s == "example1") return Family::Example1;
  if (s == "example2") return Family::Example2;
  if (s == "classical") return Family::Classical;
  if (s == "custom") return Family::Custom;
  bad_field(path, "unknown family '" + s + "' (example1, example2, classical, custom)");
}

void read_operator(const json& j, OperatorSpec& op) {
  const std::string p = "operator";
  reject_unknown(j, p,
                 {"family", "depth", "k", "base", "weights", "parents", "tail"});
  if (j.contains("family")) op.family = read_family(j["family"], join(p, "family"));
  if (j.contains("depth")) op.depth = read_u32(j["depth"], join(p, "depth"));
  if (j.contains("k")) op.k = read_u32(j["k"], join(p, "k"));
  if (j.contains("base")) {
    const auto& b = j["base"];
    if (b.is_string()) {
      op.base_rule = b.get<std::string>();
      op.base.clear();
    } else {
      op.base = read_doubles(b, join(p, "base"));
    }
  }
  if (j.contains("weights")) op.weights = read_doubles(j["weights"], join(p, "weights"));
  if (j.contains("parents")) {
    const auto& a = j["parents"];
    const auto path = join(p, "parents");
    if (!a.is_array()) bad_field(path, "expected an array of integers");
    op.parents.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!a[i].is_number_integer())
        bad_field(path + "[" + std::to_string(i) + "]", "expected an integer");
      op.parents.push_back(a[i].get<std::int64_t>());
    }
  }
  if (j.contains("tail")) {
    const auto t = read_doubles(j["tail"], join(p, "tail"));
    if (t.size() != 2) bad_field(join(p, "tail"), "expected [min, max]");
    op.tail_min = t[0];
    op.tail_max = t[1];
  }
}

void read_scan(const json& j, ScanSpec& s) {
  const std::string p = "scan";
  reject_unknown(j, p,
                 {"grid", "rays", "r_min", "r_max", "step", "nx", "ny", "extent",
                  "N", "tail_fraction", "slope_threshold", "cap"});
  if (j.contains("grid")) {
    const auto g = read_string(j["grid"], join(p, "grid"));
    if (g == "polar")
      s.grid = GridKind::Polar;
    else if (g == "cartesian")
      s.grid = GridKind::Cartesian;
    else
      bad_field(join(p, "grid"), "expected 'polar' or 'cartesian'");
  }
  if (j.contains("rays")) s.rays = read_u32(j["rays"], join(p, "rays"));
  if (j.contains("r_min")) s.r_min = read_double(j["r_min"], join(p, "r_min"));
  if (j.contains("r_max")) s.r_max = read_double(j["r_max"], join(p, "r_max"));
  if (j.contains("step")) s.step = read_double(j["step"], join(p, "step"));
  if (j.contains("nx")) s.nx = read_u32(j["nx"], join(p, "nx"));
  if (j.contains("ny")) s.ny = read_u32(j["ny"], join(p, "ny"));
  if (j.contains("extent")) {
    const auto e = read_doubles(j["extent"], join(p, "extent"));
    if (e.size() != 4) bad_field(join(p, "extent"), "expected [re_min, re_max, im_min, im_max]");
    s.extent = std::array<double, 4>{e[0], e[1], e[2], e[3]};
  }
  if (j.contains("N")) s.N = read_u32(j["N"], join(p, "N"));
  if (j.contains("tail_fraction"))
    s.tail_fraction = read_double(j["tail_fraction"], join(p, "tail_fraction"));
  if (j.contains("slope_threshold"))
    s.slope_threshold = read_double(j["slope_threshold"], join(p, "slope_threshold"));
  if (j.contains("cap")) s.cap = read_double(j["cap"], join(p, "cap"));
}

void read_radii(const json& j, RadiiSpec& r) {
  const std::string p = "radii";
  reject_unknown(j, p, {"N", "sphere_samples", "window_fraction"});
  if (j.contains("N")) r.N = read_u32(j["N"], join(p, "N"));
  if (j.contains("sphere_samples"))
    r.sphere_samples = read_u32(j["sphere_samples"], join(p, "sphere_samples"));
  if (j.contains("window_fraction"))
    r.window_fraction = read_double(j["window_fraction"], join(p, "window_fraction"));
}

void read_kernel(const json& j, KernelSpec& k) {
  const std::string p = "kernel";
  reject_unknown(j, p, {"z", "w", "N"});
  if (j.contains("z")) k.z = read_complex(j["z"], join(p, "z"));
  if (j.contains("w")) k.w = read_complex(j["w"], join(p, "w"));
  if (j.contains("N")) k.N = read_u32(j["N"], join(p, "N"));
}

void read_output(const json& j, OutputSpec& o) {
  const std::string p = "output";
  reject_unknown(j, p, {"csv", "heatmap", "write_heatmap", "report"});
  if (j.contains("csv")) o.csv = read_string(j["csv"], join(p, "csv"));
  if (j.contains("heatmap")) o.heatmap = read_string(j["heatmap"], join(p, "heatmap"));
  if (j.contains("write_heatmap"))
    o.write_heatmap = read_bool(j["write_heatmap"], join(p, "write_heatmap"));
  if (j.contains("report")) o.report = read_string(j["report"], join(p, "report"));
}

[[noreturn]] void invalid(const std::string& what) { fail(ErrorCode::Validation, what); }

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

std::uint32_t custom_depth(const std::vector<std::int64_t>& parents) {
  std::vector<std::uint32_t> level(parents.size(), 0);
  std::uint32_t depth = 0;
  for (std::size_t v = 0; v < parents.size(); ++v) {
    const auto p = parents[v];
    if (p < -1 || p > static_cast<std::int64_t>(v))
      invalid("operator.parents: parent of vertex " + std::to_string(v) +
              " must be -1, the vertex itself, or an earlier vertex");
    if (p >= 0 && p < static_cast<std::int64_t>(v)) level[v] = level[p] + 1;
    depth = std::max(depth, level[v]);
  }
  return depth;
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

}  // namespace

const char* to_string(Family f) noexcept {
  switch (f) {
    case Family::Example1: return "example1";
    case Family::Example2: return "example2";
    case Family::Classical: return "classical";
    case Family::Custom: return "custom";
  }
  return "?";
}

std::uint32_t RunConfig::effective_depth() const {
  if (op.family == Family::Custom) return custom_depth(op.parents);
  return op.depth;
}

std::uint32_t RunConfig::radii_horizon() const {
  if (radii.N) return *radii.N;
  const auto d = effective_depth();
  return d < 2 ? 0 : std::min<std::uint32_t>(2048, d - 2);
}

ClassifyThresholds RunConfig::thresholds() const {
  return {scan.tail_fraction, scan.slope_threshold, scan.cap};
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, e.what());
  }
  RunConfig c;
  reject_unknown(doc, "", {"operator", "scan", "radii", "kernel", "output", "seed"});
  if (doc.contains("operator")) read_operator(doc["operator"], c.op);
  if (doc.contains("scan")) read_scan(doc["scan"], c.scan);
  if (doc.contains("radii")) read_radii(doc["radii"], c.radii);
  if (doc.contains("kernel")) read_kernel(doc["kernel"], c.kernel);
  if (doc.contains("output")) read_output(doc["output"], c.output);
  if (doc.contains("seed")) c.seed = read_u64(doc["seed"], "seed");
  validate_config(c);
  return c;
}

void validate_config(const RunConfig& c) {
  const auto& op = c.op;
  switch (op.family) {
    case Family::Example1:
      if (op.depth < 2) invalid("operator.depth: example1 needs depth >= 2");
      break;
    case Family::Example2:
      if (op.k < 1) invalid("operator.k: need k >= 1");
      if (op.base.empty() && op.base_rule != "example1-rule" && op.base_rule != "ones")
        invalid("operator.base: unknown rule '" + op.base_rule +
                "' (example1-rule, ones)");
      for (double x : op.base)
        if (!(x > 0.0 && x <= 1.0))
          invalid("operator.base: weights must satisfy 0 < lambda <= 1");
      break;
    case Family::Classical:
      if (op.weights.empty()) invalid("operator.weights: need at least one weight");
      for (double x : op.weights)
        if (!positive_finite(x)) invalid("operator.weights: weights must be positive");
      break;
    case Family::Custom:
      if (op.parents.empty()) invalid("operator.parents: need at least one vertex");
      if (op.weights.size() != op.parents.size())
        invalid("operator.weights: custom graphs need one weight per vertex");
      if (!positive_finite(op.tail_min) || !(op.tail_max >= op.tail_min) ||
          !std::isfinite(op.tail_max))
        invalid("operator.tail: need 0 < min <= max");
      break;
  }
  const std::uint64_t depth = c.effective_depth();
  auto need_depth = [&](std::uint32_t N, const char* field) {
    if (depth < std::uint64_t{N} + 2)
      invalid(std::string(field) + ": depth >= N + 2 violated (depth " +
              std::to_string(depth) + ", N " + std::to_string(N) + ")");
  };
  need_depth(c.scan.N, "scan.N");
  need_depth(c.kernel.N, "kernel.N");
  if (c.radii.N) need_depth(*c.radii.N, "radii.N");

  const auto& s = c.scan;
  if (s.N < 32) invalid("scan.N: classification needs N >= 32");
  if (!(s.tail_fraction > 0.0 && s.tail_fraction <= 1.0))
    invalid("scan.tail_fraction: must lie in (0, 1]");
  if (!positive_finite(s.slope_threshold))
    invalid("scan.slope_threshold: thresholds must be positive");
  if (!(s.cap > 1.0)) invalid("scan.cap: must exceed 1");
  if (s.grid == GridKind::Polar) {
    if (s.rays == 0) invalid("scan.rays: grid is empty");
    if (!positive_finite(s.step)) invalid("scan.step: must be positive");
    if (!(s.r_min >= 0.0) || !std::isfinite(s.r_min))
      invalid("scan.r_min: must be nonnegative");
    if (s.r_max && !(*s.r_max >= s.r_min && std::isfinite(*s.r_max)))
      invalid("scan.r_max: grid is empty (r_max < r_min)");
  } else {
    if (s.nx == 0 || s.ny == 0) invalid("scan.nx/ny: grid is empty");
    if (s.extent) {
      const auto& e = *s.extent;
      for (double x : e)
        if (!std::isfinite(x)) invalid("scan.extent: must be finite");
      if (!(e[1] >= e[0]) || !(e[3] >= e[2]))
        invalid("scan.extent: grid is empty (max < min)");
    }
  }
  if (c.radii.N && *c.radii.N < 16) invalid("radii.N: need N >= 16");
  if (!c.radii.N && c.radii_horizon() < 16)
    invalid("radii.N: depth too small for the default radius horizon");
  if (!(c.radii.window_fraction > 0.0 && c.radii.window_fraction < 1.0))
    invalid("radii.window_fraction: must lie in (0, 1)");
  if (!std::isfinite(std::abs(c.kernel.z)) || !std::isfinite(std::abs(c.kernel.w)))
    invalid("kernel.z/w: must be finite");
  if (c.output.csv.empty() || c.output.report.empty() ||
      (c.output.write_heatmap && c.output.heatmap.empty()))
    invalid("output: file names must be nonempty");
}

std::string serialize_config(const RunConfig& c) {
  json op = {{"family", to_string(c.op.family)},
             {"depth", c.op.depth},
             {"k", c.op.k},
             {"weights", c.op.weights},
             {"parents", c.op.parents},
             {"tail", json::array({c.op.tail_min, c.op.tail_max})}};
  if (c.op.base.empty())
    op["base"] = c.op.base_rule;
  else
    op["base"] = c.op.base;

  json scan = {{"grid", to_string(c.scan.grid)},
               {"rays", c.scan.rays},
               {"r_min", c.scan.r_min},
               {"step", c.scan.step},
               {"nx", c.scan.nx},
               {"ny", c.scan.ny},
               {"N", c.scan.N},
               {"tail_fraction", c.scan.tail_fraction},
               {"slope_threshold", c.scan.slope_threshold},
               {"cap", c.scan.cap}};
  if (c.scan.r_max) scan["r_max"] = *c.scan.r_max;
  if (c.scan.extent) scan["extent"] = *c.scan.extent;

  json radii = {{"sphere_samples", c.radii.sphere_samples},
                {"window_fraction", c.radii.window_fraction}};
  if (c.radii.N) radii["N"] = *c.radii.N;

  json doc = {{"operator", op},
              {"scan", scan},
              {"radii", radii},
              {"kernel",
               {{"z", complex_json(c.kernel.z)},
                {"w", complex_json(c.kernel.w)},
                {"N", c.kernel.N}}},
              {"output",
               {{"csv", c.output.csv},
                {"heatmap", c.output.heatmap},
                {"write_heatmap", c.output.write_heatmap},
                {"report", c.output.report}}},
              {"seed", c.seed}};
  return doc.dump(2);
}

std::vector<double> base_sequence(std::string_view rule, std::size_t n) {
  std::vector<double> out(n, 1.0);
  if (rule == "example1-rule") {
    for (std::size_t i = 0; i < n; ++i) out[i] = example1_weight(i + 1);
  } else if (rule != "ones") {
    fail(ErrorCode::InvalidArgument, "unknown base rule '" + std::string(rule) + "'");
  }
  return out;
}

ShiftModel build_model(const OperatorSpec& op) {
  switch (op.family) {
    case Family::Example1:
      return build_example1(op.depth);
    case Family::Example2: {
      std::vector<double> base = op.base;
      if (base.empty()) {
        base = base_sequence(op.base_rule, op.depth);
      } else if (base.size() < op.depth) {
        base.resize(op.depth, base.back());
      }
      return build_example2(op.k, base, op.depth);
    }
    case Family::Classical:
      return build_classical(op.weights, op.depth);
    case Family::Custom:
      return build_custom(op.parents, op.weights, {op.tail_min, op.tail_max});
  }
  fail(ErrorCode::InvalidArgument, "unknown family");
}

}  // namespace bpe
