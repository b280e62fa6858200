#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bpe/bpe_engine.hpp"
#include "bpe/config.hpp"
#include "bpe/spectral.hpp"

namespace bpe {

/// How a row's computed value is compared with its target.
enum class Relation {
  Within,   // |computed - target| <= tolerance
  AtMost,   // computed <= target + tolerance
  AtLeast,  // computed >= target - tolerance
};

const char* to_string(Relation r) noexcept;

struct VerificationRow {
  std::string name;
  double target = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  Relation relation = Relation::Within;
  bool pass = false;
};

struct VerificationTable {
  std::string title;
  std::vector<VerificationRow> rows;
  std::optional<SpectralReport> radii;

  /// Appends a row, deciding pass from the relation.
  const VerificationRow& add(std::string name, double target, double computed,
                             double tolerance, Relation relation = Relation::Within);
  bool all_pass() const;
  const VerificationRow* find(std::string_view name) const;
};

struct HorizonConfig {
  std::uint32_t depth = 2100;
  std::uint32_t N = 2048;
  std::uint32_t sphere_samples = 64;
  std::uint64_t seed = kDefaultSeed;
  std::uint32_t k = 3;
};

/// Needs depth >= 2100 and depth >= N + 2.
VerificationTable verify_example1(const HorizonConfig& h = {});
/// Needs k >= 2, depth >= 2100 and depth >= N + 2.
VerificationTable verify_example2(const HorizonConfig& h = {});

/// Two-parameter fit y_n = c a_n + d minimizing the relative residual.
struct GrowthFit {
  double c = 0.0;
  double d = 0.0;
  double max_rel_residual = 0.0;
};

GrowthFit fit_growth_law(std::span<const double> a, std::span<const double> y);

/// Header "re,im,abs,B_N,slope,class"; numbers with 17 significant digits.
std::string scan_csv(const RegionScan& scan);

/// Binary P5, one byte per grid cell. UNBOUNDED is 255; BOUNDED cells span
/// 0..127 and INCONCLUSIVE cells 128..254, each by log2 B_N relative to the
/// largest value in its class.
std::string heatmap_pgm(const RegionScan& scan);

void emit_heatmap(const RegionScan& scan, const std::filesystem::path& path);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

nlohmann::json operator_json(const RunConfig& config, const ShiftModel& model);
nlohmann::json radii_json(const SpectralReport& r);
nlohmann::json table_json(const VerificationTable& t);

/// Each run_* returns the JSON report and, when out_dir is given, writes it
/// (and any scan files) there.
nlohmann::json run_describe(const RunConfig& config,
                            const std::optional<std::filesystem::path>& out_dir = {});
nlohmann::json run_radii(const RunConfig& config,
                         const std::optional<std::filesystem::path>& out_dir = {});
nlohmann::json run_scan(const RunConfig& config,
                        const std::optional<std::filesystem::path>& out_dir = {},
                        unsigned threads = 0);
nlohmann::json run_kernel(const RunConfig& config,
                          const std::optional<std::filesystem::path>& out_dir = {});
/// which = 1 or 2.
nlohmann::json run_verify(int which, const RunConfig& config,
                          const std::optional<std::filesystem::path>& out_dir = {});

}  // namespace bpe
