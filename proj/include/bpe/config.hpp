#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bpe/bpe_engine.hpp"
#include "bpe/graph.hpp"
#include "bpe/spectral.hpp"

namespace bpe {

enum class Family { Example1, Example2, Classical, Custom };

const char* to_string(Family f) noexcept;

struct OperatorSpec {
  Family family = Family::Example1;
  std::uint32_t depth = 2100;
  std::uint32_t k = 3;
  /// Example 2 branch weights; empty means the named rule.
  std::vector<double> base;
  std::string base_rule = "example1-rule";
  /// Classical: lambda_1, lambda_2, ... Custom: one entry per vertex.
  std::vector<double> weights = {1.0};
  std::vector<std::int64_t> parents;
  /// Custom only: bounds on the weights past the horizon.
  double tail_min = 1.0;
  double tail_max = 1.0;

  bool operator==(const OperatorSpec&) const = default;
};

struct ScanSpec {
  GridKind grid = GridKind::Polar;
  std::uint32_t rays = 64;
  double r_min = 0.0;
  /// Default: 1.5 times the estimate of r(T').
  std::optional<double> r_max;
  double step = 0.01;
  std::uint32_t nx = 64;
  std::uint32_t ny = 64;
  /// re_min, re_max, im_min, im_max; default: the square of half-width r_max.
  std::optional<std::array<double, 4>> extent;
  std::uint32_t N = 256;
  double tail_fraction = 0.5;
  double slope_threshold = 1e-3;
  double cap = 1e12;

  bool operator==(const ScanSpec&) const = default;
};

struct RadiiSpec {
  /// Default: min(2048, depth - 2).
  std::optional<std::uint32_t> N;
  std::uint32_t sphere_samples = 64;
  double window_fraction = 0.5;

  bool operator==(const RadiiSpec&) const = default;
};

struct KernelSpec {
  std::complex<double> z{0.0, 0.0};
  std::complex<double> w{0.0, 0.0};
  std::uint32_t N = 256;

  bool operator==(const KernelSpec&) const = default;
};

struct OutputSpec {
  std::string csv = "scan.csv";
  std::string heatmap = "scan.pgm";
  bool write_heatmap = true;
  std::string report = "report.json";

  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  OperatorSpec op;
  ScanSpec scan;
  RadiiSpec radii;
  KernelSpec kernel;
  OutputSpec output;
  std::uint64_t seed = kDefaultSeed;

  /// Materialized depth (for custom graphs, the deepest level).
  std::uint32_t effective_depth() const;
  std::uint32_t radii_horizon() const;
  ClassifyThresholds thresholds() const;

  bool operator==(const RunConfig&) const = default;
};

/// Throws Parse (malformed text, unknown key, wrong type; the message names
/// the field) or Validation (the message names the violated invariant).
RunConfig parse_config(std::string_view text);

/// Every field written out, so parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

void validate_config(const RunConfig& config);

/// Graph and weights named by the operator section.
ShiftModel build_model(const OperatorSpec& op);

/// lambda_1..lambda_n of the named base rule.
std::vector<double> base_sequence(std::string_view rule, std::size_t n);

}  // namespace bpe
