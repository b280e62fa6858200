#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bpe {

using VertexId = std::uint32_t;
inline constexpr VertexId kNoParent = std::numeric_limits<VertexId>::max();

/// How the structure continues past the materialized horizon.
enum class TailRule {
  EventuallyLinearChain,  // every boundary vertex continues as a chain
  DeclaredBound,          // only weight bounds are known beyond the horizon
};

const char* to_string(TailRule rule) noexcept;

/// Certified range of the weights that live beyond the horizon.
struct TailBounds {
  double min = 1.0;
  double max = 1.0;
};

/// A directed graph given by a parent function, materialized up to a finite
/// level. Vertices are numbered breadth first: every level occupies a
/// contiguous index range, and parent(v) < v unless v carries a loop.
class ShiftGraph {
 public:
  /// `parent[v]` is kNoParent for roots and v itself for a loop vertex.
  ShiftGraph(std::vector<VertexId> parent, std::vector<std::string> labels,
             TailRule tail_rule);

  std::size_t size() const noexcept { return parent_.size(); }
  std::optional<VertexId> parent(VertexId v) const;
  bool is_root(VertexId v) const { return parent_.at(v) == kNoParent; }
  bool has_loop(VertexId v) const { return parent_.at(v) == v; }
  std::span<const VertexId> children(VertexId v) const;
  std::uint32_t level(VertexId v) const { return level_.at(v); }
  std::uint32_t depth() const noexcept { return depth_; }
  bool is_boundary(VertexId v) const { return level(v) == depth_; }
  TailRule tail_rule() const noexcept { return tail_rule_; }
  const std::string& label(VertexId v) const { return labels_.at(v); }

  /// Vertices of one level, as a contiguous index range.
  std::span<const VertexId> level_vertices(std::uint32_t lvl) const;
  std::vector<VertexId> roots() const;

  /// One path per boundary vertex, from its level-0 ancestor down to the
  /// horizon; entry j of a branch is its vertex at level j.
  const std::vector<std::vector<VertexId>>& branches() const noexcept {
    return branches_;
  }

 private:
  std::vector<VertexId> parent_;
  std::vector<std::string> labels_;
  std::vector<std::uint32_t> level_;
  std::vector<std::size_t> child_offset_;
  std::vector<VertexId> child_list_;
  std::vector<VertexId> order_;
  std::vector<std::size_t> level_offset_;
  std::vector<std::vector<VertexId>> branches_;
  std::uint32_t depth_ = 0;
  TailRule tail_rule_;
};

/// Positive weight per parented vertex together with the cached fiber norms
/// d_v = sum over children u of lambda_u^2.
class WeightAssignment {
 public:
  WeightAssignment(const ShiftGraph& graph, std::vector<double> lambda,
                   TailBounds tail);

  /// NaN for roots.
  double lambda(VertexId v) const { return lambda_.at(v); }
  /// NaN on boundary vertices, whose fibers are not materialized.
  double fiber_norm_sq(VertexId v) const { return fiber_norm_sq_.at(v); }
  std::span<const double> lambdas() const noexcept { return lambda_; }
  const TailBounds& tail() const noexcept { return tail_; }

  double min_fiber_norm_sq() const noexcept { return min_d_; }
  double max_fiber_norm_sq() const noexcept { return max_d_; }

 private:
  std::vector<double> lambda_;
  std::vector<double> fiber_norm_sq_;
  TailBounds tail_;
  double min_d_ = 0.0;
  double max_d_ = 0.0;
};

struct ShiftModel {
  ShiftGraph graph;
  WeightAssignment weights;
};

/// Weight rule of the lacunary chain: 1/2 on 2^m+1..3*2^(m-1) for m >= 2,
/// 1 elsewhere (k >= 0).
double example1_weight(std::uint64_t k);

/// Chain 0 -> 1 -> 2 -> ... with a loop at 0 carrying weight 1.
ShiftModel build_example1(std::uint32_t depth);

/// Rooted tree with k branches; branch 1 carries base_weights[n-1] at level n,
/// the others carry 1. Needs base_weights.size() >= depth.
ShiftModel build_example2(std::uint32_t k, std::span<const double> base_weights,
                          std::uint32_t depth);

/// Unilateral weighted shift, lambda_n = weights[n-1]; the last weight is
/// repeated when the list is shorter than the depth.
ShiftModel build_classical(std::span<const double> weights,
                           std::uint32_t depth);

/// Arbitrary parent function in breadth-first order (parent index below the
/// child's, or equal for a loop; -1 for a root). weights[v] is ignored on
/// roots. The tail is only known through `tail`.
ShiftModel build_custom(std::span<const std::int64_t> parents,
                        std::span<const double> weights, TailBounds tail);

/// All vertices with level <= level_bound, in index order.
std::vector<VertexId> materialize_support(const ShiftGraph& graph,
                                          std::uint32_t level_bound);

}  // namespace bpe
