#include "bpe/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "bpe/error.hpp"

namespace bpe {

const char* to_string(TailRule rule) noexcept {
  switch (rule) {
    case TailRule::EventuallyLinearChain:
      return "eventually-linear-chain";
    case TailRule::DeclaredBound:
      return "declared-bound";
  }
  return "unknown";
}

ShiftGraph::ShiftGraph(std::vector<VertexId> parent,
                       std::vector<std::string> labels, TailRule tail_rule)
    : parent_(std::move(parent)),
      labels_(std::move(labels)),
      tail_rule_(tail_rule) {
  const std::size_t n = parent_.size();
  if (n == 0) fail(ErrorCode::InvalidArgument, "graph has no vertices");
  if (labels_.empty()) {
    labels_.resize(n);
    for (std::size_t v = 0; v < n; ++v) labels_[v] = std::to_string(v);
  }
  if (labels_.size() != n)
    fail(ErrorCode::InvalidArgument, "label count does not match vertex count");

  level_.assign(n, 0);
  for (VertexId v = 0; v < n; ++v) {
    const VertexId p = parent_[v];
    if (p == kNoParent || p == v) continue;
    if (p > v)
      fail(ErrorCode::InvalidArgument,
           "vertices must be numbered breadth first (parent " +
               std::to_string(p) + " after child " + std::to_string(v) + ")");
    level_[v] = level_[p] + 1;
  }
  for (VertexId v = 0; v < n; ++v) {
    if (parent_[v] == v && level_[v] != 0)
      fail(ErrorCode::InvalidArgument, "loops are only supported at level 0");
    if (v > 0 && level_[v] < level_[v - 1])
      fail(ErrorCode::InvalidArgument,
           "vertices must be ordered by level (vertex " + std::to_string(v) +
               ")");
  }
  depth_ = level_.back();

  level_offset_.assign(depth_ + 2, 0);
  for (VertexId v = 0; v < n; ++v) ++level_offset_[level_[v] + 1];
  std::partial_sum(level_offset_.begin(), level_offset_.end(),
                   level_offset_.begin());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), VertexId{0});

  // Children in index order, stored as a CSR table.
  child_offset_.assign(n + 1, 0);
  for (VertexId v = 0; v < n; ++v)
    if (parent_[v] != kNoParent) ++child_offset_[parent_[v] + 1];
  std::partial_sum(child_offset_.begin(), child_offset_.end(),
                   child_offset_.begin());
  child_list_.resize(child_offset_[n]);
  std::vector<std::size_t> fill(child_offset_.begin(), child_offset_.end() - 1);
  for (VertexId v = 0; v < n; ++v)
    if (parent_[v] != kNoParent) child_list_[fill[parent_[v]]++] = v;

  for (VertexId v = 0; v < n; ++v) {
    if (!is_boundary(v) && children(v).empty())
      fail(ErrorCode::InvalidArgument,
           "vertex " + labels_[v] + " below the horizon has an empty fiber");
  }

  for (VertexId b : level_vertices(depth_)) {
    std::vector<VertexId> path;
    VertexId v = b;
    path.push_back(v);
    while (level_[v] > 0) {
      v = parent_[v];
      path.push_back(v);
    }
    std::reverse(path.begin(), path.end());
    branches_.push_back(std::move(path));
  }
}

std::optional<VertexId> ShiftGraph::parent(VertexId v) const {
  const VertexId p = parent_.at(v);
  if (p == kNoParent) return std::nullopt;
  return p;
}

std::span<const VertexId> ShiftGraph::children(VertexId v) const {
  const std::size_t lo = child_offset_.at(v);
  const std::size_t hi = child_offset_.at(v + 1);
  return {child_list_.data() + lo, hi - lo};
}

std::span<const VertexId> ShiftGraph::level_vertices(std::uint32_t lvl) const {
  if (lvl > depth_) return {};
  const std::size_t lo = level_offset_[lvl];
  const std::size_t hi = level_offset_[lvl + 1];
  return {order_.data() + lo, hi - lo};
}

std::vector<VertexId> ShiftGraph::roots() const {
  std::vector<VertexId> out;
  for (VertexId v = 0; v < size(); ++v)
    if (is_root(v)) out.push_back(v);
  return out;
}

WeightAssignment::WeightAssignment(const ShiftGraph& graph,
                                   std::vector<double> lambda, TailBounds tail)
    : lambda_(std::move(lambda)), tail_(tail) {
  const std::size_t n = graph.size();
  if (lambda_.size() != n)
    fail(ErrorCode::InvalidArgument, "one weight per vertex is required");
  if (!(tail_.min > 0.0) || !(tail_.max >= tail_.min) ||
      !std::isfinite(tail_.max))
    fail(ErrorCode::InvalidArgument, "tail bounds must satisfy 0 < min <= max");

  for (VertexId v = 0; v < n; ++v) {
    if (graph.is_root(v)) {
      lambda_[v] = std::nan("");
      continue;
    }
    if (!(lambda_[v] > 0.0) || !std::isfinite(lambda_[v]))
      fail(ErrorCode::InvalidArgument,
           "weight at vertex " + graph.label(v) + " must be positive");
  }

  fiber_norm_sq_.assign(n, std::nan(""));
  min_d_ = std::numeric_limits<double>::infinity();
  max_d_ = 0.0;
  for (VertexId v = 0; v < n; ++v) {
    if (graph.is_boundary(v)) continue;
    double d = 0.0;
    for (VertexId u : graph.children(v)) d += lambda_[u] * lambda_[u];
    fiber_norm_sq_[v] = d;
    min_d_ = std::min(min_d_, d);
    max_d_ = std::max(max_d_, d);
  }
  if (max_d_ == 0.0) {
    min_d_ = tail_.min * tail_.min;
    max_d_ = tail_.max * tail_.max;
  }
}

double example1_weight(std::uint64_t k) {
  if (k <= 4) return 1.0;
  // 2^n + 1 <= k <= 2^(n+1) determines n.
  const auto n = static_cast<unsigned>(std::bit_width(k - 1) - 1);
  if (n >= 2 && k <= 3 * (std::uint64_t{1} << (n - 1))) return 0.5;
  return 1.0;
}

ShiftModel build_example1(std::uint32_t depth) {
  if (depth < 2)
    fail(ErrorCode::InvalidArgument, "example1 needs depth >= 2");
  std::vector<VertexId> parent(depth + 1);
  std::vector<double> lambda(depth + 1);
  parent[0] = 0;
  lambda[0] = 1.0;
  for (VertexId v = 1; v <= depth; ++v) {
    parent[v] = v - 1;
    lambda[v] = example1_weight(v);
  }
  ShiftGraph graph(std::move(parent), {}, TailRule::EventuallyLinearChain);
  WeightAssignment weights(graph, std::move(lambda), TailBounds{0.5, 1.0});
  return {std::move(graph), std::move(weights)};
}

ShiftModel build_example2(std::uint32_t k, std::span<const double> base_weights,
                          std::uint32_t depth) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "example2 needs k >= 1");
  if (depth < 1) fail(ErrorCode::InvalidArgument, "example2 needs depth >= 1");
  if (base_weights.size() < depth)
    fail(ErrorCode::InvalidArgument,
         "example2 needs at least `depth` base weights");
  TailBounds tail{1.0, 1.0};
  for (double w : base_weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      fail(ErrorCode::InvalidArgument, "base weights must be positive");
    if (w > 1.0)
      fail(ErrorCode::InvalidArgument, "base weights must not exceed 1");
    tail.min = std::min(tail.min, w);
  }

  const std::size_t n = 1 + std::size_t{k} * depth;
  std::vector<VertexId> parent(n);
  std::vector<double> lambda(n, 1.0);
  std::vector<std::string> labels(n);
  parent[0] = kNoParent;
  labels[0] = "(0,0)";
  // (m, j) -> 1 + (m-1) k + (j-1)
  for (std::uint32_t m = 1; m <= depth; ++m) {
    for (std::uint32_t j = 1; j <= k; ++j) {
      const VertexId v = 1 + (m - 1) * k + (j - 1);
      parent[v] = m == 1 ? 0 : v - k;
      labels[v] = "(" + std::to_string(m) + "," + std::to_string(j) + ")";
      if (j == 1) lambda[v] = base_weights[m - 1];
    }
  }
  ShiftGraph graph(std::move(parent), std::move(labels),
                   TailRule::EventuallyLinearChain);
  WeightAssignment weights(graph, std::move(lambda), tail);
  return {std::move(graph), std::move(weights)};
}

ShiftModel build_classical(std::span<const double> weights,
                           std::uint32_t depth) {
  if (weights.empty())
    fail(ErrorCode::InvalidArgument, "classical shift needs weights");
  if (depth < 1) fail(ErrorCode::InvalidArgument, "classical needs depth >= 1");
  std::vector<VertexId> parent(depth + 1);
  std::vector<double> lambda(depth + 1, std::nan(""));
  parent[0] = kNoParent;
  for (VertexId v = 1; v <= depth; ++v) {
    parent[v] = v - 1;
    lambda[v] = weights[std::min<std::size_t>(v - 1, weights.size() - 1)];
  }
  // Past the horizon the chain runs through the unused weights and then keeps
  // the last one.
  const double last = weights.back();
  TailBounds tail{last, last};
  for (std::size_t i = depth; i < weights.size(); ++i) {
    tail.min = std::min(tail.min, weights[i]);
    tail.max = std::max(tail.max, weights[i]);
  }
  if (!(tail.min > 0.0))
    fail(ErrorCode::InvalidArgument, "classical weights must be positive");
  ShiftGraph graph(std::move(parent), {}, TailRule::EventuallyLinearChain);
  WeightAssignment w(graph, std::move(lambda), tail);
  return {std::move(graph), std::move(w)};
}

ShiftModel build_custom(std::span<const std::int64_t> parents,
                        std::span<const double> weights, TailBounds tail) {
  if (parents.empty())
    fail(ErrorCode::InvalidArgument, "custom graph needs vertices");
  if (weights.size() != parents.size())
    fail(ErrorCode::InvalidArgument, "custom graph needs one weight per vertex");
  std::vector<VertexId> parent(parents.size());
  for (std::size_t v = 0; v < parents.size(); ++v) {
    const auto p = parents[v];
    if (p < -1 || p >= static_cast<std::int64_t>(parents.size()))
      fail(ErrorCode::InvalidArgument,
           "parent index out of range at vertex " + std::to_string(v));
    parent[v] = p < 0 ? kNoParent : static_cast<VertexId>(p);
  }
  ShiftGraph graph(std::move(parent), {}, TailRule::DeclaredBound);
  std::vector<double> lambda(weights.begin(), weights.end());
  WeightAssignment w(graph, std::move(lambda), tail);
  return {std::move(graph), std::move(w)};
}

std::vector<VertexId> materialize_support(const ShiftGraph& graph,
                                          std::uint32_t level_bound) {
  if (level_bound > graph.depth())
    fail(ErrorCode::HorizonExceeded,
         "level bound " + std::to_string(level_bound) + " exceeds depth " +
             std::to_string(graph.depth()));
  std::vector<VertexId> out;
  for (std::uint32_t l = 0; l <= level_bound; ++l)
    for (VertexId v : graph.level_vertices(l)) out.push_back(v);
  return out;
}

}  // namespace bpe
