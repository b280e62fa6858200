#include "bpe/hilbert_vector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bpe {
namespace {

// ldexp takes an int; anything beyond this range is 0 or inf anyway.
int clamp_exp(std::int64_t e) {
  return static_cast<int>(std::clamp<std::int64_t>(e, -4000, 4000));
}

Complex ldexp(Complex z, std::int64_t e) {
  const int k = clamp_exp(e);
  return {std::ldexp(z.real(), k), std::ldexp(z.imag(), k)};
}

}  // namespace

ScaledComplex ScaledComplex::from(Complex value) {
  ScaledComplex s{value, 0};
  s.normalize();
  return s;
}

ScaledComplex ScaledComplex::from_polar_log2(Complex unit_phase,
                                             double log2_modulus) {
  if (!std::isfinite(log2_modulus)) return {};
  const double whole = std::floor(log2_modulus);
  ScaledComplex s{unit_phase * std::exp2(log2_modulus - whole),
                  static_cast<std::int64_t>(whole)};
  s.normalize();
  return s;
}

ScaledComplex& ScaledComplex::normalize() {
  const double m = std::max(std::abs(mantissa.real()), std::abs(mantissa.imag()));
  if (m == 0.0) {
    mantissa = {};
    exponent = 0;
    return *this;
  }
  int e = 0;
  std::frexp(m, &e);
  const int shift = e - 1;
  mantissa = ldexp(mantissa, -shift);
  exponent += shift;
  return *this;
}

Complex ScaledComplex::value() const { return ldexp(mantissa, exponent); }

double ScaledComplex::log2_abs() const {
  if (is_zero()) return -std::numeric_limits<double>::infinity();
  return std::log2(std::abs(mantissa)) + static_cast<double>(exponent);
}

ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b) {
  ScaledComplex r{a.mantissa * b.mantissa, a.exponent + b.exponent};
  r.normalize();
  return r;
}

HilbertVector HilbertVector::unit(VertexId v) {
  HilbertVector x;
  x.entries_.push_back({v, {1.0, 0.0}});
  return x;
}

HilbertVector HilbertVector::from_entries(std::vector<Entry> entries,
                                          std::int64_t log2_scale) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.vertex < b.vertex; });
  HilbertVector x;
  x.entries_.reserve(entries.size());
  for (const Entry& e : entries) {
    if (!x.entries_.empty() && x.entries_.back().vertex == e.vertex)
      x.entries_.back().amplitude += e.amplitude;
    else
      x.entries_.push_back(e);
  }
  x.log2_scale_ = log2_scale;
  x.canonicalize();
  return x;
}

HilbertVector HilbertVector::from_dense(std::span<const Complex> values) {
  std::vector<Entry> entries;
  for (std::size_t v = 0; v < values.size(); ++v)
    if (values[v] != Complex{})
      entries.push_back({static_cast<VertexId>(v), values[v]});
  return from_entries(std::move(entries));
}

void HilbertVector::canonicalize() {
  std::erase_if(entries_, [](const Entry& e) { return e.amplitude == Complex{}; });
  if (entries_.empty()) {
    log2_scale_ = 0;
    return;
  }
  double m2 = 0.0;
  for (const Entry& e : entries_) m2 = std::max(m2, std::norm(e.amplitude));
  int e = 0;
  std::frexp(std::sqrt(m2), &e);
  int shift = e - 1;
  if (shift == 0) return;
  for (Entry& en : entries_) en.amplitude = ldexp(en.amplitude, -shift);
  log2_scale_ += shift;
  // sqrt rounding can leave the maximum a hair outside [1, 2).
  m2 = 0.0;
  for (const Entry& en : entries_) m2 = std::max(m2, std::norm(en.amplitude));
  if (m2 >= 4.0) {
    for (Entry& en : entries_) en.amplitude = ldexp(en.amplitude, -1);
    ++log2_scale_;
  } else if (m2 < 1.0) {
    for (Entry& en : entries_) en.amplitude = ldexp(en.amplitude, 1);
    --log2_scale_;
  }
}

std::optional<VertexId> HilbertVector::min_vertex() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.front().vertex;
}

std::optional<VertexId> HilbertVector::max_vertex() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.back().vertex;
}

Complex HilbertVector::at(VertexId v) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), v,
      [](const Entry& e, VertexId key) { return e.vertex < key; });
  if (it == entries_.end() || it->vertex != v) return {};
  return ldexp(it->amplitude, log2_scale_);
}

double HilbertVector::log2_norm() const {
  if (entries_.empty()) return -std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (const Entry& e : entries_) s += std::norm(e.amplitude);
  return 0.5 * std::log2(s) + static_cast<double>(log2_scale_);
}

double HilbertVector::norm() const {
  if (entries_.empty()) return 0.0;
  double s = 0.0;
  for (const Entry& e : entries_) s += std::norm(e.amplitude);
  return std::ldexp(std::sqrt(s), clamp_exp(log2_scale_));
}

HilbertVector& HilbertVector::operator*=(const ScaledComplex& c) {
  if (c.is_zero()) {
    entries_.clear();
    log2_scale_ = 0;
    return *this;
  }
  for (Entry& e : entries_) e.amplitude *= c.mantissa;
  log2_scale_ += c.exponent;
  canonicalize();
  return *this;
}

HilbertVector HilbertVector::normalized() const {
  if (entries_.empty()) return {};
  double s = 0.0;
  for (const Entry& e : entries_) s += std::norm(e.amplitude);
  const double inv = 1.0 / std::sqrt(s);
  HilbertVector out;
  out.entries_ = entries_;
  for (Entry& e : out.entries_) e.amplitude *= inv;
  out.canonicalize();
  return out;
}

std::vector<Complex> HilbertVector::to_dense(std::size_t n) const {
  std::vector<Complex> out(n);
  for (const Entry& e : entries_)
    if (e.vertex < n) out[e.vertex] = ldexp(e.amplitude, log2_scale_);
  return out;
}

HilbertVector axpy(const ScaledComplex& alpha, const HilbertVector& x,
                   const HilbertVector& y) {
  if (alpha.is_zero() || x.is_zero()) return y;
  const std::int64_t ex = alpha.exponent + x.log2_scale_;
  if (y.is_zero()) {
    HilbertVector out = x;
    out *= alpha;
    return out;
  }
  const std::int64_t ey = y.log2_scale_;
  const std::int64_t top = std::max(ex, ey);
  const Complex fx = ldexp(alpha.mantissa, ex - top);
  const double fy = std::ldexp(1.0, clamp_exp(ey - top));

  HilbertVector out;
  out.entries_.reserve(x.entries_.size() + y.entries_.size());
  auto ix = x.entries_.begin();
  auto iy = y.entries_.begin();
  while (ix != x.entries_.end() || iy != y.entries_.end()) {
    if (iy == y.entries_.end() ||
        (ix != x.entries_.end() && ix->vertex < iy->vertex)) {
      out.entries_.push_back({ix->vertex, fx * ix->amplitude});
      ++ix;
    } else if (ix == x.entries_.end() || iy->vertex < ix->vertex) {
      out.entries_.push_back({iy->vertex, fy * iy->amplitude});
      ++iy;
    } else {
      out.entries_.push_back(
          {ix->vertex, fx * ix->amplitude + fy * iy->amplitude});
      ++ix;
      ++iy;
    }
  }
  out.log2_scale_ = top;
  out.canonicalize();
  return out;
}

ScaledComplex inner(const HilbertVector& x, const HilbertVector& y) {
  if (x.is_zero() || y.is_zero()) return {};
  if (*x.max_vertex() < *y.min_vertex() || *y.max_vertex() < *x.min_vertex())
    return {};
  Complex sum{};
  const auto xs = x.entries();
  const auto ys = y.entries();
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    if (xs[i].vertex < ys[j].vertex) {
      ++i;
    } else if (ys[j].vertex < xs[i].vertex) {
      ++j;
    } else {
      sum += xs[i].amplitude * std::conj(ys[j].amplitude);
      ++i;
      ++j;
    }
  }
  ScaledComplex r{sum, x.log2_scale() + y.log2_scale()};
  r.normalize();
  return r;
}

}  // namespace bpe
