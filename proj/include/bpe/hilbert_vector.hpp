#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bpe/graph.hpp"

namespace bpe {

using Complex = std::complex<double>;

/// mantissa * 2^exponent. Normalized values keep max(|re|, |im|) in [1, 2).
struct ScaledComplex {
  Complex mantissa{0.0, 0.0};
  std::int64_t exponent = 0;

  static ScaledComplex from(Complex value);
  /// unit_phase * 2^log2_modulus.
  static ScaledComplex from_polar_log2(Complex unit_phase, double log2_modulus);

  ScaledComplex& normalize();
  bool is_zero() const { return mantissa == Complex{}; }
  /// May overflow to inf or underflow to zero.
  Complex value() const;
  double log2_abs() const;
};

ScaledComplex operator*(const ScaledComplex& a, const ScaledComplex& b);

/// Finitely supported vector of l2(V), stored as sorted (vertex, amplitude)
/// pairs times 2^log2_scale. In canonical form the largest stored modulus
/// lies in [1, 2), or the vector is empty.
class HilbertVector {
 public:
  struct Entry {
    VertexId vertex;
    Complex amplitude;
  };

  HilbertVector() = default;

  static HilbertVector unit(VertexId v);
  /// Sorts, merges duplicates and canonicalizes.
  static HilbertVector from_entries(std::vector<Entry> entries,
                                    std::int64_t log2_scale = 0);
  static HilbertVector from_dense(std::span<const Complex> values);

  bool is_zero() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::int64_t log2_scale() const noexcept { return log2_scale_; }
  std::size_t support_size() const noexcept { return entries_.size(); }
  std::optional<VertexId> min_vertex() const;
  std::optional<VertexId> max_vertex() const;

  /// Represented coordinate at v (may overflow).
  Complex at(VertexId v) const;
  /// -inf for the zero vector.
  double log2_norm() const;
  double norm() const;

  HilbertVector& operator*=(const ScaledComplex& c);
  /// Multiplies by 2^e exactly.
  HilbertVector& shift_exponent(std::int64_t e) {
    if (!is_zero()) log2_scale_ += e;
    return *this;
  }
  /// Unit vector in the same direction (zero stays zero).
  HilbertVector normalized() const;

  std::vector<Complex> to_dense(std::size_t n) const;

 private:
  friend HilbertVector axpy(const ScaledComplex&, const HilbertVector&,
                            const HilbertVector&);
  void canonicalize();

  std::vector<Entry> entries_;
  std::int64_t log2_scale_ = 0;
};

/// alpha * x + y, canonicalized.
HilbertVector axpy(const ScaledComplex& alpha, const HilbertVector& x,
                   const HilbertVector& y);

inline HilbertVector operator+(const HilbertVector& x, const HilbertVector& y) {
  return axpy(ScaledComplex{{1.0, 0.0}, 0}, x, y);
}
inline HilbertVector operator-(const HilbertVector& x, const HilbertVector& y) {
  return axpy(ScaledComplex{{-1.0, 0.0}, 0}, y, x);
}

/// <x, y> = sum x_v conj(y_v), linear in the first argument.
ScaledComplex inner(const HilbertVector& x, const HilbertVector& y);

}  // namespace bpe
