#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>

#include "cellseq/error.hpp"

namespace cellseq {

inline constexpr int kMaxDim = 3;

struct Point {
  std::array<double, kMaxDim> x{};

  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-parallel closed box; degenerate axes have lo == hi.
struct Box {
  Point lo, hi;

  friend bool operator==(const Box&, const Box&) = default;
};

inline Point midpoint(const Box& b, int dim) {
  Point p;
  for (int i = 0; i < dim; ++i) p[i] = 0.5 * (b.lo[i] + b.hi[i]);
  return p;
}

/// y -> scale * y + offset, with a scalar (possibly negative) scale.
struct Affine {
  double scale = 1.0;
  Point offset;

  Point operator()(const Point& y) const {
    Point p;
    for (int i = 0; i < kMaxDim; ++i) p[i] = scale * y[i] + offset[i];
    return p;
  }
  Box operator()(const Box& b) const {
    Box out;
    Point a = (*this)(b.lo), c = (*this)(b.hi);
    for (int i = 0; i < kMaxDim; ++i) {
      out.lo[i] = std::min(a[i], c[i]);
      out.hi[i] = std::max(a[i], c[i]);
    }
    return out;
  }
  Affine inverse() const {
    if (scale == 0.0) throw RealizationError("singular affine map");
    Affine inv;
    inv.scale = 1.0 / scale;
    for (int i = 0; i < kMaxDim; ++i) inv.offset[i] = -offset[i] / scale;
    return inv;
  }
};

enum class Norm { L2, Linf };

/// The flat orbifold R^n / G with G generated by translations by `period` along
/// each axis and, optionally, the point reflection x -> -x.
///
/// With period 2 and no reflection this is the flat torus of side 2; with
/// period 2 and the reflection it is the pillowcase glued from two unit squares.
/// The quotient distance is min over g in G of |x - g y|; on any box of side at
/// most period/2 it agrees with the Euclidean distance.
class QuotientSpace {
 public:
  QuotientSpace() = default;
  QuotientSpace(int dim, double period, bool reflection) : dim_(dim), period_(period), reflection_(reflection) {
    if (dim < 1 || dim > kMaxDim) throw RealizationError("dimension must be in [1," + std::to_string(kMaxDim) + "]");
    if (!(period > 0)) throw RealizationError("period must be positive");
  }

  int dim() const noexcept { return dim_; }
  double period() const noexcept { return period_; }
  bool reflection() const noexcept { return reflection_; }

  /// Shortest signed representative of t modulo the period, in [-L/2, L/2].
  double wrap(double t) const {
    double r = std::remainder(t, period_);
    return r;
  }

  double distance(const Point& a, const Point& b, Norm norm = Norm::L2) const {
    double best = combine(a, b, 1.0, norm);
    if (reflection_) best = std::min(best, combine(a, b, -1.0, norm));
    return best;
  }

  /// Distance between two closed boxes in the quotient.
  double box_distance(const Box& a, const Box& b, Norm norm = Norm::L2) const {
    double best = box_combine(a, b, 1.0, norm);
    if (reflection_) best = std::min(best, box_combine(a, b, -1.0, norm));
    return best;
  }

  double point_box_distance(const Point& p, const Box& b, Norm norm = Norm::L2) const {
    return box_distance(Box{p, p}, b, norm);
  }

  /// Largest quotient distance between corners; the diameter of a box that fits
  /// in a chart.
  double box_diameter(const Box& b, Norm norm = Norm::L2) const {
    double best = 0;
    const int nc = 1 << dim_;
    for (int i = 0; i < nc; ++i)
      for (int j = i + 1; j < nc; ++j) best = std::max(best, distance(corner(b, i), corner(b, j), norm));
    return best;
  }

  Point corner(const Box& b, int mask) const {
    Point p;
    for (int i = 0; i < dim_; ++i) p[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
    return p;
  }

  /// A lift g(b) lying inside `chart`, if any.
  std::optional<Box> place_into(const Box& b, const Box& chart, double tol = 1e-9) const {
    for (double eps : signs()) {
      Box c = reflect(b, eps);
      bool ok = true;
      for (int i = 0; i < dim_ && ok; ++i) {
        double k = std::round((chart.lo[i] - c.lo[i]) / period_);
        bool found = false;
        for (double dk : {k - 1, k, k + 1}) {
          double lo = c.lo[i] + dk * period_, hi = c.hi[i] + dk * period_;
          if (lo >= chart.lo[i] - tol && hi <= chart.hi[i] + tol) {
            c.lo[i] = lo;
            c.hi[i] = hi;
            found = true;
            break;
          }
        }
        ok = found;
      }
      if (ok) return c;
    }
    return std::nullopt;
  }

  std::optional<Point> place_point_into(const Point& p, const Box& chart, double tol = 1e-9) const {
    auto b = place_into(Box{p, p}, chart, tol);
    if (!b) return std::nullopt;
    return b->lo;
  }

  /// Whether some lift of p lies in the relative interior of `box`.
  bool in_relative_interior(const Point& p, const Box& box, double tol = 1e-12) const {
    for (double eps : signs()) {
      bool ok = true;
      for (int i = 0; i < dim_ && ok; ++i) {
        double y = eps * p[i];
        double k = std::round((0.5 * (box.lo[i] + box.hi[i]) - y) / period_);
        bool found = false;
        for (double dk : {k - 1, k, k + 1}) {
          double z = y + dk * period_;
          bool degenerate = box.hi[i] - box.lo[i] <= tol;
          if (degenerate ? std::abs(z - box.lo[i]) <= tol : (z > box.lo[i] + tol && z < box.hi[i] - tol)) {
            found = true;
            break;
          }
        }
        ok = found;
      }
      if (ok) return true;
    }
    return false;
  }

  /// Representative of the orbit of b: translated so that lo lies in
  /// [0, period)^n, and under the reflection the lexicographically smaller one.
  Box canonical(const Box& b) const {
    Box best = normalize(b);
    if (reflection_) {
      Box r = normalize(reflect(b, -1.0));
      if (key(r) < key(best)) best = r;
    }
    return best;
  }

  std::array<double, 2 * kMaxDim> key(const Box& b) const {
    std::array<double, 2 * kMaxDim> k{};
    for (int i = 0; i < dim_; ++i) {
      k[static_cast<std::size_t>(i)] = b.lo[i];
      k[static_cast<std::size_t>(kMaxDim + i)] = b.hi[i];
    }
    return k;
  }

 private:
  std::span<const double> signs() const {
    static constexpr double both[2] = {1.0, -1.0};
    return {both, reflection_ ? 2u : 1u};
  }

  Box reflect(const Box& b, double eps) const {
    if (eps > 0) return b;
    Box r;
    for (int i = 0; i < dim_; ++i) {
      r.lo[i] = -b.hi[i];
      r.hi[i] = -b.lo[i];
    }
    return r;
  }

  Box normalize(const Box& b) const {
    Box r = b;
    for (int i = 0; i < dim_; ++i) {
      double k = std::floor(b.lo[i] / period_);
      double lo = b.lo[i] - k * period_;
      if (lo >= period_ - 1e-12) lo -= period_;  // guard against rounding just below a multiple
      if (lo < -1e-12) lo += period_;
      if (std::abs(lo) < 1e-12) lo = 0.0;
      double shift = lo - b.lo[i];
      r.lo[i] = lo;
      r.hi[i] = b.hi[i] + shift;
    }
    return r;
  }

  double combine(const Point& a, const Point& b, double eps, Norm norm) const {
    double acc = 0;
    for (int i = 0; i < dim_; ++i) {
      double d = std::abs(wrap(a[i] - eps * b[i]));
      acc = norm == Norm::L2 ? acc + d * d : std::max(acc, d);
    }
    return norm == Norm::L2 ? std::sqrt(acc) : acc;
  }

  // Per-axis gap between [a_lo,a_hi] and translates of [c_lo,c_hi].
  double interval_gap(double alo, double ahi, double clo, double chi) const {
    // Gap between intervals on the circle of length `period`.
    double len_a = ahi - alo, len_c = chi - clo;
    double start = wrap(clo - alo);  // offset of c relative to a, in [-L/2, L/2]
    double best = std::numeric_limits<double>::infinity();
    for (double k : {-1.0, 0.0, 1.0}) {
      double s = start + k * period_;
      double e = s + len_c;
      double gap = 0;
      if (e < 0)
        gap = -e;
      else if (s > len_a)
        gap = s - len_a;
      best = std::min(best, gap);
    }
    return best;
  }

  double box_combine(const Box& a, const Box& b, double eps, Norm norm) const {
    Box c = reflect(b, eps);
    double acc = 0;
    for (int i = 0; i < dim_; ++i) {
      double g = interval_gap(a.lo[i], a.hi[i], c.lo[i], c.hi[i]);
      acc = norm == Norm::L2 ? acc + g * g : std::max(acc, g);
    }
    return norm == Norm::L2 ? std::sqrt(acc) : acc;
  }

  int dim_ = 2;
  double period_ = 2.0;
  bool reflection_ = false;
};

}  // namespace cellseq
