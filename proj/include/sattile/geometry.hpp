#pragma once

// Axis-aligned box arithmetic shared by labels, detections and evaluation.
//
// Boxes use pixel coordinates with the origin at the top-left, x growing
// rightward and y downward. Extents are half-open: [xmin, xmax) x [ymin, ymax),
// so two boxes that share an edge have zero intersection.
//
// Every routine is templated on the coordinate type. `Box` (double) is what the
// pipeline uses; exact rational types work unchanged, which is how the
// coordinate transforms are checked without tolerance.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace sattile {

template <class T>
struct BasicBox {
  T xmin{};
  T ymin{};
  T xmax{};
  T ymax{};

  BasicBox() = default;

  /// Throws std::invalid_argument unless width and height are strictly positive
  /// (and, for floating-point T, all corners are finite).
  BasicBox(T x0, T y0, T x1, T y1) : xmin(x0), ymin(y0), xmax(x1), ymax(y1) {
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1))
        throw std::invalid_argument("box has non-finite coordinates");
    }
    if (!(xmin < xmax) || !(ymin < ymax))
      throw std::invalid_argument("box has zero or negative extent");
  }

  T width() const { return xmax - xmin; }
  T height() const { return ymax - ymin; }

  friend bool operator==(const BasicBox& a, const BasicBox& b) {
    return a.xmin == b.xmin && a.ymin == b.ymin && a.xmax == b.xmax && a.ymax == b.ymax;
  }
};

using Box = BasicBox<double>;

inline std::ostream& operator<<(std::ostream& os, const Box& b) {
  return os << "(" << b.xmin << "," << b.ymin << "," << b.xmax << "," << b.ymax << ")";
}

template <class T>
T area(const BasicBox<T>& b) {
  return (b.xmax - b.xmin) * (b.ymax - b.ymin);
}

template <class T>
struct Extents {
  T dx;
  T dy;
};

/// Raw per-axis overlap. Negative values mean the boxes are separated on that
/// axis by that distance; no clamping happens here.
template <class T>
Extents<T> intersection_extents(const BasicBox<T>& a, const BasicBox<T>& b) {
  using std::max;
  using std::min;
  return {min(a.xmax, b.xmax) - max(a.xmin, b.xmin), min(a.ymax, b.ymax) - max(a.ymin, b.ymin)};
}

template <class T>
T intersection_area(const BasicBox<T>& a, const BasicBox<T>& b) {
  const auto e = intersection_extents(a, b);
  const T zero{};
  if (!(zero < e.dx) || !(zero < e.dy)) return zero;
  return e.dx * e.dy;
}

/// Intersection over the smaller of the two areas. Full containment of either
/// box in the other scores exactly 1.
template <class T>
T ioa(const BasicBox<T>& a, const BasicBox<T>& b) {
  using std::min;
  return intersection_area(a, b) / min(area(a), area(b));
}

template <class T>
T iou(const BasicBox<T>& a, const BasicBox<T>& b) {
  const T inter = intersection_area(a, b);
  return inter / (area(a) + area(b) - inter);
}

/// Intersection of `b` with `bounds`, or nothing when they do not overlap.
template <class T>
std::optional<BasicBox<T>> clip_to(const BasicBox<T>& b, const BasicBox<T>& bounds) {
  using std::max;
  using std::min;
  const T x0 = max(b.xmin, bounds.xmin);
  const T y0 = max(b.ymin, bounds.ymin);
  const T x1 = min(b.xmax, bounds.xmax);
  const T y1 = min(b.ymax, bounds.ymax);
  if (!(x0 < x1) || !(y0 < y1)) return std::nullopt;
  return BasicBox<T>(x0, y0, x1, y1);
}

}  // namespace sattile
