#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <vector>

namespace isop {

inline constexpr int kMaxDim = 3;

template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Point = PointT<double>;

Point make_point(std::initializer_list<double> coords);

/// Plane {x : <x, normal> = offset}; H+ is the side where <x, normal> > offset.
template <typename Scalar>
struct HyperplaneT {
  PointT<Scalar> normal;
  Scalar offset{0};

  HyperplaneT() = default;
  // Normalizes (normal, offset) jointly, so any nonzero normal is accepted.
  HyperplaneT(PointT<Scalar> n, Scalar c) {
    const Scalar len = n.norm();
    if (!(len > Scalar(0))) throw std::invalid_argument("hyperplane normal must be nonzero");
    normal = n / len;
    offset = c / len;
  }

  Scalar side(const PointT<Scalar>& x) const { return x.dot(normal) - offset; }
};
using Hyperplane = HyperplaneT<double>;

template <typename Scalar>
PointT<Scalar> reflect(const PointT<Scalar>& x, const HyperplaneT<Scalar>& h) {
  return x - Scalar(2) * h.side(x) * h.normal;
}

/// Closest point parameter s in [0,1] on segment [a,b] to x.
template <typename Scalar>
Scalar closest_param(const PointT<Scalar>& a, const PointT<Scalar>& b, const PointT<Scalar>& x) {
  const PointT<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  if (len2 <= Scalar(0)) return Scalar(0);
  Scalar s = (x - a).dot(ab) / len2;
  return s < Scalar(0) ? Scalar(0) : (s > Scalar(1) ? Scalar(1) : s);
}

template <typename Scalar>
Scalar segment_point_distance(const PointT<Scalar>& a, const PointT<Scalar>& b,
                              const PointT<Scalar>& x) {
  const Scalar s = closest_param(a, b, x);
  return (a + s * (b - a) - x).norm();
}

/// Minimum distance between segments [p0,p1] and [q0,q1] and the parameter
/// along the first segment where it is attained.
struct SegmentApproach {
  double distance;
  double s;
};
SegmentApproach segment_segment_approach(const Point& p0, const Point& p1, const Point& q0,
                                         const Point& q1);

double ball_volume(int dim, double radius);
double ball_radius_for_volume(int dim, double volume);

/// Indicator of a set on a uniform grid. Cells are identified with their
/// centers; axis 0 varies fastest in the linear index.
class RasterSet {
 public:
  RasterSet(int dim, const Point& origin, double cell, std::array<int, 3> shape);

  int dim() const { return dim_; }
  const Point& origin() const { return origin_; }
  double cell() const { return cell_; }
  const std::array<int, 3>& shape() const { return shape_; }
  std::size_t size() const { return size_; }

  bool test(std::size_t idx) const { return (words_[idx >> 6] >> (idx & 63)) & 1u; }
  void set(std::size_t idx, bool value = true) {
    const std::uint64_t bit = std::uint64_t{1} << (idx & 63);
    if (value) words_[idx >> 6] |= bit;
    else words_[idx >> 6] &= ~bit;
  }

  std::size_t index(const std::array<int, 3>& ijk) const {
    return static_cast<std::size_t>(ijk[0]) +
           static_cast<std::size_t>(shape_[0]) *
               (static_cast<std::size_t>(ijk[1]) +
                static_cast<std::size_t>(shape_[1]) * static_cast<std::size_t>(ijk[2]));
  }
  std::array<int, 3> coords(std::size_t idx) const;
  Point center(std::size_t idx) const;
  bool in_grid(const std::array<int, 3>& ijk) const;
  /// Cell containing x (half-open cells), or -1 when outside the grid.
  std::ptrdiff_t locate(const Point& x) const;
  /// Membership of a point: true iff it falls in a set cell.
  bool contains(const Point& x) const {
    const auto idx = locate(x);
    return idx >= 0 && test(static_cast<std::size_t>(idx));
  }
  Point upper() const;

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  bool same_grid(const RasterSet& other) const;
  RasterSet empty_like() const;
  bool subset_of(const RasterSet& other) const;

  RasterSet& operator|=(const RasterSet& other);
  RasterSet& operator&=(const RasterSet& other);
  RasterSet& operator-=(const RasterSet& other);
  friend bool operator==(const RasterSet& a, const RasterSet& b);

  const std::vector<std::uint64_t>& words() const { return words_; }

  template <typename F>
  void for_each_set(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = __builtin_ctzll(bits);
        f(w * 64 + static_cast<std::size_t>(b));
        bits &= bits - 1;
      }
    }
  }

 private:
  void require_same_grid(const RasterSet& other) const;

  int dim_;
  Point origin_;
  double cell_;
  std::array<int, 3> shape_;
  std::size_t size_;
  std::vector<std::uint64_t> words_;
};

double volume(const RasterSet& a);

/// Squared Euclidean distance (world units) from every cell center to the
/// nearest set cell center of `target`; +inf when target is empty. When
/// `nearest` is given it receives the linear index of that cell (-1 if none).
std::vector<double> squared_distance_field(const RasterSet& target,
                                           std::vector<std::int64_t>* nearest = nullptr);

double hausdorff_distance(const RasterSet& a, const RasterSet& b);
RasterSet dilate(const RasterSet& a, double r);

/// Grid covering [lo, hi] with the given cell size; the box is grown to a
/// whole number of cells, keeping it centered.
RasterSet grid_covering(const Point& lo, const Point& hi, double cell);

}  // namespace isop
