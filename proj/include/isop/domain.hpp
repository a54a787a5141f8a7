#pragma once

#include "isop/geometry.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace isop {

struct BallShape {
  Point center;
  double radius;
};

struct AnnulusShape {
  Point center;
  double inner, outer;
};

struct BoxShape {
  Point lo, hi;
};

struct PolygonShape {
  std::vector<Eigen::Vector2d> vertices;  // simple polygon, either orientation
};

/// Unit-disk-like domain {|z| < radius} minus radial slits {r e^{i angle} : a <= r <= radius}.
struct SlitDiskShape {
  std::vector<double> angles;
  double a;
  double radius = 1.0;
};

struct BallUnionShape {
  std::vector<BallShape> balls;
};

struct BallIntersectionShape {
  std::vector<BallShape> balls;
};

/// Raster-backed domain with precomputed distance fields. `outer_radius > 0`
/// labels boundary points with |x| >= outer_radius - 1.5 cell as "outer".
struct RasterField {
  RasterSet mask;
  std::vector<float> inner_dist;  // center -> nearest non-member center
  std::vector<std::int32_t> inner_nearest;
  std::vector<float> outer_dist;  // center -> nearest member center
  std::vector<std::int32_t> outer_nearest;
  double outer_radius = 0;
};

class Domain {
 public:
  using Shape = std::variant<BallShape, AnnulusShape, BoxShape, PolygonShape, SlitDiskShape,
                             BallUnionShape, BallIntersectionShape,
                             std::shared_ptr<const RasterField>>;

  static Domain ball(const Point& center, double radius);
  static Domain annulus(const Point& center, double inner, double outer);
  static Domain box(const Point& lo, const Point& hi);
  static Domain polygon(std::vector<Eigen::Vector2d> vertices);
  static Domain slit_disk(std::vector<double> angles, double a, double radius = 1.0);
  static Domain ball_union(std::vector<BallShape> balls);
  static Domain ball_intersection(std::vector<BallShape> balls);
  static Domain raster(const RasterSet& mask, double outer_radius = 0.0);
  /// Channel {(x, y) : x0 <= x <= x_n, |y| < l(x)/2} with piecewise-linear width.
  static Domain channel(const std::vector<double>& xs, const std::vector<double>& widths);

  const Shape& shape() const { return shape_; }
  std::string kind() const;
  int dim() const { return dim_; }

 private:
  Domain(Shape s, int dim) : shape_(std::move(s)), dim_(dim) {}
  Shape shape_;
  int dim_;
};

bool contains(const Domain& d, const Point& x);
/// Distance from x to the boundary: exact for analytic kinds, a lower bound
/// (within ~sqrt(dim) cells) for raster domains. Valid inside and outside.
double boundary_distance(const Domain& d, const Point& x);
/// True when boundary_distance is the exact Euclidean distance.
bool has_signed_distance(const Domain& d);
Point project_to_boundary(const Domain& d, const Point& x);
std::string boundary_label(const Domain& d, const Point& y);
std::vector<std::string> boundary_labels(const Domain& d);
std::pair<Point, Point> bounding_box(const Domain& d);
std::optional<double> analytic_volume(const Domain& d);
/// First parameter s in (0,1] at which the segment a->b crosses the boundary
/// (or passes within slit_eps of a zero-thickness slit), if any.
std::optional<double> segment_crossing(const Domain& d, const Point& a, const Point& b,
                                       double slit_eps);

Domain translated(const Domain& d, const Point& v);
Domain scaled(const Domain& d, double s);

/// Cells whose centers lie in d, on the given grid.
RasterSet rasterize(const Domain& d, const RasterSet& grid);
/// Rasterize on a grid covering the bounding box (default cell = diameter/512).
RasterSet rasterize(const Domain& d, double cell = 0.0);

Domain schwarz_ball(const RasterSet& a);
/// Equal-volume centered ball for analytic domains with known volume,
/// otherwise via a fine rasterization.
Domain schwarz_ball(const Domain& d);

/// Subset of the boundary selected for harmonic-measure work.
///   "all"                 entire boundary
///   "<label>"             a named boundary piece
///   "arc:θ1,θ2"           exit points with polar angle in [θ1, θ2] (radians, 2D)
///   "halfspace:k>=c"      exit points with x_k >= c  (also "k<=c")
class BoundarySet {
 public:
  static BoundarySet parse(const std::string& spec);
  bool matches(const Point& y, const std::string& label) const;
  /// Throws when a label-based set names a label the domain does not have.
  void validate(const Domain& d) const;
  const std::string& spec() const { return spec_; }

 private:
  enum class Kind { all, label, arc, halfspace_ge, halfspace_le } kind_ = Kind::all;
  std::string spec_, label_;
  double a_ = 0, b_ = 0;
  int axis_ = 0;
};

}  // namespace isop
