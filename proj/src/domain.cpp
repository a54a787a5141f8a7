#include "isop/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace isop {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

using RasterPtr = std::shared_ptr<const RasterField>;

void require_dim(const Point& x, int dim) {
  if (x.size() != dim) throw std::invalid_argument("point dimension does not match domain");
}

Eigen::Vector2d v2(const Point& p) { return {p(0), p(1)}; }

Point p2(const Eigen::Vector2d& v) {
  Point p(2);
  p << v(0), v(1);
  return p;
}

// Roots of |a + s(b-a) - c|^2 = r^2.
void sphere_roots(const Point& a, const Point& b, const Point& c, double r,
                  std::vector<double>& out) {
  const Point d = b - a, ac = a - c;
  const double A = d.squaredNorm();
  if (A <= 0) return;
  const double B = d.dot(ac), C = ac.squaredNorm() - r * r;
  const double disc = B * B - A * C;
  if (disc < 0) return;
  const double sq = std::sqrt(disc);
  // Numerically stable pair of roots.
  const double q = B >= 0 ? -(B + sq) : -(B - sq);
  if (q != 0) {
    out.push_back(q / A);
    out.push_back(C / q);
  } else {
    out.push_back(0.0);
  }
}

// First root after which membership differs from the start (membership only
// changes at the supplied roots).
std::optional<double> first_flip(const Domain& d, const Point& a, const Point& b,
                                 std::vector<double>& roots) {
  std::sort(roots.begin(), roots.end());
  const bool m0 = contains(d, a);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    const double s = roots[i];
    if (!(s > 0) || s > 1) continue;
    double next = 1.0;
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (roots[j] > s) {
        next = std::min(roots[j], 1.0);
        break;
      }
    const double mid = next > s ? 0.5 * (s + next) : 1.0;
    if (contains(d, a + mid * (b - a)) != m0) return s;
  }
  return std::nullopt;
}

double box_face_distance(const Point& lo, const Point& hi, const Point& x) {
  bool inside = true;
  double out2 = 0, in = std::numeric_limits<double>::infinity();
  for (int k = 0; k < x.size(); ++k) {
    if (x(k) < lo(k)) {
      inside = false;
      out2 += (lo(k) - x(k)) * (lo(k) - x(k));
    } else if (x(k) > hi(k)) {
      inside = false;
      out2 += (x(k) - hi(k)) * (x(k) - hi(k));
    } else {
      in = std::min({in, x(k) - lo(k), hi(k) - x(k)});
    }
  }
  return inside ? in : std::sqrt(out2);
}

bool polygon_contains(const std::vector<Eigen::Vector2d>& v, const Point& x) {
  bool in = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if ((v[i].y() > x(1)) != (v[j].y() > x(1))) {
      const double xc = v[j].x() + (x(1) - v[j].y()) * (v[i].x() - v[j].x()) / (v[i].y() - v[j].y());
      if (x(0) < xc) in = !in;
    }
  }
  return in;
}

std::pair<double, std::size_t> polygon_nearest_edge(const std::vector<Eigen::Vector2d>& v,
                                                    const Point& x) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double dist = segment_point_distance<double>(p2(v[i]), p2(v[(i + 1) % v.size()]), x);
    if (dist < best) {
      best = dist;
      arg = i;
    }
  }
  return {best, arg};
}

Point slit_end(const SlitDiskShape& s, std::size_t i, double r) {
  Point p(2);
  p << r * std::cos(s.angles[i]), r * std::sin(s.angles[i]);
  return p;
}

std::pair<double, std::size_t> nearest_slit(const SlitDiskShape& s, const Point& x) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < s.angles.size(); ++i) {
    const double dist = segment_point_distance<double>(slit_end(s, i, s.a), slit_end(s, i, s.radius), x);
    if (dist < best) {
      best = dist;
      arg = i;
    }
  }
  return {best, arg};
}

double raster_box_distance(const RasterSet& m, const Point& x) {
  return box_face_distance(m.origin(), m.upper(), x);
}

double raster_distance(const RasterField& f, const Point& x) {
  const RasterSet& m = f.mask;
  const double slack = std::sqrt(double(m.dim())) * m.cell();
  const double bd = raster_box_distance(m, x);
  const auto idx = m.locate(x);
  if (idx < 0) return bd;
  const auto i = static_cast<std::size_t>(idx);
  if (m.test(i)) return std::max(0.0, std::min(double(f.inner_dist[i]) - slack, bd));
  return std::max(0.0, double(f.outer_dist[i]) - slack);
}

// Boundary point between x and a point of opposite membership, by bisection.
Point raster_bisect(const RasterSet& m, Point in, Point out) {
  const bool m_in = m.contains(in);
  for (int it = 0; it < 48; ++it) {
    const Point mid = 0.5 * (in + out);
    if (m.contains(mid) == m_in) in = mid;
    else out = mid;
    if ((out - in).norm() < 1e-6 * m.cell()) break;
  }
  return out;
}

Point raster_project(const RasterField& f, const Point& x) {
  const RasterSet& m = f.mask;
  const auto idx = m.locate(x);
  const bool member = idx >= 0 && m.test(static_cast<std::size_t>(idx));
  Point target = x;
  bool found = false;
  if (idx >= 0) {
    const auto i = static_cast<std::size_t>(idx);
    const std::int32_t q = member ? f.inner_nearest[i] : f.outer_nearest[i];
    if (q >= 0) {
      target = m.center(static_cast<std::size_t>(q));
      found = true;
    }
  }
  if (member) {
    // Leaving through the grid box may be closer than any interior hole.
    const Point lo = m.origin(), hi = m.upper();
    const double cand = found ? (target - x).norm() : std::numeric_limits<double>::infinity();
    double best = cand;
    Point face = x;
    for (int k = 0; k < m.dim(); ++k) {
      for (double wall : {lo(k), hi(k)}) {
        const double dist = std::abs(x(k) - wall);
        if (dist < best) {
          best = dist;
          face = x;
          face(k) = wall + (wall == lo(k) ? -0.5 : 0.5) * m.cell();
        }
      }
    }
    if (best < cand) target = face;
  } else if (!found) {
    // Outside the grid or no member at all: aim at the nearest member center.
    double best = std::numeric_limits<double>::infinity();
    m.for_each_set([&](std::size_t i) {
      const double dist = (m.center(i) - x).norm();
      if (dist < best) {
        best = dist;
        target = m.center(i);
      }
    });
    if (!std::isfinite(best)) return x;
  }
  return raster_bisect(m, x, target);
}

std::optional<double> raster_crossing(const RasterField& f, const Point& a, const Point& b) {
  const RasterSet& m = f.mask;
  const double len = (b - a).norm();
  if (len <= 0) return std::nullopt;
  const bool m0 = m.contains(a);
  const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.25 * m.cell()))));
  double prev = 0;
  for (int i = 1; i <= steps; ++i) {
    const double s = double(i) / steps;
    if (m.contains(a + s * (b - a)) != m0) {
      double lo = prev, hi = s;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (m.contains(a + mid * (b - a)) == m0) lo = mid;
        else hi = mid;
      }
      return hi;
    }
    prev = s;
  }
  return std::nullopt;
}

RasterSet copy_to_grid(const RasterSet& src, const Point& origin, double cell) {
  RasterSet out(src.dim(), origin, cell, src.shape());
  src.for_each_set([&](std::size_t i) { out.set(i); });
  return out;
}

const char* kAxisNames[3] = {"x", "y", "z"};

}  // namespace

Domain Domain::ball(const Point& center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("ball radius must be > 0");
  return Domain(BallShape{center, radius}, static_cast<int>(center.size()));
}

Domain Domain::annulus(const Point& center, double inner, double outer) {
  if (!(inner > 0) || !(outer > inner))
    throw std::invalid_argument("annulus requires 0 < inner < outer");
  return Domain(AnnulusShape{center, inner, outer}, static_cast<int>(center.size()));
}

Domain Domain::box(const Point& lo, const Point& hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box corner dimension mismatch");
  for (int k = 0; k < lo.size(); ++k)
    if (!(hi(k) > lo(k))) throw std::invalid_argument("box requires lo < hi");
  return Domain(BoxShape{lo, hi}, static_cast<int>(lo.size()));
}

Domain Domain::polygon(std::vector<Eigen::Vector2d> vertices) {
  if (vertices.size() < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  return Domain(PolygonShape{std::move(vertices)}, 2);
}

Domain Domain::slit_disk(std::vector<double> angles, double a, double radius) {
  if (!(a > 0) || !(a < radius)) throw std::invalid_argument("slit disk requires 0 < a < radius");
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (angles[i] < 0 || angles[i] > kTwoPi)
      throw std::invalid_argument("slit angles must lie in [0, 2pi]");
    if (i > 0 && angles[i] < angles[i - 1])
      throw std::invalid_argument("slit angles must be nondecreasing");
  }
  return Domain(SlitDiskShape{std::move(angles), a, radius}, 2);
}

Domain Domain::ball_union(std::vector<BallShape> balls) {
  if (balls.empty()) throw std::invalid_argument("ball union needs at least one ball");
  const int dim = static_cast<int>(balls.front().center.size());
  for (const auto& b : balls)
    if (!(b.radius > 0) || b.center.size() != dim)
      throw std::invalid_argument("invalid ball in union");
  return Domain(BallUnionShape{std::move(balls)}, dim);
}

Domain Domain::ball_intersection(std::vector<BallShape> balls) {
  if (balls.empty()) throw std::invalid_argument("ball intersection needs at least one ball");
  const int dim = static_cast<int>(balls.front().center.size());
  for (const auto& b : balls)
    if (!(b.radius > 0) || b.center.size() != dim)
      throw std::invalid_argument("invalid ball in intersection");
  for (std::size_t i = 0; i < balls.size(); ++i)
    for (std::size_t j = i + 1; j < balls.size(); ++j)
      if ((balls[i].center - balls[j].center).norm() >= balls[i].radius + balls[j].radius)
        throw std::invalid_argument("ball intersection is empty");
  return Domain(BallIntersectionShape{std::move(balls)}, dim);
}

Domain Domain::raster(const RasterSet& mask, double outer_radius) {
  if (mask.empty()) throw std::invalid_argument("raster domain needs a nonempty mask");
  if (mask.size() > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max()))
    throw std::invalid_argument("raster domain grid too large");
  auto f = std::make_shared<RasterField>(RasterField{mask, {}, {}, {}, {}, outer_radius});
  RasterSet complement = mask.empty_like();
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask.test(i)) complement.set(i);
  std::vector<std::int64_t> near_in, near_out;
  const auto din = squared_distance_field(complement, &near_in);
  const auto dout = squared_distance_field(mask, &near_out);
  const std::size_t n = mask.size();
  f->inner_dist.resize(n);
  f->outer_dist.resize(n);
  f->inner_nearest.resize(n);
  f->outer_nearest.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f->inner_dist[i] = static_cast<float>(std::sqrt(din[i]));
    f->outer_dist[i] = static_cast<float>(std::sqrt(dout[i]));
    f->inner_nearest[i] = static_cast<std::int32_t>(near_in[i]);
    f->outer_nearest[i] = static_cast<std::int32_t>(near_out[i]);
  }
  return Domain(RasterPtr(std::move(f)), mask.dim());
}

Domain Domain::channel(const std::vector<double>& xs, const std::vector<double>& widths) {
  if (xs.size() < 2 || xs.size() != widths.size())
    throw std::invalid_argument("channel needs matching abscissae and widths (>= 2)");
  std::vector<Eigen::Vector2d> v;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(widths[i] > 0)) throw std::invalid_argument("channel widths must be > 0");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw std::invalid_argument("channel abscissae must increase");
    v.emplace_back(xs[i], -0.5 * widths[i]);
  }
  for (std::size_t i = xs.size(); i-- > 0;) v.emplace_back(xs[i], 0.5 * widths[i]);
  return polygon(std::move(v));
}

std::string Domain::kind() const {
  return std::visit(overloaded{[](const BallShape&) { return "ball"; },
                               [](const AnnulusShape&) { return "annulus"; },
                               [](const BoxShape&) { return "rectangle"; },
                               [](const PolygonShape&) { return "polygon-2d"; },
                               [](const SlitDiskShape&) { return "slit-disk"; },
                               [](const BallUnionShape&) { return "ball-union"; },
                               [](const BallIntersectionShape&) { return "ball-intersection"; },
                               [](const RasterPtr&) { return "raster"; }},
                    shape_);
}

bool contains(const Domain& d, const Point& x) {
  require_dim(x, d.dim());
  return std::visit(
      overloaded{
          [&](const BallShape& s) { return (x - s.center).squaredNorm() < s.radius * s.radius; },
          [&](const AnnulusShape& s) {
            const double r2 = (x - s.center).squaredNorm();
            return r2 > s.inner * s.inner && r2 < s.outer * s.outer;
          },
          [&](const BoxShape& s) {
            for (int k = 0; k < x.size(); ++k)
              if (!(x(k) > s.lo(k) && x(k) < s.hi(k))) return false;
            return true;
          },
          [&](const PolygonShape& s) { return polygon_contains(s.vertices, x); },
          [&](const SlitDiskShape& s) {
            // Slits have zero thickness and are invisible to point membership.
            return x.squaredNorm() < s.radius * s.radius;
          },
          [&](const BallUnionShape& s) {
            for (const auto& b : s.balls)
              if ((x - b.center).squaredNorm() < b.radius * b.radius) return true;
            return false;
          },
          [&](const BallIntersectionShape& s) {
            for (const auto& b : s.balls)
              if (!((x - b.center).squaredNorm() < b.radius * b.radius)) return false;
            return true;
          },
          [&](const RasterPtr& f) { return f->mask.contains(x); }},
      d.shape());
}

double boundary_distance(const Domain& d, const Point& x) {
  require_dim(x, d.dim());
  return std::visit(
      overloaded{
          [&](const BallShape& s) { return std::abs((x - s.center).norm() - s.radius); },
          [&](const AnnulusShape& s) {
            const double r = (x - s.center).norm();
            return std::min(std::abs(r - s.inner), std::abs(r - s.outer));
          },
          [&](const BoxShape& s) { return box_face_distance(s.lo, s.hi, x); },
          [&](const PolygonShape& s) { return polygon_nearest_edge(s.vertices, x).first; },
          [&](const SlitDiskShape& s) {
            return std::min(std::abs(s.radius - x.norm()), nearest_slit(s, x).first);
          },
          [&](const BallUnionShape& s) {
            // Inside: deepest containing ball. Outside: nearest ball.
            double inside = 0, outside = std::numeric_limits<double>::infinity();
            for (const auto& b : s.balls) {
              const double g = (x - b.center).norm() - b.radius;
              if (g < 0) inside = std::max(inside, -g);
              else outside = std::min(outside, g);
            }
            return inside > 0 ? inside : outside;
          },
          [&](const BallIntersectionShape& s) {
            double inside = std::numeric_limits<double>::infinity(), outside = 0;
            bool in = true;
            for (const auto& b : s.balls) {
              const double g = (x - b.center).norm() - b.radius;
              if (g >= 0) in = false;
              inside = std::min(inside, -g);
              outside = std::max(outside, g);
            }
            return in ? inside : outside;
          },
          [&](const RasterPtr& f) { return raster_distance(*f, x); }},
      d.shape());
}

bool has_signed_distance(const Domain& d) {
  return !std::holds_alternative<RasterPtr>(d.shape());
}

Point project_to_boundary(const Domain& d, const Point& x) {
  require_dim(x, d.dim());
  auto onto_sphere = [](const Point& c, double r, const Point& y) {
    Point v = y - c;
    const double n = v.norm();
    if (n == 0) {
      v = Point::Zero(y.size());
      v(0) = 1;
      return Point(c + r * v);
    }
    return Point(c + (r / n) * v);
  };
  return std::visit(
      overloaded{
          [&](const BallShape& s) { return onto_sphere(s.center, s.radius, x); },
          [&](const AnnulusShape& s) {
            const double r = (x - s.center).norm();
            return std::abs(r - s.inner) < std::abs(r - s.outer) ? onto_sphere(s.center, s.inner, x)
                                                                  : onto_sphere(s.center, s.outer, x);
          },
          [&](const BoxShape& s) {
            Point y = x;
            bool inside = true;
            for (int k = 0; k < x.size(); ++k) {
              if (x(k) < s.lo(k) || x(k) > s.hi(k)) inside = false;
              y(k) = std::clamp(x(k), s.lo(k), s.hi(k));
            }
            if (!inside) return y;
            int best_k = 0;
            double best = std::numeric_limits<double>::infinity(), wall = 0;
            for (int k = 0; k < x.size(); ++k) {
              if (x(k) - s.lo(k) < best) { best = x(k) - s.lo(k); best_k = k; wall = s.lo(k); }
              if (s.hi(k) - x(k) < best) { best = s.hi(k) - x(k); best_k = k; wall = s.hi(k); }
            }
            y(best_k) = wall;
            return y;
          },
          [&](const PolygonShape& s) {
            const auto [dist, i] = polygon_nearest_edge(s.vertices, x);
            const Point a = p2(s.vertices[i]), b = p2(s.vertices[(i + 1) % s.vertices.size()]);
            return Point(a + closest_param<double>(a, b, x) * (b - a));
          },
          [&](const SlitDiskShape& s) {
            const auto [dist, i] = nearest_slit(s, x);
            if (std::abs(s.radius - x.norm()) <= dist) return onto_sphere(Point::Zero(2), s.radius, x);
            const Point a = slit_end(s, i, s.a), b = slit_end(s, i, s.radius);
            return Point(a + closest_param<double>(a, b, x) * (b - a));
          },
          [&](const BallUnionShape& s) {
            Point best_p = x;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& b : s.balls) {
              const Point p = onto_sphere(b.center, b.radius, x);
              bool covered = false;
              for (const auto& o : s.balls)
                if (&o != &b && (p - o.center).norm() < o.radius * (1 - 1e-12)) covered = true;
              const double dist = (p - x).norm();
              if (!covered && dist < best) { best = dist; best_p = p; }
            }
            return best_p;
          },
          [&](const BallIntersectionShape& s) {
            Point best_p = x;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& b : s.balls) {
              const Point p = onto_sphere(b.center, b.radius, x);
              bool inside_all = true;
              for (const auto& o : s.balls)
                if (&o != &b && (p - o.center).norm() > o.radius * (1 + 1e-12)) inside_all = false;
              const double dist = (p - x).norm();
              if (inside_all && dist < best) { best = dist; best_p = p; }
            }
            return best_p;
          },
          [&](const RasterPtr& f) { return raster_project(*f, x); }},
      d.shape());
}

std::string boundary_label(const Domain& d, const Point& y) {
  return std::visit(
      overloaded{
          [&](const BallShape&) { return std::string("sphere"); },
          [&](const AnnulusShape& s) {
            const double r = (y - s.center).norm();
            return std::string(std::abs(r - s.inner) < std::abs(r - s.outer) ? "inner" : "outer");
          },
          [&](const BoxShape& s) {
            int best_k = 0;
            bool upper = false;
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < y.size(); ++k) {
              if (std::abs(y(k) - s.lo(k)) < best) { best = std::abs(y(k) - s.lo(k)); best_k = k; upper = false; }
              if (std::abs(y(k) - s.hi(k)) < best) { best = std::abs(y(k) - s.hi(k)); best_k = k; upper = true; }
            }
            return std::string(kAxisNames[best_k]) + (upper ? "+" : "-");
          },
          [&](const PolygonShape& s) {
            return "edge" + std::to_string(polygon_nearest_edge(s.vertices, y).second);
          },
          [&](const SlitDiskShape& s) {
            return std::string(std::abs(s.radius - y.norm()) <= nearest_slit(s, y).first ? "outer" : "slits");
          },
          [&](const BallUnionShape&) { return std::string("boundary"); },
          [&](const BallIntersectionShape&) { return std::string("boundary"); },
          [&](const RasterPtr& f) {
            return std::string(f->outer_radius > 0 && y.norm() >= f->outer_radius - 1.5 * f->mask.cell()
                                   ? "outer"
                                   : "boundary");
          }},
      d.shape());
}

std::vector<std::string> boundary_labels(const Domain& d) {
  return std::visit(
      overloaded{[&](const BallShape&) { return std::vector<std::string>{"sphere"}; },
                 [&](const AnnulusShape&) { return std::vector<std::string>{"inner", "outer"}; },
                 [&](const BoxShape&) {
                   std::vector<std::string> v;
                   for (int k = 0; k < d.dim(); ++k) {
                     v.push_back(std::string(kAxisNames[k]) + "-");
                     v.push_back(std::string(kAxisNames[k]) + "+");
                   }
                   return v;
                 },
                 [&](const PolygonShape& s) {
                   std::vector<std::string> v;
                   for (std::size_t i = 0; i < s.vertices.size(); ++i) v.push_back("edge" + std::to_string(i));
                   return v;
                 },
                 [&](const SlitDiskShape&) { return std::vector<std::string>{"slits", "outer"}; },
                 [&](const BallUnionShape&) { return std::vector<std::string>{"boundary"}; },
                 [&](const BallIntersectionShape&) { return std::vector<std::string>{"boundary"}; },
                 [&](const RasterPtr&) { return std::vector<std::string>{"outer", "boundary"}; }},
      d.shape());
}

std::pair<Point, Point> bounding_box(const Domain& d) {
  auto ball_box = [](const Point& c, double r) {
    return std::pair<Point, Point>(c.array() - r, c.array() + r);
  };
  auto balls_box = [&](const std::vector<BallShape>& balls, bool intersect) {
    auto box = ball_box(balls.front().center, balls.front().radius);
    for (const auto& b : balls) {
      auto bb = ball_box(b.center, b.radius);
      if (intersect) {
        box.first = box.first.cwiseMax(bb.first);
        box.second = box.second.cwiseMin(bb.second);
      } else {
        box.first = box.first.cwiseMin(bb.first);
        box.second = box.second.cwiseMax(bb.second);
      }
    }
    return box;
  };
  return std::visit(
      overloaded{
          [&](const BallShape& s) { return ball_box(s.center, s.radius); },
          [&](const AnnulusShape& s) { return ball_box(s.center, s.outer); },
          [&](const BoxShape& s) { return std::pair<Point, Point>(s.lo, s.hi); },
          [&](const PolygonShape& s) {
            Eigen::Vector2d lo = s.vertices.front(), hi = lo;
            for (const auto& v : s.vertices) {
              lo = lo.cwiseMin(v);
              hi = hi.cwiseMax(v);
            }
            return std::pair<Point, Point>(p2(lo), p2(hi));
          },
          [&](const SlitDiskShape& s) { return ball_box(Point::Zero(2), s.radius); },
          [&](const BallUnionShape& s) { return balls_box(s.balls, false); },
          [&](const BallIntersectionShape& s) { return balls_box(s.balls, true); },
          [&](const RasterPtr& f) { return std::pair<Point, Point>(f->mask.origin(), f->mask.upper()); }},
      d.shape());
}

std::optional<double> analytic_volume(const Domain& d) {
  return std::visit(
      overloaded{
          [&](const BallShape& s) -> std::optional<double> { return ball_volume(d.dim(), s.radius); },
          [&](const AnnulusShape& s) -> std::optional<double> {
            return ball_volume(d.dim(), s.outer) - ball_volume(d.dim(), s.inner);
          },
          [&](const BoxShape& s) -> std::optional<double> { return (s.hi - s.lo).prod(); },
          [&](const PolygonShape& s) -> std::optional<double> {
            double a = 0;
            for (std::size_t i = 0; i < s.vertices.size(); ++i) {
              const auto& p = s.vertices[i];
              const auto& q = s.vertices[(i + 1) % s.vertices.size()];
              a += p.x() * q.y() - q.x() * p.y();
            }
            return std::abs(a) / 2;
          },
          [&](const SlitDiskShape& s) -> std::optional<double> { return ball_volume(2, s.radius); },
          [&](const BallUnionShape& s) -> std::optional<double> {
            if (s.balls.size() == 1) return ball_volume(d.dim(), s.balls[0].radius);
            return std::nullopt;
          },
          [&](const BallIntersectionShape& s) -> std::optional<double> {
            if (s.balls.size() == 1) return ball_volume(d.dim(), s.balls[0].radius);
            return std::nullopt;
          },
          [&](const RasterPtr& f) -> std::optional<double> { return volume(f->mask); }},
      d.shape());
}

std::optional<double> segment_crossing(const Domain& d, const Point& a, const Point& b,
                                       double slit_eps) {
  const double len = (b - a).norm();
  if (len <= 0) return std::nullopt;
  // A segment shorter than the clearance around its start cannot reach the boundary.
  if (boundary_distance(d, a) > len + slit_eps) return std::nullopt;
  std::vector<double> roots;
  return std::visit(
      overloaded{
          [&](const BallShape& s) {
            sphere_roots(a, b, s.center, s.radius, roots);
            return first_flip(d, a, b, roots);
          },
          [&](const AnnulusShape& s) {
            sphere_roots(a, b, s.center, s.inner, roots);
            sphere_roots(a, b, s.center, s.outer, roots);
            return first_flip(d, a, b, roots);
          },
          [&](const BoxShape& s) {
            for (int k = 0; k < a.size(); ++k) {
              const double dk = b(k) - a(k);
              if (dk == 0) continue;
              roots.push_back((s.lo(k) - a(k)) / dk);
              roots.push_back((s.hi(k) - a(k)) / dk);
            }
            return first_flip(d, a, b, roots);
          },
          [&](const PolygonShape& s) {
            const Eigen::Vector2d pa = v2(a), r = v2(b) - pa;
            for (std::size_t i = 0; i < s.vertices.size(); ++i) {
              const Eigen::Vector2d q = s.vertices[i];
              const Eigen::Vector2d e = s.vertices[(i + 1) % s.vertices.size()] - q;
              const double den = r.x() * e.y() - r.y() * e.x();
              if (den == 0) continue;
              const Eigen::Vector2d w = q - pa;
              const double t = (w.x() * e.y() - w.y() * e.x()) / den;
              const double u = (w.x() * r.y() - w.y() * r.x()) / den;
              if (u >= 0 && u <= 1) roots.push_back(t);
            }
            return first_flip(d, a, b, roots);
          },
          [&](const SlitDiskShape& s) -> std::optional<double> {
            std::optional<double> best;
            if (b.norm() >= s.radius || a.norm() >= s.radius) {
              sphere_roots(a, b, Point::Zero(2), s.radius, roots);
              best = first_flip(d, a, b, roots);
            }
            for (std::size_t i = 0; i < s.angles.size(); ++i) {
              const auto ap = segment_segment_approach(a, b, slit_end(s, i, s.a), slit_end(s, i, s.radius));
              if (ap.distance <= slit_eps || ap.distance <= 1e-15) {
                const double sp = std::max(ap.s, 1e-300);
                if (!best || sp < *best) best = sp;
              }
            }
            return best;
          },
          [&](const BallUnionShape& s) {
            for (const auto& ball : s.balls) sphere_roots(a, b, ball.center, ball.radius, roots);
            return first_flip(d, a, b, roots);
          },
          [&](const BallIntersectionShape& s) {
            for (const auto& ball : s.balls) sphere_roots(a, b, ball.center, ball.radius, roots);
            return first_flip(d, a, b, roots);
          },
          [&](const RasterPtr& f) { return raster_crossing(*f, a, b); }},
      d.shape());
}

Domain translated(const Domain& d, const Point& v) {
  require_dim(v, d.dim());
  return std::visit(
      overloaded{
          [&](const BallShape& s) { return Domain::ball(s.center + v, s.radius); },
          [&](const AnnulusShape& s) { return Domain::annulus(s.center + v, s.inner, s.outer); },
          [&](const BoxShape& s) { return Domain::box(s.lo + v, s.hi + v); },
          [&](const PolygonShape& s) {
            auto vs = s.vertices;
            for (auto& p : vs) p += v2(v);
            return Domain::polygon(vs);
          },
          [&](const SlitDiskShape&) -> Domain {
            throw std::invalid_argument("slit disks are centered at the origin");
          },
          [&](const BallUnionShape& s) {
            auto bs = s.balls;
            for (auto& b : bs) b.center += v;
            return Domain::ball_union(bs);
          },
          [&](const BallIntersectionShape& s) {
            auto bs = s.balls;
            for (auto& b : bs) b.center += v;
            return Domain::ball_intersection(bs);
          },
          [&](const RasterPtr& f) {
            return Domain::raster(copy_to_grid(f->mask, f->mask.origin() + v, f->mask.cell()), f->outer_radius);
          }},
      d.shape());
}

Domain scaled(const Domain& d, double k) {
  if (!(k > 0)) throw std::invalid_argument("scale factor must be > 0");
  return std::visit(
      overloaded{
          [&](const BallShape& s) { return Domain::ball(k * s.center, k * s.radius); },
          [&](const AnnulusShape& s) { return Domain::annulus(k * s.center, k * s.inner, k * s.outer); },
          [&](const BoxShape& s) { return Domain::box(k * s.lo, k * s.hi); },
          [&](const PolygonShape& s) {
            auto vs = s.vertices;
            for (auto& p : vs) p *= k;
            return Domain::polygon(vs);
          },
          [&](const SlitDiskShape& s) { return Domain::slit_disk(s.angles, k * s.a, k * s.radius); },
          [&](const BallUnionShape& s) {
            auto bs = s.balls;
            for (auto& b : bs) { b.center *= k; b.radius *= k; }
            return Domain::ball_union(bs);
          },
          [&](const BallIntersectionShape& s) {
            auto bs = s.balls;
            for (auto& b : bs) { b.center *= k; b.radius *= k; }
            return Domain::ball_intersection(bs);
          },
          [&](const RasterPtr& f) {
            return Domain::raster(copy_to_grid(f->mask, k * f->mask.origin(), k * f->mask.cell()),
                                  k * f->outer_radius);
          }},
      d.shape());
}

RasterSet rasterize(const Domain& d, const RasterSet& grid) {
  if (grid.dim() != d.dim()) throw std::invalid_argument("grid dimension does not match domain");
  RasterSet out = grid.empty_like();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (contains(d, out.center(i))) out.set(i);
  return out;
}

RasterSet rasterize(const Domain& d, double cell) {
  const auto [lo, hi] = bounding_box(d);
  if (cell <= 0) cell = (hi - lo).norm() / 512.0;
  // One spare cell on each side keeps boundary cells inside the grid.
  return rasterize(d, grid_covering(lo.array() - cell, hi.array() + cell, cell));
}

Domain schwarz_ball(const RasterSet& a) {
  if (a.empty()) throw std::invalid_argument("Schwarz symmetrization of an empty set");
  return Domain::ball(Point::Zero(a.dim()), ball_radius_for_volume(a.dim(), volume(a)));
}

Domain schwarz_ball(const Domain& d) {
  if (auto v = analytic_volume(d)) return Domain::ball(Point::Zero(d.dim()), ball_radius_for_volume(d.dim(), *v));
  const auto [lo, hi] = bounding_box(d);
  const double cell = (hi - lo).norm() / (d.dim() == 2 ? 1024.0 : 160.0);
  return schwarz_ball(rasterize(d, cell));
}

BoundarySet BoundarySet::parse(const std::string& spec) {
  BoundarySet b;
  b.spec_ = spec;
  if (spec == "all") {
    b.kind_ = Kind::all;
  } else if (spec.rfind("arc:", 0) == 0) {
    b.kind_ = Kind::arc;
    char comma = 0;
    std::istringstream in(spec.substr(4));
    if (!(in >> b.a_ >> comma >> b.b_) || comma != ',' || !(b.b_ >= b.a_))
      throw std::invalid_argument("bad arc spec '" + spec + "' (want arc:θ1,θ2 with θ1 <= θ2)");
  } else if (spec.rfind("halfspace:", 0) == 0) {
    const std::string body = spec.substr(10);
    const auto ge = body.find(">="), le = body.find("<=");
    const auto pos = ge != std::string::npos ? ge : le;
    if (pos == std::string::npos) throw std::invalid_argument("bad halfspace spec '" + spec + "'");
    b.kind_ = ge != std::string::npos ? Kind::halfspace_ge : Kind::halfspace_le;
    try {
      b.axis_ = std::stoi(body.substr(0, pos));
      b.a_ = std::stod(body.substr(pos + 2));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad halfspace spec '" + spec + "'");
    }
  } else {
    b.kind_ = Kind::label;
    b.label_ = spec;
  }
  return b;
}

bool BoundarySet::matches(const Point& y, const std::string& label) const {
  switch (kind_) {
    case Kind::all: return true;
    case Kind::label: return label == label_;
    case Kind::arc: {
      double t = std::fmod(std::atan2(y(1), y(0)) - a_, kTwoPi);
      if (t < 0) t += kTwoPi;
      return t <= b_ - a_;
    }
    case Kind::halfspace_ge: return y(axis_) >= a_;
    case Kind::halfspace_le: return y(axis_) <= a_;
  }
  return false;
}

void BoundarySet::validate(const Domain& d) const {
  if (kind_ == Kind::label) {
    const auto labels = boundary_labels(d);
    if (std::find(labels.begin(), labels.end(), label_) == labels.end())
      throw std::invalid_argument("unknown boundary label '" + label_ + "' for " + d.kind());
  }
  if ((kind_ == Kind::halfspace_ge || kind_ == Kind::halfspace_le) && (axis_ < 0 || axis_ >= d.dim()))
    throw std::invalid_argument("halfspace axis out of range");
  if (kind_ == Kind::arc && d.dim() != 2) throw std::invalid_argument("arcs need a 2D domain");
}

}  // namespace isop
