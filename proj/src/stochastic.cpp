#include "isop/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace isop {

void SimConfig::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  if (!(max_time > 0)) throw std::invalid_argument("max_time must be > 0");
  if (dt > max_time) throw std::invalid_argument("dt must not exceed max_time");
  if (!(eps_shell > 0)) throw std::invalid_argument("eps_shell must be > 0");
  if (slit_eps < 0) throw std::invalid_argument("slit_eps must be >= 0");
  if (adaptive < 0) throw std::invalid_argument("adaptive must be >= 0");
}

void StableParams::validate() const {
  if (!(alpha > 0 && alpha <= 2)) throw std::invalid_argument("alpha must lie in (0, 2]");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("stable dim must be 1..3");
}

Process Process::stable_process(double alpha) {
  StableParams{alpha, 1}.validate();
  return {true, alpha};
}

Point bm_step(const Point& x, double dt, Rng& rng) {
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  Normal nd;
  const double s = std::sqrt(dt);
  Point y = x;
  for (int k = 0; k < y.size(); ++k) y(k) += s * nd(rng);
  return y;
}

double positive_stable(double a, Rng& rng) {
  // Always consume two uniforms so stream alignment does not depend on a.
  const double u = std::numbers::pi * (1.0 - rng.uniform());  // (0, π]
  const double e = -std::log(1.0 - rng.uniform());            // Exp(1)
  if (a == 1.0) return 1.0;
  const double su = std::sin(u);
  return std::sin(a * u) / std::pow(su, 1.0 / a) * std::pow(std::sin((1.0 - a) * u) / e, (1.0 - a) / a);
}

Point stable_step(const Point& x, double dt, const StableParams& p, Rng& rng) {
  p.validate();
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  const double a = p.alpha / 2;
  const double s = positive_stable(a, rng) * std::pow(dt, 1.0 / a);
  const double scale = std::sqrt(2 * s);
  Normal nd;
  Point y = x;
  for (int k = 0; k < y.size(); ++k) y(k) += scale * nd(rng);
  return y;
}

namespace {

StoppedPath run_until_boundary(const Domain& d, bool complement, const Point& x0,
                               const SimConfig& cfg, Rng& rng, const Process& proc,
                               const PathObserver* observer) {
  cfg.validate();
  if (x0.size() != d.dim()) throw std::invalid_argument("point dimension does not match domain");
  const bool start_in = contains(d, x0) != complement;
  if (!start_in)
    throw std::invalid_argument(complement ? "start point must lie outside the target set"
                                           : "start point must lie inside the domain");
  const bool gaussian = proc.gaussian();
  const bool bridge = gaussian && has_signed_distance(d);
  const bool adaptive = gaussian && cfg.adaptive > 0;
  const double vf = proc.variance_factor();
  const double half_alpha = proc.alpha / 2;
  const int dim = d.dim();

  Normal nd;
  Point x = x0, y(dim);
  double t = 0;
  if (observer) (*observer)(t, x);
  while (t < cfg.max_time) {
    const double d1 = (bridge || adaptive) ? boundary_distance(d, x) : 0.0;
    double h = cfg.dt;
    if (adaptive) h = std::max(h, cfg.adaptive * d1 * d1 / vf);
    const bool last = h >= cfg.max_time - t;
    if (last) h = cfg.max_time - t;

    double var;
    if (gaussian) {
      var = vf * h;
    } else {
      var = 2 * positive_stable(half_alpha, rng) * std::pow(h, 1.0 / half_alpha);
    }
    const double sd = std::sqrt(var);
    for (int k = 0; k < dim; ++k) y(k) = x(k) + sd * nd(rng);
    const double u = rng.uniform();

    if (auto s = segment_crossing(d, x, y, cfg.slit_eps)) {
      StoppedPath p;
      p.exit_point = x + *s * (y - x);
      p.exit_time = gaussian ? t + *s * h : t + h;
      p.boundary_label = boundary_label(d, p.exit_point);
      if (observer) (*observer)(p.exit_time, p.exit_point);
      return p;
    }
    if (bridge) {
      // Brownian-bridge crossing between two interior samples, using the
      // tangent-plane approximation of the boundary.
      const double d2 = boundary_distance(d, y);
      if (u < std::exp(-2 * d1 * d2 / var)) {
        StoppedPath p;
        p.exit_point = project_to_boundary(d, d1 <= d2 ? x : y);
        p.exit_time = t + (d1 + d2 > 0 ? h * d1 / (d1 + d2) : 0.0);
        p.boundary_label = boundary_label(d, p.exit_point);
        if (observer) (*observer)(p.exit_time, p.exit_point);
        return p;
      }
    }
    x = y;
    t = last ? cfg.max_time : t + h;
    if (observer) (*observer)(t, x);
  }
  StoppedPath p;
  p.exit_time = cfg.max_time;
  p.exit_point = x;
  p.truncated = true;
  return p;
}

}  // namespace

StoppedPath sample_exit(const Domain& d, const Point& x, const SimConfig& cfg, Rng& rng,
                        const Process& proc, const PathObserver* observer) {
  return run_until_boundary(d, false, x, cfg, rng, proc, observer);
}

StoppedPath sample_hit(const Domain& a, const Point& x, const SimConfig& cfg, Rng& rng,
                       const Process& proc, const PathObserver* observer) {
  return run_until_boundary(a, true, x, cfg, rng, proc, observer);
}

BoundaryHit walk_on_spheres(const Domain& d, const Point& x0, const SimConfig& cfg, Rng& rng) {
  if (!has_signed_distance(d))
    throw std::invalid_argument("walk-on-spheres needs a domain with a signed distance");
  if (!(cfg.eps_shell > 0)) throw std::invalid_argument("eps_shell must be > 0");
  if (!contains(d, x0)) throw std::invalid_argument("start point must lie inside the domain");
  const int dim = d.dim();
  Normal nd;
  Point x = x0, dir(dim);
  BoundaryHit hit;
  while (hit.steps < cfg.max_wos_steps) {
    const double r = boundary_distance(d, x);
    if (r < cfg.eps_shell) {
      hit.point = project_to_boundary(d, x);
      hit.label = boundary_label(d, hit.point);
      return hit;
    }
    double n2 = 0;
    do {
      for (int k = 0; k < dim; ++k) dir(k) = nd(rng);
      n2 = dir.squaredNorm();
    } while (n2 == 0);
    x += (r / std::sqrt(n2)) * dir;
    ++hit.steps;
  }
  hit.point = x;
  hit.truncated = true;
  return hit;
}

std::vector<Point> sample_path(const Point& x, double t, double dt, Rng& rng) {
  if (!(dt > 0) || t < 0) throw std::invalid_argument("sample_path needs dt > 0 and t >= 0");
  const auto steps = static_cast<std::size_t>(std::llround(t / dt));
  std::vector<Point> path;
  path.reserve(steps + 1);
  path.push_back(x);
  Normal nd;
  const double s = std::sqrt(dt);
  for (std::size_t i = 0; i < steps; ++i) {
    Point y = path.back();
    for (int k = 0; k < y.size(); ++k) y(k) += s * nd(rng);
    path.push_back(std::move(y));
  }
  return path;
}

ShapeFamily ShapeFamily::constant(const Domain& shape) { return {{0.0}, {shape}}; }

const Domain& ShapeFamily::at(double t) const {
  if (shapes.empty() || shapes.size() != times.size())
    throw std::invalid_argument("shape family needs one start time per shape");
  std::size_t i = 0;
  while (i + 1 < times.size() && times[i + 1] <= t) ++i;
  return shapes[i];
}

namespace {

struct CellRange {
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
};

CellRange cells_in_box(const RasterSet& grid, const Point& lo, const Point& hi) {
  CellRange r;
  for (int k = 0; k < grid.dim(); ++k) {
    const double a = (lo(k) - grid.origin()(k)) / grid.cell() - 0.5;
    const double b = (hi(k) - grid.origin()(k)) / grid.cell() - 0.5;
    r.lo[k] = static_cast<int>(std::ceil(a));
    r.hi[k] = static_cast<int>(std::floor(b));
    if (lo(k) < grid.origin()(k) || hi(k) > grid.origin()(k) + grid.shape()[k] * grid.cell())
      throw std::invalid_argument("sausage leaves the sampling grid; enlarge the box");
    r.lo[k] = std::max(r.lo[k], 0);
    r.hi[k] = std::min(r.hi[k], grid.shape()[k] - 1);
  }
  return r;
}

template <typename F>
void for_cells(const RasterSet& grid, const CellRange& r, F&& f) {
  for (int k = r.lo[2]; k <= r.hi[2]; ++k)
    for (int j = r.lo[1]; j <= r.hi[1]; ++j)
      for (int i = r.lo[0]; i <= r.hi[0]; ++i) f(grid.index({i, j, k}));
}

void mark_capsule(RasterSet& mask, const Point& a, const Point& b, double r) {
  const Point lo = a.cwiseMin(b).array() - r, hi = a.cwiseMax(b).array() + r;
  const CellRange range = cells_in_box(mask, lo, hi);
  const Point ab = b - a;
  const double len2 = ab.squaredNorm(), r2 = r * r;
  for_cells(mask, range, [&](std::size_t idx) {
    if (mask.test(idx)) return;
    const Point c = mask.center(idx);
    const Point ac = c - a;
    double s = len2 > 0 ? ac.dot(ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    if ((ac - s * ab).squaredNorm() <= r2) mask.set(idx);
  });
}

void mark_shape(RasterSet& mask, const Point& p, const Domain& shape) {
  const auto [slo, shi] = bounding_box(shape);
  const CellRange range = cells_in_box(mask, slo + p, shi + p);
  for_cells(mask, range, [&](std::size_t idx) {
    if (!mask.test(idx) && contains(shape, mask.center(idx) - p)) mask.set(idx);
  });
}

const BallShape* centered_ball(const Domain& d) {
  const auto* b = std::get_if<BallShape>(&d.shape());
  return b && b->center.isZero() ? b : nullptr;
}

}  // namespace

double sausage_volume(const std::vector<Point>& path, double dt, const ShapeFamily& shapes,
                      const RasterSet& grid) {
  if (path.empty()) throw std::invalid_argument("empty path");
  RasterSet mask = grid.empty_like();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double t = static_cast<double>(i) * dt;
    const Domain& shape = shapes.at(t);
    if (shape.dim() != grid.dim()) throw std::invalid_argument("shape dimension does not match grid");
    if (const BallShape* b = centered_ball(shape)) {
      const Point& next = i + 1 < path.size() ? path[i + 1] : path[i];
      // Ball families that change radius mid-segment use the smaller radius.
      const double r = i + 1 < path.size() && centered_ball(shapes.at(t + dt))
                           ? std::min(b->radius, centered_ball(shapes.at(t + dt))->radius)
                           : b->radius;
      mark_capsule(mask, path[i], next, r);
      if (r < b->radius) mark_capsule(mask, path[i], path[i], b->radius);
      continue;
    }
    mark_shape(mask, path[i], shape);
    if (i + 1 < path.size()) {
      const double len = (path[i + 1] - path[i]).norm();
      const int sub = static_cast<int>(std::ceil(len / (0.5 * grid.cell())));
      for (int s = 1; s < sub; ++s)
        mark_shape(mask, path[i] + (double(s) / sub) * (path[i + 1] - path[i]), shape);
    }
  }
  return volume(mask);
}

double sausage_volume(const std::vector<Point>& path, double r, const RasterSet& grid) {
  if (r < 0) throw std::invalid_argument("sausage radius must be >= 0");
  if (r == 0) return 0.0;
  return sausage_volume(path, 1.0, ShapeFamily::constant(Domain::ball(Point::Zero(grid.dim()), r)), grid);
}

}  // namespace isop
