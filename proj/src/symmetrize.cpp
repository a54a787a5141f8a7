#include "isop/symmetrize.hpp"

#include <numbers>
#include <random>

namespace isop {

SampledFunction1D SampledFunction1D::on_interval(double a, std::vector<double> values) {
  if (!(a > 0) || values.empty()) throw std::invalid_argument("need a > 0 and at least one sample");
  SampledFunction1D g;
  const double h = 2 * a / static_cast<double>(values.size());
  g.x.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) g.x[i] = -a + (static_cast<double>(i) + 0.5) * h;
  g.values = std::move(values);
  return g;
}

double SampledFunction1D::spacing() const {
  if (x.size() < 2) throw std::invalid_argument("spacing needs at least two samples");
  return (x.back() - x.front()) / static_cast<double>(x.size() - 1);
}

void SampledFunction1D::validate(bool require_nonnegative) const {
  if (x.empty() || x.size() != values.size()) throw std::invalid_argument("grid/value size mismatch");
  if (x.size() > 1) {
    const double h = spacing();
    if (!(h > 0)) throw std::invalid_argument("grid must be strictly increasing");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (std::abs((x[i] - x[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
        throw std::invalid_argument("grid spacing must be uniform");
  }
  if (require_nonnegative)
    for (double v : values)
      if (v < 0) throw std::invalid_argument("function values must be nonnegative");
}

std::vector<std::size_t> center_out_order(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  // Compare 2|i - (n-1)/2| in integers.
  auto dist = [n](std::size_t i) {
    const long long d = 2 * static_cast<long long>(i) - (static_cast<long long>(n) - 1);
    return d < 0 ? -d : d;
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return dist(a) < dist(b); });
  return idx;
}

SampledFunction1D decreasing_rearrangement(const SampledFunction1D& g) {
  g.validate(true);
  return {g.x, rearrange_decreasing(g.values)};
}

SampledFunction1D star_function(const SampledFunction1D& g) {
  g.validate(false);
  const double h = g.x.size() > 1 ? g.spacing() : 1.0;
  std::vector<double> sorted = g.values;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  SampledFunction1D out;
  out.x.resize(sorted.size() + 1);
  out.values.resize(sorted.size() + 1);
  double acc = 0;
  for (std::size_t k = 0; k <= sorted.size(); ++k) {
    out.x[k] = 0.5 * h * static_cast<double>(k);
    out.values[k] = h * acc;
    if (k < sorted.size()) acc += sorted[k];
  }
  return out;
}

namespace {

// Mirror cell index of idx under h; -1 when the mirror center leaves the grid.
std::ptrdiff_t mirror_index(const RasterSet& a, const Hyperplane& h, std::size_t idx) {
  const Point m = reflect(a.center(idx), h);
  std::array<int, 3> ijk{0, 0, 0};
  bool inside = true;
  for (int k = 0; k < a.dim(); ++k) {
    const double u = (m(k) - a.origin()(k)) / a.cell() - 0.5;
    const double r = std::round(u);
    if (std::abs(u - r) > 1e-6) throw std::invalid_argument("hyperplane is not grid-compatible");
    if (r < 0 || r >= a.shape()[k]) inside = false;
    ijk[k] = static_cast<int>(r);
  }
  return inside ? static_cast<std::ptrdiff_t>(a.index(ijk)) : -1;
}

}  // namespace

RasterSet polarize(const RasterSet& a, const Hyperplane& h) {
  if (h.normal.size() != a.dim()) throw std::invalid_argument("hyperplane dimension mismatch");
  const double tol = 1e-9 * a.cell();
  RasterSet out = a.empty_like();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = h.side(a.center(i));
    const std::ptrdiff_t m = mirror_index(a, h, i);
    const bool in = a.test(i);
    if (std::abs(s) <= tol) {
      if (in) out.set(i);
    } else if (s > 0) {
      const bool mirror_in = m >= 0 && a.test(static_cast<std::size_t>(m));
      if (in || mirror_in) out.set(i);
      if (m >= 0 && in && mirror_in) out.set(static_cast<std::size_t>(m));
    } else if (m < 0 && in) {
      throw std::invalid_argument("hyperplane is not grid-compatible: polarized set leaves the grid");
    }
  }
  return out;
}

Hyperplane grid_center_plane(const RasterSet& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) throw std::invalid_argument("axis out of range");
  Point n = Point::Zero(grid.dim());
  n(axis) = 1;
  return Hyperplane(n, grid.origin()(axis) + 0.5 * grid.shape()[axis] * grid.cell());
}

RasterSet steiner(const RasterSet& a, int axis) {
  if (axis < 0 || axis >= a.dim()) throw std::invalid_argument("axis out of range");
  RasterSet out = a.empty_like();
  const auto& shape = a.shape();
  const int len = shape[axis];
  std::size_t stride = 1;
  for (int k = 0; k < axis; ++k) stride *= static_cast<std::size_t>(shape[k]);
  for (std::size_t base = 0; base < a.size(); ++base) {
    if ((base / stride) % static_cast<std::size_t>(len) != 0) continue;
    int count = 0;
    for (int q = 0; q < len; ++q) count += a.test(base + q * stride) ? 1 : 0;
    const int start = (len - count) / 2;
    for (int q = start; q < start + count; ++q) out.set(base + q * stride);
  }
  return out;
}

RasterSet circular(const RasterSet& a) {
  if (a.dim() != 2) throw std::invalid_argument("circular symmetrization is planar");
  const int n_theta = 4 * std::max(a.shape()[0], a.shape()[1]);
  const double dr = 0.5 * a.cell();
  const Point lo = a.origin(), hi = a.upper();
  const double rmax = std::hypot(std::max(std::abs(lo(0)), std::abs(hi(0))),
                                 std::max(std::abs(lo(1)), std::abs(hi(1))));
  const int rings = static_cast<int>(std::ceil(rmax / dr)) + 1;
  std::vector<int> measure(static_cast<std::size_t>(rings), 0);
  Point p(2);
  for (int j = 0; j < rings; ++j) {
    const double r = (j + 0.5) * dr;
    for (int i = 0; i < n_theta; ++i) {
      const double th = -std::numbers::pi + (i + 0.5) * 2 * std::numbers::pi / n_theta;
      p << r * std::cos(th), r * std::sin(th);
      if (a.contains(p)) ++measure[static_cast<std::size_t>(j)];
    }
  }
  RasterSet out = a.empty_like();
  for (std::size_t idx = 0; idx < a.size(); ++idx) {
    const Point c = a.center(idx);
    const double r = c.norm();
    if (r < 1e-12 * a.cell()) {
      if (a.test(idx)) out.set(idx);
      continue;
    }
    const int m = measure[static_cast<std::size_t>(std::min(rings - 1, static_cast<int>(r / dr)))];
    const bool in = m == n_theta || std::abs(std::atan2(c(1), c(0))) < std::numbers::pi * m / n_theta;
    if (in) out.set(idx);
  }
  return out;
}

namespace {

// Σ over set cells of |2j - (len-1)| + [2j > len-1]: zero only at the
// Steiner-centered configuration, and the tie term prefers the lower run.
long long moment(const RasterSet& a, int axis) {
  const int len = a.shape()[axis];
  long long m = 0;
  a.for_each_set([&](std::size_t i) {
    const int j = a.coords(i)[axis];
    const long long d = 2LL * j - (len - 1);
    m += (d < 0 ? -d : d) + (d > 0 ? 1 : 0);
  });
  return m;
}

}  // namespace

ScheduleResult polarization_schedule_to_steiner(const RasterSet& a, const Hyperplane& axis_plane,
                                                int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  int axis = -1;
  for (int k = 0; k < a.dim(); ++k)
    if (std::abs(std::abs(axis_plane.normal(k)) - 1) < 1e-12) axis = k;
  if (axis < 0) throw std::invalid_argument("schedule plane must be axis-aligned");
  const Hyperplane mid = grid_center_plane(a, axis);
  const double plane_pos = axis_plane.offset * axis_plane.normal(axis);
  if (std::abs(plane_pos - mid.offset) > 1e-9 * a.cell())
    throw std::invalid_argument("schedule plane must be the grid midplane of its axis");

  const RasterSet target = steiner(a, axis);
  ScheduleResult res{a, {}, 0};
  if (a.empty()) {
    res.distances.push_back(0.0);
    return res;
  }
  double dist = hausdorff_distance(a, target);
  long long mom = moment(a, axis);
  res.distances.push_back(dist);

  // Planes through every cell center and cell boundary, H+ facing the midplane.
  std::vector<Hyperplane> pool;
  const int len = a.shape()[axis];
  for (int j = 1; j < 2 * len; ++j) {
    const double c = a.origin()(axis) + 0.5 * j * a.cell();
    Point n = Point::Zero(a.dim());
    if (c > mid.offset + 1e-12 * a.cell()) {
      n(axis) = -1;
      pool.emplace_back(n, -c);
    } else if (c < mid.offset - 1e-12 * a.cell()) {
      n(axis) = 1;
      pool.emplace_back(n, c);
    } else {
      n(axis) = -1;  // lower side wins on the midplane, matching the Steiner tie rule
      pool.emplace_back(n, -c);
    }
  }

  std::mt19937_64 rng(seed);
  while (res.applied < budget && !(res.set == target)) {
    std::shuffle(pool.begin(), pool.end(), rng);
    bool accepted = false;
    for (const auto& h : pool) {
      RasterSet cand = polarize(res.set, h);
      if (cand == res.set) continue;
      const long long m = moment(cand, axis);
      if (m >= mom) continue;
      const double d = hausdorff_distance(cand, target);
      if (d > dist) continue;
      res.set = std::move(cand);
      dist = d;
      mom = m;
      accepted = true;
      break;
    }
    if (!accepted) {
      // Second chance: a distance-decreasing move that raises the moment.
      for (const auto& h : pool) {
        RasterSet cand = polarize(res.set, h);
        if (cand == res.set) continue;
        const double d = hausdorff_distance(cand, target);
        if (d >= dist) continue;
        res.set = std::move(cand);
        dist = d;
        mom = moment(res.set, axis);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    ++res.applied;
    res.distances.push_back(dist);
  }
  return res;
}

}  // namespace isop
