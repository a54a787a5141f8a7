#include "isop/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace isop {

Point make_point(std::initializer_list<double> coords) {
  if (coords.size() < 1 || coords.size() > kMaxDim)
    throw std::invalid_argument("point dimension must be 1..3");
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p(i++) = c;
  return p;
}

SegmentApproach segment_segment_approach(const Point& p0, const Point& p1, const Point& q0,
                                         const Point& q1) {
  // Standard clamped closest-points computation (Ericson, RTCD 5.1.9).
  const Point d1 = p1 - p0, d2 = q1 - q0, r = p0 - q0;
  const double a = d1.squaredNorm(), e = d2.squaredNorm(), f = d2.dot(r);
  double s = 0, t = 0;
  if (a <= 0 && e <= 0) return {r.norm(), 0.0};
  if (a <= 0) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 0) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2), denom = a * e - b * b;
      s = denom > 0 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0) {
        t = 0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1) {
        t = 1;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return {((p0 + s * d1) - (q0 + t * d2)).norm(), s};
}

double ball_volume(int dim, double radius) {
  switch (dim) {
    case 1: return 2 * radius;
    case 2: return std::numbers::pi * radius * radius;
    case 3: return 4.0 / 3.0 * std::numbers::pi * radius * radius * radius;
    default: throw std::invalid_argument("ball_volume: dim must be 1..3");
  }
}

double ball_radius_for_volume(int dim, double vol) {
  if (!(vol > 0)) throw std::invalid_argument("ball radius requires positive volume");
  return std::pow(vol / ball_volume(dim, 1.0), 1.0 / dim);
}

RasterSet::RasterSet(int dim, const Point& origin, double cell, std::array<int, 3> shape)
    : dim_(dim), origin_(origin), cell_(cell), shape_(shape) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("raster dim must be 1..3");
  if (origin.size() != dim) throw std::invalid_argument("raster origin dimension mismatch");
  if (!(cell > 0)) throw std::invalid_argument("raster cell must be > 0");
  for (int k = 0; k < 3; ++k) {
    if (k >= dim) shape_[k] = 1;
    if (shape_[k] < 1) throw std::invalid_argument("raster shape components must be >= 1");
  }
  size_ = static_cast<std::size_t>(shape_[0]) * shape_[1] * shape_[2];
  words_.assign((size_ + 63) / 64, 0);
}

std::array<int, 3> RasterSet::coords(std::size_t idx) const {
  const auto s0 = static_cast<std::size_t>(shape_[0]), s1 = static_cast<std::size_t>(shape_[1]);
  return {static_cast<int>(idx % s0), static_cast<int>((idx / s0) % s1),
          static_cast<int>(idx / (s0 * s1))};
}

Point RasterSet::center(std::size_t idx) const {
  const auto c = coords(idx);
  Point p(dim_);
  for (int k = 0; k < dim_; ++k) p(k) = origin_(k) + (c[k] + 0.5) * cell_;
  return p;
}

bool RasterSet::in_grid(const std::array<int, 3>& ijk) const {
  for (int k = 0; k < 3; ++k)
    if (ijk[k] < 0 || ijk[k] >= shape_[k]) return false;
  return true;
}

std::ptrdiff_t RasterSet::locate(const Point& x) const {
  std::array<int, 3> ijk{0, 0, 0};
  for (int k = 0; k < dim_; ++k) {
    const double u = std::floor((x(k) - origin_(k)) / cell_);
    if (!(u >= 0) || u >= shape_[k]) return -1;
    ijk[k] = static_cast<int>(u);
  }
  return static_cast<std::ptrdiff_t>(index(ijk));
}

Point RasterSet::upper() const {
  Point p = origin_;
  for (int k = 0; k < dim_; ++k) p(k) += shape_[k] * cell_;
  return p;
}

std::size_t RasterSet::count() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool RasterSet::same_grid(const RasterSet& o) const {
  return dim_ == o.dim_ && shape_ == o.shape_ && cell_ == o.cell_ && origin_ == o.origin_;
}

void RasterSet::require_same_grid(const RasterSet& o) const {
  if (!same_grid(o)) throw std::invalid_argument("raster sets live on different grids");
}

RasterSet RasterSet::empty_like() const { return RasterSet(dim_, origin_, cell_, shape_); }

bool RasterSet::subset_of(const RasterSet& o) const {
  require_same_grid(o);
  for (std::size_t w = 0; w < words_.size(); ++w)
    if (words_[w] & ~o.words_[w]) return false;
  return true;
}

RasterSet& RasterSet::operator|=(const RasterSet& o) {
  require_same_grid(o);
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
  return *this;
}

RasterSet& RasterSet::operator&=(const RasterSet& o) {
  require_same_grid(o);
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
  return *this;
}

RasterSet& RasterSet::operator-=(const RasterSet& o) {
  require_same_grid(o);
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~o.words_[w];
  return *this;
}

bool operator==(const RasterSet& a, const RasterSet& b) {
  return a.same_grid(b) && a.words_ == b.words_;
}

double volume(const RasterSet& a) {
  return static_cast<double>(a.count()) * std::pow(a.cell(), a.dim());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One pass of the Felzenszwalb-Huttenlocher lower-envelope transform.
void edt_line(const std::vector<double>& f, const std::vector<std::int64_t>& fin, int n,
              std::vector<double>& d, std::vector<std::int64_t>& fout, std::vector<int>& v,
              std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    auto meet = [&](int a) {
      return ((f[q] + double(q) * q) - (f[a] + double(a) * a)) / (2.0 * (q - a));
    };
    double s = meet(v[k]);
    while (s <= z[k]) s = meet(v[--k]);
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.begin() + n, kInf);
    std::fill(fout.begin(), fout.begin() + n, -1);
    return;
  }
  int j = 0;
  for (int p = 0; p < n; ++p) {
    while (z[j + 1] < p) ++j;
    const double dp = p - v[j];
    d[p] = dp * dp + f[v[j]];
    fout[p] = fin[v[j]];
  }
}

}  // namespace

std::vector<double> squared_distance_field(const RasterSet& target,
                                           std::vector<std::int64_t>* nearest) {
  const std::size_t n = target.size();
  std::vector<double> dist(n, kInf);
  std::vector<std::int64_t> feat(n, -1);
  target.for_each_set([&](std::size_t i) {
    dist[i] = 0;
    feat[i] = static_cast<std::int64_t>(i);
  });
  const auto& shape = target.shape();
  const int maxn = std::max({shape[0], shape[1], shape[2]});
  std::vector<double> f(maxn), d(maxn), z(maxn + 1);
  std::vector<std::int64_t> fin(maxn), fout(maxn);
  std::vector<int> v(maxn);
  for (int axis = 0; axis < target.dim(); ++axis) {
    const int len = shape[axis];
    if (len == 1) continue;
    std::size_t stride = 1;
    for (int k = 0; k < axis; ++k) stride *= static_cast<std::size_t>(shape[k]);
    for (std::size_t base = 0; base < n; ++base) {
      // Visit each line once: from the cell whose coordinate along axis is 0.
      if ((base / stride) % static_cast<std::size_t>(len) != 0) continue;
      for (int q = 0; q < len; ++q) {
        f[q] = dist[base + q * stride];
        fin[q] = feat[base + q * stride];
      }
      edt_line(f, fin, len, d, fout, v, z);
      for (int q = 0; q < len; ++q) {
        dist[base + q * stride] = d[q];
        feat[base + q * stride] = fout[q];
      }
    }
  }
  const double c2 = target.cell() * target.cell();
  for (auto& x : dist) x *= c2;
  if (nearest) *nearest = std::move(feat);
  return dist;
}

double hausdorff_distance(const RasterSet& a, const RasterSet& b) {
  if (!a.same_grid(b)) throw std::invalid_argument("raster sets live on different grids");
  if (a.empty() || b.empty()) throw std::invalid_argument("Hausdorff undefined for empty set");
  if (a == b) return 0.0;
  const auto da = squared_distance_field(a);
  const auto db = squared_distance_field(b);
  double h = 0;
  a.for_each_set([&](std::size_t i) { h = std::max(h, db[i]); });
  b.for_each_set([&](std::size_t i) { h = std::max(h, da[i]); });
  return std::sqrt(h);
}

RasterSet dilate(const RasterSet& a, double r) {
  if (r < 0) throw std::invalid_argument("dilation radius must be >= 0");
  if (r == 0 || a.empty()) return a;
  const auto da = squared_distance_field(a);
  // Compare in cell units so exact lattice distances are not lost to rounding.
  const double c2 = a.cell() * a.cell();
  const double limit = (r / a.cell()) * (r / a.cell()) * (1 + 1e-12);
  RasterSet out = a.empty_like();
  for (std::size_t i = 0; i < da.size(); ++i)
    if (da[i] / c2 <= limit) out.set(i);
  return out;
}

RasterSet grid_covering(const Point& lo, const Point& hi, double cell) {
  const int dim = static_cast<int>(lo.size());
  std::array<int, 3> shape{1, 1, 1};
  Point origin(dim);
  for (int k = 0; k < dim; ++k) {
    const double span = hi(k) - lo(k);
    shape[k] = std::max(1, static_cast<int>(std::ceil(span / cell - 1e-9)));
    origin(k) = 0.5 * (lo(k) + hi(k)) - 0.5 * shape[k] * cell;
  }
  return RasterSet(dim, origin, cell, shape);
}

}  // namespace isop
