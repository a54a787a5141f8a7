#include <doctest.h>

#include "isop/symmetrize.hpp"
#include "isop/rng.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>

using namespace isop;

namespace {

RasterSet random_mask(Rng& rng, int dim, std::array<int, 3> shape, double fill, double half = 1.0) {
  const double cell = 2 * half / shape[0];
  Point origin(dim);
  for (int k = 0; k < dim; ++k) origin(k) = -0.5 * shape[k] * cell;
  RasterSet a(dim, origin, cell, shape);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (rng.uniform() < fill) a.set(i);
  return a;
}

// Pointwise two-point rule, with mirrors found by scanning all cell centers.
RasterSet polarize_oracle(const RasterSet& a, const Hyperplane& h) {
  RasterSet out = a.empty_like();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point x = a.center(i);
    const Point m = reflect(x, h);
    std::ptrdiff_t mi = -1;
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a.center(j) - m).norm() < 1e-6 * a.cell()) mi = static_cast<std::ptrdiff_t>(j);
    const bool in = a.test(i), min = mi >= 0 && a.test(static_cast<std::size_t>(mi));
    const double s = h.side(x);
    bool keep;
    if (std::abs(s) < 1e-9) keep = in;
    else if (s > 0) keep = in || min;
    else keep = in && min;
    if (keep) out.set(i);
  }
  return out;
}

std::vector<Hyperplane> test_planes(int dim, double cell) {
  std::vector<Hyperplane> hs;
  for (int k = 0; k < dim; ++k)
    for (int j = -4; j <= 4; ++j)
      for (double sgn : {1.0, -1.0}) {
        Point n = Point::Zero(dim);
        n(k) = sgn;
        hs.emplace_back(n, sgn * 0.5 * j * cell);
      }
  // Diagonal planes through the grid center of a square grid.
  hs.emplace_back(make_point({1, -1}), 0.0);
  hs.emplace_back(make_point({-1, 1}), 0.0);
  hs.emplace_back(make_point({1, 1}), 0.0);
  return hs;
}

}  // namespace

TEST_CASE("polarization agrees with the pointwise rule") {
  Rng rng(21);
  for (int trial = 0; trial < 6; ++trial) {
    RasterSet a = random_mask(rng, 2, {12, 12, 1}, 0.35);
    // Keep the set away from the rim so every plane in the list is admissible.
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto c = a.coords(i);
      if (c[0] < 4 || c[0] > 7) a.set(i, false);
    }
    for (const auto& h : test_planes(2, a.cell())) {
      if (std::abs(h.normal(1)) > 0 && std::abs(h.normal(0)) == 0) continue;
      CHECK(polarize(a, h) == polarize_oracle(a, h));
    }
  }
}

TEST_CASE("polarization properties on random sets") {
  Rng rng(22);
  for (int trial = 0; trial < 8; ++trial) {
    const int dim = trial % 2 ? 3 : 2;
    const std::array<int, 3> shape{8, 8, dim == 3 ? 8 : 1};
    RasterSet a = random_mask(rng, dim, shape, 0.3);
    // Central block only, so off-axis planes keep everything on the grid.
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto c = a.coords(i);
      for (int k = 0; k < dim; ++k)
        if (c[k] < 2 || c[k] > 5) a.set(i, false);
    }
    RasterSet sub = a;
    for (std::size_t i = 0; i < sub.size(); ++i)
      if (rng.uniform() < 0.5) sub.set(i, false);
    for (int k = 0; k < dim; ++k)
      for (int j = -2; j <= 2; ++j) {
        Point n = Point::Zero(dim);
        n(k) = rng.uniform() < 0.5 ? 1 : -1;
        const Hyperplane h(n, 0.5 * j * a.cell());
        const RasterSet p = polarize(a, h);
        CHECK(p.count() == a.count());
        CHECK(polarize(p, h) == p);
        CHECK(polarize(sub, h).subset_of(p));
      }
  }
}

TEST_CASE("polarization rejects incompatible planes") {
  RasterSet a(2, make_point({-1, -1}), 0.25, {8, 8, 1});
  a.set(a.index({0, 3, 0}));
  CHECK_THROWS_AS(polarize(a, Hyperplane(make_point({1, 0}), 0.1)), std::invalid_argument);
  // The mirror of a set cell in H- falls off the grid.
  CHECK_THROWS_AS(polarize(a, Hyperplane(make_point({1, 0}), 0.5)), std::invalid_argument);
  CHECK_THROWS_AS(polarize(a, Hyperplane(make_point({1, 0, 0}), 0.0)), std::invalid_argument);
}

TEST_CASE("steiner: volume, contiguity, centering and idempotence") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = trial % 2 ? 3 : 2;
    const RasterSet a = random_mask(rng, dim, {9, 8, dim == 3 ? 7 : 1}, 0.4);
    for (int axis = 0; axis < dim; ++axis) {
      const RasterSet s = steiner(a, axis);
      CHECK(s.count() == a.count());
      CHECK(steiner(s, axis) == s);
      // Each column is one run starting at (len - count) / 2.
      const int len = a.shape()[axis];
      for (std::size_t i = 0; i < a.size(); ++i) {
        auto c = a.coords(i);
        if (c[axis] != 0) continue;
        int count = 0;
        for (int q = 0; q < len; ++q) {
          c[axis] = q;
          count += a.test(a.index(c)) ? 1 : 0;
        }
        const int start = (len - count) / 2;
        for (int q = 0; q < len; ++q) {
          c[axis] = q;
          CHECK(s.test(s.index(c)) == (q >= start && q < start + count));
        }
      }
      // Fixed by polarization in the midplane with H+ on the lower side.
      const Hyperplane mid = grid_center_plane(a, axis);
      CHECK(polarize(s, Hyperplane(-mid.normal, -mid.offset)) == s);
    }
  }
}

TEST_CASE("steiner tie rule puts the odd cell below the midplane") {
  RasterSet a(2, make_point({0, 0}), 1.0, {1, 4, 1});
  a.set(a.index({0, 3, 0}));
  const RasterSet s = steiner(a, 1);
  CHECK(s.test(s.index({0, 1, 0})));
  CHECK(s.count() == 1);
  a.set(a.index({0, 0, 0}));
  a.set(a.index({0, 2, 0}));
  const RasterSet t = steiner(a, 1);
  CHECK(t.test(t.index({0, 0, 0})));
  CHECK(t.test(t.index({0, 2, 0})));
  CHECK_FALSE(t.test(t.index({0, 3, 0})));
}

TEST_CASE("circular symmetrization") {
  // An annulus stays an annulus; area is preserved to discretization accuracy.
  RasterSet a(2, make_point({-1, -1}), 2.0 / 128, {128, 128, 1});
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point c = a.center(i);
    const double r = c.norm(), th = std::atan2(c(1), c(0));
    if (r < 0.9 && r > 0.3 && (th > 1.0 || r < 0.5)) a.set(i);
  }
  const RasterSet c = circular(a);
  CHECK(volume(c) == doctest::Approx(volume(a)).epsilon(0.03));
  // Symmetric under y -> -y, and each circle meets the set in an arc centered on the positive x-axis.
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto q = c.coords(i);
    q[1] = 127 - q[1];
    CHECK(c.test(i) == c.test(c.index(q)));
  }
  CHECK(c.contains(make_point({0.7, 0.0})));
  CHECK(c.contains(make_point({-0.4, 0.0})));  // full ring below r = 0.5
  CHECK_FALSE(c.contains(make_point({-0.7, 0.0})));
  RasterSet b3(3, make_point({0, 0, 0}), 1.0, {2, 2, 2});
  CHECK_THROWS_AS(circular(b3), std::invalid_argument);
}

TEST_CASE("polarization schedule converges to the steiner set") {
  Rng rng(24);
  for (int trial = 0; trial < 5; ++trial) {
    RasterSet a(2, make_point({-1, -1}), 0.125, {16, 16, 1});
    const Point c = make_point({rng.uniform() - 0.5, rng.uniform() - 0.5});
    const double r = 0.3 + 0.2 * rng.uniform();
    for (std::size_t i = 0; i < a.size(); ++i)
      if ((a.center(i) - c).norm() < r) a.set(i);
    const Hyperplane plane = grid_center_plane(a, 1);
    const ScheduleResult res = polarization_schedule_to_steiner(a, plane, 200, 5);
    for (std::size_t k = 1; k < res.distances.size(); ++k) CHECK(res.distances[k] <= res.distances[k - 1]);
    CHECK(res.set == steiner(a, 1));
    CHECK(res.distances.back() == 0.0);
    CHECK(res.set.count() == a.count());
  }
  RasterSet a(2, make_point({-1, -1}), 0.125, {16, 16, 1});
  CHECK_THROWS_AS(polarization_schedule_to_steiner(a, Hyperplane(make_point({0, 1}), 0.5), 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(polarization_schedule_to_steiner(a, Hyperplane(make_point({1, 1}), 0.0), 10),
                  std::invalid_argument);
}

TEST_CASE("decreasing rearrangement matches the reference") {
  Rng rng(25);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 * static_cast<std::size_t>(rng.uniform() * 10) + 1;
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = static_cast<std::int64_t>(rng.uniform() * 6);
    CHECK(rearrange_decreasing(v) == oracle::rearranged(v));
  }
  const auto order = center_out_order(4);
  CHECK(order == std::vector<std::size_t>{1, 2, 0, 3});
}

TEST_CASE("star function: concave, nondecreasing, dominates every subset integral") {
  Rng rng(26);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + static_cast<std::size_t>(rng.uniform() * 30);
    std::vector<double> vals(n);
    for (auto& v : vals) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform() * 3;
    const auto g = SampledFunction1D::on_interval(1.0, vals);
    const auto s = star_function(g);
    const double h = g.spacing();
    REQUIRE(s.values.size() == n + 1);
    CHECK(s.values.front() == 0.0);
    double total = 0;
    for (double v : vals) total += v * h;
    CHECK(s.values.back() == doctest::Approx(total));
    for (std::size_t k = 1; k < s.values.size(); ++k) CHECK(s.values[k] >= s.values[k - 1]);
    for (std::size_t k = 1; k + 1 < s.values.size(); ++k)
      CHECK(s.values[k] - s.values[k - 1] >= s.values[k + 1] - s.values[k] - 1e-12);
    // Random k-subsets never beat g* at l = k h / 2.
    for (int r = 0; r < 20; ++r) {
      std::size_t k = 0;
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (rng.uniform() < 0.5) {
          ++k;
          sum += vals[i] * h;
        }
      CHECK(sum <= s.values[k] + 1e-12);
      CHECK(s.x[k] == doctest::Approx(0.5 * h * static_cast<double>(k)));
    }
    // g* is invariant under rearrangement.
    const auto rs = star_function(decreasing_rearrangement(g));
    for (std::size_t k = 0; k <= n; ++k) CHECK(rs.values[k] == doctest::Approx(s.values[k]));
  }
  CHECK_THROWS_AS(decreasing_rearrangement(SampledFunction1D::on_interval(1.0, {1.0, -1.0})), std::invalid_argument);
  CHECK_THROWS_AS(SampledFunction1D::on_interval(0.0, {1.0}), std::invalid_argument);
}

TEST_CASE("listed symmetrization examples") {
  // Steiner: column of 9 with cells {1, 5, 6} becomes {3, 4, 5}.
  RasterSet col(2, make_point({0, 0}), 1.0, {1, 9, 1});
  for (int j : {1, 5, 6}) col.set(col.index({0, j, 0}));
  const RasterSet st = steiner(col, 1);
  for (int j = 0; j < 9; ++j) CHECK(st.test(st.index({0, j, 0})) == (j >= 3 && j <= 5));
  // Rearrangement: [0,3,1,2,0] -> [0,2,3,1,0].
  const auto g = decreasing_rearrangement(SampledFunction1D::on_interval(1.0, {0, 3, 1, 2, 0}));
  CHECK(g.values == std::vector<double>{0, 2, 3, 1, 0});
  // Single cell in H- goes to its mirror.
  RasterSet one(2, make_point({-1, -1}), 0.5, {4, 4, 1});
  one.set(one.index({0, 1, 0}));
  const RasterSet p = polarize(one, Hyperplane(make_point({1, 0}), 0.0));
  CHECK(p.count() == 1);
  CHECK(p.test(p.index({3, 1, 0})));
  // Star function of a constant and of an indicator of [0, a].
  const auto c = star_function(SampledFunction1D::on_interval(1.0, std::vector<double>(10, 1.0)));
  for (std::size_t k = 0; k < c.x.size(); ++k) CHECK(c.values[k] == doctest::Approx(2 * c.x[k]));
  std::vector<double> ind(10, 0.0);
  for (int i = 5; i < 10; ++i) ind[static_cast<std::size_t>(i)] = 1.0;
  const auto s = star_function(SampledFunction1D::on_interval(1.0, ind));
  for (std::size_t k = 0; k < s.x.size(); ++k) CHECK(s.values[k] == doctest::Approx(std::min(2 * s.x[k], 1.0)));
}

TEST_CASE("smoothing inclusion") {
  Rng rng(27);
  for (int trial = 0; trial < 100; ++trial) {
    RasterSet a = random_mask(rng, 2, {16, 16, 1}, 0.2);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto c = a.coords(i);
      if (c[0] < 5 || c[0] > 10 || c[1] < 5 || c[1] > 10) a.set(i, false);
    }
    Point n = Point::Zero(2);
    n(trial % 2) = rng.uniform() < 0.5 ? 1 : -1;
    const Hyperplane h(n, 0.5 * (static_cast<int>(rng.uniform() * 5) - 2) * a.cell());
    const double r = a.cell() * (0.5 + 2 * rng.uniform());
    CHECK(dilate(polarize(a, h), r).subset_of(polarize(dilate(a, r), h)));
  }
}

TEST_CASE("circular: half-disk becomes the right half-disk") {
  RasterSet a(2, make_point({-1.1, -1.1}), 2.2 / 176, {176, 176, 1});
  RasterSet want = a.empty_like();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point c = a.center(i);
    if (c.norm() < 1 && c(1) > 0) a.set(i);
    if (c.norm() < 1 && c(0) > 0) want.set(i);
  }
  const RasterSet got = circular(a);
  CHECK(std::abs(static_cast<double>(got.count()) - static_cast<double>(a.count())) < 0.02 * a.count());
  // Differences stay within thin bands along the dividing diameter and the rim.
  std::size_t off = 0;
  for (std::size_t i = 0; i < got.size(); ++i)
    if (got.test(i) != want.test(i)) {
      ++off;
      const Point c = got.center(i);
      CHECK((std::abs(c(0)) < 0.05 + 0.05 * c.norm() || std::abs(c.norm() - 1) < 0.03));
    }
  CHECK(off < 0.03 * a.count());
}

TEST_CASE("schedule: fixed point and a two-cell column") {
  RasterSet col(2, make_point({0, 0}), 1.0, {1, 6, 1});
  col.set(col.index({0, 5, 0}));
  col.set(col.index({0, 1, 0}));
  const auto res = polarization_schedule_to_steiner(col, grid_center_plane(col, 1), 8);
  CHECK(res.set == steiner(col, 1));
  CHECK(res.distances.back() == 0.0);
  CHECK(res.applied <= 8);
  const auto fixed = polarization_schedule_to_steiner(res.set, grid_center_plane(col, 1), 8);
  CHECK(fixed.distances == std::vector<double>{0.0});
  CHECK(fixed.applied == 0);
}

TEST_CASE("star ordering transfers to convex increasing means") {
  Rng rng(28);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> g(12), h(12);
    for (std::size_t i = 0; i < 12; ++i) {
      g[i] = rng.uniform();
      h[i] = g[i] + 0.3 * rng.uniform();
    }
    // Shuffle h so only its distribution dominates g's.
    std::shuffle(h.begin(), h.end(), rng);
    const auto sg = star_function(SampledFunction1D::on_interval(1.0, g));
    const auto sh = star_function(SampledFunction1D::on_interval(1.0, h));
    bool dominated = true;
    for (std::size_t k = 0; k < sg.values.size(); ++k) dominated = dominated && sg.values[k] <= sh.values[k] + 1e-12;
    REQUIRE(dominated);
    auto mean = [](const std::vector<double>& v, auto phi) {
      double s = 0;
      for (double x : v) s += phi(x);
      return s;
    };
    CHECK(mean(g, [](double x) { return x; }) <= mean(h, [](double x) { return x; }) + 1e-12);
    CHECK(mean(g, [](double x) { return x * x; }) <= mean(h, [](double x) { return x * x; }) + 1e-12);
    CHECK(mean(g, [](double x) { return std::exp(x); }) <= mean(h, [](double x) { return std::exp(x); }) + 1e-12);
    CHECK(mean(g, [](double x) { return std::max(x - 0.5, 0.0); }) <=
          mean(h, [](double x) { return std::max(x - 0.5, 0.0); }) + 1e-12);
  }
}
