#include <doctest.h>

#include "isop/stochastic.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <set>

using namespace isop;

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(7, i));
  CHECK(seeds.size() == 1000);
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
  CHECK(derive_seed(7, 3) != derive_seed(8, 3));
  Rng u(1);
  double m = 0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    m += x;
  }
  CHECK(m / 1e5 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("positive stable variables have the right Laplace transform") {
  for (double a : {0.3, 0.5, 0.75, 1.0}) {
    Rng rng(static_cast<std::uint64_t>(a * 100));
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double v = std::exp(-positive_stable(a, rng));
      s += v;
      s2 += v * v;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(-1.0)) < 4 * se + 1e-12);
  }
}

TEST_CASE("gaussian steps: variance dt for brownian motion, 2 dt for alpha = 2") {
  Rng rng(3);
  const int n = 200000;
  const double dt = 0.01;
  const Point x0 = make_point({1, -2, 0.5});
  double v_bm = 0, v_st = 0;
  StableParams p{2.0, 3};
  for (int i = 0; i < n; ++i) {
    v_bm += (bm_step(x0, dt, rng) - x0).squaredNorm();
    v_st += (stable_step(x0, dt, p, rng) - x0).squaredNorm();
  }
  CHECK(v_bm / (3.0 * n) == doctest::Approx(dt).epsilon(0.01));
  CHECK(v_st / (3.0 * n) == doctest::Approx(2 * dt).epsilon(0.01));
}

TEST_CASE("stable steps have characteristic function exp(-t |xi|^alpha)") {
  for (double alpha : {0.8, 1.0, 1.5}) {
    Rng rng(static_cast<std::uint64_t>(alpha * 10));
    StableParams p{alpha, 2};
    const double dt = 0.5;
    const int n = 200000;
    for (double xi : {0.5, 1.0, 2.0}) {
      double s = 0, s2 = 0;
      for (int i = 0; i < n; ++i) {
        const Point y = stable_step(make_point({0, 0}), dt, p, rng);
        const double c = std::cos(xi * y(0));
        s += c;
        s2 += c * c;
      }
      const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
      CHECK(std::abs(mean - std::exp(-dt * std::pow(xi, alpha))) < 4 * se);
    }
  }
  Rng rng(1);
  CHECK_THROWS_AS(stable_step(make_point({0, 0}), 0.1, StableParams{2.5, 2}, rng), std::invalid_argument);
  CHECK_THROWS_AS(stable_step(make_point({0, 0}), 0.1, StableParams{0.0, 2}, rng), std::invalid_argument);
}

TEST_CASE("sample_exit: uniform exit from the center of a disk, survival matches the series") {
  const Domain disk = Domain::ball(make_point({0, 0}), 1.0);
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.adaptive = 0.05;
  cfg.max_time = 50;
  Rng rng(9);
  const int n = 20000;
  double mx = 0, my = 0;
  int alive = 0;
  const double t = 0.3;
  for (int i = 0; i < n; ++i) {
    const StoppedPath s = sample_exit(disk, make_point({0, 0}), cfg, rng);
    REQUIRE_FALSE(s.truncated);
    CHECK(s.exit_point.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(s.boundary_label == "sphere");
    mx += s.exit_point(0);
    my += s.exit_point(1);
    alive += s.exit_time > t ? 1 : 0;
  }
  CHECK(std::abs(mx / n) < 4 / std::sqrt(2.0 * n));
  CHECK(std::abs(my / n) < 4 / std::sqrt(2.0 * n));
  const double p = oracle::disk_survival_center(1.0, t);
  CHECK(std::abs(static_cast<double>(alive) / n - p) < 4 * std::sqrt(p * (1 - p) / n) + 0.01);
}

TEST_CASE("sample_exit honours truncation") {
  const Domain disk = Domain::ball(make_point({0, 0}), 10.0);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.max_time = 0.05;
  Rng rng(2);
  const StoppedPath s = sample_exit(disk, make_point({0, 0}), cfg, rng);
  CHECK(s.truncated);
  CHECK(s.exit_time == doctest::Approx(0.05));
}

TEST_CASE("walk on spheres reproduces annulus harmonic measure") {
  const Domain ann = Domain::annulus(make_point({0, 0}), 0.5, 2.0);
  SimConfig cfg;
  cfg.eps_shell = 1e-5;
  Rng rng(5);
  const int n = 40000;
  int inner = 0;
  for (int i = 0; i < n; ++i) {
    const BoundaryHit h = walk_on_spheres(ann, make_point({1, 0}), cfg, rng);
    REQUIRE_FALSE(h.truncated);
    inner += h.label == "inner" ? 1 : 0;
  }
  const double p = oracle::annulus_inner(0.5, 2.0, 1.0);
  CHECK(std::abs(static_cast<double>(inner) / n - p) < 4 * std::sqrt(p * (1 - p) / n));
  Rng r2(1);
  const Domain raster = Domain::raster(rasterize(Domain::ball(make_point({0, 0}), 1.0), 0.05), 0.0);
  CHECK_THROWS_AS(walk_on_spheres(raster, make_point({0, 0}), cfg, r2), std::invalid_argument);
}

TEST_CASE("sample_hit: probability of ever hitting a 3D ball") {
  const Domain ball = Domain::ball(make_point({0, 0, 0}), 1.0);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.adaptive = 0.05;
  cfg.max_time = 200;
  Rng rng(6);
  const int n = 4000;
  int hit = 0, trunc = 0;
  for (int i = 0; i < n; ++i) {
    const StoppedPath s = sample_hit(ball, make_point({2, 0, 0}), cfg, rng);
    if (s.truncated) ++trunc;
    else {
      ++hit;
      CHECK(s.exit_point.norm() == doctest::Approx(1.0).epsilon(1e-3));
    }
  }
  // P(hit before time T) from |x| = 2 is erfc((|x|-R)/sqrt(2T))·R/|x|.
  const double p = 0.5 * std::erfc(1.0 / std::sqrt(2 * 200.0));
  CHECK(std::abs(static_cast<double>(hit) / n - p) < 4 * std::sqrt(p * (1 - p) / n) + 0.01);
}

TEST_CASE("sample_path and observer") {
  Rng rng(1);
  const auto path = sample_path(make_point({1, 2}), 1.0, 0.01, rng);
  CHECK(path.size() == 101);
  CHECK(path.front()(0) == 1.0);
  const Domain disk = Domain::ball(make_point({0, 0}), 1.0);
  SimConfig cfg;
  cfg.dt = 1e-3;
  std::vector<double> times;
  PathObserver obs = [&](double t, const Point&) { times.push_back(t); };
  Rng r2(4);
  const StoppedPath s = sample_exit(disk, make_point({0, 0}), cfg, r2, Process::brownian(), &obs);
  REQUIRE(times.size() >= 2);
  for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
  CHECK(times.back() <= s.exit_time + 1e-12);
}

TEST_CASE("sausage volume of a straight segment is a capsule") {
  const RasterSet grid = grid_covering(make_point({-1.5, -1.5}), make_point({2.5, 1.5}), 0.005);
  const std::vector<Point> path{make_point({0, 0}), make_point({1, 0})};
  const double r = 0.5;
  const double exact = 2 * r * 1.0 + oracle::pi * r * r;
  CHECK(sausage_volume(path, r, grid) == doctest::Approx(exact).epsilon(0.01));
  // A square swept along the same segment: [-0.25, 1.25] × [-0.25, 0.25].
  const Domain sq = Domain::box(make_point({-0.25, -0.25}), make_point({0.25, 0.25}));
  const ShapeFamily fam = ShapeFamily::constant(sq);
  CHECK(sausage_volume(path, 1.0, fam, grid) == doctest::Approx(1.5 * 0.5).epsilon(0.02));
}

TEST_CASE("shape family lookup and config validation") {
  ShapeFamily fam;
  fam.times = {0.0, 1.0};
  fam.shapes = {Domain::ball(make_point({0, 0}), 1.0), Domain::ball(make_point({0, 0}), 2.0)};
  CHECK(std::get<BallShape>(fam.at(0.5).shape()).radius == 1.0);
  CHECK(std::get<BallShape>(fam.at(1.5).shape()).radius == 2.0);
  SimConfig cfg;
  cfg.dt = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(Process::stable_process(3.0), std::invalid_argument);
}
