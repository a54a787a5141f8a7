#include "isop/harness.hpp"

#include "isop/records.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace isop {

using nlohmann::json;

std::string to_string(Status s) {
  switch (s) {
    case Status::consistent: return "consistent";
    case Status::violation: return "violation";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict make_verdict(std::string id, const Estimate& lhs, const Estimate& rhs, double sigma, std::uint64_t seed,
                     json params, double z_crit, double resolution) {
  Verdict v;
  v.theorem_id = std::move(id);
  v.lhs = lhs;
  v.rhs = rhs;
  v.margin = rhs.mean - lhs.mean;
  v.sigma = sigma;
  v.seed = seed;
  v.params = std::move(params);
  v.params["z_crit"] = z_crit;
  if (sigma > 0) {
    v.z = v.margin / sigma;
  } else {
    v.z = v.margin == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), v.margin);
  }
  const double res = resolution >= 0 ? resolution : 2 * sigma;
  if (v.z < -z_crit) v.status = Status::violation;
  else if (sigma > 0 && std::abs(v.z) < 1 && std::abs(v.margin) <= res) v.status = Status::inconclusive;
  else v.status = Status::consistent;
  return v;
}

namespace {

Estimate exact_value(double v) {
  Estimate e;
  e.mean = v;
  return e;
}

json point_json(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

Point bbox_center(const Domain& d) {
  const auto [lo, hi] = bounding_box(d);
  return 0.5 * (lo + hi);
}

double survival_indicator(const Domain& d, const Point& x, const SimConfig& cfg, Rng& rng, const Process& proc) {
  return sample_exit(d, x, cfg, rng, proc).truncated ? 1.0 : 0.0;
}

}  // namespace

// ---------------------------------------------------------------- BLL

Verdict check_bll_discrete(const BllInstance& inst) {
  const int k = inst.k;
  const int m = static_cast<int>(inst.f.size());
  if (k < 0) throw std::invalid_argument("K must be >= 0");
  if (m < 1 || m > 3) throw std::invalid_argument("BLL check supports 1 <= m <= 3 factors");
  if (2 * k + 1 > 21) throw std::invalid_argument("BLL grid larger than 21 points");
  const std::size_t flen = static_cast<std::size_t>(4 * k + 1);
  for (const auto& f : inst.f) {
    if (f.size() != flen) throw std::invalid_argument("each f_i needs 4K+1 values");
    for (auto v : f)
      if (v < 0) throw std::invalid_argument("f_i must be nonnegative");
  }
  if (inst.a.empty()) throw std::invalid_argument("A must be nonempty");
  std::vector<int> a = inst.a;
  std::sort(a.begin(), a.end());
  if (std::adjacent_find(a.begin(), a.end()) != a.end()) throw std::invalid_argument("A has repeated points");
  if (a.front() < -k || a.back() > k) throw std::invalid_argument("A must lie in [-K, K]");
  if (inst.z0 < -k || inst.z0 > k) throw std::invalid_argument("z0 must lie in [-K, K]");

  // A*: the |A| grid points closest to 0.
  std::vector<int> a_star;
  const auto order = center_out_order(static_cast<std::size_t>(2 * k + 1));
  for (std::size_t i = 0; i < a.size(); ++i) a_star.push_back(static_cast<int>(order[i]) - k);
  std::vector<std::vector<std::int64_t>> f_star;
  for (const auto& f : inst.f) f_star.push_back(rearrange_decreasing(f));

  auto chain = [&](const std::vector<std::vector<std::int64_t>>& fs, const std::vector<int>& set, int z0) {
    std::int64_t total = 0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    for (;;) {
      std::int64_t prod = 1;
      int prev = z0;
      for (int i = 0; i < m && prod != 0; ++i) {
        const int z = set[idx[static_cast<std::size_t>(i)]];
        prod *= fs[static_cast<std::size_t>(i)][static_cast<std::size_t>(z - prev + 2 * k)];
        prev = z;
      }
      total += prod;
      int i = m - 1;
      while (i >= 0 && ++idx[static_cast<std::size_t>(i)] == set.size()) idx[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
    }
    return total;
  };
  const std::int64_t lhs = chain(inst.f, a, inst.z0);
  const std::int64_t rhs = chain(f_star, a_star, 0);

  Verdict v;
  v.theorem_id = "bll-discrete";
  v.exact = true;
  v.lhs = exact_value(static_cast<double>(lhs));
  v.rhs = exact_value(static_cast<double>(rhs));
  v.margin = static_cast<double>(rhs - lhs);
  v.z = rhs == lhs ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), v.margin);
  v.status = rhs < lhs ? Status::violation : Status::consistent;
  v.params = {{"K", k}, {"m", m}, {"A", a}, {"z0", inst.z0}, {"lhs_exact", lhs}, {"rhs_exact", rhs}};
  return v;
}

BllInstance random_bll_instance(std::uint64_t seed, int max_m, int max_grid) {
  if (max_m < 1 || max_m > 3 || max_grid < 1 || max_grid > 21)
    throw std::invalid_argument("BLL instance limits: m in 1..3, grid in 1..21");
  Rng rng(seed);
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
  BllInstance inst;
  inst.k = pick(0, (max_grid - 1) / 2);
  const int m = pick(1, max_m);
  for (int i = 0; i < m; ++i) {
    std::vector<std::int64_t> f(static_cast<std::size_t>(4 * inst.k + 1));
    for (auto& v : f) v = pick(0, 3) == 0 ? 0 : pick(1, 9);
    inst.f.push_back(std::move(f));
  }
  for (int z = -inst.k; z <= inst.k; ++z)
    if (rng() & 1) inst.a.push_back(z);
  if (inst.a.empty()) inst.a.push_back(pick(-inst.k, inst.k));
  inst.z0 = pick(-inst.k, inst.k);
  return inst;
}

// ---------------------------------------------------------------- survival

Verdict check_survival_isoperimetric(const Domain& d, double t, const Process& proc,
                                     const std::vector<Point>& z_grid, const CheckOptions& opt) {
  if (!(t > 0)) throw std::invalid_argument("t must be > 0");
  const Domain ball = schwarz_ball(d);
  const std::vector<Point> zs = z_grid.empty() ? std::vector<Point>{bbox_center(d)} : z_grid;
  for (const auto& z : zs)
    if (z.size() != d.dim() || !contains(d, z)) throw std::invalid_argument("z-grid point outside the domain");
  SimConfig cfg = opt.cfg;
  cfg.max_time = t;
  cfg.dt = std::min(cfg.dt, t);
  CheckOptions run = opt;
  run.cfg = cfg;
  const Point origin = Point::Zero(d.dim());

  PairedEstimate best;
  std::size_t best_i = 0;
  json grid = json::array();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const PairedEstimate p = paired_estimate(
        opt.n, run, [&](Rng& r) { return survival_indicator(d, zs[i], cfg, r, proc); },
        [&](Rng& r) { return survival_indicator(ball, origin, cfg, r, proc); });
    grid.push_back(point_json(zs[i]));
    if (i == 0 || p.lhs.mean > best.lhs.mean) {
      best = p;
      best_i = i;
    }
  }
  json params = {{"domain", d.kind()}, {"t", t}, {"alpha", proc.stable ? proc.alpha : 2.0},
                 {"process", proc.stable ? "stable" : "brownian"}, {"z_grid", grid},
                 {"z_best", point_json(zs[best_i])}, {"n", opt.n}, {"paired", opt.paired}};
  return make_verdict("survival-isoperimetric", best.lhs, best.rhs, best.diff.std_error, opt.cfg.seed,
                      std::move(params), opt.z_crit);
}

// ---------------------------------------------------------------- polarization

Point polarized_point(const RasterSet& d, const Hyperplane& h, const Point& x) {
  if (h.side(x) >= 0) return x;
  const Point sx = reflect(x, h);
  if (d.contains(x) && !d.contains(sx)) return sx;
  throw std::invalid_argument("x on the negative side must lie in D minus its reflection");
}

Verdict check_polarization_exit(const RasterSet& d, const Hyperplane& h, const Point& x, double t,
                                const CheckOptions& opt, const RasterSet* target) {
  if (!(t > 0)) throw std::invalid_argument("t must be > 0");
  if (!d.contains(x)) throw std::invalid_argument("start point must lie inside the domain");
  const RasterSet a = target ? *target : d;
  if (!a.same_grid(d)) throw std::invalid_argument("target set must share the domain grid");
  const RasterSet d_sigma = polarize(d, h);
  const RasterSet a_sigma = polarize(a, h);
  const Point x_sigma = polarized_point(d, h, x);
  const Domain dom = Domain::raster(d), dom_sigma = Domain::raster(d_sigma);
  SimConfig cfg = opt.cfg;
  cfg.max_time = t;
  cfg.dt = std::min(cfg.dt, t);
  CheckOptions run = opt;
  run.cfg = cfg;
  auto arm = [&](const Domain& dm, const RasterSet& tgt, const Point& start) {
    return [&, start](Rng& r) {
      const StoppedPath p = sample_exit(dm, start, cfg, r);
      return p.truncated && tgt.contains(p.exit_point) ? 1.0 : 0.0;
    };
  };
  const PairedEstimate p = paired_estimate(opt.n, run, arm(dom, a, x), arm(dom_sigma, a_sigma, x_sigma));
  json params = {{"t", t}, {"x", point_json(x)}, {"x_sigma", point_json(x_sigma)},
                 {"normal", point_json(h.normal)}, {"offset", h.offset}, {"n", opt.n}, {"paired", opt.paired}};
  return make_verdict("polarization-exit", p.lhs, p.rhs, p.diff.std_error, opt.cfg.seed, std::move(params),
                      opt.z_crit);
}

// ---------------------------------------------------------------- capacity

std::vector<Verdict> check_capacity_isoperimetric(const RasterSet& k, int axis, double alpha, int iters) {
  if (k.dim() != 3) throw std::invalid_argument("capacity check needs a 3D raster");
  if (k.empty()) throw std::invalid_argument("surface extraction failed: degenerate set");
  const RasterSet st = steiner(k, axis);
  // K* on an origin-centred grid with the same cell.
  const double r = ball_radius_for_volume(3, volume(k));
  const Point lo = Point::Constant(3, -r - 2 * k.cell()), hi = Point::Constant(3, r + 2 * k.cell());
  const RasterSet ks = rasterize(Domain::ball(Point::Zero(3), r), grid_covering(lo, hi, k.cell()));
  auto cloud = [&](const RasterSet& s) {
    if (alpha == 2.0) return surface_points(s);
    std::vector<Point> pts;
    s.for_each_set([&](std::size_t i) { pts.push_back(s.center(i)); });
    if (pts.size() < 2) throw std::invalid_argument("surface extraction failed: degenerate set");
    return pts;
  };
  const auto ck = capacity_energy(cloud(k), alpha, 3, iters).capacity;
  const auto cs = capacity_energy(cloud(st), alpha, 3, iters).capacity;
  const auto cb = capacity_energy(cloud(ks), alpha, 3, iters).capacity;
  json params = {{"axis", axis}, {"alpha", alpha}, {"iters", iters}, {"cell", k.cell()},
                 {"volume", volume(k)}, {"cap_K", ck.mean}, {"cap_St", cs.mean}, {"cap_ball", cb.mean}};
  // Orientation: margin = Cap(K) - Cap(St K) and Cap(St K) - Cap(K*).
  return {make_verdict("capacity-steiner", cs, ck, std::hypot(ck.std_error, cs.std_error), 0, params),
          make_verdict("capacity-schwarz", cb, cs, std::hypot(cs.std_error, cb.std_error), 0, params)};
}

// ---------------------------------------------------------------- eigenvalues

std::vector<double> kac_auto_grid(const Domain& d, const Point& x, const SimConfig& cfg) {
  SimConfig pilot = cfg;
  pilot.seed = derive_seed(cfg.seed, 0x9170ULL);
  const Estimate tau = expected_exit_time(d, x, 2000, pilot);
  if (!(tau.mean > 0)) throw std::runtime_error("pilot exit time is zero; domain too thin for dt");
  std::vector<double> grid;
  for (int k = 0; k < 6; ++k) grid.push_back(tau.mean * (0.6 + 0.5 * k));
  return grid;
}

namespace {

Estimate kac_auto(const Domain& d, const Point& x, std::size_t n, const SimConfig& cfg, json* info) {
  const auto grid = kac_auto_grid(d, x, cfg);
  SimConfig run = cfg;
  run.max_time = std::max(cfg.max_time, grid.back());
  if (info) (*info)["t_grid"] = grid;
  return kac_eigenvalue(d, x, grid, n, run);
}

}  // namespace

Verdict check_faber_krahn(const Domain& d, const CheckOptions& opt) {
  const Point x = bbox_center(d);
  if (!contains(d, x)) throw std::invalid_argument("bounding-box center must lie in the domain");
  const Domain ball = schwarz_ball(d);
  json info_d, info_b;
  const Estimate ld = kac_auto(d, x, opt.n, opt.cfg, &info_d);
  const Estimate lb = kac_auto(ball, Point::Zero(d.dim()), opt.n, opt.cfg, &info_b);
  json params = {{"domain", d.kind()}, {"n", opt.n}, {"t_grid_domain", info_d["t_grid"]},
                 {"t_grid_ball", info_b["t_grid"]}};
  return make_verdict("faber-krahn", lb, ld, std::hypot(ld.std_error, lb.std_error), opt.cfg.seed,
                      std::move(params), opt.z_crit);
}

std::vector<Verdict> check_eigen_brunn_minkowski(const BallShape& b, const BallShape& d, const CheckOptions& opt) {
  if (b.center.size() != d.center.size()) throw std::invalid_argument("balls must share a dimension");
  const Domain inter = Domain::ball_intersection({b, d});  // throws when empty
  const int dim = static_cast<int>(b.center.size());
  const BallShape c{0.5 * (b.center + d.center), 0.5 * (b.radius + d.radius)};
  const Domain db = Domain::ball(b.center, b.radius), dd = Domain::ball(d.center, d.radius),
               dc = Domain::ball(c.center, c.radius);
  const Estimate lb = kac_auto(db, b.center, opt.n, opt.cfg, nullptr);
  const Estimate ld = kac_auto(dd, d.center, opt.n, opt.cfg, nullptr);
  const Estimate lc = kac_auto(dc, c.center, opt.n, opt.cfg, nullptr);
  const Point xi = bbox_center(inter);
  if (!contains(inter, xi)) throw std::invalid_argument("intersection center outside the lens");
  const Estimate li = kac_auto(inter, xi, opt.n, opt.cfg, nullptr);

  json params = {{"B", {{"center", point_json(b.center)}, {"radius", b.radius}}},
                 {"D", {{"center", point_json(d.center)}, {"radius", d.radius}}},
                 {"n", opt.n}, {"dim", dim}};
  std::vector<Verdict> out;
  Estimate half;
  half.mean = 0.5 * (lb.mean + ld.mean);
  half.std_error = 0.5 * std::hypot(lb.std_error, ld.std_error);
  half.n = opt.n;
  half.seed = opt.cfg.seed;
  out.push_back(make_verdict("eigen-bm-minkowski", lc, half, std::hypot(lc.std_error, half.std_error),
                             opt.cfg.seed, params, opt.z_crit));
  Estimate sum = half;
  sum.mean *= 2;
  sum.std_error *= 2;
  out.push_back(make_verdict("eigen-bm-intersection", li, sum, std::hypot(li.std_error, sum.std_error),
                             opt.cfg.seed, params, opt.z_crit));

  // Interpolation at λ = ½: P_m(T_C > t) >= sqrt(P_x(T_B > t) P_y(T_D > t)).
  const double t = 0.25 * std::min(b.radius, d.radius) * std::min(b.radius, d.radius);
  SimConfig cfg = opt.cfg;
  cfg.max_time = t;
  cfg.dt = std::min(cfg.dt, t);
  const PathMoments m = run_paths(opt.n, 3, opt.cfg.seed, opt.cfg.workers, [&](std::uint64_t, Rng& rng, double* o) {
    Rng r1 = rng, r2 = rng;
    o[0] = survival_indicator(dc, c.center, cfg, rng, Process::brownian());
    o[1] = survival_indicator(db, b.center, cfg, r1, Process::brownian());
    o[2] = survival_indicator(dd, d.center, cfg, r2, Process::brownian());
    return false;
  });
  const double pc = m.mean(0), pb = m.mean(1), pd = m.mean(2);
  Estimate lhs;
  lhs.mean = std::sqrt(pb * pd);
  lhs.n = opt.n;
  lhs.seed = opt.cfg.seed;
  const Estimate rhs = estimate_from(m, 0, opt.cfg.seed);
  // Delta method on g = P_C - sqrt(P_B P_D) with the joint covariance.
  const double gb = pb > 0 ? -0.5 * std::sqrt(pd / pb) : 0, gd = pd > 0 ? -0.5 * std::sqrt(pb / pd) : 0;
  const double g[3] = {1.0, gb, gd};
  double var = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) var += g[i] * g[j] * m.covariance(i, j);
  const double sigma = std::sqrt(std::max(var, 0.0) / static_cast<double>(opt.n));
  lhs.std_error = 0.5 * std::hypot(pb > 0 ? std::sqrt(pd / pb) * std::sqrt(m.variance(1) / opt.n) : 0,
                                   pd > 0 ? std::sqrt(pb / pd) * std::sqrt(m.variance(2) / opt.n) : 0);
  json ip = params;
  ip["t"] = t;
  ip["lambda"] = 0.5;
  ip["p_C"] = pc;
  out.push_back(make_verdict("interpolation-lemma", lhs, rhs, sigma, opt.cfg.seed, std::move(ip), opt.z_crit));
  return out;
}

// ---------------------------------------------------------------- harmonic measure checks

Verdict check_dubinin(const std::vector<double>& alphas, double a, const CheckOptions& opt) {
  const std::size_t n_slits = alphas.size();
  if (n_slits < 2 || n_slits > 6) throw std::invalid_argument("Dubinin check needs 2 to 6 slits");
  if (!(a > 0 && a < 1)) throw std::invalid_argument("need 0 < a < 1");
  std::vector<double> even;
  for (std::size_t j = 0; j < n_slits; ++j)
    even.push_back(2 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_slits));
  const Domain d = Domain::slit_disk(alphas, a), de = Domain::slit_disk(even, a);
  const BoundarySet slits = BoundarySet::parse("slits");
  const Point o = Point::Zero(2);
  auto arm = [&](const Domain& dm) {
    return [&](Rng& r) {
      const BoundaryHit h = walk_on_spheres(dm, o, opt.cfg, r);
      return !h.truncated && slits.matches(h.point, h.label) ? 1.0 : 0.0;
    };
  };
  const PairedEstimate p = paired_estimate(opt.n, opt, arm(d), arm(de));
  json params = {{"alphas", alphas}, {"even", even}, {"a", a}, {"n", opt.n}, {"paired", opt.paired},
                 {"eps_shell", opt.cfg.eps_shell}};
  return make_verdict("dubinin", p.lhs, p.rhs, p.diff.std_error, opt.cfg.seed, std::move(params), opt.z_crit);
}

Verdict check_carleman(const std::vector<double>& xs, const std::vector<double>& widths, const Point& z0, double r0,
                       double b, const CheckOptions& opt) {
  const Domain d = Domain::channel(xs, widths);
  if (z0.size() != 2) throw std::invalid_argument("z0 must be a 2D point");
  if (!(r0 > 0) || !contains(d, z0) || boundary_distance(d, z0) < r0)
    throw std::invalid_argument("B(z0, r0) must lie inside the channel");
  const double x0 = z0(0);
  if (b < x0) throw std::invalid_argument("need b >= Re z0");
  const double m = *std::max_element(widths.begin(), widths.end());
  auto width = [&](double x) {
    if (x <= xs.front()) return widths.front();
    if (x >= xs.back()) return widths.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double s = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return widths[i - 1] + s * (widths[i] - widths[i - 1]);
  };
  const double bound = carleman_bound(width, m, r0, x0, b);
  std::ostringstream spec;
  spec << "halfspace:0>=" << std::setprecision(17) << b;
  const Estimate w = harmonic_measure(d, BoundarySet::parse(spec.str()), z0, opt.n, opt.cfg);
  json params = {{"xs", xs}, {"widths", widths}, {"z0", point_json(z0)}, {"r0", r0}, {"b", b}, {"M", m},
                 {"n", opt.n}};
  return make_verdict("carleman", w, exact_value(bound), w.std_error, opt.cfg.seed, std::move(params), opt.z_crit);
}

// ---------------------------------------------------------------- sausage

Verdict check_wiener_sausage(const ShapeFamily& shapes, const ShapeFamily& balls, double t, double dt,
                             const RasterSet& box, const CheckOptions& opt) {
  if (!(t > 0) || !(dt > 0)) throw std::invalid_argument("need t > 0 and dt > 0");
  if (shapes.shapes.empty() || balls.shapes.empty()) throw std::invalid_argument("empty shape family");
  // Per-slice volume match, within the raster tolerance of the box grid.
  for (double s : shapes.times) {
    const auto va = analytic_volume(shapes.at(s)), vb = analytic_volume(balls.at(s));
    if (va && vb && std::abs(*va - *vb) > 0.02 * *vb)
      throw std::invalid_argument("shape and ball volumes differ per slice");
  }
  const int dim = box.dim();
  const PairedEstimate p = [&] {
    CheckOptions run = opt;
    return paired_estimate(
        opt.n, run,
        [&](Rng& r) { return sausage_volume_centred(sample_path(Point::Zero(dim), t, dt, r), dt, balls, box); },
        [&](Rng& r) { return sausage_volume_centred(sample_path(Point::Zero(dim), t, dt, r), dt, shapes, box); });
  }();
  json params = {{"t", t}, {"dt", dt}, {"cell", box.cell()}, {"n", opt.n}, {"paired", opt.paired}};
  return make_verdict("wiener-sausage", p.lhs, p.rhs, p.diff.std_error, opt.cfg.seed, std::move(params), opt.z_crit);
}

// ---------------------------------------------------------------- star function

std::vector<Verdict> check_star_dominance(const Domain& d, const Domain& cir_d, double r, const BoundarySet& outer_d,
                                          const BoundarySet& outer_cir, const CheckOptions& opt) {
  if (d.dim() != 2 || cir_d.dim() != 2) throw std::invalid_argument("star dominance is planar");
  if (!(r > 0)) throw std::invalid_argument("r must be > 0");
  outer_d.validate(d);
  outer_cir.validate(cir_d);
  constexpr int kAngles = 64;
  std::vector<Estimate> u(kAngles), v(kAngles);
  for (int i = 0; i < kAngles; ++i) {
    const double th = -std::numbers::pi + 2 * std::numbers::pi * i / kAngles;
    Point z(2);
    z << r * std::cos(th), r * std::sin(th);
    // Points of |z| = r outside the open domain carry zero harmonic measure.
    if (contains(d, z)) u[static_cast<std::size_t>(i)] = harmonic_measure(d, outer_d, z, opt.n, opt.cfg);
    if (contains(cir_d, z)) v[static_cast<std::size_t>(i)] = harmonic_measure(cir_d, outer_cir, z, opt.n, opt.cfg);
  }
  json params = {{"r", r}, {"angles", kAngles}, {"n", opt.n}, {"domain", d.kind()}, {"cir_domain", cir_d.kind()}};
  std::vector<Verdict> out;

  // sup_θ u <= v(r) (θ = 0 sits at index kAngles/2).
  std::size_t arg = 0;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i].mean > u[arg].mean) arg = i;
  const Estimate& v0 = v[kAngles / 2];
  json sp = params;
  sp["argmax_theta"] = -std::numbers::pi + 2 * std::numbers::pi * static_cast<double>(arg) / kAngles;
  out.push_back(make_verdict("star-sup", u[arg], v0, std::hypot(u[arg].std_error, v0.std_error), opt.cfg.seed,
                             std::move(sp), opt.z_crit));

  // Star functions of the sampled angular profiles, compared pointwise.
  std::vector<std::size_t> ou(kAngles), ov(kAngles);
  std::iota(ou.begin(), ou.end(), 0);
  std::iota(ov.begin(), ov.end(), 0);
  std::stable_sort(ou.begin(), ou.end(), [&](auto a, auto b) { return u[a].mean > u[b].mean; });
  std::stable_sort(ov.begin(), ov.end(), [&](auto a, auto b) { return v[a].mean > v[b].mean; });
  const double h = 2 * std::numbers::pi / kAngles;
  double su = 0, sv = 0, vu = 0, vv = 0;
  double worst_z = std::numeric_limits<double>::infinity();
  Estimate wl, wr;
  double wsig = 0;
  int wk = 0;
  for (int k = 1; k <= kAngles; ++k) {
    const auto& eu = u[ou[static_cast<std::size_t>(k - 1)]];
    const auto& ev = v[ov[static_cast<std::size_t>(k - 1)]];
    su += h * eu.mean;
    sv += h * ev.mean;
    vu += h * h * eu.std_error * eu.std_error;
    vv += h * h * ev.std_error * ev.std_error;
    const double sig = std::sqrt(vu + vv);
    const double m = sv - su;
    const double z = sig > 0 ? m / sig : (m == 0 ? 0 : std::copysign(std::numeric_limits<double>::infinity(), m));
    if (z < worst_z) {
      worst_z = z;
      wl = exact_value(su);
      wl.std_error = std::sqrt(vu);
      wr = exact_value(sv);
      wr.std_error = std::sqrt(vv);
      wsig = sig;
      wk = k;
    }
  }
  json fp = params;
  fp["worst_l"] = 0.5 * h * wk;
  out.push_back(make_verdict("star-function", wl, wr, wsig, opt.cfg.seed, std::move(fp), opt.z_crit));

  // Φ = identity: mean over θ.
  Estimate mu, mv;
  for (int i = 0; i < kAngles; ++i) {
    mu.mean += u[static_cast<std::size_t>(i)].mean / kAngles;
    mv.mean += v[static_cast<std::size_t>(i)].mean / kAngles;
    mu.std_error += std::pow(u[static_cast<std::size_t>(i)].std_error / kAngles, 2);
    mv.std_error += std::pow(v[static_cast<std::size_t>(i)].std_error / kAngles, 2);
  }
  mu.std_error = std::sqrt(mu.std_error);
  mv.std_error = std::sqrt(mv.std_error);
  mu.n = mv.n = opt.n;
  mu.seed = mv.seed = opt.cfg.seed;
  out.push_back(make_verdict("star-mean", mu, mv, std::hypot(mu.std_error, mv.std_error), opt.cfg.seed,
                             std::move(params), opt.z_crit));
  return out;
}

// ---------------------------------------------------------------- suite runner

namespace {

CheckOptions options(const json& p, std::uint64_t seed, unsigned workers) {
  CheckOptions o;
  o.n = static_cast<std::size_t>(param_number(p, "n", 20000));
  o.cfg.dt = param_number(p, "dt", 1e-3);
  o.cfg.max_time = param_number(p, "max_time", 10);
  o.cfg.eps_shell = param_number(p, "eps_shell", 1e-4);
  o.cfg.adaptive = param_number(p, "adaptive", 0.05);
  o.cfg.slit_eps = param_number(p, "slit_eps", 0);
  o.cfg.seed = seed;
  o.cfg.workers = workers;
  o.paired = p.value("paired", true);
  o.z_crit = param_number(p, "z_crit", 4.0);
  o.cfg.validate();
  return o;
}

RasterSet raster_of(const json& p, int dim) {
  const Domain d = parse_domain(param_string(p, "domain"), dim);
  const auto [lo, hi] = bounding_box(d);
  const double cell = param_number(p, "cell", (hi - lo).maxCoeff() / param_number(p, "cells", 64));
  RasterSet grid = grid_covering(lo - Point::Constant(d.dim(), cell), hi + Point::Constant(d.dim(), cell), cell);
  RasterSet s = rasterize(d, grid);
  if (p.contains("remove")) s -= rasterize(parse_domain(param_string(p, "remove"), dim), grid);
  return s;
}

using CheckFn = std::vector<Verdict> (*)(const json&, const CheckOptions&);

const std::map<std::string, CheckFn>& registry() {
  static const std::map<std::string, CheckFn> r = {
      {"bll-discrete",
       [](const json& p, const CheckOptions& o) {
         BllInstance inst;
         if (p.contains("f")) {
           inst.k = p.at("K").get<int>();
           inst.f = p.at("f").get<std::vector<std::vector<std::int64_t>>>();
           inst.a = p.at("A").get<std::vector<int>>();
           inst.z0 = p.value("z0", 0);
           return std::vector<Verdict>{check_bll_discrete(inst)};
         }
         std::vector<Verdict> out;
         const int count = p.value("instances", 1);
         for (int i = 0; i < count; ++i) {
           Verdict v = check_bll_discrete(random_bll_instance(derive_seed(o.cfg.seed, static_cast<std::uint64_t>(i)),
                                                              p.value("max_m", 2), p.value("max_grid", 21)));
           v.seed = o.cfg.seed;
           v.params["instance"] = i;
           out.push_back(std::move(v));
         }
         return out;
       }},
      {"survival-isoperimetric",
       [](const json& p, const CheckOptions& o) {
         const Domain d = parse_domain(param_string(p, "domain"), p.value("dim", 2));
         const Process proc = p.contains("alpha") ? Process::stable_process(param_number(p, "alpha", 2)) : Process::brownian();
         std::vector<Point> zs;
         if (p.contains("z_grid"))
           for (const auto& z : p.at("z_grid")) zs.push_back(parse_point(z.get<std::string>()));
         return std::vector<Verdict>{check_survival_isoperimetric(d, param_number(p, "t", 0.3), proc, zs, o)};
       }},
      {"polarization-exit",
       [](const json& p, const CheckOptions& o) {
         const RasterSet d = raster_of(p, 2);
         const Hyperplane h(param_point(p, "normal"), param_number(p, "offset", 0));
         return std::vector<Verdict>{check_polarization_exit(d, h, param_point(p, "x"), param_number(p, "t", 0.1), o)};
       }},
      {"capacity-isoperimetric",
       [](const json& p, const CheckOptions&) {
         return check_capacity_isoperimetric(raster_of(p, 3), p.value("axis", 2), param_number(p, "alpha", 2),
                                             p.value("iters", 2000));
       }},
      {"faber-krahn",
       [](const json& p, const CheckOptions& o) {
         return std::vector<Verdict>{check_faber_krahn(parse_domain(param_string(p, "domain"), p.value("dim", 2)), o)};
       }},
      {"dubinin",
       [](const json& p, const CheckOptions& o) {
         return std::vector<Verdict>{check_dubinin(param_list(p, "alphas"), param_number(p, "a", 0.3), o)};
       }},
      {"carleman",
       [](const json& p, const CheckOptions& o) {
         return std::vector<Verdict>{
             check_carleman(param_list(p, "xs"), param_list(p, "widths"), param_point(p, "z0"), param_number(p, "r0", 0.1), param_number(p, "b", 1), o)};
       }},
      {"eigen-brunn-minkowski",
       [](const json& p, const CheckOptions& o) {
         const int dim = p.value("dim", 2);
         return check_eigen_brunn_minkowski(parse_ball(param_string(p, "B"), dim), parse_ball(param_string(p, "D"), dim), o);
       }},
      {"wiener-sausage",
       [](const json& p, const CheckOptions& o) {
         const Domain shape = parse_domain(param_string(p, "shape"), 3);
         const double vol = analytic_volume(shape).value_or(volume(rasterize(shape)));
         const Domain ball = Domain::ball(Point::Zero(3), ball_radius_for_volume(3, vol));
         const double cell = param_number(p, "cell", 0.1);
         const int cells = p.value("box_cells", 160);
         const RasterSet box(3, Point::Constant(3, -0.5 * cells * cell), cell, {cells, cells, cells});
         return std::vector<Verdict>{check_wiener_sausage(ShapeFamily::constant(shape), ShapeFamily::constant(ball),
                                                          param_number(p, "t", 4), param_number(p, "path_dt", 0.01), box, o)};
       }},
      {"star-dominance",
       [](const json& p, const CheckOptions& o) {
         const Domain d = parse_domain(param_string(p, "domain"), 2);
         const RasterSet mask = rasterize(d, param_number(p, "cell", 2.0 / 256));
         const Domain cir = Domain::raster(circular(mask), param_number(p, "outer_radius", 1.0));
         return check_star_dominance(d, cir, param_number(p, "r", 0.5), BoundarySet::parse(p.value("outer", "outer")),
                                     BoundarySet::parse("outer"), o);
       }},
  };
  return r;
}

}  // namespace

std::vector<std::string> registered_checks() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

std::vector<Verdict> run_check(const json& entry, std::uint64_t default_seed, unsigned workers) {
  const std::string name = entry.at("check").get<std::string>();
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown check '" + name + "'");
  const std::uint64_t seed = entry.value("seed", default_seed);
  const json params = entry.value("params", json::object());
  auto out = it->second(params, options(params, seed, workers));
  for (auto& v : out) {
    v.params["check"] = name;
    if (!v.exact) v.seed = seed;
  }
  return out;
}

}  // namespace isop
