// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria, then the reproducibility re-runs
//   acceptance 3 5 9      only the listed criteria (13 re-runs those)

#include "isop/estimators.hpp"
#include "isop/harness.hpp"
#include "isop/records.hpp"
#include "isop/rng.hpp"
#include "isop/symmetrize.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace isop;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
  json records = json::array();  // everything a run produced, for criterion 13
};

struct Run {
  std::uint64_t seed;
  unsigned workers;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SimConfig sim(const Run& r, double dt = 1e-5, double adaptive = 0.05, double max_time = 50) {
  SimConfig c;
  c.dt = dt;
  c.adaptive = adaptive;
  c.max_time = max_time;
  c.seed = r.seed;
  c.workers = r.workers;
  return c;
}

bool within(const Estimate& e, double truth, double k) { return std::abs(e.mean - truth) <= k * e.std_error; }

// 1. Harmonic measure of the inner circle of an annulus.
Outcome kakutani(const Run& r) {
  const Domain ann = Domain::annulus(make_point({0, 0}), 0.5, 2.0);
  const Estimate e = harmonic_measure(ann, BoundarySet::parse("inner"), make_point({1, 0}), 100000, sim(r));
  const double truth = oracle::annulus_inner(0.5, 2.0, 1.0);
  Outcome o;
  o.pass = std::abs(e.mean - truth) <= 0.01 && within(e, truth, 3);
  o.detail = fmt("%.5f ± %.5f, oracle %.5f", e.mean, e.std_error, truth);
  o.records.push_back(to_json(e));
  return o;
}

// 2. Expected exit time from the center of the unit ball in R^3.
Outcome exit_time(const Run& r) {
  const Domain ball = Domain::ball(make_point({0, 0, 0}), 1.0);
  const Estimate e = expected_exit_time(ball, make_point({0, 0, 0}), 100000, sim(r));
  const double truth = oracle::ball_exit_time(1, 0, 3);
  Outcome o;
  o.pass = std::abs(e.mean - truth) <= 0.02 * truth;
  o.detail = fmt("%.5f ± %.5f, oracle %.5f", e.mean, e.std_error, truth);
  o.records.push_back(to_json(e));
  return o;
}

// 3. Kac eigenvalue of the unit disk and the unit square.
Outcome kac(const Run& r) {
  const std::size_t n = 1000000;
  const Domain disk = Domain::ball(make_point({0, 0}), 1.0);
  const Domain square = Domain::box(make_point({-0.5, -0.5}), make_point({0.5, 0.5}));
  const std::vector<double> disk_grid{0.5, 0.9, 1.3, 1.7, 2.1, 2.5};
  const std::vector<double> square_grid{0.15, 0.3, 0.45, 0.6, 0.75, 0.9};
  const Estimate ld = kac_eigenvalue(disk, make_point({0, 0}), disk_grid, n, sim(r));
  const Estimate ls = kac_eigenvalue(square, make_point({0, 0}), square_grid, n, sim(r));
  const double td = oracle::disk_eigenvalue(1.0), ts = oracle::box_eigenvalue({1, 1});
  Outcome o;
  o.pass = std::abs(ld.mean - td) <= 0.1 * td && std::abs(ls.mean - ts) <= 0.1 * ts;
  o.detail = fmt("disk %.4f ± %.4f (oracle %.4f), square %.4f ± %.4f (oracle %.4f)", ld.mean, ld.std_error, td,
                 ls.mean, ls.std_error, ts);
  o.records.push_back(to_json(ld));
  o.records.push_back(to_json(ls));
  return o;
}

// 4. Faber-Krahn: unit square against the disk of equal area, 20 seeds.
Outcome faber_krahn(const Run& r) {
  Outcome o;
  int detected = 0, wrong = 0;
  double zmin = INFINITY, zmax = -INFINITY, margin = 0;
  const Domain square = parse_domain("rectangle:1,1");
  for (std::uint64_t s = 0; s < 20; ++s) {
    CheckOptions opt;
    opt.n = 50000;
    opt.cfg = sim({derive_seed(r.seed, s), r.workers});
    const Verdict v = check_faber_krahn(square, opt);
    detected += v.z >= 2 ? 1 : 0;
    wrong += v.z <= -4 ? 1 : 0;
    zmin = std::min(zmin, v.z);
    zmax = std::max(zmax, v.z);
    margin += v.margin / 20;
    o.records.push_back(to_json(v));
  }
  o.pass = detected == 20 && wrong == 0;
  o.detail = fmt("mean margin %.3f (expected 0.79), z in [%.2f, %.2f], z >= 2 on %d/20", margin, zmin, zmax, detected);
  return o;
}

// 5. Capacity of the unit ball: Spitzer fit against energy minimization.
Outcome spitzer(const Run& r) {
  const Domain ball = Domain::ball(make_point({0, 0, 0}), 1.0);
  const Domain box = Domain::box(make_point({-7, -7, -7}), make_point({7, 7, 7}));
  SimConfig cfg = sim(r, 1e-4);
  const HeatContentCurve hc = heat_content_curve(ball, {0.25, 1.0, 2.25}, box, 40000000, cfg);
  const SpitzerFit fit = spitzer_fit(hc, r.seed);
  const CapacityResult en = capacity_energy(fibonacci_sphere(2000), 2.0, 3, 2000);
  const double truth = 2 * std::numbers::pi;
  const double cs = fit.capacity.mean, ce = en.capacity.mean;
  Outcome o;
  o.pass = std::abs(cs - truth) <= 0.07 * truth && std::abs(ce - truth) <= 0.03 * truth &&
           std::abs(cs - ce) <= 0.1 * std::max(cs, ce);
  o.detail = fmt("Spitzer %.3f ± %.3f, energy %.4f (%d iterations), 2π = %.4f", cs, fit.capacity.std_error, ce,
                 static_cast<int>(en.energy_trace.size()), truth);
  o.records.push_back(to_json(fit.capacity));
  for (const auto& v : hc.values) o.records.push_back(to_json(v));
  o.records.push_back(to_json(en.capacity));
  return o;
}

// 6. Wiener sausage slope E/t at t = 16 for the unit ball.
Outcome sausage(const Run& r) {
  const ShapeFamily fam = ShapeFamily::constant(Domain::ball(make_point({0, 0, 0}), 1.0));
  const int cells = 256;
  const double cell = 0.125;
  const RasterSet box(3, Point::Constant(3, -0.5 * cells * cell), cell, {cells, cells, cells});
  const double t = 16;
  const Estimate e = sausage_expectation(fam, t, 0.002, 200, box, sim(r, 1e-3, 0, 20));
  const double slope = e.mean / t, truth = 2 * std::numbers::pi;
  Outcome o;
  o.pass = std::abs(slope - truth) <= 0.1 * truth;
  o.detail = fmt("E/t = %.3f ± %.3f against 2π = %.4f (exact E/t at this t is %.3f)", slope, e.std_error / t, truth,
                 oracle::ball_heat_content(1, t) / t);
  o.records.push_back(to_json(e));
  return o;
}

// 7. Discrete rearrangement inequality on 1000 random instances.
Outcome bll(const Run& r) {
  Outcome o;
  int holds = 0, fixed = 0, fixed_equal = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const BllInstance inst = random_bll_instance(derive_seed(r.seed, i), 2, 21);
    const Verdict v = check_bll_discrete(inst);
    holds += v.margin >= 0 && v.status == Status::consistent ? 1 : 0;
    // Instances already equal to their rearrangement must give equality.
    BllInstance star = inst;
    for (auto& f : star.f) f = oracle::rearranged(f);
    const int len = static_cast<int>(inst.a.size());
    star.a.clear();
    for (int j = -(len / 2); j < len - len / 2; ++j) star.a.push_back(j);
    star.z0 = 0;
    const Verdict w = check_bll_discrete(star);
    ++fixed;
    fixed_equal += w.margin == 0 ? 1 : 0;
    o.records.push_back(to_json(v));
  }
  o.pass = holds == 1000 && fixed_equal == fixed;
  o.detail = fmt("inequality on %d/1000, equality on %d/%d rearrangement-fixed", holds, fixed_equal, fixed);
  return o;
}

// 8. Survival probability: rectangle of area π against the unit disk.
Outcome survival(const Run& r) {
  const double a = std::sqrt(2 * std::numbers::pi), b = std::sqrt(std::numbers::pi / 2), t = 0.3;
  const Domain rect = Domain::box(make_point({-a / 2, -b / 2}), make_point({a / 2, b / 2}));
  CheckOptions opt;
  opt.n = 200000;
  opt.cfg = sim(r, 1e-5, 0.05, t);
  opt.z_crit = 3;
  const Verdict v2 = check_survival_isoperimetric(rect, t, Process::stable_process(2.0), {}, opt);
  // alpha = 2 runs at twice the speed of the ½Δ motion.
  const double rect_truth = oracle::box_survival({a, b}, {0, 0}, 2 * t);
  const double disk_truth = oracle::disk_survival_center(1, 2 * t);
  CheckOptions opt15 = opt;
  // Stable steps cannot adapt to the boundary; a coarser fixed step keeps the
  // cost down and only affects both arms alike.
  opt15.n = 20000;
  opt15.cfg.dt = 1e-4;
  const Verdict v15 = check_survival_isoperimetric(rect, t, Process::stable_process(1.5), {}, opt15);
  Outcome o;
  o.pass = v2.margin > 0 && v2.z >= 3 && within(v2.lhs, rect_truth, 3) && within(v2.rhs, disk_truth, 3) &&
           v15.status == Status::consistent;
  o.detail = fmt("α=2: rect %.4f (oracle %.4f), disk %.4f (oracle %.4f), z = %.1f; α=1.5: margin %.4f, z = %.1f, %s",
                 v2.lhs.mean, rect_truth, v2.rhs.mean, disk_truth, v2.z, v15.margin, v15.z, to_string(v15.status).c_str());
  o.records.push_back(to_json(v2));
  o.records.push_back(to_json(v15));
  return o;
}

RasterSet random_mask(Rng& rng, int n, double fill) {
  RasterSet a(2, make_point({-1, -1}), 2.0 / n, {n, n, 1});
  for (std::size_t i = 0; i < a.size(); ++i)
    if (rng.uniform() < fill) a.set(i);
  return a;
}

// Independent two-point rule, mirrors found by search over cell centers.
RasterSet polarize_oracle(const RasterSet& a, const Hyperplane& h) {
  RasterSet out = a.empty_like();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Point x = a.center(i);
    const Point m = reflect(x, h);
    bool mirror = false;
    for (std::size_t j = 0; j < a.size(); ++j)
      if ((a.center(j) - m).norm() < 1e-6 * a.cell()) mirror = a.test(j);
    const bool in = a.test(i);
    const double s = h.side(x);
    if (std::abs(s) < 1e-9 ? in : (s > 0 ? in || mirror : in && mirror)) out.set(i);
  }
  return out;
}

// Random axis or diagonal plane that maps cell centers of the inner block
// onto cell centers, and a mask confined to that block.
Hyperplane random_plane(Rng& rng, double cell) {
  const int kind = static_cast<int>(rng.uniform() * 3);
  const double sgn = rng.uniform() < 0.5 ? 1 : -1;
  if (kind == 2) return Hyperplane(make_point({sgn, -sgn * (rng.uniform() < 0.5 ? 1 : -1)}), 0.0);
  Point n = make_point({0, 0});
  n(kind) = sgn;
  return Hyperplane(n, sgn * 0.5 * (static_cast<int>(rng.uniform() * 7) - 3) * cell);
}

RasterSet inner_block(RasterSet a, int lo, int hi) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto c = a.coords(i);
    if (c[0] < lo || c[0] > hi || c[1] < lo || c[1] > hi) a.set(i, false);
  }
  return a;
}

// 9. Polarization on masks.
Outcome polarization(const Run& r) {
  Rng rng(r.seed);
  int oracle_ok = 0, idem_ok = 0, smooth_ok = 0, reached = 0;
  for (int i = 0; i < 1000; ++i) {
    const RasterSet a = inner_block(random_mask(rng, 16, 0.4), 4, 11);
    const Hyperplane h = random_plane(rng, a.cell());
    oracle_ok += polarize(a, h) == polarize_oracle(a, h) ? 1 : 0;
  }
  for (int i = 0; i < 100; ++i) {
    const RasterSet a = inner_block(random_mask(rng, 20, 0.25), 7, 12);
    const Hyperplane h = random_plane(rng, a.cell());
    const double rad = a.cell() * (0.5 + 2 * rng.uniform());
    const RasterSet p = polarize(a, h);
    idem_ok += polarize(p, h) == p ? 1 : 0;
    smooth_ok += dilate(p, rad).subset_of(polarize(dilate(a, rad), h)) ? 1 : 0;
  }
  json trace = json::array();
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng mr(derive_seed(r.seed, i));
    const RasterSet a = random_mask(mr, 64, 0.1 + 0.5 * mr.uniform());
    const ScheduleResult res = polarization_schedule_to_steiner(a, grid_center_plane(a, 1), 500, derive_seed(r.seed, i));
    reached += res.distances.back() <= 2 * a.cell() + 1e-12 ? 1 : 0;
    trace.push_back({{"applied", res.applied}, {"final", res.distances.back()}});
  }
  Outcome o;
  o.pass = oracle_ok == 1000 && idem_ok == 100 && smooth_ok == 100 && reached >= 95;
  o.detail = fmt("oracle %d/1000, idempotent %d/100, smoothing %d/100, schedule %d/100", oracle_ok, idem_ok,
                 smooth_ok, reached);
  o.records = trace;
  return o;
}

// 10. Dubinin: two clustered slits against evenly spaced ones.
Outcome dubinin(const Run& r) {
  CheckOptions opt;
  opt.n = 400000;
  opt.cfg = sim(r, 1e-4, 0.05, 10);
  opt.z_crit = 3;
  const double pi = std::numbers::pi;
  const Verdict v = check_dubinin({0.0, pi / 6}, 0.3, opt);
  // A rotated copy of the even pair: equal in law, different paths.
  const Verdict eq = check_dubinin({pi / 3, pi / 3 + pi}, 0.3, opt);
  Outcome o;
  o.pass = v.margin >= 0 && v.z >= 3 && std::abs(eq.margin) < 2 * eq.sigma;
  o.detail = fmt("clustered margin %.5f (z = %.1f); even pair margin %.2e, σ %.2e", v.margin, v.z, eq.margin, eq.sigma);
  o.records.push_back(to_json(v));
  o.records.push_back(to_json(eq));
  return o;
}

// 11. Carleman bound on a strip and on a funnel.
Outcome carleman(const Run& r) {
  CheckOptions opt;
  opt.n = 50000;
  opt.cfg = sim(r, 1e-4, 0.05, 50);
  opt.z_crit = 3;
  Outcome o;
  bool all = true;
  double worst = INFINITY, quad_err = 0;
  for (double l : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 3.0})
      quad_err = std::max(quad_err, std::abs(carleman_bound([l](double) { return l; }, l, 0.2, 0.0, b) -
                                             oracle::strip_carleman(l, 0.2, 0.0, b)));
  for (double b : {0.8, 1.5, 2.5}) {
    const Verdict v = check_carleman({0.0, 6.0}, {1.0, 1.0}, make_point({0.3, 0.0}), 0.2, b, opt);
    all = all && v.status != Status::violation;
    worst = std::min(worst, v.z);
    o.records.push_back(to_json(v));
  }
  std::vector<double> xs, ws;
  for (int i = 0; i <= 60; ++i) {
    xs.push_back(0.1 * i);
    ws.push_back(1.0 / (1 + 0.1 * i));
  }
  for (double b : {0.6, 1.2, 2.0}) {
    const Verdict v = check_carleman(xs, ws, make_point({0.2, 0.0}), 0.15, b, opt);
    all = all && v.status != Status::violation;
    worst = std::min(worst, v.z);
    o.records.push_back(to_json(v));
  }
  o.pass = all && quad_err < 1e-6;
  o.detail = fmt("smallest z %.1f over 6 b values, quadrature error %.1e", worst, quad_err);
  return o;
}

// 12. Star function properties and the slit-disk sup comparison.
Outcome star(const Run& r) {
  Rng rng(r.seed);
  int ok = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 40);
    std::vector<double> vals(n);
    for (auto& v : vals) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform() * 2;
    const auto g = SampledFunction1D::on_interval(0.5 + rng.uniform(), vals);
    const auto s = star_function(g);
    const double h = g.spacing();
    bool good = s.values.front() == 0.0;
    for (std::size_t k = 1; k < s.values.size(); ++k) good = good && s.values[k] >= s.values[k - 1];
    for (std::size_t k = 1; k + 1 < s.values.size(); ++k)
      good = good && s.values[k] - s.values[k - 1] >= s.values[k + 1] - s.values[k] - 1e-12;
    for (int q = 0; q < 50; ++q) {
      std::size_t k = 0;
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (rng.uniform() < 0.5) {
          ++k;
          sum += vals[i] * h;
        }
      good = good && sum <= s.values[k] + 1e-12;
    }
    ok += good ? 1 : 0;
  }
  const json entry = {{"check", "star-dominance"},
                      {"params",
                       {{"domain", "slit-disk:0.3;pi/2"}, {"r", 0.5}, {"n", 4000}, {"cell", 0.0078125},
                        {"dt", 1e-5}, {"adaptive", 0.05}, {"z_crit", 3}}}};
  const auto vs = run_check(entry, r.seed, r.workers);
  const Verdict& sup = vs.front();
  Outcome o;
  o.pass = ok == 1000 && sup.status == Status::consistent;
  o.detail = fmt("random g %d/1000; slit-disk sup: margin %.4f, z = %.1f, %s", ok, sup.margin, sup.z,
                 to_string(sup.status).c_str());
  for (const auto& v : vs) o.records.push_back(to_json(v));
  return o;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(const Run&)> fn;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c = {
      {1, "annulus harmonic measure", kakutani}, {2, "ball exit time", exit_time},
      {3, "Kac eigenvalues", kac},               {4, "Faber-Krahn detection", faber_krahn},
      {5, "Spitzer capacity", spitzer},          {6, "Wiener sausage slope", sausage},
      {7, "discrete rearrangement (BLL)", bll},  {8, "survival isoperimetry", survival},
      {9, "polarization", polarization},         {10, "Dubinin slits", dubinin},
      {11, "Carleman bound", carleman},          {12, "star function", star},
  };
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Means (and exact margins) of a record list, in order.
std::vector<double> means(const json& records) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.contains("mean")) out.push_back(r["mean"].get<double>());
    if (r.contains("margin")) out.push_back(r["margin"].get<double>());
    if (r.contains("lhs")) out.push_back(r["lhs"]["mean"].get<double>());
    if (r.contains("rhs")) out.push_back(r["rhs"]["mean"].get<double>());
    if (r.contains("final")) out.push_back(r["final"].get<double>());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  const bool all = wanted.empty();
  int failed = 0;
  std::map<int, json> first;
  const Run base{kSeed, 1};
  for (const auto& c : criteria()) {
    if (!all && !wanted.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn(base);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    first[c.id] = o.records;
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }

  if (all || wanted.count(13)) {
    const auto t0 = std::chrono::steady_clock::now();
    int same_bytes = 0, same_means = 0, total = 0;
    std::string diff;
    for (const auto& c : criteria()) {
      if (!all && !wanted.count(c.id)) continue;
      json ref = first.count(c.id) ? first[c.id] : c.fn(base).records;
      const json again = c.fn(base).records;
      const json wide = c.fn({kSeed, 8}).records;
      ++total;
      if (again.dump() == ref.dump()) ++same_bytes;
      else diff += fmt(" bytes differ on %d;", c.id);
      if (means(wide) == means(ref)) ++same_means;
      else diff += fmt(" means differ with 8 workers on %d;", c.id);
    }
    const bool pass = total > 0 && same_bytes == total && same_means == total;
    failed += pass ? 0 : 1;
    std::printf("%s 13 reproducibility: same seed byte-identical on %d/%d, workers 1 vs 8 identical means on %d/%d%s "
                "[%.1f s]\n",
                pass ? "PASS" : "FAIL", same_bytes, total, same_means, total, diff.c_str(), seconds_since(t0));
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
