#include "isop/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace isop {

unsigned default_workers() {
  if (const char* env = std::getenv("ISOP_DEFAULT_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

Estimate estimate_from(const PathMoments& m, int k, std::uint64_t seed) {
  Estimate e;
  e.n = m.n();
  e.seed = seed;
  e.mean = m.mean(k);
  e.std_error = m.n() ? std::sqrt(m.variance(k) / static_cast<double>(m.n())) : 0.0;
  e.truncated_fraction = m.n() ? static_cast<double>(m.truncated()) / static_cast<double>(m.n()) : 0.0;
  return e;
}

void DiscreteMeasure::validate() const {
  if (points.size() != weights.size()) throw std::invalid_argument("points/weights size mismatch");
  double s = 0;
  for (double w : weights) {
    if (w < 0) throw std::invalid_argument("weights must be nonnegative");
    s += w;
  }
  if (std::abs(s - 1) > 1e-12) throw std::invalid_argument("weights must sum to 1");
}

namespace {

void require_n(std::size_t n) {
  if (n < 1) throw std::invalid_argument("need n >= 1 samples");
}

void require_inside(const Domain& d, const Point& x) {
  if (x.size() != d.dim()) throw std::invalid_argument("point dimension does not match domain");
  if (!contains(d, x)) throw std::invalid_argument("start point must lie inside the domain");
}

}  // namespace

Estimate harmonic_measure(const Domain& d, const BoundarySet& e, const Point& x, std::size_t n,
                          const SimConfig& cfg, Sampler sampler) {
  require_n(n);
  cfg.validate();
  require_inside(d, x);
  e.validate(d);
  const bool wos = sampler == Sampler::walk_on_spheres ||
                   (sampler == Sampler::automatic && has_signed_distance(d));
  if (wos && !has_signed_distance(d))
    throw std::invalid_argument("walk-on-spheres needs a domain with a signed distance");
  const PathMoments m = run_paths(n, 1, cfg.seed, cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
    if (wos) {
      const BoundaryHit h = walk_on_spheres(d, x, cfg, rng);
      out[0] = !h.truncated && e.matches(h.point, h.label) ? 1.0 : 0.0;
      return h.truncated;
    }
    const StoppedPath p = sample_exit(d, x, cfg, rng);
    out[0] = !p.truncated && e.matches(p.exit_point, p.boundary_label) ? 1.0 : 0.0;
    return p.truncated;
  });
  // Truncated paths leave both numerator and denominator.
  Estimate est = estimate_from(m, 0, cfg.seed);
  const std::size_t valid = m.n() - m.truncated();
  est.n = valid;
  if (valid == 0) {
    est.mean = 0;
    est.std_error = 0;
    est.warning = "all paths truncated";
    return est;
  }
  const double p = m.mean(0) * static_cast<double>(m.n()) / static_cast<double>(valid);
  est.mean = p;
  const double var = valid > 1 ? p * (1 - p) * static_cast<double>(valid) / static_cast<double>(valid - 1) : 0.0;
  est.std_error = std::sqrt(var / static_cast<double>(valid));
  return est;
}

std::vector<Estimate> survival_curve(const Domain& d, const Point& x, const std::vector<double>& t_grid,
                                     std::size_t n, const SimConfig& cfg, const Process& proc) {
  require_n(n);
  cfg.validate();
  require_inside(d, x);
  if (t_grid.empty()) throw std::invalid_argument("empty t grid");
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  if (t_max > cfg.max_time) throw std::invalid_argument("t exceeds max_time");
  for (double t : t_grid)
    if (t < 0) throw std::invalid_argument("t must be >= 0");
  SimConfig run = cfg;
  if (t_max > 0) {
    run.max_time = t_max;
    run.dt = std::min(cfg.dt, t_max);
  }
  const int k = static_cast<int>(t_grid.size());
  const PathMoments m = run_paths(n, k, cfg.seed, cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
    if (t_max == 0) {
      std::fill(out, out + k, 1.0);
      return false;
    }
    const StoppedPath p = sample_exit(d, x, run, rng, proc);
    for (int i = 0; i < k; ++i) out[i] = (p.truncated || p.exit_time > t_grid[i]) ? 1.0 : 0.0;
    return false;
  });
  std::vector<Estimate> res;
  for (int i = 0; i < k; ++i) res.push_back(estimate_from(m, i, cfg.seed));
  return res;
}

Estimate survival_probability(const Domain& d, const Point& x, double t, std::size_t n,
                              const SimConfig& cfg, const Process& proc) {
  if (t > cfg.max_time) throw std::invalid_argument("t exceeds max_time");
  return survival_curve(d, x, {t}, n, cfg, proc).front();
}

Estimate expected_exit_time(const Domain& d, const Point& x, std::size_t n, const SimConfig& cfg,
                            const Process& proc) {
  require_n(n);
  cfg.validate();
  require_inside(d, x);
  const PathMoments m = run_paths(n, 1, cfg.seed, cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
    const StoppedPath p = sample_exit(d, x, cfg, rng, proc);
    out[0] = p.exit_time;
    return p.truncated;
  });
  Estimate e = estimate_from(m, 0, cfg.seed);
  if (e.truncated_fraction > 0.01)
    e.warning = "truncated fraction above 1%; mean is biased low (truncated paths count max_time)";
  return e;
}

KacFit kac_fit(const std::vector<double>& t_grid, const std::vector<Estimate>& survival, std::size_t n) {
  if (t_grid.size() != survival.size()) throw std::invalid_argument("grid/estimate size mismatch");
  if (t_grid.size() < 4) throw std::invalid_argument("Kac fit needs at least 4 grid points");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("t grid must be increasing");
  const double p_min = 50.0 / static_cast<double>(n);
  KacFit fit;
  fit.survival = survival;
  double sw = 0, swt = 0, swy = 0;
  std::vector<double> w(t_grid.size(), 0.0), y(t_grid.size(), 0.0);
  int usable = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double p = survival[i].mean;
    const bool ok = p >= p_min && p > 0;
    fit.used.push_back(ok);
    if (!ok) continue;
    ++usable;
    y[i] = -std::log(p);
    // Delta method: var(log P) ≈ var(P)/P²; floor keeps P = 1 points finite.
    const double se = std::max(survival[i].std_error, 1.0 / static_cast<double>(n));
    w[i] = p * p / (se * se);
    sw += w[i];
    swt += w[i] * t_grid[i];
    swy += w[i] * y[i];
  }
  if (usable < 4) throw std::runtime_error("insufficient survival mass; shrink t_grid or raise n");
  const double tb = swt / sw, yb = swy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!fit.used[i]) continue;
    sxx += w[i] * (t_grid[i] - tb) * (t_grid[i] - tb);
    sxy += w[i] * (t_grid[i] - tb) * (y[i] - yb);
  }
  fit.eigenvalue.mean = sxy / sxx;
  fit.eigenvalue.std_error = 1.0 / std::sqrt(sxx);
  fit.eigenvalue.n = n;
  fit.eigenvalue.seed = survival.front().seed;
  fit.eigenvalue.truncated_fraction = 0;
  return fit;
}

Estimate kac_eigenvalue(const Domain& d, const Point& x, const std::vector<double>& t_grid, std::size_t n,
                        const SimConfig& cfg, const Process& proc) {
  if (t_grid.size() < 4) throw std::invalid_argument("Kac fit needs at least 4 grid points");
  return kac_fit(t_grid, survival_curve(d, x, t_grid, n, cfg, proc), n).eigenvalue;
}

namespace {

const BoxShape& require_box(const Domain& box) {
  const auto* b = std::get_if<BoxShape>(&box.shape());
  if (!b) throw std::invalid_argument("sampling box must be a rectangle domain");
  return *b;
}

}  // namespace

HeatContentCurve heat_content_curve(const Domain& a, const std::vector<double>& t_grid,
                                    const Domain& sampling_box, std::size_t n, const SimConfig& cfg) {
  require_n(n);
  cfg.validate();
  if (a.dim() != 3 || sampling_box.dim() != 3) throw std::invalid_argument("heat content is implemented for d = 3");
  if (t_grid.empty()) throw std::invalid_argument("empty t grid");
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  if (t_max > cfg.max_time) throw std::invalid_argument("t exceeds max_time");
  const BoxShape& box = require_box(sampling_box);
  const auto [alo, ahi] = bounding_box(a);
  const double reach = 4 * std::sqrt(t_max);
  for (int k = 0; k < 3; ++k) {
    if (box.lo(k) > alo(k) - reach || box.hi(k) < ahi(k) + reach) {
      const double need = ((ahi - alo).maxCoeff() / 2) + reach;
      throw std::invalid_argument("sampling box too small: it must cover the target dilated by 4*sqrt(t) = " +
                                  std::to_string(reach) + " (half-width >= " + std::to_string(need) +
                                  " around the target's center)");
    }
  }
  const double vbox = (box.hi - box.lo).prod();
  const std::optional<double> va = analytic_volume(a);
  const double vout = va ? vbox - *va : vbox;
  SimConfig run = cfg;
  run.max_time = t_max > 0 ? t_max : cfg.dt;
  run.dt = std::min(cfg.dt, run.max_time);
  const int k = static_cast<int>(t_grid.size());
  const PathMoments m = run_paths(n, k, cfg.seed, cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
    Point x(3);
    for (;;) {
      for (int i = 0; i < 3; ++i) x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * rng.uniform();
      // With a known volume only starts outside A are simulated.
      if (!va || !contains(a, x)) break;
    }
    if (contains(a, x)) {
      std::fill(out, out + k, vout);
      return false;
    }
    const StoppedPath p = sample_hit(a, x, run, rng);
    for (int i = 0; i < k; ++i)
      out[i] = (va ? *va : 0.0) + ((!p.truncated && p.exit_time <= t_grid[i]) ? vout : 0.0);
    return p.truncated;
  });
  HeatContentCurve c;
  c.t_grid = t_grid;
  c.n = n;
  c.covariance.assign(static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k)));
  for (int i = 0; i < k; ++i) {
    c.values.push_back(estimate_from(m, i, cfg.seed));
    // Every path reaches t_max or hits earlier; truncation here is not a loss.
    c.values.back().truncated_fraction = 0;
    for (int j = 0; j < k; ++j) c.covariance[i][j] = m.covariance(i, j);
  }
  return c;
}

Estimate heat_content(const Domain& a, double t, const Domain& sampling_box, std::size_t n,
                      const SimConfig& cfg) {
  return heat_content_curve(a, {t}, sampling_box, n, cfg).values.front();
}

SpitzerFit spitzer_fit(const HeatContentCurve& curve, std::uint64_t seed) {
  const auto k = static_cast<Eigen::Index>(curve.t_grid.size());
  if (k < 3) throw std::invalid_argument("Spitzer fit needs at least 3 grid points");
  Eigen::MatrixXd x(k, 3);
  Eigen::VectorXd e(k), w(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double t = curve.t_grid[static_cast<std::size_t>(i)];
    if (!(t > 0)) throw std::invalid_argument("Spitzer fit needs t > 0");
    x(i, 0) = t;
    x(i, 1) = std::sqrt(t);
    x(i, 2) = 1;
    e(i) = curve.values[static_cast<std::size_t>(i)].mean;
    const double se = curve.values[static_cast<std::size_t>(i)].std_error;
    w(i) = se > 0 ? 1.0 / (se * se) : 1.0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x);
  const auto sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!(cond < 1e8)) throw std::runtime_error("Spitzer fit is ill-conditioned (condition number " + std::to_string(cond) + ")");
  // Weights are rescaled so the fit is invariant to their overall size.
  w /= w.maxCoeff();
  const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
  const Eigen::MatrixXd coef_map = (xtw * x).ldlt().solve(xtw);  // 3 x k
  const Eigen::VectorXd beta = coef_map * e;
  Eigen::MatrixXd cov(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      cov(i, j) = curve.covariance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] /
                  static_cast<double>(curve.n);
  const Eigen::VectorXd a = coef_map.row(0).transpose();
  SpitzerFit fit;
  fit.capacity.mean = beta(0);
  fit.capacity.std_error = std::sqrt(std::max(0.0, a.dot(cov * a)));
  fit.capacity.n = curve.n;
  fit.capacity.seed = seed;
  fit.c2 = beta(1);
  fit.c3 = beta(2);
  fit.condition = cond;
  fit.curve = curve;
  return fit;
}

Estimate capacity_spitzer(const Domain& a, const std::vector<double>& t_grid, const Domain& sampling_box,
                          std::size_t n, const SimConfig& cfg) {
  if (t_grid.size() < 3) throw std::invalid_argument("Spitzer fit needs at least 3 grid points");
  return spitzer_fit(heat_content_curve(a, t_grid, sampling_box, n, cfg), cfg.seed).capacity;
}

Estimate hitting_probability(const Domain& a, const Point& x, const Process& proc, std::size_t n,
                             const SimConfig& cfg) {
  require_n(n);
  cfg.validate();
  const PathMoments m = run_paths(n, 1, cfg.seed, cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
    const StoppedPath p = sample_hit(a, x, cfg, rng, proc);
    out[0] = p.truncated ? 0.0 : 1.0;
    return p.truncated;
  });
  Estimate e = estimate_from(m, 0, cfg.seed);
  if (e.truncated_fraction > 0)
    e.warning = "truncated paths counted as misses; true value may exceed mean by up to truncated_fraction";
  return e;
}

double carleman_bound(const std::vector<double>& xs, const std::vector<double>& widths, double m, double r0) {
  if (xs.size() != widths.size() || xs.empty()) throw std::invalid_argument("profile grid/width size mismatch");
  if (!(r0 > 0)) throw std::invalid_argument("r0 must be > 0");
  if (!(m > 0)) throw std::invalid_argument("M must be > 0");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (!(widths[i] > 0)) throw std::invalid_argument("channel width must be positive");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw std::invalid_argument("profile grid must increase");
  }
  if (xs.size() == 1) return 1.0;
  double inner = 0, outer = 0, prev_exp = 1.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double h = xs[i] - xs[i - 1];
    inner += 0.5 * h * (1 / widths[i] + 1 / widths[i - 1]);
    const double cur = std::exp(2 * std::numbers::pi * inner);
    outer += 0.5 * h * (cur + prev_exp);
    prev_exp = cur;
  }
  if (!(outer > 0)) return 1.0;
  return std::min(1.0, 3 * m / std::sqrt(2 * std::numbers::pi * r0 * outer));
}

double carleman_bound(const std::function<double(double)>& width, double m, double r0, double x0, double b,
                      std::size_t points) {
  if (b < x0) throw std::invalid_argument("need b >= x0");
  if (b == x0) {
    if (!(width(x0) > 0)) throw std::invalid_argument("channel width must be positive");
    return 1.0;
  }
  points = std::max<std::size_t>(points, 2);
  std::vector<double> xs(points), ls(points);
  for (std::size_t i = 0; i < points; ++i) {
    xs[i] = x0 + (b - x0) * static_cast<double>(i) / static_cast<double>(points - 1);
    ls[i] = width(xs[i]);
  }
  return carleman_bound(xs, ls, m, r0);
}

double sausage_volume_centred(const std::vector<Point>& path, double dt, const ShapeFamily& family,
                              const RasterSet& box) {
  const int dim = box.dim();
  Point lo = path.front(), hi = path.front();
  for (const auto& p : path) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  Point origin(dim);
  for (int k = 0; k < dim; ++k) origin(k) = 0.5 * (lo(k) + hi(k)) - 0.5 * box.shape()[k] * box.cell();
  return sausage_volume(path, dt, family, RasterSet(dim, origin, box.cell(), box.shape()));
}

Estimate sausage_expectation(const ShapeFamily& family, double t, double dt, std::size_t n_paths,
                             const RasterSet& box, const SimConfig& cfg) {
  require_n(n_paths);
  if (t > cfg.max_time) throw std::invalid_argument("t exceeds max_time");
  if (!(dt > 0)) throw std::invalid_argument("dt must be > 0");
  const int dim = box.dim();
  const PathMoments m = run_paths(
      n_paths, 1, cfg.seed, cfg.workers,
      [&](std::uint64_t, Rng& rng, double* out) {
        const auto path = sample_path(Point::Zero(dim), t, dt, rng);
        out[0] = sausage_volume_centred(path, dt, family, box);
        return false;
      },
      8);
  return estimate_from(m, 0, cfg.seed);
}

}  // namespace isop
