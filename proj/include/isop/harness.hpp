#pragma once

#include "isop/estimators.hpp"
#include "isop/symmetrize.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace isop {

enum class Status { consistent, violation, inconclusive };
std::string to_string(Status s);

/// One oriented comparison: the theorem asserts margin = rhs - lhs >= 0.
struct Verdict {
  std::string theorem_id;
  Estimate lhs, rhs;
  bool exact = false;  // combinatorial check: no tolerance involved
  double margin = 0;
  double sigma = 0;
  double z = 0;
  Status status = Status::consistent;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

/// z = margin/sigma; violation iff z < -z_crit; inconclusive iff |z| < 1 and
/// |margin| <= resolution (default 2σ); otherwise consistent.
Verdict make_verdict(std::string id, const Estimate& lhs, const Estimate& rhs, double sigma,
                     std::uint64_t seed, nlohmann::json params, double z_crit = 4.0,
                     double resolution = -1.0);

struct CheckOptions {
  std::size_t n = 100000;
  SimConfig cfg;
  bool paired = true;  // drive both arms with the same increments
  double z_crit = 4.0;
};

/// Paired estimates of two per-path functionals. Each functional receives an
/// Rng; with pairing both receive identical streams.
struct PairedEstimate {
  Estimate lhs, rhs, diff;
};

template <typename L, typename R>
PairedEstimate paired_estimate(std::size_t n, const CheckOptions& opt, L&& lhs, R&& rhs) {
  const std::uint64_t seed = opt.cfg.seed;
  if (opt.paired) {
    const PathMoments m = run_paths(n, 3, seed, opt.cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
      Rng copy = rng;
      out[0] = lhs(rng);
      out[1] = rhs(copy);
      out[2] = out[1] - out[0];
      return false;
    });
    return {estimate_from(m, 0, seed), estimate_from(m, 1, seed), estimate_from(m, 2, seed)};
  }
  const std::uint64_t other = derive_seed(seed, 0x0dd5eedULL);
  const PathMoments ml = run_paths(n, 1, seed, opt.cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
    out[0] = lhs(rng);
    return false;
  });
  const PathMoments mr = run_paths(n, 1, other, opt.cfg.workers, [&](std::uint64_t, Rng& rng, double* out) {
    out[0] = rhs(rng);
    return false;
  });
  PairedEstimate p{estimate_from(ml, 0, seed), estimate_from(mr, 0, other), {}};
  p.diff.mean = p.rhs.mean - p.lhs.mean;
  p.diff.std_error = std::hypot(p.lhs.std_error, p.rhs.std_error);
  p.diff.n = n;
  p.diff.seed = seed;
  return p;
}

// ---- exact combinatorial check ----

/// Discrete rearrangement inequality on Z: the f_i are given on offsets
/// -2K..2K (length 4K+1), A is a subset of -K..K, z0 in -K..K. The right
/// side uses the rearranged f_i*, the centered interval A* and start 0.
struct BllInstance {
  int k = 0;
  std::vector<std::vector<std::int64_t>> f;
  std::vector<int> a;
  int z0 = 0;
};
Verdict check_bll_discrete(const BllInstance& inst);
BllInstance random_bll_instance(std::uint64_t seed, int max_m = 2, int max_grid = 21);

// ---- statistical checks ----

Verdict check_survival_isoperimetric(const Domain& d, double t, const Process& proc,
                                     const std::vector<Point>& z_grid, const CheckOptions& opt);

/// Survival-and-arrival probabilities P_x(T_D > t, B_t ∈ A) on D and on
/// polarize(D, H) from x^σ into A^σ. `target` defaults to D itself.
Verdict check_polarization_exit(const RasterSet& d, const Hyperplane& h, const Point& x, double t,
                                const CheckOptions& opt, const RasterSet* target = nullptr);
/// x^σ: σx when x lies in D ∖ σD on the negative side of H, else x.
Point polarized_point(const RasterSet& d, const Hyperplane& h, const Point& x);

/// Cap(K) >= Cap(St K) >= Cap(K*) from Frank-Wolfe energy minimization on
/// surface point clouds (alpha = 2) or cell centers (alpha < 2).
std::vector<Verdict> check_capacity_isoperimetric(const RasterSet& k, int axis = 2, double alpha = 2.0,
                                                  int iters = 2000);

/// Six-point Kac grid from a pilot estimate of the mean exit time.
std::vector<double> kac_auto_grid(const Domain& d, const Point& x, const SimConfig& cfg);

Verdict check_faber_krahn(const Domain& d, const CheckOptions& opt);

Verdict check_dubinin(const std::vector<double>& alphas, double a, const CheckOptions& opt);

/// Channel given by (xs, widths); E_b is the boundary part with x >= b.
Verdict check_carleman(const std::vector<double>& xs, const std::vector<double>& widths, const Point& z0,
                       double r0, double b, const CheckOptions& opt);

std::vector<Verdict> check_eigen_brunn_minkowski(const BallShape& b, const BallShape& d, const CheckOptions& opt);

/// Sausage of `shapes` vs sausage of `balls` along common Brownian paths.
Verdict check_wiener_sausage(const ShapeFamily& shapes, const ShapeFamily& balls, double t, double dt,
                             const RasterSet& box, const CheckOptions& opt);

/// Harmonic measure of the outer boundary from 64 points on |z| = r in D
/// and in Cir(D): sup comparison, star-function comparison, and means.
std::vector<Verdict> check_star_dominance(const Domain& d, const Domain& cir_d, double r,
                                          const BoundarySet& outer_d, const BoundarySet& outer_cir,
                                          const CheckOptions& opt);

// ---- suite runner ----

/// Runs one manifest entry {"check": name, "seed": s, "params": {...}}.
std::vector<Verdict> run_check(const nlohmann::json& entry, std::uint64_t default_seed, unsigned workers);
std::vector<std::string> registered_checks();

}  // namespace isop
