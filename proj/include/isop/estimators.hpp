#pragma once

#include "isop/domain.hpp"
#include "isop/parallel.hpp"
#include "isop/stochastic.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace isop {

struct Estimate {
  double mean = 0;
  double std_error = 0;  // s/√n
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double truncated_fraction = 0;
  std::string warning;
};

/// Estimate for channel `k` of accumulated path moments.
Estimate estimate_from(const PathMoments& m, int k, std::uint64_t seed);

struct DiscreteMeasure {
  std::vector<Point> points;
  std::vector<double> weights;
  void validate() const;
};

enum class Sampler { automatic, walk_on_spheres, stepping };

Estimate harmonic_measure(const Domain& d, const BoundarySet& e, const Point& x, std::size_t n,
                          const SimConfig& cfg, Sampler sampler = Sampler::automatic);

Estimate survival_probability(const Domain& d, const Point& x, double t, std::size_t n,
                              const SimConfig& cfg, const Process& proc = Process::brownian());

/// P(T > t_k) for every t_k from one set of paths (nested events).
std::vector<Estimate> survival_curve(const Domain& d, const Point& x,
                                     const std::vector<double>& t_grid, std::size_t n,
                                     const SimConfig& cfg, const Process& proc = Process::brownian());

Estimate expected_exit_time(const Domain& d, const Point& x, std::size_t n, const SimConfig& cfg,
                            const Process& proc = Process::brownian());

struct KacFit {
  Estimate eigenvalue;
  std::vector<Estimate> survival;
  std::vector<bool> used;
};

/// Weighted least-squares slope of -log P(T > t) against t over grid points
/// with P >= 50/n (at least four needed).
KacFit kac_fit(const std::vector<double>& t_grid, const std::vector<Estimate>& survival, std::size_t n);

Estimate kac_eigenvalue(const Domain& d, const Point& x, const std::vector<double>& t_grid,
                        std::size_t n, const SimConfig& cfg, const Process& proc = Process::brownian());

/// Heat content E_A(t) = ∫ P_x(τ_A <= t) dx in d = 3, for every t in the
/// grid from one set of paths. The sampling box must cover A dilated by 4√t.
struct HeatContentCurve {
  std::vector<double> t_grid;
  std::vector<Estimate> values;
  std::vector<std::vector<double>> covariance;  // of the per-path values
  std::size_t n = 0;
};
HeatContentCurve heat_content_curve(const Domain& a, const std::vector<double>& t_grid,
                                    const Domain& sampling_box, std::size_t n, const SimConfig& cfg);
Estimate heat_content(const Domain& a, double t, const Domain& sampling_box, std::size_t n,
                      const SimConfig& cfg);

struct SpitzerFit {
  Estimate capacity;        // c1
  double c2 = 0, c3 = 0;    // √t and constant terms
  double condition = 0;
  HeatContentCurve curve;
};
SpitzerFit spitzer_fit(const HeatContentCurve& curve, std::uint64_t seed);
Estimate capacity_spitzer(const Domain& a, const std::vector<double>& t_grid,
                          const Domain& sampling_box, std::size_t n, const SimConfig& cfg);

/// Riesz kernel k_α(r) = Γ((n-α)/2) / (Γ(α/2) π^{n/2} 2^{α-1}) r^{α-n}.
double riesz_kernel(double r, double alpha, int n_dim);
/// E |X - Y|^{α-n} for X, Y independent uniform in the unit ball of R^n.
double ball_self_energy_constant(double alpha, int n_dim);
double riesz_energy(const DiscreteMeasure& mu, double alpha, int n_dim, bool self_energy = true);

struct CapacityResult {
  Estimate capacity;
  DiscreteMeasure measure;
  std::vector<double> energy_trace;
  bool converged = false;
  double gap = 0;
};
/// Frank-Wolfe minimization of the Riesz energy over probability weights on
/// the given points; capacity = 1/energy.
CapacityResult capacity_energy(const std::vector<Point>& points, double alpha, int n_dim, int iters,
                               bool self_energy = true, double tolerance = 1e-6);

/// n quasi-uniform points on a sphere (Fibonacci lattice).
std::vector<Point> fibonacci_sphere(std::size_t n, double radius = 1.0,
                                    const Point& center = Point::Zero(3));
/// Centers of cell faces between set and unset cells of a 3D raster.
std::vector<Point> surface_points(const RasterSet& k);

Estimate hitting_probability(const Domain& a, const Point& x, const Process& proc, std::size_t n,
                             const SimConfig& cfg);

/// 3M / sqrt(2π r0 ∫_{x0}^{b} exp(2π ∫_{x0}^{t} dx/l(x)) dt), clamped to <= 1,
/// with both integrals by the trapezoid rule on the profile grid xs (which
/// must run from x0 to b).
double carleman_bound(const std::vector<double>& xs, const std::vector<double>& widths, double m,
                      double r0);
double carleman_bound(const std::function<double(double)>& width, double m, double r0, double x0,
                      double b, std::size_t points = 20001);

/// Sausage volume with the grid translated so it is centred on the path's
/// bounding box; `box` supplies cell size and shape.
double sausage_volume_centred(const std::vector<Point>& path, double dt, const ShapeFamily& family,
                              const RasterSet& box);

/// Mean sausage volume over n_paths Brownian paths from the origin on [0, t].
/// The grid is re-centred on each path (volumes are translation invariant).
Estimate sausage_expectation(const ShapeFamily& family, double t, double dt, std::size_t n_paths,
                             const RasterSet& box, const SimConfig& cfg);

}  // namespace isop
