#pragma once

#include "isop/domain.hpp"
#include "isop/rng.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace isop {

struct SimConfig {
  double dt = 1e-4;        // time step (minimum step when adaptive > 0)
  double max_time = 10.0;  // truncation horizon
  double eps_shell = 1e-4; // walk-on-spheres absorption shell
  std::uint64_t seed = 1;
  double slit_eps = 0.0;   // proximity at which a zero-thickness slit counts as hit
  // Gaussian steps grow to keep displacement variance ≈ adaptive·d², d the
  // boundary distance; 0 keeps a fixed step (exact common-random-number coupling).
  double adaptive = 0.0;
  unsigned workers = 0;    // 0: default_workers()
  long max_wos_steps = 1'000'000;

  void validate() const;
};

struct StoppedPath {
  double exit_time = 0;
  Point exit_point;
  std::string boundary_label;
  bool truncated = false;
};

struct StableParams {
  double alpha = 2.0;
  int dim = 2;
  void validate() const;
};

/// Driving process. Plain Brownian motion has generator ½Δ (per-coordinate
/// variance dt). The stable family is X_t = B_{2σ_t}, so alpha = 2 is
/// Brownian motion at twice that speed.
struct Process {
  bool stable = false;
  double alpha = 2.0;

  static Process brownian() { return {}; }
  static Process stable_process(double alpha);
  bool gaussian() const { return !stable || alpha == 2.0; }
  double variance_factor() const { return stable ? 2.0 : 1.0; }
};

using Normal = std::normal_distribution<double>;

Point bm_step(const Point& x, double dt, Rng& rng);
/// Positive stable variable with E exp(-λS) = exp(-λ^a), 0 < a <= 1 (Kanter).
double positive_stable(double a, Rng& rng);
Point stable_step(const Point& x, double dt, const StableParams& p, Rng& rng);

using PathObserver = std::function<void(double t, const Point& x)>;

/// Runs the process from x in D until it leaves D (or max_time).
StoppedPath sample_exit(const Domain& d, const Point& x, const SimConfig& cfg, Rng& rng,
                        const Process& proc = Process::brownian(),
                        const PathObserver* observer = nullptr);

/// Runs the process from x outside A until it enters A (or max_time).
StoppedPath sample_hit(const Domain& a, const Point& x, const SimConfig& cfg, Rng& rng,
                       const Process& proc = Process::brownian(),
                       const PathObserver* observer = nullptr);

struct BoundaryHit {
  Point point;
  std::string label;
  long steps = 0;
  bool truncated = false;
};

/// Exit position by walk-on-spheres. Requires exact boundary distances.
BoundaryHit walk_on_spheres(const Domain& d, const Point& x, const SimConfig& cfg, Rng& rng);

/// Brownian positions at times k·dt, k = 0..round(t/dt), starting at x.
std::vector<Point> sample_path(const Point& x, double t, double dt, Rng& rng);

/// Time-indexed shapes attached to a path point: shapes[i] is used for
/// times in [times[i], times[i+1]). Shapes are given relative to the origin.
struct ShapeFamily {
  std::vector<double> times;
  std::vector<Domain> shapes;

  static ShapeFamily constant(const Domain& shape);
  const Domain& at(double t) const;
};

/// Volume of the union of (path point + shape) over the path, marked on the
/// grid. For origin-centered balls the union along each segment is the exact
/// capsule; other shapes are swept at half-cell spacing.
double sausage_volume(const std::vector<Point>& path, double dt, const ShapeFamily& shapes,
                      const RasterSet& grid);
double sausage_volume(const std::vector<Point>& path, double r, const RasterSet& grid);

}  // namespace isop
