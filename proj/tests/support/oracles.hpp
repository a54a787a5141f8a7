#pragma once

// Closed forms and brute-force references used by the tests. Nothing here
// calls into the library, so agreement is a genuine cross-check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// k-th positive zero of J_nu (k >= 1): McMahon start, Newton polish.
inline double bessel_zero(double nu, int k) {
  const double mu = 4 * nu * nu;
  const double beta = (k + nu / 2 - 0.25) * pi;
  double x = beta - (mu - 1) / (8 * beta) - 4 * (mu - 1) * (7 * mu - 31) / (3 * std::pow(8 * beta, 3));
  for (int it = 0; it < 50; ++it) {
    const double j = std::cyl_bessel_j(nu, x);
    const double dj = nu / x * j - std::cyl_bessel_j(nu + 1, x);
    const double step = j / dj;
    x -= step;
    if (std::abs(step) < 1e-15 * x) break;
  }
  return x;
}

/// Dirichlet eigenvalue of the disk of radius r for the generator ½Δ.
inline double disk_eigenvalue(double r) {
  const double j = bessel_zero(0, 1);
  return j * j / (2 * r * r);
}

/// Same for a box with the given side lengths.
inline double box_eigenvalue(const std::vector<double>& sides) {
  double s = 0;
  for (double a : sides) s += 1 / (a * a);
  return 0.5 * pi * pi * s;
}

/// P_0(T > t) for plain Brownian motion (½Δ) in the disk of radius r.
inline double disk_survival_center(double r, double t, int terms = 200) {
  double s = 0;
  for (int k = 1; k <= terms; ++k) {
    const double j = bessel_zero(0, k);
    s += 2 / (j * std::cyl_bessel_j(1, j)) * std::exp(-j * j * t / (2 * r * r));
  }
  return s;
}

/// P_u(T > t) on [0, len] for plain Brownian motion.
inline double interval_survival(double u, double len, double t, int terms = 400) {
  double s = 0;
  for (int k = 1; k <= terms; k += 2) {
    const double w = k * pi / len;
    s += 4 / (k * pi) * std::sin(w * u) * std::exp(-w * w * t / 2);
  }
  return s;
}

/// P_x(T > t) in a centered box with the given sides, x relative to the center.
inline double box_survival(const std::vector<double>& sides, const std::vector<double>& x, double t) {
  double p = 1;
  for (std::size_t i = 0; i < sides.size(); ++i) p *= interval_survival(x[i] + sides[i] / 2, sides[i], t);
  return p;
}

/// Harmonic measure of the inner circle of the annulus r1 < |x| < r2 in the plane.
inline double annulus_inner(double r1, double r2, double x) { return std::log(r2 / x) / std::log(r2 / r1); }

/// E_x T for the ball of radius R in R^d.
inline double ball_exit_time(double radius, double x2, int dim) { return (radius * radius - x2) / dim; }

/// Poisson kernel of the unit disk: exit density at angle phi from z = rho e^{i theta}.
inline double poisson_kernel(double rho, double theta, double phi) {
  return (1 - rho * rho) / (2 * pi * (1 - 2 * rho * std::cos(theta - phi) + rho * rho));
}

/// Harmonic measure of the arc [a, b] from rho e^{i theta}; needs
/// theta - pi < a < b < theta + pi.
inline double disk_arc_measure(double rho, double theta, double a, double b) {
  auto prim = [&](double phi) {
    // Antiderivative of the Poisson kernel in phi.
    const double half = (phi - theta) / 2;
    return std::atan2((1 + rho) * std::sin(half), (1 - rho) * std::cos(half)) / pi;
  };
  return prim(b) - prim(a);
}

/// Heat content of the ball of radius R in R^3 (generator ½Δ).
inline double ball_heat_content(double radius, double t) {
  return 2 * pi * radius * t + 4 * radius * radius * std::sqrt(2 * pi * t) + 4.0 / 3 * pi * radius * radius * radius;
}

/// Carleman bound for a strip of constant width l from x0 to b.
inline double strip_carleman(double l, double r0, double x0, double b) {
  const double outer = l / (2 * pi) * (std::exp(2 * pi * (b - x0) / l) - 1);
  return std::min(1.0, 3 * l / std::sqrt(2 * pi * r0 * outer));
}

/// Exhaustive discrete chain sum Σ_{z ∈ A^m} Π f_i(z_i - z_{i-1}), f_i indexed
/// by offset + 2K.
inline std::int64_t chain_sum(const std::vector<std::vector<std::int64_t>>& f, const std::vector<int>& a, int z0,
                              int k) {
  std::int64_t total = 0;
  const std::size_t m = f.size();
  auto rec = [&](auto&& self, std::size_t level, int prev, std::int64_t prod) -> void {
    if (level == m) {
      total += prod;
      return;
    }
    for (int v : a) self(self, level + 1, v, prod * f[level][static_cast<std::size_t>(v - prev + 2 * k)]);
  };
  rec(rec, 0, z0, 1);
  return total;
}

/// Symmetric decreasing rearrangement of an odd-length sequence: sorted
/// values fill the center, then left before right at each distance.
inline std::vector<std::int64_t> rearranged(std::vector<std::int64_t> v) {
  std::vector<std::int64_t> sorted = v;
  std::sort(sorted.rbegin(), sorted.rend());
  const int n = static_cast<int>(v.size());
  const int c = (n - 1) / 2;
  std::vector<int> pos;
  pos.push_back(c);
  for (int d = 1; static_cast<int>(pos.size()) < n; ++d) {
    if (c - d >= 0) pos.push_back(c - d);
    if (c + d < n && static_cast<int>(pos.size()) < n) pos.push_back(c + d);
  }
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])] = sorted[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace oracle
