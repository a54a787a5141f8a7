#include "isop/estimators.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

namespace isop {

namespace {

void require_riesz(double alpha, int n_dim) {
  if (n_dim < 2 || n_dim > 3) throw std::invalid_argument("Riesz energy is implemented for n = 2, 3");
  if (!(alpha > 0 && alpha < n_dim)) throw std::invalid_argument("need 0 < alpha < n");
}

double riesz_constant(double alpha, int n_dim) {
  const double n = n_dim;
  return std::tgamma((n - alpha) / 2) /
         (std::tgamma(alpha / 2) * std::pow(std::numbers::pi, n / 2) * std::pow(2.0, alpha - 1));
}

// Half the distance to the nearest other point, per point.
std::vector<double> half_nearest(const std::vector<Point>& pts) {
  std::vector<double> rho(pts.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = (pts[i] - pts[j]).norm();
      rho[i] = std::min(rho[i], d);
      rho[j] = std::min(rho[j], d);
    }
  for (auto& r : rho) r *= 0.5;
  return rho;
}

}  // namespace

double riesz_kernel(double r, double alpha, int n_dim) {
  require_riesz(alpha, n_dim);
  if (!(r > 0)) throw std::invalid_argument("Riesz kernel needs r > 0");
  return riesz_constant(alpha, n_dim) * std::pow(r, alpha - n_dim);
}

double ball_self_energy_constant(double alpha, int n_dim) {
  require_riesz(alpha, n_dim);
  const double s = n_dim - alpha;
  if (n_dim == 3) {
    // Distance density of two uniform points in the unit ball:
    // 3r² - (9/4)r³ + (3/16)r⁵ on [0, 2].
    return 3 * std::pow(2.0, 3 - s) / (3 - s) - 2.25 * std::pow(2.0, 4 - s) / (4 - s) +
           (3.0 / 16) * std::pow(2.0, 6 - s) / (6 - s);
  }
  // Unit disk: (4r/π)(arccos(r/2) - (r/2)√(1 - r²/4)) on [0, 2].
  boost::math::quadrature::tanh_sinh<double> q;
  auto f = [s](double r) {
    const double h = r / 2;
    return (4 * r / std::numbers::pi) * (std::acos(h) - h * std::sqrt(std::max(0.0, 1 - h * h))) *
           std::pow(r, -s);
  };
  return q.integrate(f, 0.0, 2.0);
}

double riesz_energy(const DiscreteMeasure& mu, double alpha, int n_dim, bool self_energy) {
  require_riesz(alpha, n_dim);
  mu.validate();
  const double c = riesz_constant(alpha, n_dim);
  double e = 0;
  for (std::size_t i = 0; i < mu.points.size(); ++i)
    for (std::size_t j = i + 1; j < mu.points.size(); ++j) {
      const double d = (mu.points[i] - mu.points[j]).norm();
      if (d == 0 && mu.weights[i] * mu.weights[j] > 0) throw std::invalid_argument("duplicate points in measure");
      if (d > 0) e += 2 * mu.weights[i] * mu.weights[j] * c * std::pow(d, alpha - n_dim);
    }
  if (self_energy && mu.points.size() > 1) {
    const auto rho = half_nearest(mu.points);
    const double cb = ball_self_energy_constant(alpha, n_dim);
    for (std::size_t i = 0; i < mu.points.size(); ++i)
      if (rho[i] > 0) e += mu.weights[i] * mu.weights[i] * c * std::pow(rho[i], alpha - n_dim) * cb;
  }
  return e;
}

CapacityResult capacity_energy(const std::vector<Point>& points, double alpha, int n_dim, int iters,
                               bool self_energy, double tolerance) {
  require_riesz(alpha, n_dim);
  if (points.size() < 2) throw std::invalid_argument("capacity needs at least 2 points");
  if (iters < 0) throw std::invalid_argument("iters must be >= 0");
  const auto n = static_cast<Eigen::Index>(points.size());
  const double c = riesz_constant(alpha, n_dim);
  const auto rho = half_nearest(points);
  const double cb = ball_self_energy_constant(alpha, n_dim);
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd self(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(rho[static_cast<std::size_t>(i)] > 0)) throw std::invalid_argument("duplicate points in cloud");
    self(i) = c * std::pow(rho[static_cast<std::size_t>(i)], alpha - n_dim) * cb;
    k(i, i) = self_energy ? self(i) : 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = c * std::pow((points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)]).norm(),
                                    alpha - n_dim);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd kw = k * w;
  double energy = w.dot(kw);
  CapacityResult res;
  res.energy_trace.push_back(energy);
  for (int it = 0; it < iters; ++it) {
    Eigen::Index j = 0;
    const double pot = kw.minCoeff(&j);
    res.gap = 2 * (energy - pot);  // Frank-Wolfe duality gap
    if (res.gap <= tolerance * energy) {
      res.converged = true;
      break;
    }
    // Exact line search along e_j - w.
    const double curv = k(j, j) - 2 * pot + energy;
    double gamma = curv > 0 ? (energy - pot) / curv : 1.0;
    gamma = std::clamp(gamma, 0.0, 1.0);
    w *= (1 - gamma);
    w(j) += gamma;
    kw = (1 - gamma) * kw + gamma * k.col(j);
    energy = w.dot(kw);
    res.energy_trace.push_back(energy);
  }
  if (!res.converged) {
    Eigen::Index j = 0;
    res.gap = 2 * (energy - kw.minCoeff(&j));
    res.converged = res.gap <= tolerance * energy;
  }
  w /= w.sum();
  res.measure.points = points;
  res.measure.weights.assign(w.data(), w.data() + n);
  res.capacity.mean = 1.0 / energy;
  // Resolution proxy: half the shift caused by toggling the self-energy term.
  const double other = self_energy ? energy - w.dot(self.cwiseProduct(w)) : energy + w.dot(self.cwiseProduct(w));
  res.capacity.std_error = 0.5 * std::abs(1.0 / other - 1.0 / energy);
  res.capacity.n = points.size();
  res.capacity.seed = 0;
  if (!res.converged) res.capacity.warning = "Frank-Wolfe did not reach the duality-gap tolerance; best iterate returned";
  return res;
}

std::vector<Point> fibonacci_sphere(std::size_t n, double radius, const Point& center) {
  std::vector<Point> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1 - (2 * static_cast<double>(i) + 1) / static_cast<double>(n);
    const double r = std::sqrt(std::max(0.0, 1 - z * z));
    const double th = golden * static_cast<double>(i);
    Point p(3);
    p << r * std::cos(th), r * std::sin(th), z;
    pts.push_back(center + radius * p);
  }
  return pts;
}

std::vector<Point> surface_points(const RasterSet& k) {
  if (k.dim() != 3) throw std::invalid_argument("surface extraction needs a 3D raster");
  std::vector<Point> pts;
  k.for_each_set([&](std::size_t idx) {
    const auto c = k.coords(idx);
    const Point ctr = k.center(idx);
    for (int axis = 0; axis < 3; ++axis)
      for (int dir : {-1, 1}) {
        auto nb = c;
        nb[axis] += dir;
        if (!k.in_grid(nb) || !k.test(k.index(nb))) {
          Point p = ctr;
          p(axis) += 0.5 * dir * k.cell();
          pts.push_back(p);
        }
      }
  });
  if (pts.size() < 2) throw std::invalid_argument("surface extraction failed: degenerate set");
  return pts;
}

}  // namespace isop
