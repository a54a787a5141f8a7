#pragma once

#include "isop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace isop {

/// Samples of a function at uniformly spaced abscissae (cell centers of a
/// uniform partition, so values[i] stands for the mass on one cell).
struct SampledFunction1D {
  std::vector<double> x;
  std::vector<double> values;

  /// Cell-centered grid on [-a, a] with values.size() cells.
  static SampledFunction1D on_interval(double a, std::vector<double> values);
  double spacing() const;
  void validate(bool require_nonnegative) const;
};

/// Grid positions ordered by distance to the center, ties to the lower index.
std::vector<std::size_t> center_out_order(std::size_t n);

/// Symmetric decreasing rearrangement of a sequence: largest value at the
/// center, then outward with the lower index first on ties.
template <typename T>
std::vector<T> rearrange_decreasing(const std::vector<T>& v) {
  std::vector<T> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<T>());
  const auto order = center_out_order(v.size());
  std::vector<T> out(v.size());
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = sorted[k];
  return out;
}

SampledFunction1D decreasing_rearrangement(const SampledFunction1D& g);

/// g⋆(l) = sup over sets of measure 2l of ∫_E g, at l = k·h/2 for k = 0..N.
SampledFunction1D star_function(const SampledFunction1D& g);

/// Two-point rearrangement pushing mass into H+. Throws when H does not map
/// cell centers onto cell centers, or would move set cells off the grid.
RasterSet polarize(const RasterSet& a, const Hyperplane& h);

/// The grid's midplane perpendicular to `axis`, which Steiner centers on.
Hyperplane grid_center_plane(const RasterSet& grid, int axis);

/// Replaces each column along `axis` by a contiguous run of equal length
/// centered in the grid (odd leftovers go to the lower index).
RasterSet steiner(const RasterSet& a, int axis);

/// Planar circular symmetrization about the positive x-axis, via polar
/// resampling with 4·max(shape) angular samples per ring.
RasterSet circular(const RasterSet& a);

struct ScheduleResult {
  RasterSet set;
  std::vector<double> distances;  // d_H to the Steiner target, starting with the input
  int applied = 0;
};

/// Greedy sequence of polarizations in planes parallel to `axis_plane`
/// (which must be a grid midplane). A candidate is accepted when the
/// Hausdorff distance to steiner(A) does not grow and the pair
/// (distance, first moment about the midplane) strictly decreases.
ScheduleResult polarization_schedule_to_steiner(const RasterSet& a, const Hyperplane& axis_plane,
                                                int budget, std::uint64_t seed = 0);

}  // namespace isop
