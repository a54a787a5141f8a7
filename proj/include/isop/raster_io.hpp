#pragma once

#include "isop/geometry.hpp"

#include <string>

namespace isop {

/// 2D sets are written as binary PGM (P5, set = 255, first row = top, i.e.
/// largest y); 3D sets as a raw little-endian bit dump of the mask words.
/// Either way a JSON sidecar `<path>.json` records {dim, origin, cell, shape}.
void write_raster(const RasterSet& a, const std::string& path);

/// Reads a raster written by write_raster. A PGM without sidecar is placed
/// on [-1, 1] along its longer side, centered at the origin; any nonzero
/// pixel counts as set.
RasterSet read_raster(const std::string& path);

}  // namespace isop
