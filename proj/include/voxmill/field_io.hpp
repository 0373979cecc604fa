#pragma once

#include <string>

#include "voxmill/grid.hpp"

namespace voxmill {

/// Field container format:
///   VOXFIELD v1 nx ny nz sx sy sz ox oy oz dtype\n
/// followed by nx*ny*nz little-endian values (dtype f64 or u8) in the
/// row-major order documented in GridSpec. Doubles round-trip bit-exactly.
void write_field(const ScalarField& f, const std::string& path,
                 const std::string& dtype = "f64");

/// Reads a VOXFIELD file. If `expected` is given, the stored grid must match
/// it exactly (DimensionError otherwise).
ScalarField read_field(const std::string& path, const GridSpec* expected = nullptr);

/// Legacy ASCII VTK STRUCTURED_POINTS export (values at voxel centers),
/// for visualization only.
void write_vtk(const ScalarField& f, const std::string& path,
               const std::string& name = "field");

}  // namespace voxmill
