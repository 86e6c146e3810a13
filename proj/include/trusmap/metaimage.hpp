#pragma once

#include <string>

#include "trusmap/volume.hpp"

namespace trusmap {

// MetaImage (.mha/.mhd) reader. Accepts NDims=3, ElementType MET_UCHAR,
// MET_SHORT or MET_FLOAT, uncompressed little-endian data, ElementDataFile
// LOCAL or a sibling raw file. TransformMatrix rows are the direction cosines
// of each voxel axis (ITK convention); it defaults to identity. Unknown
// header keys are ignored with a warning on stderr.
Volume3 read_mha(const std::string& path);

// Single-file .mha writer (header + LOCAL raw block, little-endian).
// Geometry is printed with 17 significant digits; read_mha(write_mha(v))
// reproduces the voxel data bit-exactly.
void write_mha(const Volume3& v, const std::string& path);

}  // namespace trusmap
