#pragma once

#include <array>
#include <optional>
#include <string>

#include "trusmap/biopsy_types.hpp"
#include "trusmap/geometry.hpp"

namespace trusmap {

enum class Row { Base, Mid, Apex };
enum class Column { Lateral, Parasagittal, FusedApex };
enum class Side { Left, Right };

// One cell of the 12-sector planning grid (rows Base/Mid/Apex, columns
// Lateral/Parasagittal, sides Left/Right). Column FusedApex only appears in
// analysis labels produced by fuse_apex.
struct TargetLabel {
    Row row = Row::Base;
    Column column = Column::Lateral;
    Side side = Side::Right;

    bool operator==(const TargetLabel&) const = default;
};

// Raw session codes: "BL-R", "BS-L", "ML-R", "MS-L", "AL-R", "AS-L", ...
// (B/M/A row, L lateral / S parasagittal, R/L side). Fused apex analysis
// labels render as "AP-R"/"AP-L".
std::string to_code(const TargetLabel& label);
TargetLabel label_from_code(const std::string& code);

const std::array<TargetLabel, 12>& raw_labels();       // session order, Table 1 order
const std::array<TargetLabel, 10>& analysis_labels();  // fused-apex report layout

// Apex labels of a side collapse onto one analysis label; Base/Mid unchanged.
// Idempotent.
TargetLabel fuse_apex(const TargetLabel& label);

// 3 x 4 uniform partition of a prostate bounding box in the coronal (x,z)
// plane; every sector is the prism over its cell spanning the full
// anterior-posterior (y) extent. Orientation: +z cranial so the Base row is
// at max z, columns in ascending x are Lateral-L, Parasagittal-L,
// Parasagittal-R, Lateral-R.
struct SectorGrid {
    Box3 bbox;
    std::array<double, 4> row_edges{};  // partitions z into thirds, Apex first
    std::array<double, 5> col_edges{};  // partitions x into quarters
};

SectorGrid build_grid(const Box3& bbox);

// Prism of one raw sector (throws on FusedApex labels).
Box3 sector_box(const SectorGrid& grid, const TargetLabel& label);

// Raw label of the sector containing a point; nullopt outside the bbox.
// Interior cell boundaries resolve toward the higher index.
std::optional<TargetLabel> locate(const SectorGrid& grid, const Vec3& p);

// Length (mm) of segment inside the sector's closed prism, by parametric slab
// clipping. Fused apex labels sum the two constituent sectors.
double clip_length(const NeedleSegment& seg, const SectorGrid& grid, const TargetLabel& label);

// Segment-box intersection length used by clip_length.
double clip_length_box(const NeedleSegment& seg, const Box3& box);

// A hit must intersect the target: clip >= min_len, and strictly positive
// when min_len is zero.
bool is_hit(const NeedleSegment& seg, const SectorGrid& grid, const TargetLabel& label,
            double min_len = 1.0);

}  // namespace trusmap
