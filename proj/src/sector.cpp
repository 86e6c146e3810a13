#include "trusmap/sector.hpp"

#include <algorithm>
#include <sstream>

#include "trusmap/errors.hpp"

namespace trusmap {

std::string validate_needle(const NeedleSegment& seg) {
    const double len = seg.length();
    if (!(len > 0.0)) throw InvalidArgument("needle segment must have positive length");
    if (len < 15.0 || len > 25.0) {
        std::ostringstream os;
        os << "needle core length " << len << " mm is outside the typical 15-25 mm band";
        return os.str();
    }
    return {};
}

std::string to_code(const TargetLabel& label) {
    std::string code;
    code += label.row == Row::Base ? 'B' : (label.row == Row::Mid ? 'M' : 'A');
    switch (label.column) {
        case Column::Lateral: code += 'L'; break;
        case Column::Parasagittal: code += 'S'; break;
        case Column::FusedApex: code = "AP"; break;
    }
    code += '-';
    code += label.side == Side::Right ? 'R' : 'L';
    return code;
}

TargetLabel label_from_code(const std::string& code) {
    if (code.size() != 4 || code[2] != '-')
        throw InvalidArgument("unknown target code '" + code + "'");
    TargetLabel label;
    switch (code[3]) {
        case 'R': label.side = Side::Right; break;
        case 'L': label.side = Side::Left; break;
        default: throw InvalidArgument("unknown target code '" + code + "'");
    }
    if (code[0] == 'A' && code[1] == 'P') {
        label.row = Row::Apex;
        label.column = Column::FusedApex;
        return label;
    }
    switch (code[0]) {
        case 'B': label.row = Row::Base; break;
        case 'M': label.row = Row::Mid; break;
        case 'A': label.row = Row::Apex; break;
        default: throw InvalidArgument("unknown target code '" + code + "'");
    }
    switch (code[1]) {
        case 'L': label.column = Column::Lateral; break;
        case 'S': label.column = Column::Parasagittal; break;
        default: throw InvalidArgument("unknown target code '" + code + "'");
    }
    return label;
}

const std::array<TargetLabel, 12>& raw_labels() {
    static const std::array<TargetLabel, 12> labels = {{
        {Row::Base, Column::Lateral, Side::Right},
        {Row::Base, Column::Lateral, Side::Left},
        {Row::Base, Column::Parasagittal, Side::Right},
        {Row::Base, Column::Parasagittal, Side::Left},
        {Row::Mid, Column::Lateral, Side::Right},
        {Row::Mid, Column::Lateral, Side::Left},
        {Row::Mid, Column::Parasagittal, Side::Right},
        {Row::Mid, Column::Parasagittal, Side::Left},
        {Row::Apex, Column::Lateral, Side::Right},
        {Row::Apex, Column::Lateral, Side::Left},
        {Row::Apex, Column::Parasagittal, Side::Right},
        {Row::Apex, Column::Parasagittal, Side::Left},
    }};
    return labels;
}

const std::array<TargetLabel, 10>& analysis_labels() {
    static const std::array<TargetLabel, 10> labels = {{
        {Row::Base, Column::Lateral, Side::Right},
        {Row::Base, Column::Lateral, Side::Left},
        {Row::Base, Column::Parasagittal, Side::Right},
        {Row::Base, Column::Parasagittal, Side::Left},
        {Row::Mid, Column::Lateral, Side::Right},
        {Row::Mid, Column::Lateral, Side::Left},
        {Row::Mid, Column::Parasagittal, Side::Right},
        {Row::Mid, Column::Parasagittal, Side::Left},
        {Row::Apex, Column::FusedApex, Side::Right},
        {Row::Apex, Column::FusedApex, Side::Left},
    }};
    return labels;
}

TargetLabel fuse_apex(const TargetLabel& label) {
    if (label.row != Row::Apex) return label;
    return {Row::Apex, Column::FusedApex, label.side};
}

SectorGrid build_grid(const Box3& bbox) {
    const Vec3 size = bbox.size();
    if (!(size.x > 0.0 && size.y > 0.0 && size.z > 0.0))
        throw InvalidArgument("sector grid box must have positive extent on all axes");
    SectorGrid g;
    g.bbox = bbox;
    for (int i = 0; i <= 3; ++i) g.row_edges[i] = bbox.lo.z + size.z * i / 3.0;
    for (int i = 0; i <= 4; ++i) g.col_edges[i] = bbox.lo.x + size.x * i / 4.0;
    g.row_edges[3] = bbox.hi.z;
    g.col_edges[4] = bbox.hi.x;
    return g;
}

namespace {

// Row index in ascending z: Apex is caudal (low z), Base cranial (high z).
int row_index(Row r) { return r == Row::Apex ? 0 : (r == Row::Mid ? 1 : 2); }

// Column index in ascending x: Lateral-L, Parasagittal-L, Parasagittal-R, Lateral-R.
int col_index(Column c, Side s) {
    if (s == Side::Left) return c == Column::Lateral ? 0 : 1;
    return c == Column::Parasagittal ? 2 : 3;
}

}  // namespace

Box3 sector_box(const SectorGrid& grid, const TargetLabel& label) {
    if (label.column == Column::FusedApex)
        throw InvalidArgument("fused apex label has no single sector box");
    const int r = row_index(label.row);
    const int c = col_index(label.column, label.side);
    return {{grid.col_edges[c], grid.bbox.lo.y, grid.row_edges[r]},
            {grid.col_edges[c + 1], grid.bbox.hi.y, grid.row_edges[r + 1]}};
}

std::optional<TargetLabel> locate(const SectorGrid& grid, const Vec3& p) {
    if (!grid.bbox.contains(p)) return std::nullopt;
    int c = 3;
    while (c > 0 && p.x < grid.col_edges[c]) --c;
    int r = 2;
    while (r > 0 && p.z < grid.row_edges[r]) --r;
    TargetLabel label;
    label.row = r == 0 ? Row::Apex : (r == 1 ? Row::Mid : Row::Base);
    label.side = c <= 1 ? Side::Left : Side::Right;
    label.column = (c == 0 || c == 3) ? Column::Lateral : Column::Parasagittal;
    return label;
}

double clip_length_box(const NeedleSegment& seg, const Box3& box) {
    const Vec3 d = seg.tip - seg.entry;
    double t0 = 0.0, t1 = 1.0;
    for (int a = 0; a < 3; ++a) {
        const double o = seg.entry[a], dir = d[a];
        const double lo = box.lo[a], hi = box.hi[a];
        if (dir == 0.0) {
            if (o < lo || o > hi) return 0.0;
            continue;
        }
        double ta = (lo - o) / dir;
        double tb = (hi - o) / dir;
        if (ta > tb) std::swap(ta, tb);
        if (ta > t0) t0 = ta;
        if (tb < t1) t1 = tb;
        if (t0 > t1) return 0.0;
    }
    return (t1 - t0) * d.norm();
}

double clip_length(const NeedleSegment& seg, const SectorGrid& grid, const TargetLabel& label) {
    if (label.column == Column::FusedApex) {
        const TargetLabel lat{Row::Apex, Column::Lateral, label.side};
        const TargetLabel par{Row::Apex, Column::Parasagittal, label.side};
        return clip_length_box(seg, sector_box(grid, lat)) +
               clip_length_box(seg, sector_box(grid, par));
    }
    return clip_length_box(seg, sector_box(grid, label));
}

bool is_hit(const NeedleSegment& seg, const SectorGrid& grid, const TargetLabel& label,
            double min_len) {
    if (min_len < 0.0) throw InvalidArgument("hit threshold must be >= 0");
    const double len = clip_length(seg, grid, label);
    return len > 0.0 && len >= min_len;
}

}  // namespace trusmap
