#pragma once

#include <span>
#include <string>
#include <vector>

#include "trusmap/transform.hpp"

namespace trusmap {

// Corresponding point landmark in both frames (mm).
struct FiducialPair {
    Vec3 p_ref;
    Vec3 p_mov;
    std::string id;
};

struct TreSummary {
    std::vector<std::pair<std::string, double>> per_pair;  // (id, distance mm)
    double mean = 0.0;
    double max = 0.0;
    int n = 0;
};

// Target registration error: ||T(p_mov) - p_ref|| per pair, pooled summary.
TreSummary tre(std::span<const FiducialPair> pairs, const RigidTransform& T);

}  // namespace trusmap
