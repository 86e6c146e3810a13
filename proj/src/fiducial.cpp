#include "trusmap/fiducial.hpp"

#include <algorithm>
#include <cmath>

#include "trusmap/errors.hpp"

namespace trusmap {

TreSummary tre(std::span<const FiducialPair> pairs, const RigidTransform& T) {
    if (pairs.empty()) throw InvalidArgument("tre requires at least one fiducial pair");
    TreSummary summary;
    summary.n = static_cast<int>(pairs.size());
    summary.per_pair.reserve(pairs.size());
    double sum = 0.0;
    for (const FiducialPair& pair : pairs) {
        if (!std::isfinite(pair.p_ref.norm2()) || !std::isfinite(pair.p_mov.norm2()))
            throw InvalidArgument("fiducial coordinates must be finite");
        const double d = (apply_point(T, pair.p_mov) - pair.p_ref).norm();
        summary.per_pair.emplace_back(pair.id, d);
        sum += d;
        summary.max = std::max(summary.max, d);
    }
    summary.mean = sum / summary.n;
    return summary;
}

}  // namespace trusmap
