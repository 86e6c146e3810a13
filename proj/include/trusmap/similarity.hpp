#pragma once

#include "trusmap/transform.hpp"
#include "trusmap/volume.hpp"

namespace trusmap {

struct SimilarityResult {
    double score = 0.0;    // Pearson correlation, in [-1, 1]
    double overlap = 0.0;  // fraction of sampled reference points inside the moving volume
};

enum class SimilarityStatus { Ok, InsufficientOverlap, DegenerateIntensity };

// Pearson correlation between reference intensities on a step-strided voxel
// grid and moving intensities interpolated at the T^-1-mapped positions,
// restricted to samples that land inside the moving volume. T maps moving
// world coordinates to reference world coordinates. Non-throwing variant for
// use inside optimizer line searches.
SimilarityStatus similarity_nothrow(const Volume3& ref, const Volume3& mov,
                                    const RigidTransform& T, int step, SimilarityResult& out);

// Throwing variant: InsufficientOverlap below 10% coverage, DegenerateIntensity
// when either sample set has zero variance.
SimilarityResult similarity(const Volume3& ref, const Volume3& mov, const RigidTransform& T,
                            int step);

}  // namespace trusmap
