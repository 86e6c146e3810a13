#pragma once

#include <vector>

#include "trusmap/similarity.hpp"
#include "trusmap/transform.hpp"
#include "trusmap/volume.hpp"

namespace trusmap {

struct CoarseSearchConfig {
    bool enabled = true;
    double range_mm = 15.0;  // translation grid half-width at the coarsest level
    double step_mm = 5.0;
};

struct RegistrationConfig {
    int n_levels = 3;
    // Voxel stride of the similarity sample grid per pyramid level (index 0 =
    // full resolution); levels past the end reuse the last entry.
    std::vector<int> sampling_steps{2, 1, 1};
    CoarseSearchConfig coarse_search;
    double param_tolerance = 0.01;     // mm and scaled-radian units
    double function_tolerance = 1e-5;
    int max_iterations = 100;          // Powell sweeps per level
    double success_min_score = 0.6;
    double success_max_translation_mm = 25.0;
    double success_max_rotation_deg = 20.0;
    double angle_scale = 50.0;         // mm per radian; conditions the 6-vector

    void validate() const;
    int step_for_level(int level) const;
};

struct RegistrationResult {
    RigidTransform transform;  // moving world -> reference world
    double score = 0.0;
    bool success = false;
    int iterations = 0;
    double overlap_fraction = 0.0;
    double elapsed_seconds = 0.0;
};

// Powell direction-set maximization of the similarity score over the 6
// parameters, starting from init. The returned parameters never score worse
// than the initial ones. `iterations` accumulates Powell sweeps.
TransformParams optimize_level(const Volume3& ref, const Volume3& mov, const TransformParams& init,
                               const RegistrationConfig& cfg, const Vec3& center, int step,
                               int& iterations);

// Multi-resolution registration: pyramids, optional coarse translation search
// at the coarsest level, then Powell refinement coarse to fine. Success is
// automatic: score, translation magnitude and rotation angle must all stay
// within the configured plausibility bounds.
RegistrationResult register_volumes(const Volume3& ref, const Volume3& mov,
                                    const RegistrationConfig& cfg = {});

}  // namespace trusmap
