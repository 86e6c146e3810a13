#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "trusmap/biopsy.hpp"
#include "trusmap/sector.hpp"
#include "trusmap/transform.hpp"
#include "trusmap/volume.hpp"

namespace trusmap {

// Synthetic TRUS-like prostate: ellipsoid with a smooth 1.5 mm boundary ramp,
// multiplicative log-normal speckle (mean-preserving) and bright spherical
// calcification stand-ins. Defaults give a 45 ml gland in a 64 mm cube.
struct PhantomConfig {
    std::array<int, 3> dims{128, 128, 128};
    Vec3 spacing{0.5, 0.5, 0.5};        // mm
    Vec3 semi_axes{25.0, 20.0, 21.5};   // mm; 4/3*pi*abc ~ 45 ml
    double prostate_mean = 120.0;
    double background_mean = 60.0;
    double speckle_sigma = 0.25;        // sigma of log intensity
    int n_fiducials = 5;
    double fiducial_radius = 1.0;       // mm
    double fiducial_intensity = 230.0;
    std::uint64_t seed = 1;

    void validate() const;
};

// Everything the generators know and a registration should recover.
struct GroundTruth {
    RigidTransform transform;            // moving world -> reference world
    std::vector<Vec3> fiducials_ref;
    std::vector<Vec3> fiducials_mov;     // = transform^-1(fiducials_ref)
    PhantomConfig config;
};

// Reference volume plus its fiducials (transform = identity). Deterministic
// per seed; byte-identical across thread counts.
std::pair<Volume3, GroundTruth> generate_reference(const PhantomConfig& cfg);

// Moving volume: the noiseless reference field carried through T_true, with
// an independent speckle realization. Evaluation is analytic, so no
// interpolation blur correlates the noise between the pair. T_true must stay
// inside the plausibility bounds (25 mm, 20 deg).
std::pair<Volume3, GroundTruth> generate_moving(const PhantomConfig& cfg,
                                                const RigidTransform& T_true,
                                                std::uint64_t noise_seed);

struct SessionBundle {
    Volume3 reference;
    std::vector<Volume3> moving;
    Session session;                 // needle segments in each moving frame
    std::vector<GroundTruth> truths; // one per moving volume
    SectorGrid grid;                 // planning grid over the ellipsoid box
};

// One reference plus n moving volumes under independent seeded motions
// bounded by (motion_mm, motion_deg). Needles aim at their sector's center
// along the cranio-caudal axis with a seeded Gaussian offset (sigma mm)
// applied to both endpoints; the offset draws do not depend on sigma, so
// paired-seed comparisons across sigmas are meaningful.
SessionBundle generate_session(const PhantomConfig& cfg, int n_biopsies, double motion_mm,
                               double motion_deg, double aim_sigma_mm, std::uint64_t seed);

// Planning box used by generate_session: the ellipsoid's bounding box.
Box3 prostate_box(const PhantomConfig& cfg);

}  // namespace trusmap
