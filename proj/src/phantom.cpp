#include "trusmap/phantom.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "trusmap/errors.hpp"
#include "trusmap/rng.hpp"
#include "trusmap/threading.hpp"

namespace trusmap {
namespace {

constexpr std::uint64_t kFiducialStream = 0xF1D0C1A15EEDull;
constexpr std::uint64_t kMotionStream = 0x3A0710265EEDull;
constexpr std::uint64_t kAimStream = 0xA13516AA5EEDull;
constexpr std::uint64_t kNoiseStream = 0x2015E5EED000ull;

Vec3 grid_center(const PhantomConfig& cfg) {
    return {0.5 * (cfg.dims[0] - 1) * cfg.spacing.x, 0.5 * (cfg.dims[1] - 1) * cfg.spacing.y,
            0.5 * (cfg.dims[2] - 1) * cfg.spacing.z};
}

// Approximate signed distance (mm, positive outside) to the ellipsoid
// surface; exact enough near the boundary where the ramp lives.
double ellipsoid_distance(const Vec3& d, const Vec3& axes) {
    const double gx = d.x / axes.x, gy = d.y / axes.y, gz = d.z / axes.z;
    const double rho = std::sqrt(gx * gx + gy * gy + gz * gz);
    if (rho < 1e-9) return -std::fmin(axes.x, std::fmin(axes.y, axes.z));
    const double nx = d.x / (axes.x * axes.x), ny = d.y / (axes.y * axes.y),
                 nz = d.z / (axes.z * axes.z);
    const double grad = std::sqrt(nx * nx + ny * ny + nz * nz) / rho;
    return (rho - 1.0) / grad;
}

struct Field {
    const PhantomConfig& cfg;
    Vec3 center;
    const std::vector<Vec3>& fiducials;

    // Tissue component (speckled) and additive fiducial component (clean).
    void eval(const Vec3& q, double& tissue, double& fid_add) const {
        const double d = ellipsoid_distance(q - center, cfg.semi_axes);
        const double inside = 1.0 - smoothstep01((d + 0.75) / 1.5);
        tissue = cfg.background_mean + (cfg.prostate_mean - cfg.background_mean) * inside;
        fid_add = 0.0;
        for (const Vec3& f : fiducials) {
            const double r = (q - f).norm();
            if (r < cfg.fiducial_radius + 0.3) {
                const double u = smoothstep01((cfg.fiducial_radius + 0.3 - r) / 0.6);
                fid_add += u * (cfg.fiducial_intensity - cfg.prostate_mean);
            }
        }
    }
};

std::vector<Vec3> place_fiducials(const PhantomConfig& cfg) {
    const Vec3 c = grid_center(cfg);
    SplitMix64 rng(cfg.seed ^ kFiducialStream);
    std::vector<Vec3> out;
    int attempts = 0;
    while (static_cast<int>(out.size()) < cfg.n_fiducials) {
        if (++attempts > 100000)
            throw InvalidArgument("could not place fiducials with 5 mm separation");
        const Vec3 p{rng.uniform(-1.0, 1.0) * cfg.semi_axes.x,
                     rng.uniform(-1.0, 1.0) * cfg.semi_axes.y,
                     rng.uniform(-1.0, 1.0) * cfg.semi_axes.z};
        const double rho2 = (p.x / cfg.semi_axes.x) * (p.x / cfg.semi_axes.x) +
                            (p.y / cfg.semi_axes.y) * (p.y / cfg.semi_axes.y) +
                            (p.z / cfg.semi_axes.z) * (p.z / cfg.semi_axes.z);
        if (rho2 > 0.8 * 0.8) continue;  // keep the sphere well inside the gland
        const Vec3 world = c + p;
        bool ok = true;
        for (const Vec3& q : out)
            if ((world - q).norm() < 5.0) ok = false;
        if (ok) out.push_back(world);
    }
    return out;
}

Volume3 render(const PhantomConfig& cfg, const RigidTransform& to_ref_frame,
               std::uint64_t noise_seed, const std::vector<Vec3>& fiducials_ref) {
    Volume3 v = make_volume(cfg.dims, cfg.spacing);
    const Field field{cfg, grid_center(cfg), fiducials_ref};
    const double sigma = cfg.speckle_sigma;
    const double log_mean = -0.5 * sigma * sigma;  // E[speckle] = 1
    const std::size_t slice = static_cast<std::size_t>(cfg.dims[0]) * cfg.dims[1];
    // Identity motion must reproduce the reference bit for bit, so skip the
    // subtract-rotate-add round trip in that case.
    const bool is_identity = to_ref_frame.rotation.m == Mat3::identity().m &&
                             to_ref_frame.translation.norm2() == 0.0;

    parallel_for(cfg.dims[2], [&](int k) {
        std::size_t idx = slice * static_cast<std::size_t>(k);
        for (int j = 0; j < cfg.dims[1]; ++j) {
            for (int i = 0; i < cfg.dims[0]; ++i, ++idx) {
                const Vec3 p{i * cfg.spacing.x, j * cfg.spacing.y, k * cfg.spacing.z};
                const Vec3 q = is_identity ? p : apply_point(to_ref_frame, p);
                double tissue, fid_add;
                field.eval(q, tissue, fid_add);
                const double z = counter_gaussian(noise_seed, idx);
                const double speckle = std::exp(log_mean + sigma * z);
                v.data[idx] = static_cast<float>(tissue * speckle + fid_add);
            }
        }
    });
    return v;
}

}  // namespace

void PhantomConfig::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 2) throw InvalidArgument("phantom dims must be >= 2");
        if (!(spacing[a] > 0.0)) throw InvalidArgument("phantom spacing must be positive");
        if (!(semi_axes[a] > 0.0)) throw InvalidArgument("phantom semi-axes must be positive");
        const double half_extent = 0.5 * (dims[a] - 1) * spacing[a];
        if (semi_axes[a] + 2.0 > half_extent)
            throw InvalidArgument("ellipsoid must fit inside the volume with a 2 mm margin");
    }
    if (n_fiducials < 3) throw InvalidArgument("need at least 3 fiducials");
    if (!(fiducial_radius > 0.0)) throw InvalidArgument("fiducial radius must be positive");
    if (speckle_sigma < 0.0) throw InvalidArgument("speckle sigma must be >= 0");
    if (!(prostate_mean > 0.0) || !(background_mean > 0.0))
        throw InvalidArgument("intensity means must be positive");
}

Box3 prostate_box(const PhantomConfig& cfg) {
    const Vec3 c = grid_center(cfg);
    return {c - cfg.semi_axes, c + cfg.semi_axes};
}

std::pair<Volume3, GroundTruth> generate_reference(const PhantomConfig& cfg) {
    cfg.validate();
    GroundTruth gt;
    gt.config = cfg;
    gt.transform = RigidTransform::identity(grid_center(cfg));
    gt.fiducials_ref = place_fiducials(cfg);
    gt.fiducials_mov = gt.fiducials_ref;
    Volume3 v = render(cfg, gt.transform, cfg.seed, gt.fiducials_ref);
    return {std::move(v), std::move(gt)};
}

std::pair<Volume3, GroundTruth> generate_moving(const PhantomConfig& cfg,
                                                const RigidTransform& T_true,
                                                std::uint64_t noise_seed) {
    cfg.validate();
    validate_transform(T_true);
    if (T_true.translation.norm() > 25.0 || rotation_angle_deg(T_true) > 20.0)
        throw InvalidArgument("ground-truth motion outside plausibility bounds (25 mm, 20 deg)");

    GroundTruth gt;
    gt.config = cfg;
    gt.transform = T_true;
    gt.fiducials_ref = place_fiducials(cfg);
    const RigidTransform inv = invert(T_true);
    gt.fiducials_mov.reserve(gt.fiducials_ref.size());
    for (const Vec3& f : gt.fiducials_ref) gt.fiducials_mov.push_back(apply_point(inv, f));

    Volume3 v = render(cfg, T_true, noise_seed, gt.fiducials_ref);
    return {std::move(v), std::move(gt)};
}

SessionBundle generate_session(const PhantomConfig& cfg, int n_biopsies, double motion_mm,
                               double motion_deg, double aim_sigma_mm, std::uint64_t seed) {
    cfg.validate();
    if (n_biopsies < 1) throw InvalidArgument("session needs at least one biopsy");
    if (motion_mm < 0.0 || motion_deg < 0.0 || aim_sigma_mm < 0.0)
        throw InvalidArgument("motion bounds and aim sigma must be >= 0");

    SessionBundle bundle;
    auto [ref, ref_gt] = generate_reference(cfg);
    bundle.reference = std::move(ref);
    bundle.grid = build_grid(prostate_box(cfg));
    bundle.session.patient_id = "phantom";
    bundle.session.reference_volume_id = "reference.mha";
    bundle.session.chronological_rank = 1;

    const Vec3 center = grid_center(cfg);
    SplitMix64 motion_rng(seed ^ kMotionStream);
    SplitMix64 aim_rng(seed ^ kAimStream);

    for (int i = 0; i < n_biopsies; ++i) {
        const TargetLabel target = raw_labels()[i % 12];

        TransformParams params;
        for (;;) {
            params.t = {motion_rng.uniform(-motion_mm, motion_mm),
                        motion_rng.uniform(-motion_mm, motion_mm),
                        motion_rng.uniform(-motion_mm, motion_mm)};
            if (params.t.norm() <= motion_mm) break;
        }
        const double max_rad = deg_to_rad(motion_deg);
        for (;;) {
            params.r = {motion_rng.uniform(-max_rad, max_rad),
                        motion_rng.uniform(-max_rad, max_rad),
                        motion_rng.uniform(-max_rad, max_rad)};
            if (rotation_angle_deg(from_params(params, center)) <= motion_deg) break;
        }
        const RigidTransform T_true = from_params(params, center);

        // Intended core: through the sector center along the cranio-caudal
        // axis. The aim error draws are consumed regardless of sigma.
        const Box3 box = sector_box(bundle.grid, target);
        const Vec3 aim{aim_rng.uniform(), aim_rng.uniform(), aim_rng.uniform()};
        const Vec3 offset{aim_sigma_mm * normal_icdf(aim.x), aim_sigma_mm * normal_icdf(aim.y),
                          aim_sigma_mm * normal_icdf(aim.z)};
        constexpr double kCoreLength = 18.0;
        const Vec3 sector_center = box.center();
        const Vec3 entry_ref = sector_center + offset - Vec3{0, 0, kCoreLength / 2};
        const Vec3 tip_ref = sector_center + offset + Vec3{0, 0, kCoreLength / 2};

        char name[32];
        std::snprintf(name, sizeof name, "bx_%03d.mha", i + 1);

        const std::uint64_t noise_seed = splitmix64_at(seed ^ kNoiseStream, i);
        auto [mov, gt] = generate_moving(cfg, T_true, noise_seed);
        bundle.moving.push_back(std::move(mov));
        bundle.truths.push_back(std::move(gt));

        const RigidTransform inv = invert(T_true);
        BiopsyRecord record;
        record.index = i + 1;
        record.intended_target = target;
        record.needle.entry = apply_point(inv, entry_ref);
        record.needle.tip = apply_point(inv, tip_ref);
        record.needle.volume_id = name;
        bundle.session.records.push_back(record);
    }
    return bundle;
}

}  // namespace trusmap
