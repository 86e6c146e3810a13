#pragma once

// Shared test utilities and independent oracles. Everything here is
// deliberately decoupled from the library code paths it checks: the clip
// oracle counts sample points instead of clipping, the chi-square oracle
// integrates the normal density instead of calling erfc.

#include <cmath>
#include <cstdint>
#include <vector>

#include "trusmap/biopsy_types.hpp"
#include "trusmap/geometry.hpp"
#include "trusmap/phantom.hpp"
#include "trusmap/rng.hpp"
#include "trusmap/transform.hpp"

namespace trusmap::testing {

struct TestRng {
    SplitMix64 rng;
    explicit TestRng(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return rng.uniform(lo, hi); }
    Vec3 vec(double lo, double hi) {
        return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
    }
    Vec3 angles(double max_abs) { return vec(-max_abs, max_abs); }

    RigidTransform rigid(double max_t, double max_r_rad, Vec3 center = {}) {
        TransformParams p;
        p.t = vec(-max_t, max_t);
        p.r = angles(max_r_rad);
        return from_params(p, center);
    }

    // Random proper rotation via uniform Euler angles (covers all of SO(3)).
    Mat3 rotation() { return rotation_zyx(vec(-3.14159265358979, 3.14159265358979)); }
};

// Segment length inside a closed box, estimated by midpoint sampling.
// Error is bounded by ~2 * length / n_samples.
inline double clip_length_sampled(const NeedleSegment& seg, const Box3& box, int n_samples) {
    const Vec3 d = seg.tip - seg.entry;
    int inside = 0;
    for (int i = 0; i < n_samples; ++i) {
        const double t = (i + 0.5) / n_samples;
        if (box.contains(seg.entry + d * t)) ++inside;
    }
    return d.norm() * inside / n_samples;
}

// Chi-square(df=1) survival function by Simpson integration of the standard
// normal density: P(X > x) = 2 * integral of phi from sqrt(x) to infinity.
inline double chi2_sf_df1_oracle(double x) {
    if (x <= 0.0) return 1.0;
    const double a = std::sqrt(x);
    const double b = a + 14.0;  // tail beyond is < 1e-40
    const int n = 20000;        // even
    const double h = (b - a) / n;
    auto phi = [](double u) {
        return std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.14159265358979323846);
    };
    double sum = phi(a) + phi(b);
    for (int i = 1; i < n; ++i) sum += phi(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return 2.0 * sum * h / 3.0;
}

struct PublishedSplitTable {
    long n1 = 0, hits1 = 0, n2 = 0, hits2 = 0;
};

// Reconstructs the chronological-split 2x2 table from the published rounded
// rates (60% / 72%) and the 371-biopsy total. No integer table also matches
// the 248 total hits exactly, so the search keeps the rounded rates hard,
// prefers rates closest to the published ones, then the most even split.
inline PublishedSplitTable reconstruct_published_split() {
    PublishedSplitTable best;
    double best_err = 1e30;
    for (long n1 = 179; n1 <= 192; ++n1) {
        const long n2 = 371 - n1;
        if (n2 < 179 || n2 > 192) continue;
        for (long h1 = 0; h1 <= n1; ++h1) {
            const double r1 = 100.0 * h1 / n1;
            if (std::lround(r1) != 60) continue;
            for (long h2 = 0; h2 <= n2; ++h2) {
                const double r2 = 100.0 * h2 / n2;
                if (std::lround(r2) != 72) continue;
                const double err = (r1 - 60.0) * (r1 - 60.0) + (r2 - 72.0) * (r2 - 72.0) +
                                   0.001 * std::abs(n1 - n2);
                if (err < best_err) {
                    best_err = err;
                    best = {n1, h1, n2, h2};
                }
            }
        }
    }
    return best;
}

// Phantom scaled down for unit tests: 64 mm anatomy in a 64-voxel grid.
inline PhantomConfig small_phantom_config(std::uint64_t seed) {
    PhantomConfig cfg;
    cfg.dims = {64, 64, 64};
    cfg.spacing = {1.0, 1.0, 1.0};
    cfg.semi_axes = {25.0, 20.0, 21.5};
    cfg.seed = seed;
    return cfg;
}

}  // namespace trusmap::testing
