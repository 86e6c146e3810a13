#include "trusmap/similarity.hpp"

#include <cmath>
#include <vector>

#include "trusmap/errors.hpp"
#include "trusmap/threading.hpp"

namespace trusmap {
namespace {

struct Sums {
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    long n = 0;
};

}  // namespace

SimilarityStatus similarity_nothrow(const Volume3& ref, const Volume3& mov,
                                    const RigidTransform& T, int step, SimilarityResult& out) {
    if (step < 1) throw InvalidArgument("sampling step must be >= 1");

    // Affine map from reference index space to moving index space through
    // T^-1, folded into one matrix so the inner loop is three adds per sample.
    const RigidTransform inv = invert(T);
    const Mat3 world_map = inv.rotation;
    const Vec3 world_off = inv.center + inv.translation - inv.rotation * inv.center;
    const Mat3 mov_dir_t = mov.direction.transposed();
    Mat3 m{};  // mov_index = m * ref_index + b
    for (int c = 0; c < 3; ++c) {
        const Vec3 col = mov_dir_t * (world_map * ref.direction.col(c)) * ref.spacing[c];
        m(0, c) = col.x / mov.spacing.x;
        m(1, c) = col.y / mov.spacing.y;
        m(2, c) = col.z / mov.spacing.z;
    }
    const Vec3 off_world = mov_dir_t * (world_map * ref.origin + world_off - mov.origin);
    const Vec3 b{off_world.x / mov.spacing.x, off_world.y / mov.spacing.y,
                 off_world.z / mov.spacing.z};

    const int nx = (ref.dims[0] - 1) / step + 1;
    const int ny = (ref.dims[1] - 1) / step + 1;
    const int nz = (ref.dims[2] - 1) / step + 1;
    const Vec3 dx = m.col(0) * static_cast<double>(step);

    const double hx = mov.dims[0] - 1.0, hy = mov.dims[1] - 1.0, hz = mov.dims[2] - 1.0;
    const float* mdata = mov.data.data();
    const float* rdata = ref.data.data();
    const std::size_t msy = static_cast<std::size_t>(mov.dims[0]);
    const std::size_t msz = msy * mov.dims[1];

    // One fixed slab per sampled z plane keeps the reduction order, and with
    // it the score bits, independent of the worker count.
    std::vector<Sums> partial(nz);
    parallel_for(nz, [&](int zi) {
        Sums s;
        const int k = zi * step;
        for (int yi = 0; yi < ny; ++yi) {
            const int j = yi * step;
            Vec3 pos = m.col(1) * static_cast<double>(j) + m.col(2) * static_cast<double>(k) + b;
            const float* rrow = rdata + ref.linear(0, j, k);
            for (int xi = 0; xi < nx; ++xi, pos += dx) {
                if (pos.x < 0.0 || pos.y < 0.0 || pos.z < 0.0 || pos.x > hx || pos.y > hy ||
                    pos.z > hz)
                    continue;
                int ci = static_cast<int>(pos.x), cj = static_cast<int>(pos.y),
                    ck = static_cast<int>(pos.z);
                if (ci > mov.dims[0] - 2) ci = mov.dims[0] - 2;
                if (cj > mov.dims[1] - 2) cj = mov.dims[1] - 2;
                if (ck > mov.dims[2] - 2) ck = mov.dims[2] - 2;
                const double ux = pos.x - ci, uy = pos.y - cj, uz = pos.z - ck;
                const float* base = mdata + ck * msz + cj * msy + ci;
                const double v000 = base[0], v100 = base[1];
                const double v010 = base[msy], v110 = base[msy + 1];
                const double v001 = base[msz], v101 = base[msz + 1];
                const double v011 = base[msz + msy], v111 = base[msz + msy + 1];
                const double c00 = v000 + ux * (v100 - v000);
                const double c10 = v010 + ux * (v110 - v010);
                const double c01 = v001 + ux * (v101 - v001);
                const double c11 = v011 + ux * (v111 - v011);
                const double c0 = c00 + uy * (c10 - c00);
                const double c1 = c01 + uy * (c11 - c01);
                const double y = c0 + uz * (c1 - c0);
                const double x = rrow[static_cast<std::size_t>(xi) * step];
                s.sx += x;
                s.sy += y;
                s.sxx += x * x;
                s.syy += y * y;
                s.sxy += x * y;
                ++s.n;
            }
        }
        partial[zi] = s;
    });

    Sums total;
    for (const Sums& s : partial) {
        total.sx += s.sx;
        total.sy += s.sy;
        total.sxx += s.sxx;
        total.syy += s.syy;
        total.sxy += s.sxy;
        total.n += s.n;
    }

    const double grid_count = static_cast<double>(nx) * ny * nz;
    out.overlap = total.n / grid_count;
    out.score = 0.0;
    if (out.overlap < 0.1) return SimilarityStatus::InsufficientOverlap;

    const double n = static_cast<double>(total.n);
    const double var_x = total.sxx - total.sx * total.sx / n;
    const double var_y = total.syy - total.sy * total.sy / n;
    const double eps_x = 1e-12 * std::max(1.0, total.sxx);
    const double eps_y = 1e-12 * std::max(1.0, total.syy);
    if (var_x <= eps_x || var_y <= eps_y) return SimilarityStatus::DegenerateIntensity;

    const double cov = total.sxy - total.sx * total.sy / n;
    double score = cov / std::sqrt(var_x * var_y);
    if (score > 1.0) score = 1.0;
    if (score < -1.0) score = -1.0;
    out.score = score;
    return SimilarityStatus::Ok;
}

SimilarityResult similarity(const Volume3& ref, const Volume3& mov, const RigidTransform& T,
                            int step) {
    SimilarityResult out;
    switch (similarity_nothrow(ref, mov, T, step, out)) {
        case SimilarityStatus::Ok: return out;
        case SimilarityStatus::InsufficientOverlap:
            throw InsufficientOverlap("moving volume covers only " +
                                      std::to_string(out.overlap * 100.0) +
                                      "% of the sampled reference grid");
        case SimilarityStatus::DegenerateIntensity:
            throw DegenerateIntensity("zero intensity variance in the overlap region");
    }
    return out;  // unreachable
}

}  // namespace trusmap
