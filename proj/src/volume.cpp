#include "trusmap/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "trusmap/errors.hpp"

namespace trusmap {

Volume3 make_volume(std::array<int, 3> dims, Vec3 spacing, Vec3 origin, Mat3 direction,
                    IntensityType type) {
    Volume3 v;
    v.dims = dims;
    v.spacing = spacing;
    v.origin = origin;
    v.direction = direction;
    v.intensity_type = type;
    std::size_t n = 1;
    for (int d : dims) n *= d > 0 ? static_cast<std::size_t>(d) : 0;
    v.data.assign(n, 0.0f);
    validate_volume(v);
    return v;
}

void validate_volume(const Volume3& v) {
    for (int a = 0; a < 3; ++a) {
        if (v.dims[a] < 2) throw InvalidArgument("volume dims must all be >= 2");
        if (!(v.spacing[a] > 0.0)) throw InvalidArgument("volume spacing must be positive");
    }
    if (!is_orthonormal(v.direction, 1e-6) || std::abs(std::abs(v.direction.det()) - 1.0) > 1e-6)
        throw InvalidArgument("volume direction matrix must be orthonormal");
    if (v.data.size() != v.voxel_count()) {
        std::ostringstream os;
        os << "volume data length " << v.data.size() << " does not match dims product "
           << v.voxel_count();
        throw InvalidArgument(os.str());
    }
}

Vec3 index_to_world(const Volume3& v, const Vec3& idx) {
    return v.origin + v.direction * idx.scaled(v.spacing);
}

Vec3 world_to_index(const Volume3& v, const Vec3& p) {
    const Vec3 local = v.direction.transposed() * (p - v.origin);
    return {local.x / v.spacing.x, local.y / v.spacing.y, local.z / v.spacing.z};
}

std::optional<float> sample_trilinear_index(const Volume3& v, const Vec3& idx) {
    // A hair of slack absorbs round-off from world -> index conversion, so
    // voxel centers on the boundary still sample exactly.
    constexpr double eps = 1e-9;
    double fx = idx.x, fy = idx.y, fz = idx.z;
    if (fx < -eps || fy < -eps || fz < -eps || fx > v.dims[0] - 1 + eps ||
        fy > v.dims[1] - 1 + eps || fz > v.dims[2] - 1 + eps)
        return std::nullopt;
    fx = std::clamp(fx, 0.0, double(v.dims[0] - 1));
    fy = std::clamp(fy, 0.0, double(v.dims[1] - 1));
    fz = std::clamp(fz, 0.0, double(v.dims[2] - 1));
    // Snap to lattice points so voxel centers reproduce stored values exactly
    // even after a world -> index round trip.
    auto snap = [](double f) {
        const double r = std::round(f);
        return std::abs(f - r) < eps ? r : f;
    };
    fx = snap(fx);
    fy = snap(fy);
    fz = snap(fz);
    int i = static_cast<int>(fx), j = static_cast<int>(fy), k = static_cast<int>(fz);
    if (i > v.dims[0] - 2) i = v.dims[0] - 2;
    if (j > v.dims[1] - 2) j = v.dims[1] - 2;
    if (k > v.dims[2] - 2) k = v.dims[2] - 2;
    const double ux = fx - i, uy = fy - j, uz = fz - k;

    const std::size_t base = v.linear(i, j, k);
    const std::size_t sx = 1, sy = v.dims[0],
                      sz = static_cast<std::size_t>(v.dims[0]) * v.dims[1];
    const float* d = v.data.data();
    const double v000 = d[base], v100 = d[base + sx];
    const double v010 = d[base + sy], v110 = d[base + sy + sx];
    const double v001 = d[base + sz], v101 = d[base + sz + sx];
    const double v011 = d[base + sz + sy], v111 = d[base + sz + sy + sx];
    const double c00 = v000 + ux * (v100 - v000);
    const double c10 = v010 + ux * (v110 - v010);
    const double c01 = v001 + ux * (v101 - v001);
    const double c11 = v011 + ux * (v111 - v011);
    const double c0 = c00 + uy * (c10 - c00);
    const double c1 = c01 + uy * (c11 - c01);
    return static_cast<float>(c0 + uz * (c1 - c0));
}

std::optional<float> sample_trilinear(const Volume3& v, const Vec3& p) {
    return sample_trilinear_index(v, world_to_index(v, p));
}

Vec3 volume_center(const Volume3& v) {
    return index_to_world(v, {0.5 * (v.dims[0] - 1), 0.5 * (v.dims[1] - 1), 0.5 * (v.dims[2] - 1)});
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& w : k) w /= sum;
    return k;
}

// Convolves along `axis` with clamped boundary handling.
void smooth_axis(std::vector<float>& data, const std::array<int, 3>& dims, int axis,
                 const std::vector<double>& kernel) {
    const int radius = static_cast<int>(kernel.size() / 2);
    const int n = dims[axis];
    const std::size_t stride_of[3] = {1, static_cast<std::size_t>(dims[0]),
                                      static_cast<std::size_t>(dims[0]) * dims[1]};
    const std::size_t stride = stride_of[axis];
    const int u_axis = axis == 0 ? 1 : 0;
    const int v_axis = axis == 2 ? 1 : 2;
    const std::size_t u_stride = stride_of[u_axis], v_stride = stride_of[v_axis];
    std::vector<float> line(n);

    for (int vi = 0; vi < dims[v_axis]; ++vi) {
        for (int ui = 0; ui < dims[u_axis]; ++ui) {
            const std::size_t base = u_stride * ui + v_stride * vi;
            for (int i = 0; i < n; ++i) line[i] = data[base + stride * i];
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int t = -radius; t <= radius; ++t) {
                    int s = i + t;
                    if (s < 0) s = 0;
                    if (s > n - 1) s = n - 1;
                    acc += kernel[t + radius] * line[s];
                }
                data[base + stride * i] = static_cast<float>(acc);
            }
        }
    }
}

}  // namespace

Volume3 gaussian_downsample(const Volume3& v, int factor) {
    validate_volume(v);
    if (factor < 2) throw InvalidArgument("downsample factor must be >= 2");

    std::vector<float> smoothed = v.data;
    const auto kernel = gaussian_kernel(0.5 * factor);
    for (int axis = 0; axis < 3; ++axis) smooth_axis(smoothed, v.dims, axis, kernel);

    Volume3 out;
    for (int a = 0; a < 3; ++a) out.dims[a] = (v.dims[a] + factor - 1) / factor;
    out.spacing = v.spacing * static_cast<double>(factor);
    out.origin = v.origin;
    out.direction = v.direction;
    out.intensity_type = v.intensity_type;
    out.data.resize(out.voxel_count());
    for (int k = 0; k < out.dims[2]; ++k)
        for (int j = 0; j < out.dims[1]; ++j)
            for (int i = 0; i < out.dims[0]; ++i)
                out.data[out.linear(i, j, k)] =
                    smoothed[v.linear(i * factor, j * factor, k * factor)];
    return out;
}

Pyramid build_pyramid(const Volume3& v, int n_levels, int factor) {
    validate_volume(v);
    if (n_levels < 1) throw InvalidArgument("pyramid needs at least one level");
    if (factor < 2) throw InvalidArgument("pyramid factor must be >= 2");
    std::array<int, 3> coarsest = v.dims;
    for (int l = 1; l < n_levels; ++l)
        for (int a = 0; a < 3; ++a) coarsest[a] = (coarsest[a] + factor - 1) / factor;
    for (int a = 0; a < 3; ++a)
        if (coarsest[a] < 8)
            throw InvalidArgument("volume too small for requested pyramid levels");

    Pyramid p;
    p.factor = factor;
    p.levels.push_back(v);
    for (int l = 1; l < n_levels; ++l) p.levels.push_back(gaussian_downsample(p.levels.back(), factor));
    return p;
}

}  // namespace trusmap
