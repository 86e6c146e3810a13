#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trusmap/geometry.hpp"

namespace trusmap {

enum class IntensityType { UInt8, Int16, Float32 };

// 3D scalar grid with world geometry. Voxel (0,0,0) is centered at `origin`;
// the columns of `direction` are the world directions of the voxel axes.
// Data is stored x-fastest and promoted to float for all arithmetic.
struct Volume3 {
    std::array<int, 3> dims{0, 0, 0};
    Vec3 spacing{1, 1, 1};            // mm per voxel
    Vec3 origin{0, 0, 0};             // mm, LPS
    Mat3 direction = Mat3::identity();
    IntensityType intensity_type = IntensityType::Float32;
    std::vector<float> data;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t linear(int i, int j, int k) const {
        return static_cast<std::size_t>(k) * dims[1] * dims[0] +
               static_cast<std::size_t>(j) * dims[0] + i;
    }
    float at(int i, int j, int k) const { return data[linear(i, j, k)]; }
};

// Zero-filled volume with the given geometry; throws InvalidArgument on bad geometry.
Volume3 make_volume(std::array<int, 3> dims, Vec3 spacing, Vec3 origin = {},
                    Mat3 direction = Mat3::identity(),
                    IntensityType type = IntensityType::Float32);

// Checks dims >= 2, spacing > 0, orthonormal direction, data length.
void validate_volume(const Volume3& v);

// Fractional voxel index -> world mm:  origin + direction * (idx .* spacing).
Vec3 index_to_world(const Volume3& v, const Vec3& idx);

// Exact inverse of index_to_world; out-of-grid points yield indices outside
// [0, dims-1] with no clamping.
Vec3 world_to_index(const Volume3& v, const Vec3& p);

// Trilinear interpolation at a world point. Returns nullopt when the
// fractional index leaves [0, dims-1]^3, so callers can restrict statistics
// to the overlap region instead of mixing in padding values.
std::optional<float> sample_trilinear(const Volume3& v, const Vec3& p);

// Interpolation in index coordinates. Bounds behavior as above.
std::optional<float> sample_trilinear_index(const Volume3& v, const Vec3& idx);

// World position of the grid center, index ((dims-1)/2).
Vec3 volume_center(const Volume3& v);

// Separable Gaussian smoothing (sigma = 0.5*factor voxels, truncated at
// 3*sigma, clamped boundary) followed by decimation. New voxel k sits on old
// voxel k*factor, so origin and direction are unchanged and spacing scales.
Volume3 gaussian_downsample(const Volume3& v, int factor);

struct Pyramid {
    std::vector<Volume3> levels;  // level 0 = full resolution
    int factor = 2;
};

// Level k is gaussian_downsample applied k times. Throws if the coarsest
// level would drop below 8 voxels on any axis.
Pyramid build_pyramid(const Volume3& v, int n_levels, int factor = 2);

}  // namespace trusmap
