#pragma once

#include "trusmap/geometry.hpp"

namespace trusmap {

// 6-DOF rigid map q -> rotation*(q - center) + center + translation, in mm.
// `center` is a fixed pivot, kept explicit so rotation and translation stay
// decorrelated for the optimizer.
struct RigidTransform {
    Mat3 rotation = Mat3::identity();  // proper rotation, det +1
    Vec3 translation{0, 0, 0};
    Vec3 center{0, 0, 0};

    static RigidTransform identity(Vec3 center = {}) {
        RigidTransform t;
        t.center = center;
        return t;
    }
};

// Optimizer parameterization: translation in mm plus intrinsic ZYX Euler
// angles in radians (rotation = Rz(r.z) * Ry(r.y) * Rx(r.x) about the center).
struct TransformParams {
    Vec3 t{0, 0, 0};
    Vec3 r{0, 0, 0};
};

RigidTransform from_params(const TransformParams& p, const Vec3& center);

// Inverse of from_params away from |r.y| = pi/2; throws GimbalLock there.
TransformParams to_params(const RigidTransform& T);

Vec3 apply_point(const RigidTransform& T, const Vec3& q);

// apply(compose(A,B), q) == apply(A, apply(B, q)). The result keeps A's center.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

RigidTransform invert(const RigidTransform& T);

// Overall rotation angle in degrees, from the matrix trace.
double rotation_angle_deg(const RigidTransform& T);

// Throws InvalidArgument unless rotation is orthonormal with det +1 (1e-9).
void validate_transform(const RigidTransform& T);

// Rz*Ry*Rx from per-axis angles (r.x, r.y, r.z) in radians.
Mat3 rotation_zyx(const Vec3& r);

}  // namespace trusmap
