#include "trusmap/transform.hpp"

#include <algorithm>
#include <cmath>

#include "trusmap/errors.hpp"

namespace trusmap {

Mat3 rotation_zyx(const Vec3& r) {
    const double cx = std::cos(r.x), sx = std::sin(r.x);
    const double cy = std::cos(r.y), sy = std::sin(r.y);
    const double cz = std::cos(r.z), sz = std::sin(r.z);
    Mat3 m{};
    m(0, 0) = cz * cy;
    m(0, 1) = cz * sy * sx - sz * cx;
    m(0, 2) = cz * sy * cx + sz * sx;
    m(1, 0) = sz * cy;
    m(1, 1) = sz * sy * sx + cz * cx;
    m(1, 2) = sz * sy * cx - cz * sx;
    m(2, 0) = -sy;
    m(2, 1) = cy * sx;
    m(2, 2) = cy * cx;
    return m;
}

RigidTransform from_params(const TransformParams& p, const Vec3& center) {
    RigidTransform t;
    t.rotation = rotation_zyx(p.r);
    t.translation = p.t;
    t.center = center;
    return t;
}

TransformParams to_params(const RigidTransform& T) {
    const Mat3& m = T.rotation;
    if (std::abs(m(2, 0)) > 1.0 - 1e-10)
        throw GimbalLock("euler extraction undefined at |ry| = pi/2");
    TransformParams p;
    p.r.y = std::asin(std::clamp(-m(2, 0), -1.0, 1.0));
    p.r.z = std::atan2(m(1, 0), m(0, 0));
    p.r.x = std::atan2(m(2, 1), m(2, 2));
    p.t = T.translation;
    return p;
}

Vec3 apply_point(const RigidTransform& T, const Vec3& q) {
    return T.rotation * (q - T.center) + T.center + T.translation;
}

namespace {
// apply(q) == rotation*q + offset
Vec3 offset_of(const RigidTransform& t) {
    return t.center + t.translation - t.rotation * t.center;
}
}  // namespace

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform c;
    c.rotation = a.rotation * b.rotation;
    c.center = a.center;
    const Vec3 offset = a.rotation * offset_of(b) + offset_of(a);
    c.translation = offset - c.center + c.rotation * c.center;
    return c;
}

RigidTransform invert(const RigidTransform& T) {
    RigidTransform inv;
    inv.rotation = T.rotation.transposed();
    inv.center = T.center;
    const Vec3 offset = -(inv.rotation * offset_of(T));
    inv.translation = offset - inv.center + inv.rotation * inv.center;
    return inv;
}

double rotation_angle_deg(const RigidTransform& T) {
    const double tr = T.rotation(0, 0) + T.rotation(1, 1) + T.rotation(2, 2);
    const double c = std::clamp((tr - 1.0) * 0.5, -1.0, 1.0);
    return rad_to_deg(std::acos(c));
}

void validate_transform(const RigidTransform& T) {
    if (!is_orthonormal(T.rotation, 1e-9) || std::abs(T.rotation.det() - 1.0) > 1e-9)
        throw InvalidArgument("rotation must be a proper rotation matrix");
}

}  // namespace trusmap
