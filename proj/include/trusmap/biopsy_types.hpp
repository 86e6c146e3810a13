#pragma once

#include <string>

#include "trusmap/geometry.hpp"

namespace trusmap {

// A biopsy core as a 3D line segment in the world frame of `volume_id`.
struct NeedleSegment {
    Vec3 entry;
    Vec3 tip;
    std::string volume_id;

    double length() const { return (tip - entry).norm(); }
};

// Throws on zero-length segments; returns a warning string for core lengths
// outside the typical 15-25 mm band, empty otherwise.
std::string validate_needle(const NeedleSegment& seg);

}  // namespace trusmap
