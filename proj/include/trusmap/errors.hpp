#pragma once

#include <stdexcept>
#include <string>

namespace trusmap {

// Input violates a documented invariant (bad config, malformed geometry, ...).
struct InvalidArgument : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File missing, unreadable, or syntactically malformed.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Euler extraction at |ry| = pi/2 has no unique (rz, rx) decomposition.
struct GimbalLock : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Less than 10% of the sampled reference grid maps inside the moving volume.
struct InsufficientOverlap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One of the two sample sets has zero intensity variance.
struct DegenerateIntensity : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace trusmap
