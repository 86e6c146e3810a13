#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trusmap/biopsy_types.hpp"
#include "trusmap/registration.hpp"
#include "trusmap/sector.hpp"

namespace trusmap {

struct BiopsyRecord {
    int index = 0;                 // chronological within the session, 1-based
    TargetLabel intended_target;   // raw label
    NeedleSegment needle;          // in the per-biopsy volume frame
};

struct Session {
    std::string patient_id;
    std::string reference_volume_id;
    int chronological_rank = 1;
    std::vector<BiopsyRecord> records;
};

// A biopsy after mapping into the reference frame. Biopsies whose
// registration failed carry no segment and are excluded from all statistics.
struct MappedBiopsy {
    BiopsyRecord record;
    std::optional<NeedleSegment> segment_ref;
    bool registration_success = false;
    double score = 0.0;
};

// Registration result tagged with the moving volume it belongs to.
struct VolumeRegistration {
    std::string volume_id;
    RegistrationResult result;
};

// Maps the needle through reg.transform when the registration succeeded.
// Throws InvalidArgument when volume ids disagree.
MappedBiopsy map_biopsy(const BiopsyRecord& record, const VolumeRegistration& reg);

// Element-wise map_biopsy, preserving chronological order. Requires exactly
// one registration per record, in record order.
std::vector<MappedBiopsy> map_session(const Session& session,
                                      std::span<const VolumeRegistration> regs);

}  // namespace trusmap
