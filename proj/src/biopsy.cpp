#include "trusmap/biopsy.hpp"

#include "trusmap/errors.hpp"
#include "trusmap/transform.hpp"

namespace trusmap {

MappedBiopsy map_biopsy(const BiopsyRecord& record, const VolumeRegistration& reg) {
    if (record.needle.volume_id != reg.volume_id)
        throw InvalidArgument("registration volume '" + reg.volume_id +
                              "' does not match biopsy volume '" + record.needle.volume_id + "'");
    MappedBiopsy mapped;
    mapped.record = record;
    mapped.registration_success = reg.result.success;
    mapped.score = reg.result.score;
    if (reg.result.success) {
        NeedleSegment seg;
        seg.entry = apply_point(reg.result.transform, record.needle.entry);
        seg.tip = apply_point(reg.result.transform, record.needle.tip);
        seg.volume_id = record.needle.volume_id;
        mapped.segment_ref = seg;
    }
    return mapped;
}

std::vector<MappedBiopsy> map_session(const Session& session,
                                      std::span<const VolumeRegistration> regs) {
    if (regs.size() != session.records.size())
        throw InvalidArgument("expected " + std::to_string(session.records.size()) +
                              " registrations, got " + std::to_string(regs.size()));
    std::vector<MappedBiopsy> out;
    out.reserve(regs.size());
    for (std::size_t i = 0; i < regs.size(); ++i)
        out.push_back(map_biopsy(session.records[i], regs[i]));
    return out;
}

}  // namespace trusmap
