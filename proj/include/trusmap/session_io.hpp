#pragma once

#include <string>
#include <vector>

#include "trusmap/analytics.hpp"
#include "trusmap/biopsy.hpp"
#include "trusmap/fiducial.hpp"
#include "trusmap/phantom.hpp"
#include "trusmap/registration.hpp"
#include "trusmap/sector.hpp"
#include "trusmap/transform.hpp"

// JSON and CSV file formats. All world coordinates in files are LPS
// millimeters; angles are degrees in files (ZYX order) and radians in code.
// Every emitted JSON document carries schema_version.

namespace trusmap::io {

// {"translation_mm":[...], "rotation_zyx_deg":[rz,ry,rx], "center_mm":[...]}
std::string transform_to_json(const RigidTransform& T);
RigidTransform transform_from_json(const std::string& text);

void save_transform(const RigidTransform& T, const std::string& path);
RigidTransform load_transform(const std::string& path);

// Full registration result: transform plus score/success metadata.
// `moving_volume` records which per-biopsy volume the transform maps.
void save_registration_result(const RegistrationResult& r, const std::string& moving_volume,
                              const std::string& path);
struct LoadedRegistration {
    RegistrationResult result;
    std::string moving_volume;
};
LoadedRegistration load_registration_result(const std::string& path);

// One-line metrics document (score, success, elapsed_seconds, iterations).
void save_registration_metrics(const RegistrationResult& r, const std::string& path);

void save_grid(const SectorGrid& grid, const std::string& path);
SectorGrid load_grid(const std::string& path);

struct SessionFile {
    Session session;
    SectorGrid grid;
    std::string reference_volume;           // path, relative to the session file
    std::vector<std::string> biopsy_volumes;  // per record
};
void save_session(const SessionFile& s, const std::string& path);
SessionFile load_session(const std::string& path);

void save_phantom_config(const PhantomConfig& cfg, const std::string& path);
PhantomConfig load_phantom_config(const std::string& path);

void save_registration_config(const RegistrationConfig& cfg, const std::string& path);
RegistrationConfig load_registration_config(const std::string& path);

// Ground truth for a generated session: per-volume transform and fiducials.
struct GroundTruthFile {
    PhantomConfig config;
    std::string reference_volume;
    std::vector<std::string> volume_names;
    std::vector<GroundTruth> truths;
};
void save_ground_truth(const GroundTruthFile& gt, const std::string& path);
GroundTruthFile load_ground_truth(const std::string& path);

void save_mapped_session(const MappedSession& m, const std::string& path);
MappedSession load_mapped_session(const std::string& path);

void save_fiducial_pairs(std::span<const FiducialPair> pairs, const std::string& path);
std::vector<FiducialPair> load_fiducial_pairs(const std::string& path);

// Table-1 layout. Columns: target,side,n,hits,hit_pct,mean_len_all_mm,
// mean_len_hits_mm; final TOTAL row; '.' decimal separator, comma delimiter.
std::string report_to_csv(const Report& report);
void save_report_csv(const Report& report, const std::string& path);
void save_report_json(const Report& report, const std::string& path);
Report load_report_json(const std::string& path);

void save_learning_curve(const LearningCurveResult& lc, const std::string& path);

void save_tre_summary(const TreSummary& t, const std::string& path);

}  // namespace trusmap::io
