#include "trusmap/session_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trusmap/errors.hpp"

namespace trusmap::io {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kSchemaVersion = "1";

Json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        throw IoError(path + ": invalid JSON: " + e.what());
    }
}

void write_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError(path + ": write failed");
}

Json require(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw IoError(where + ": missing key '" + key + "'");
    return j.at(key);
}

Vec3 vec3_from(const Json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw IoError(where + ": expected an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json vec3_to(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json transform_to(const RigidTransform& T) {
    const TransformParams p = to_params(T);  // throws GimbalLock at |ry| = pi/2
    Json j;
    j["translation_mm"] = vec3_to(p.t);
    j["rotation_zyx_deg"] = Json::array({rad_to_deg(p.r.z), rad_to_deg(p.r.y), rad_to_deg(p.r.x)});
    j["center_mm"] = vec3_to(T.center);
    return j;
}

RigidTransform transform_from(const Json& j, const std::string& where) {
    TransformParams p;
    p.t = vec3_from(require(j, "translation_mm", where), where);
    const Json r = require(j, "rotation_zyx_deg", where);
    if (!r.is_array() || r.size() != 3) throw IoError(where + ": rotation_zyx_deg needs 3 values");
    p.r = {deg_to_rad(r[2].get<double>()), deg_to_rad(r[1].get<double>()),
           deg_to_rad(r[0].get<double>())};
    const Vec3 center = vec3_from(require(j, "center_mm", where), where);
    return from_params(p, center);
}

Json grid_to(const SectorGrid& g) {
    Json j;
    j["bbox_mm"] = {{"x", Json::array({g.bbox.lo.x, g.bbox.hi.x})},
                    {"y", Json::array({g.bbox.lo.y, g.bbox.hi.y})},
                    {"z", Json::array({g.bbox.lo.z, g.bbox.hi.z})}};
    j["orientation"] = "z_cranial_x_left";
    return j;
}

SectorGrid grid_from(const Json& j, const std::string& where) {
    const Json b = require(j, "bbox_mm", where);
    Box3 box;
    const char* axes[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
        const Json r = require(b, axes[a], where + ".bbox_mm");
        if (!r.is_array() || r.size() != 2)
            throw IoError(where + ": bbox axis needs [lo, hi]");
        const double lo = r[0].get<double>(), hi = r[1].get<double>();
        if (a == 0) { box.lo.x = lo; box.hi.x = hi; }
        if (a == 1) { box.lo.y = lo; box.hi.y = hi; }
        if (a == 2) { box.lo.z = lo; box.hi.z = hi; }
    }
    if (j.contains("orientation") && j.at("orientation") != "z_cranial_x_left")
        throw IoError(where + ": unsupported grid orientation");
    return build_grid(box);
}

Json phantom_config_to(const PhantomConfig& c) {
    Json j;
    j["dims"] = Json::array({c.dims[0], c.dims[1], c.dims[2]});
    j["spacing_mm"] = vec3_to(c.spacing);
    j["semi_axes_mm"] = vec3_to(c.semi_axes);
    j["prostate_mean"] = c.prostate_mean;
    j["background_mean"] = c.background_mean;
    j["speckle_sigma"] = c.speckle_sigma;
    j["n_fiducials"] = c.n_fiducials;
    j["fiducial_radius_mm"] = c.fiducial_radius;
    j["fiducial_intensity"] = c.fiducial_intensity;
    j["seed"] = c.seed;
    return j;
}

PhantomConfig phantom_config_from(const Json& j, const std::string& where) {
    PhantomConfig c;
    if (j.contains("dims")) {
        const Json d = j.at("dims");
        if (!d.is_array() || d.size() != 3) throw IoError(where + ": dims needs 3 integers");
        for (int a = 0; a < 3; ++a) c.dims[a] = d[a].get<int>();
    }
    if (j.contains("spacing_mm")) c.spacing = vec3_from(j.at("spacing_mm"), where);
    if (j.contains("semi_axes_mm")) c.semi_axes = vec3_from(j.at("semi_axes_mm"), where);
    if (j.contains("prostate_mean")) c.prostate_mean = j.at("prostate_mean").get<double>();
    if (j.contains("background_mean")) c.background_mean = j.at("background_mean").get<double>();
    if (j.contains("speckle_sigma")) c.speckle_sigma = j.at("speckle_sigma").get<double>();
    if (j.contains("n_fiducials")) c.n_fiducials = j.at("n_fiducials").get<int>();
    if (j.contains("fiducial_radius_mm"))
        c.fiducial_radius = j.at("fiducial_radius_mm").get<double>();
    if (j.contains("fiducial_intensity"))
        c.fiducial_intensity = j.at("fiducial_intensity").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

std::string transform_to_json(const RigidTransform& T) { return transform_to(T).dump(2); }

RigidTransform transform_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("invalid transform JSON: ") + e.what());
    }
    return transform_from(j, "transform");
}

void save_transform(const RigidTransform& T, const std::string& path) {
    Json j = transform_to(T);
    j["schema_version"] = kSchemaVersion;
    write_file(j, path);
}

RigidTransform load_transform(const std::string& path) {
    const Json j = parse_file(path);
    // Accept both a bare transform and a registration result wrapping one.
    if (j.contains("transform")) return transform_from(j.at("transform"), path);
    return transform_from(j, path);
}

void save_registration_result(const RegistrationResult& r, const std::string& moving_volume,
                              const std::string& path) {
    // Timing lives in the metrics file only, so identical inputs always
    // produce byte-identical result files.
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["transform"] = transform_to(r.transform);
    j["score"] = r.score;
    j["success"] = r.success;
    j["overlap_fraction"] = r.overlap_fraction;
    j["iterations"] = r.iterations;
    if (!moving_volume.empty()) j["moving_volume"] = moving_volume;
    write_file(j, path);
}

LoadedRegistration load_registration_result(const std::string& path) {
    const Json j = parse_file(path);
    LoadedRegistration out;
    out.result.transform = transform_from(require(j, "transform", path), path);
    out.result.score = require(j, "score", path).get<double>();
    out.result.success = require(j, "success", path).get<bool>();
    if (j.contains("overlap_fraction"))
        out.result.overlap_fraction = j.at("overlap_fraction").get<double>();
    if (j.contains("iterations")) out.result.iterations = j.at("iterations").get<int>();
    if (j.contains("elapsed_seconds"))
        out.result.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    if (j.contains("moving_volume")) out.moving_volume = j.at("moving_volume").get<std::string>();
    return out;
}

void save_registration_metrics(const RegistrationResult& r, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["score"] = r.score;
    j["success"] = r.success;
    j["elapsed_seconds"] = r.elapsed_seconds;
    j["iterations"] = r.iterations;
    write_file(j, path);
}

void save_grid(const SectorGrid& grid, const std::string& path) {
    Json j = grid_to(grid);
    j["schema_version"] = kSchemaVersion;
    write_file(j, path);
}

SectorGrid load_grid(const std::string& path) { return grid_from(parse_file(path), path); }

void save_session(const SessionFile& s, const std::string& path) {
    if (s.biopsy_volumes.size() != s.session.records.size())
        throw InvalidArgument("session volume list does not match record count");
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["patient_id"] = s.session.patient_id;
    j["chronological_rank"] = s.session.chronological_rank;
    j["reference_volume"] = s.reference_volume;
    j["grid"] = grid_to(s.grid);
    Json biopsies = Json::array();
    for (std::size_t i = 0; i < s.session.records.size(); ++i) {
        const BiopsyRecord& r = s.session.records[i];
        Json b;
        b["index"] = r.index;
        b["intended_target"] = to_code(r.intended_target);
        b["volume"] = s.biopsy_volumes[i];
        b["needle_entry_mm"] = vec3_to(r.needle.entry);
        b["needle_tip_mm"] = vec3_to(r.needle.tip);
        biopsies.push_back(std::move(b));
    }
    j["biopsies"] = std::move(biopsies);
    write_file(j, path);
}

SessionFile load_session(const std::string& path) {
    const Json j = parse_file(path);
    SessionFile s;
    s.session.patient_id = require(j, "patient_id", path).get<std::string>();
    s.session.chronological_rank = require(j, "chronological_rank", path).get<int>();
    s.reference_volume = require(j, "reference_volume", path).get<std::string>();
    s.session.reference_volume_id = s.reference_volume;
    s.grid = grid_from(require(j, "grid", path), path);
    const auto base = std::filesystem::path(path).parent_path();
    auto check_resolvable = [&](const std::string& rel) {
        std::filesystem::path p(rel);
        if (p.is_relative()) p = base / p;
        if (!std::filesystem::exists(p))
            throw IoError(path + ": referenced volume not found: " + rel);
    };
    check_resolvable(s.reference_volume);
    const Json biopsies = require(j, "biopsies", path);
    if (!biopsies.is_array() || biopsies.empty())
        throw IoError(path + ": session needs a non-empty biopsies array");
    for (const Json& b : biopsies) {
        BiopsyRecord r;
        r.index = require(b, "index", path).get<int>();
        const std::string code = require(b, "intended_target", path).get<std::string>();
        r.intended_target = label_from_code(code);
        if (r.intended_target.column == Column::FusedApex)
            throw IoError(path + ": session targets must use the 12 raw labels, got " + code);
        const std::string volume = require(b, "volume", path).get<std::string>();
        check_resolvable(volume);
        r.needle.entry = vec3_from(require(b, "needle_entry_mm", path), path);
        r.needle.tip = vec3_from(require(b, "needle_tip_mm", path), path);
        r.needle.volume_id = volume;
        s.biopsy_volumes.push_back(volume);
        s.session.records.push_back(std::move(r));
    }
    for (std::size_t i = 0; i < s.session.records.size(); ++i)
        for (std::size_t k = i + 1; k < s.session.records.size(); ++k)
            if (s.session.records[i].index == s.session.records[k].index)
                throw IoError(path + ": duplicate biopsy index " +
                              std::to_string(s.session.records[i].index));
    return s;
}

void save_phantom_config(const PhantomConfig& cfg, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j.update(phantom_config_to(cfg));
    write_file(j, path);
}

PhantomConfig load_phantom_config(const std::string& path) {
    return phantom_config_from(parse_file(path), path);
}

void save_registration_config(const RegistrationConfig& cfg, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["n_levels"] = cfg.n_levels;
    j["sampling_steps"] = cfg.sampling_steps;
    j["coarse_search"] = {{"enabled", cfg.coarse_search.enabled},
                          {"range_mm", cfg.coarse_search.range_mm},
                          {"step_mm", cfg.coarse_search.step_mm}};
    j["param_tolerance"] = cfg.param_tolerance;
    j["function_tolerance"] = cfg.function_tolerance;
    j["max_iterations"] = cfg.max_iterations;
    j["success_min_score"] = cfg.success_min_score;
    j["success_max_translation_mm"] = cfg.success_max_translation_mm;
    j["success_max_rotation_deg"] = cfg.success_max_rotation_deg;
    j["angle_scale_mm_per_rad"] = cfg.angle_scale;
    write_file(j, path);
}

RegistrationConfig load_registration_config(const std::string& path) {
    const Json j = parse_file(path);
    RegistrationConfig cfg;
    if (j.contains("n_levels")) cfg.n_levels = j.at("n_levels").get<int>();
    if (j.contains("sampling_steps"))
        cfg.sampling_steps = j.at("sampling_steps").get<std::vector<int>>();
    if (j.contains("coarse_search")) {
        const Json c = j.at("coarse_search");
        if (c.contains("enabled")) cfg.coarse_search.enabled = c.at("enabled").get<bool>();
        if (c.contains("range_mm")) cfg.coarse_search.range_mm = c.at("range_mm").get<double>();
        if (c.contains("step_mm")) cfg.coarse_search.step_mm = c.at("step_mm").get<double>();
    }
    if (j.contains("param_tolerance")) cfg.param_tolerance = j.at("param_tolerance").get<double>();
    if (j.contains("function_tolerance"))
        cfg.function_tolerance = j.at("function_tolerance").get<double>();
    if (j.contains("max_iterations")) cfg.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("success_min_score"))
        cfg.success_min_score = j.at("success_min_score").get<double>();
    if (j.contains("success_max_translation_mm"))
        cfg.success_max_translation_mm = j.at("success_max_translation_mm").get<double>();
    if (j.contains("success_max_rotation_deg"))
        cfg.success_max_rotation_deg = j.at("success_max_rotation_deg").get<double>();
    if (j.contains("angle_scale_mm_per_rad"))
        cfg.angle_scale = j.at("angle_scale_mm_per_rad").get<double>();
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw IoError(path + ": " + e.what());
    }
    return cfg;
}

void save_ground_truth(const GroundTruthFile& gt, const std::string& path) {
    if (gt.volume_names.size() != gt.truths.size())
        throw InvalidArgument("ground truth volume list does not match truth count");
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = phantom_config_to(gt.config);
    j["reference_volume"] = gt.reference_volume;
    Json volumes = Json::array();
    for (std::size_t i = 0; i < gt.truths.size(); ++i) {
        const GroundTruth& t = gt.truths[i];
        Json v;
        v["volume"] = gt.volume_names[i];
        v["transform"] = transform_to(t.transform);
        Json fr = Json::array(), fm = Json::array();
        for (const Vec3& f : t.fiducials_ref) fr.push_back(vec3_to(f));
        for (const Vec3& f : t.fiducials_mov) fm.push_back(vec3_to(f));
        v["fiducials_ref_mm"] = std::move(fr);
        v["fiducials_mov_mm"] = std::move(fm);
        volumes.push_back(std::move(v));
    }
    j["volumes"] = std::move(volumes);
    write_file(j, path);
}

GroundTruthFile load_ground_truth(const std::string& path) {
    const Json j = parse_file(path);
    GroundTruthFile gt;
    gt.config = phantom_config_from(require(j, "config", path), path);
    gt.reference_volume = require(j, "reference_volume", path).get<std::string>();
    for (const Json& v : require(j, "volumes", path)) {
        GroundTruth t;
        t.config = gt.config;
        t.transform = transform_from(require(v, "transform", path), path);
        for (const Json& f : require(v, "fiducials_ref_mm", path))
            t.fiducials_ref.push_back(vec3_from(f, path));
        for (const Json& f : require(v, "fiducials_mov_mm", path))
            t.fiducials_mov.push_back(vec3_from(f, path));
        gt.volume_names.push_back(require(v, "volume", path).get<std::string>());
        gt.truths.push_back(std::move(t));
    }
    return gt;
}

void save_mapped_session(const MappedSession& m, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["patient_id"] = m.patient_id;
    j["chronological_rank"] = m.chronological_rank;
    j["grid"] = grid_to(m.grid);
    Json biopsies = Json::array();
    for (const MappedBiopsy& b : m.biopsies) {
        Json e;
        e["index"] = b.record.index;
        e["intended_target"] = to_code(b.record.intended_target);
        e["volume"] = b.record.needle.volume_id;
        e["success"] = b.registration_success;
        e["score"] = b.score;
        if (b.segment_ref) {
            e["segment_ref"] = {{"entry_mm", vec3_to(b.segment_ref->entry)},
                                {"tip_mm", vec3_to(b.segment_ref->tip)}};
        }
        biopsies.push_back(std::move(e));
    }
    j["biopsies"] = std::move(biopsies);
    write_file(j, path);
}

MappedSession load_mapped_session(const std::string& path) {
    const Json j = parse_file(path);
    MappedSession m;
    m.patient_id = require(j, "patient_id", path).get<std::string>();
    m.chronological_rank = require(j, "chronological_rank", path).get<int>();
    m.grid = grid_from(require(j, "grid", path), path);
    for (const Json& e : require(j, "biopsies", path)) {
        MappedBiopsy b;
        b.record.index = require(e, "index", path).get<int>();
        b.record.intended_target =
            label_from_code(require(e, "intended_target", path).get<std::string>());
        b.record.needle.volume_id = require(e, "volume", path).get<std::string>();
        b.registration_success = require(e, "success", path).get<bool>();
        b.score = require(e, "score", path).get<double>();
        if (b.registration_success) {
            const Json s = require(e, "segment_ref", path);
            NeedleSegment seg;
            seg.entry = vec3_from(require(s, "entry_mm", path), path);
            seg.tip = vec3_from(require(s, "tip_mm", path), path);
            seg.volume_id = b.record.needle.volume_id;
            b.segment_ref = seg;
        }
        m.biopsies.push_back(std::move(b));
    }
    return m;
}

void save_fiducial_pairs(std::span<const FiducialPair> pairs, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json arr = Json::array();
    for (const FiducialPair& p : pairs) {
        Json e;
        e["id"] = p.id;
        e["ref_mm"] = vec3_to(p.p_ref);
        e["mov_mm"] = vec3_to(p.p_mov);
        arr.push_back(std::move(e));
    }
    j["pairs"] = std::move(arr);
    write_file(j, path);
}

std::vector<FiducialPair> load_fiducial_pairs(const std::string& path) {
    const Json j = parse_file(path);
    std::vector<FiducialPair> pairs;
    for (const Json& e : require(j, "pairs", path)) {
        FiducialPair p;
        p.id = require(e, "id", path).get<std::string>();
        p.p_ref = vec3_from(require(e, "ref_mm", path), path);
        p.p_mov = vec3_from(require(e, "mov_mm", path), path);
        pairs.push_back(std::move(p));
    }
    if (pairs.empty()) throw IoError(path + ": fiducial file has no pairs");
    return pairs;
}

namespace {

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string row_target_code(const TargetLabel& label) {
    const std::string code = to_code(label);
    return code.substr(0, 2);
}

}  // namespace

std::string report_to_csv(const Report& report) {
    std::ostringstream os;
    os << "target,side,n,hits,hit_pct,mean_len_all_mm,mean_len_hits_mm\n";
    for (const TargetStats& s : report.rows) {
        os << row_target_code(s.label) << ',' << (s.label.side == Side::Right ? 'R' : 'L') << ','
           << s.n_biopsies << ',' << s.n_hits << ',' << fixed(s.hit_pct, 1) << ','
           << fixed(s.mean_inner_length, 2) << ',' << fixed(s.mean_inner_length_hits, 2) << "\n";
    }
    const ReportTotals& t = report.totals;
    os << "TOTAL,," << t.n_biopsies << ',' << t.n_hits << ',' << fixed(t.hit_pct, 1) << ','
       << fixed(t.mean_inner_length, 2) << ',' << fixed(t.mean_inner_length_hits, 2) << "\n";
    return os.str();
}

void save_report_csv(const Report& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    out << report_to_csv(report);
    if (!out) throw IoError(path + ": write failed");
}

void save_report_json(const Report& report, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["min_len_mm"] = report.min_len_mm;
    // mean_len_all_mm averages over every planned biopsy (misses contribute
    // their clip length, usually 0); mean_len_hits_mm averages hits only.
    j["length_mean_convention"] = "all_and_hits";
    Json rows = Json::array();
    for (const TargetStats& s : report.rows) {
        Json r;
        r["target"] = row_target_code(s.label);
        r["side"] = s.label.side == Side::Right ? "R" : "L";
        r["n"] = s.n_biopsies;
        r["hits"] = s.n_hits;
        r["hit_pct"] = s.hit_pct;
        r["mean_len_all_mm"] = s.mean_inner_length;
        r["mean_len_hits_mm"] = s.mean_inner_length_hits;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["totals"] = {{"n", report.totals.n_biopsies},
                   {"hits", report.totals.n_hits},
                   {"hit_pct", report.totals.hit_pct},
                   {"mean_len_all_mm", report.totals.mean_inner_length},
                   {"mean_len_hits_mm", report.totals.mean_inner_length_hits}};
    write_file(j, path);
}

Report load_report_json(const std::string& path) {
    const Json j = parse_file(path);
    Report report;
    report.min_len_mm = require(j, "min_len_mm", path).get<double>();
    for (const Json& r : require(j, "rows", path)) {
        TargetStats s;
        const std::string code =
            require(r, "target", path).get<std::string>() + "-" +
            require(r, "side", path).get<std::string>();
        s.label = label_from_code(code);
        s.n_biopsies = require(r, "n", path).get<int>();
        s.n_hits = require(r, "hits", path).get<int>();
        s.hit_pct = require(r, "hit_pct", path).get<double>();
        s.mean_inner_length = require(r, "mean_len_all_mm", path).get<double>();
        s.mean_inner_length_hits = require(r, "mean_len_hits_mm", path).get<double>();
        report.rows.push_back(std::move(s));
    }
    report.totals = aggregate(report);
    return report;
}

void save_learning_curve(const LearningCurveResult& lc, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["split_index"] = lc.split_index;
    j["first"] = {{"n", lc.first.n}, {"hits", lc.first.hits}};
    j["second"] = {{"n", lc.second.n}, {"hits", lc.second.hits}};
    j["rate_first"] = lc.rate_first;
    j["rate_second"] = lc.rate_second;
    j["chi2"] = lc.chi2;
    j["p_value"] = lc.p_value;
    write_file(j, path);
}

void save_tre_summary(const TreSummary& t, const std::string& path) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["n"] = t.n;
    j["mean_mm"] = t.mean;
    j["max_mm"] = t.max;
    j["aggregation"] = "pooled";
    Json arr = Json::array();
    for (const auto& [id, d] : t.per_pair) arr.push_back({{"id", id}, {"distance_mm", d}});
    j["per_pair"] = std::move(arr);
    write_file(j, path);
}

}  // namespace trusmap::io
