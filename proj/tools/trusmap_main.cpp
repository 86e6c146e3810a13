// trusmap: 3D TRUS tracking pipeline for prostate biopsy mapping.
//
// Subcommands cover the whole workflow: synthetic phantom generation,
// rigid registration of per-biopsy volumes to a reference, needle mapping
// into the reference frame, sector targeting reports, the chronological
// learning-curve test, fiducial-based validation, and a registration
// benchmark. Human-readable logs go to stderr; machine output goes to files.
//
// Exit codes: 0 ok, 1 usage, 2 I/O or parse error, 3 registration declared
// unsuccessful, 4 invariant violation in inputs.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trusmap/analytics.hpp"
#include "trusmap/biopsy.hpp"
#include "trusmap/errors.hpp"
#include "trusmap/fiducial.hpp"
#include "trusmap/metaimage.hpp"
#include "trusmap/phantom.hpp"
#include "trusmap/registration.hpp"
#include "trusmap/session_io.hpp"
#include "trusmap/threading.hpp"

namespace fs = std::filesystem;
using namespace trusmap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitRegistrationFailed = 3;
constexpr int kExitInvariant = 4;

void apply_thread_options(int threads_flag) {
    if (const char* env = std::getenv("TRUSMAP_THREADS")) {
        set_thread_count(std::atoi(env));
        return;
    }
    set_thread_count(threads_flag);
}

// "10mm,10deg" -> (10, 10)
std::pair<double, double> parse_motion(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos)
        throw InvalidArgument("motion must look like '10mm,10deg', got '" + text + "'");
    auto strip = [](std::string s, const std::string& unit) {
        if (s.size() >= unit.size() && s.compare(s.size() - unit.size(), unit.size(), unit) == 0)
            s = s.substr(0, s.size() - unit.size());
        return std::stod(s);
    };
    return {strip(text.substr(0, comma), "mm"), strip(text.substr(comma + 1), "deg")};
}

int run_phantom_gen(const std::string& config_path, const std::string& out_dir, int session_n,
                    const std::string& motion, double aim_sigma, std::uint64_t seed_flag,
                    bool seed_set) {
    PhantomConfig cfg;
    if (!config_path.empty()) cfg = io::load_phantom_config(config_path);
    if (seed_set) cfg.seed = seed_flag;

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    if (session_n <= 0) {
        auto [volume, gt] = generate_reference(cfg);
        write_mha(volume, (dir / "reference.mha").string());
        io::GroundTruthFile gtf;
        gtf.config = cfg;
        gtf.reference_volume = "reference.mha";
        gtf.volume_names = {"reference.mha"};
        gtf.truths = {gt};
        io::save_ground_truth(gtf, (dir / "ground_truth.json").string());
        std::cerr << "phantom: wrote reference.mha (" << cfg.dims[0] << "^3)\n";
        return kExitOk;
    }

    const auto [motion_mm, motion_deg] = parse_motion(motion);
    SessionBundle bundle = generate_session(cfg, session_n, motion_mm, motion_deg, aim_sigma,
                                            cfg.seed);
    write_mha(bundle.reference, (dir / "reference.mha").string());

    io::SessionFile sf;
    sf.session = bundle.session;
    sf.grid = bundle.grid;
    sf.reference_volume = "reference.mha";
    io::GroundTruthFile gtf;
    gtf.config = cfg;
    gtf.reference_volume = "reference.mha";
    for (std::size_t i = 0; i < bundle.moving.size(); ++i) {
        const std::string name = bundle.session.records[i].needle.volume_id;
        const std::string stem = fs::path(name).stem().string();
        write_mha(bundle.moving[i], (dir / name).string());
        sf.biopsy_volumes.push_back(name);
        gtf.volume_names.push_back(name);
        gtf.truths.push_back(bundle.truths[i]);
        // per-volume fiducial pairs in the `validate` input schema
        std::vector<FiducialPair> pairs;
        const GroundTruth& gt = bundle.truths[i];
        for (std::size_t f = 0; f < gt.fiducials_ref.size(); ++f)
            pairs.push_back({gt.fiducials_ref[f], gt.fiducials_mov[f],
                             "f" + std::to_string(f + 1)});
        io::save_fiducial_pairs(pairs, (dir / ("fiducials_" + stem + ".json")).string());
    }
    io::save_session(sf, (dir / "session.json").string());
    io::save_ground_truth(gtf, (dir / "ground_truth.json").string());
    std::cerr << "phantom: wrote reference + " << session_n << " biopsy volumes to " << out_dir
              << "\n";
    return kExitOk;
}

int run_register(const std::string& ref_path, const std::string& mov_path,
                 const std::string& out_path, const std::string& config_path,
                 const std::string& metrics_path) {
    RegistrationConfig cfg;
    if (!config_path.empty()) cfg = io::load_registration_config(config_path);

    const Volume3 ref = read_mha(ref_path);
    const Volume3 mov = read_mha(mov_path);
    const RegistrationResult result = register_volumes(ref, mov, cfg);

    const std::string moving_name = fs::path(mov_path).filename().string();
    io::save_registration_result(result, moving_name, out_path);
    if (!metrics_path.empty()) io::save_registration_metrics(result, metrics_path);

    std::cerr << "register: score " << result.score << ", success "
              << (result.success ? "true" : "false") << ", " << result.elapsed_seconds << " s\n";
    return result.success ? kExitOk : kExitRegistrationFailed;
}

int run_map(const std::string& session_path, const std::string& transforms_dir,
            const std::string& out_path) {
    const io::SessionFile sf = io::load_session(session_path);
    for (const BiopsyRecord& r : sf.session.records) {
        const std::string warning = validate_needle(r.needle);
        if (!warning.empty())
            std::cerr << "map: biopsy " << r.index << ": " << warning << "\n";
    }

    std::vector<VolumeRegistration> regs;
    for (const BiopsyRecord& r : sf.session.records) {
        const fs::path tf =
            fs::path(transforms_dir) / (fs::path(r.needle.volume_id).stem().string() + ".json");
        if (!fs::exists(tf))
            throw IoError(tf.string() + ": no transform found for biopsy volume " +
                          r.needle.volume_id);
        const io::LoadedRegistration loaded = io::load_registration_result(tf.string());
        if (!loaded.moving_volume.empty() &&
            fs::path(loaded.moving_volume).filename() != fs::path(r.needle.volume_id).filename())
            throw InvalidArgument(tf.string() + ": transform was computed for volume '" +
                                  loaded.moving_volume + "', biopsy " + std::to_string(r.index) +
                                  " uses '" + r.needle.volume_id + "'");
        VolumeRegistration reg;
        reg.volume_id = r.needle.volume_id;
        reg.result = loaded.result;
        regs.push_back(std::move(reg));
    }

    MappedSession mapped;
    mapped.patient_id = sf.session.patient_id;
    mapped.chronological_rank = sf.session.chronological_rank;
    mapped.grid = sf.grid;
    mapped.biopsies = map_session(sf.session, regs);
    io::save_mapped_session(mapped, out_path);

    int ok = 0;
    for (const MappedBiopsy& b : mapped.biopsies)
        if (b.registration_success) ++ok;
    std::cerr << "map: " << ok << "/" << mapped.biopsies.size() << " biopsies mapped\n";
    return kExitOk;
}

int run_report(const std::string& mapped_path, const std::string& out_csv,
               const std::string& out_json, double min_len) {
    const MappedSession mapped = io::load_mapped_session(mapped_path);
    const Report report = per_target_stats(mapped.biopsies, mapped.grid, min_len);
    io::save_report_csv(report, out_csv);
    if (!out_json.empty()) io::save_report_json(report, out_json);
    std::cerr << "report: " << report.totals.n_hits << "/" << report.totals.n_biopsies
              << " hits (" << report.totals.hit_pct << "%)\n";
    return kExitOk;
}

int run_learning_curve(const std::string& list_path, int split, const std::string& out_path,
                       double min_len) {
    std::ifstream list(list_path);
    if (!list) throw IoError(list_path + ": cannot open for reading");
    std::vector<MappedSession> sessions;
    std::string line;
    const fs::path base = fs::path(list_path).parent_path();
    while (std::getline(list, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        fs::path p(line);
        if (p.is_relative()) p = base / p;
        sessions.push_back(io::load_mapped_session(p.string()));
    }
    const LearningCurveResult lc = learning_curve(sessions, split, min_len);
    io::save_learning_curve(lc, out_path);
    std::cerr << "learning-curve: " << 100.0 * lc.rate_first << "% -> " << 100.0 * lc.rate_second
              << "%, chi2 " << lc.chi2 << ", p " << lc.p_value << "\n";
    return kExitOk;
}

int run_validate(const std::string& fiducials_path, const std::string& transform_path,
                 const std::string& out_path) {
    const std::vector<FiducialPair> pairs = io::load_fiducial_pairs(fiducials_path);
    const RigidTransform T = io::load_transform(transform_path);
    const TreSummary summary = tre(pairs, T);
    io::save_tre_summary(summary, out_path);
    std::cerr << "validate: mean " << summary.mean << " mm, max " << summary.max << " mm over "
              << summary.n << " fiducials\n";
    return kExitOk;
}

int run_bench(const std::string& ref_path, const std::string& mov_path, int repeat,
              const std::string& out_path, const std::string& config_path) {
    RegistrationConfig cfg;
    if (!config_path.empty()) cfg = io::load_registration_config(config_path);
    const Volume3 ref = read_mha(ref_path);
    const Volume3 mov = read_mha(mov_path);

    std::vector<double> runs;
    for (int i = 0; i < repeat; ++i) {
        const RegistrationResult r = register_volumes(ref, mov, cfg);
        runs.push_back(r.elapsed_seconds);
        std::cerr << "bench: run " << (i + 1) << "/" << repeat << ": " << r.elapsed_seconds
                  << " s (score " << r.score << ")\n";
    }
    std::vector<double> sorted = runs;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted.size() % 2 == 1
                              ? sorted[sorted.size() / 2]
                              : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);

    nlohmann::ordered_json j;
    j["schema_version"] = "1";
    j["threads"] = thread_count();
    j["runs_seconds"] = runs;
    j["median_seconds"] = median;
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw IoError(out_path + ": cannot open for writing");
        out << j.dump(2) << "\n";
    }
    std::cerr << "bench: median " << median << " s over " << repeat << " runs\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D TRUS prostate biopsy tracking and targeting analysis"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads,
                   "Worker threads (default: all cores; TRUSMAP_THREADS overrides)");

    // phantom gen
    auto* phantom = app.add_subcommand("phantom", "Synthetic phantom generation");
    phantom->require_subcommand(1);
    auto* gen = phantom->add_subcommand("gen", "Generate reference (and session) volumes");
    std::string gen_config, gen_out_dir = ".", gen_motion = "10mm,10deg";
    int gen_session = 0;
    double gen_aim_sigma = 0.0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--config", gen_config, "Phantom config JSON");
    gen->add_option("--out-dir", gen_out_dir, "Output directory")->required();
    gen->add_option("--session", gen_session, "Also generate N per-biopsy volumes + session");
    gen->add_option("--motion", gen_motion, "Per-biopsy motion bound, e.g. '10mm,10deg'");
    gen->add_option("--aim-sigma", gen_aim_sigma, "Needle aiming error sigma in mm");
    auto* seed_opt = gen->add_option("--seed", gen_seed, "Override the config seed");

    // register
    auto* reg = app.add_subcommand("register", "Rigid registration moving -> reference");
    std::string reg_ref, reg_mov, reg_out, reg_config, reg_metrics;
    reg->add_option("--ref", reg_ref, "Reference volume (.mha)")->required();
    reg->add_option("--moving", reg_mov, "Moving volume (.mha)")->required();
    reg->add_option("--out", reg_out, "Output transform JSON")->required();
    reg->add_option("--config", reg_config, "Registration config JSON");
    reg->add_option("--metrics", reg_metrics, "Metrics JSON output");

    // map
    auto* map_cmd = app.add_subcommand("map", "Map session needles into the reference frame");
    std::string map_session_path, map_transforms, map_out;
    map_cmd->add_option("--session", map_session_path, "Session JSON")->required();
    map_cmd->add_option("--transforms", map_transforms, "Directory of per-volume transform JSON")
        ->required();
    map_cmd->add_option("--out", map_out, "Mapped session JSON output")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "Per-target hit statistics (Table layout)");
    std::string report_mapped, report_out, report_json;
    double report_min_len = 1.0;
    report_cmd->add_option("--mapped", report_mapped, "Mapped session JSON")->required();
    report_cmd->add_option("--out", report_out, "Report CSV output")->required();
    report_cmd->add_option("--json", report_json, "Also write the report as JSON");
    report_cmd->add_option("--min-len", report_min_len, "Hit threshold in mm (default 1.0)");

    // learning-curve
    auto* lc_cmd = app.add_subcommand("learning-curve", "Chronological-split chi-square test");
    std::string lc_list, lc_out;
    int lc_split = 0;
    double lc_min_len = 1.0;
    lc_cmd->add_option("--mapped-list", lc_list, "Text file with mapped JSON paths, one per line")
        ->required();
    lc_cmd->add_option("--split", lc_split, "Sessions in the first half")->required();
    lc_cmd->add_option("--out", lc_out, "Learning-curve JSON output")->required();
    lc_cmd->add_option("--min-len", lc_min_len, "Hit threshold in mm (default 1.0)");

    // validate
    auto* val_cmd = app.add_subcommand("validate", "Fiducial-based accuracy evaluation");
    std::string val_fid, val_tf, val_out;
    val_cmd->add_option("--fiducials", val_fid, "Fiducial pairs JSON")->required();
    val_cmd->add_option("--transform", val_tf, "Transform or registration result JSON")
        ->required();
    val_cmd->add_option("--out", val_out, "TRE summary JSON output")->required();

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "Registration runtime benchmark");
    std::string bench_ref, bench_mov, bench_out, bench_config;
    int bench_repeat = 5;
    bench_cmd->add_option("--ref", bench_ref, "Reference volume (.mha)")->required();
    bench_cmd->add_option("--moving", bench_mov, "Moving volume (.mha)")->required();
    bench_cmd->add_option("--repeat", bench_repeat, "Number of runs (default 5)");
    bench_cmd->add_option("--out", bench_out, "Benchmark JSON output (default: stdout)");
    bench_cmd->add_option("--config", bench_config, "Registration config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    apply_thread_options(threads);

    try {
        if (gen->parsed())
            return run_phantom_gen(gen_config, gen_out_dir, gen_session, gen_motion,
                                   gen_aim_sigma, gen_seed, seed_opt->count() > 0);
        if (reg->parsed()) return run_register(reg_ref, reg_mov, reg_out, reg_config, reg_metrics);
        if (map_cmd->parsed()) return run_map(map_session_path, map_transforms, map_out);
        if (report_cmd->parsed())
            return run_report(report_mapped, report_out, report_json, report_min_len);
        if (lc_cmd->parsed()) return run_learning_curve(lc_list, lc_split, lc_out, lc_min_len);
        if (val_cmd->parsed()) return run_validate(val_fid, val_tf, val_out);
        if (bench_cmd->parsed())
            return run_bench(bench_ref, bench_mov, bench_repeat, bench_out, bench_config);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvariant;
    }
    return kExitUsage;
}
