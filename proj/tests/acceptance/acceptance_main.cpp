// Acceptance suite: runs every acceptance criterion end to end and prints one
// PASS/FAIL line per criterion. Exits with the number of failed criteria.
//
// The registration CLI is exercised through the TRUSMAP_CLI binary (path from
// the environment); everything else goes through the library. Work files land
// in ./acceptance_work.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "../helpers.hpp"
#include "trusmap/analytics.hpp"
#include "trusmap/biopsy.hpp"
#include "trusmap/fiducial.hpp"
#include "trusmap/metaimage.hpp"
#include "trusmap/phantom.hpp"
#include "trusmap/registration.hpp"
#include "trusmap/rng.hpp"
#include "trusmap/session_io.hpp"
#include "trusmap/threading.hpp"
#include "trusmap/transform.hpp"

namespace fs = std::filesystem;
using namespace trusmap;
using trusmap::testing::chi2_sf_df1_oracle;
using trusmap::testing::clip_length_sampled;
using trusmap::testing::reconstruct_published_split;
using trusmap::testing::TestRng;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string g_cli;
fs::path g_work;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " 2>> " +
                            (g_work / "cli_log.txt").string();
    return std::system(cmd.c_str());
}

double fmt2(double v) { return std::round(v * 100.0) / 100.0; }

// ---------------------------------------------------------------- trials ---

struct TrialSuite {
    int successes = 0;
    int trials = 0;
    double tre_mean = 0.0;  // pooled over successful registrations
    double tre_max = 0.0;
    double elapsed_seconds = 0.0;
};

TrialSuite run_trial_suite(int n_trials, double max_t_mm, double max_r_deg,
                           std::uint64_t seed_base) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialSuite suite;
    suite.trials = n_trials;
    double tre_sum = 0.0;
    long tre_n = 0;
    for (int trial = 0; trial < n_trials; ++trial) {
        PhantomConfig cfg;  // defaults: 128^3, 0.5 mm
        cfg.seed = seed_base + 17 * trial;
        auto [ref, gt_ref] = generate_reference(cfg);

        TestRng rng(seed_base + 1000003ull * trial);
        const Vec3 center = volume_center(ref);
        TransformParams params;
        for (;;) {
            params.t = rng.vec(-max_t_mm, max_t_mm);
            if (params.t.norm() <= max_t_mm) break;
        }
        for (;;) {
            params.r = rng.angles(deg_to_rad(max_r_deg));
            if (rotation_angle_deg(from_params(params, center)) <= max_r_deg) break;
        }
        const RigidTransform T_true = from_params(params, center);
        auto [mov, gt] = generate_moving(cfg, T_true, cfg.seed ^ 0xABCDEF);

        const RegistrationResult result = register_volumes(ref, mov);
        if (!result.success) continue;
        ++suite.successes;

        std::vector<FiducialPair> pairs;
        for (std::size_t i = 0; i < gt.fiducials_ref.size(); ++i)
            pairs.push_back({gt.fiducials_ref[i], gt.fiducials_mov[i], ""});
        const TreSummary t = tre(pairs, result.transform);
        tre_sum += t.mean * t.n;
        tre_n += t.n;
        suite.tre_max = std::max(suite.tre_max, t.max);
    }
    suite.tre_mean = tre_n > 0 ? tre_sum / tre_n : 0.0;
    suite.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return suite;
}

int run_out_of_range_suite(int n_trials, std::uint64_t seed_base) {
    int successes = 0;
    for (int trial = 0; trial < n_trials; ++trial) {
        PhantomConfig cfg;
        cfg.seed = seed_base + 31 * trial;
        auto [ref, gt_ref] = generate_reference(cfg);
        auto [mov, gt] = generate_moving(cfg, RigidTransform::identity(), cfg.seed ^ 0x5A5A5A);
        // a deliberately implausible 40 mm misalignment, direction varies
        TestRng rng(seed_base + 7919ull * trial);
        Vec3 dir = rng.vec(-1, 1);
        while (dir.norm() < 1e-3) dir = rng.vec(-1, 1);
        mov.origin += dir * (40.0 / dir.norm());
        const RegistrationResult result = register_volumes(ref, mov);
        if (result.success) ++successes;
    }
    return successes;
}

// ------------------------------------------------------------- criteria ---

TrialSuite g_suite;  // shared between criteria 1 and 2

Outcome criterion1() {
    g_suite = run_trial_suite(100, 10.0, 10.0, 20260801);
    std::ostringstream os;
    os << "mean TRE " << fmt2(g_suite.tre_mean) << " mm (<= 1.44), max " << fmt2(g_suite.tre_max)
       << " mm (<= 3.84) over " << g_suite.successes << " successful of " << g_suite.trials
       << " trials, suite " << fmt2(g_suite.elapsed_seconds) << " s (budget 900 s)";
    return {g_suite.successes > 0 && g_suite.tre_mean <= 1.44 && g_suite.tre_max <= 3.84,
            os.str()};
}

Outcome criterion2() {
    const int oor_successes = run_out_of_range_suite(20, 20260802);
    std::ostringstream os;
    os << g_suite.successes << "/100 in-range successes (>= 96), " << oor_successes
       << "/20 out-of-range successes (<= 2)";
    return {g_suite.successes >= 96 && oor_successes <= 2, os.str()};
}

Outcome criterion3() {
    PhantomConfig cfg;
    cfg.seed = 4071;
    auto [ref, gt_ref] = generate_reference(cfg);
    TestRng rng(40710);
    auto [mov, gt] = generate_moving(
        cfg, from_params({rng.vec(-6, 6), rng.angles(deg_to_rad(5.0))}, volume_center(ref)),
        4072);
    write_mha(ref, (g_work / "bench_ref.mha").string());
    write_mha(mov, (g_work / "bench_mov.mha").string());

    const std::string base = " --ref " + (g_work / "bench_ref.mha").string() + " --moving " +
                             (g_work / "bench_mov.mha").string() + " --repeat 5 --out ";
    if (run_cli("bench" + base + (g_work / "bench.json").string()) != 0)
        return {false, "bench CLI failed"};
    if (run_cli("--threads 1 bench" + base + (g_work / "bench1.json").string()) != 0)
        return {false, "single-thread bench CLI failed"};

    auto median_of = [](const fs::path& p) {
        std::ifstream in(p);
        nlohmann::json j;
        in >> j;
        return j.at("median_seconds").get<double>();
    };
    const double median = median_of(g_work / "bench.json");
    const double median1 = median_of(g_work / "bench1.json");
    std::ostringstream os;
    os << "median " << fmt2(median) << " s default threads (<= 6); single-thread " << fmt2(median1)
       << " s (reported, not gated; budget 20)";
    return {median <= 6.0, os.str()};
}

Outcome criterion4() {
    const double p589 = chi2_sf_df1(5.89);
    const double p384 = chi2_sf_df1(3.841);
    const bool p_ok = std::abs(p589 - 0.01523) <= 1e-4 && std::abs(p384 - 0.0500) <= 2e-4;

    // Reconstructed chronological split realized as 32 mapped sessions.
    const auto table = reconstruct_published_split();
    const SectorGrid grid = build_grid({{0, 0, 0}, {40, 30, 42}});
    auto make_session = [&](int rank, long n, long hits) {
        MappedSession s;
        s.patient_id = "p" + std::to_string(rank);
        s.chronological_rank = rank;
        s.grid = grid;
        const Box3 box = sector_box(grid, {Row::Mid, Column::Lateral, Side::Right});
        for (long i = 0; i < n; ++i) {
            MappedBiopsy b;
            b.record.index = static_cast<int>(i + 1);
            b.record.intended_target = {Row::Mid, Column::Lateral, Side::Right};
            b.registration_success = true;
            b.score = 0.8;
            NeedleSegment seg;
            if (i < hits) {
                seg.entry = box.center() - Vec3{0, 0, 9};
                seg.tip = box.center() + Vec3{0, 0, 9};
            } else {
                seg.entry = {-50, -50, -50};
                seg.tip = {-50, -50, -32};
            }
            seg.volume_id = "v";
            b.record.needle = seg;
            b.segment_ref = seg;
            s.biopsies.push_back(std::move(b));
        }
        return s;
    };
    std::vector<MappedSession> sessions;
    for (int half = 0; half < 2; ++half) {
        const long n = half == 0 ? table.n1 : table.n2;
        const long hits = half == 0 ? table.hits1 : table.hits2;
        long placed_n = 0, placed_hits = 0;
        for (int s = 0; s < 16; ++s) {
            const long take_n = (n * (s + 1)) / 16 - placed_n;
            const long take_hits = (hits * (s + 1)) / 16 - placed_hits;
            sessions.push_back(make_session(16 * half + s + 1, take_n, take_hits));
            placed_n += take_n;
            placed_hits += take_hits;
        }
    }
    const LearningCurveResult lc = learning_curve(sessions, 16, 1.0);
    const bool lc_ok = lc.chi2 >= 5.4 && lc.chi2 <= 6.4 && lc.p_value < 0.02;

    std::ostringstream os;
    os << "sf(5.89) = " << p589 << ", sf(3.841) = " << p384 << "; reconstructed split ("
       << table.n1 << "," << table.hits1 << ")/(" << table.n2 << "," << table.hits2
       << ") chi2 = " << fmt2(lc.chi2) << " in [5.4, 6.4], p = " << lc.p_value << " < 0.02";
    return {p_ok && lc_ok, os.str()};
}

Outcome criterion5() {
    // Fixture session reproducing every published row (MS-Left hits = 28 per
    // the documented inconsistency in the printed table).
    const SectorGrid grid = build_grid({{0, 0, 0}, {40, 30, 42}});
    const int n_per_row[10] = {33, 31, 31, 32, 32, 30, 32, 31, 60, 59};
    const int hits_per_row[10] = {23, 17, 20, 21, 26, 23, 32, 28, 31, 27};
    const int expected_pct[10] = {70, 55, 65, 66, 81, 77, 100, 90, 52, 46};

    std::vector<MappedBiopsy> biopsies;
    int index = 1;
    for (int row = 0; row < 10; ++row) {
        const TargetLabel analysis = analysis_labels()[row];
        // intended targets in session files are raw labels
        const TargetLabel raw = analysis.column == Column::FusedApex
                                    ? TargetLabel{Row::Apex, Column::Lateral, analysis.side}
                                    : analysis;
        const Box3 box = sector_box(grid, raw);
        for (int i = 0; i < n_per_row[row]; ++i) {
            MappedBiopsy b;
            b.record.index = index++;
            b.record.intended_target = raw;
            b.registration_success = true;
            b.score = 0.8;
            NeedleSegment seg;
            if (i < hits_per_row[row]) {
                seg.entry = box.center() - Vec3{0, 0, 9};
                seg.tip = box.center() + Vec3{0, 0, 9};
            } else {
                seg.entry = {-60, -60, -60};
                seg.tip = {-60, -60, -42};
            }
            seg.volume_id = "v";
            b.record.needle = seg;
            b.segment_ref = seg;
            biopsies.push_back(std::move(b));
        }
    }

    const Report report = per_target_stats(biopsies, grid, 1.0);
    bool rows_ok = true;
    for (int row = 0; row < 10; ++row) {
        const TargetStats& s = report.rows[row];
        if (s.n_biopsies != n_per_row[row] || s.n_hits != hits_per_row[row]) rows_ok = false;
        if (std::lround(s.hit_pct) != expected_pct[row]) rows_ok = false;
    }
    const bool totals_ok = report.totals.n_biopsies == 371 && report.totals.n_hits == 248 &&
                           std::lround(report.totals.hit_pct) == 67;

    std::ostringstream os;
    os << "totals " << report.totals.n_biopsies << "/" << report.totals.n_hits << "/"
       << std::lround(report.totals.hit_pct) << "% (want 371/248/67%), per-row percentages "
       << (rows_ok ? "match" : "MISMATCH");
    return {rows_ok && totals_ok, os.str()};
}

Outcome criterion6() {
    TestRng rng(606060);
    double worst_gap = 0.0, worst_additivity = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec3 lo = rng.vec(-30, 10);
        const Vec3 size = rng.vec(12, 60);
        const SectorGrid grid = build_grid({lo, lo + size});
        const NeedleSegment seg{rng.vec(-45, 80), rng.vec(-45, 80), "v"};

        double sum = 0.0;
        for (const TargetLabel& label : raw_labels()) sum += clip_length(seg, grid, label);
        const double whole = clip_length_box(seg, grid.bbox);
        worst_additivity = std::max(worst_additivity, std::abs(sum - whole));
        worst_gap = std::max(worst_gap,
                             std::abs(whole - clip_length_sampled(seg, grid.bbox, 10000)));
    }
    std::ostringstream os;
    os << "dense-oracle gap " << worst_gap << " mm (<= 0.1), additivity residual "
       << worst_additivity << " (<= 1e-9) over 1000 segments/grids";
    return {worst_gap <= 0.1 && worst_additivity <= 1e-9, os.str()};
}

Outcome criterion7() {
    std::ostringstream os;
    bool ok = true;

    // transform property suites at 1e-9 over 10^4 cases
    {
        TestRng rng(707001);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const RigidTransform T = rng.rigid(30, 2.5, rng.vec(-20, 20));
            const Vec3 a = rng.vec(-80, 80), b = rng.vec(-80, 80);
            worst = std::max(worst, std::abs((apply_point(T, a) - apply_point(T, b)).norm() -
                                             (a - b).norm()));
            worst = std::max(worst, (apply_point(invert(T), apply_point(T, a)) - a).norm());
            const RigidTransform B = rng.rigid(20, 1.5, rng.vec(-10, 10));
            worst = std::max(worst, (apply_point(compose(T, B), a) -
                                     apply_point(T, apply_point(B, a))).norm());
        }
        TestRng prng(707002);
        for (int i = 0; i < 10000; ++i) {
            TransformParams p;
            p.t = prng.vec(-30, 30);
            p.r = prng.angles(1.4707963267948965);
            const TransformParams back = to_params(from_params(p, prng.vec(-10, 10)));
            worst = std::max(worst, (back.t - p.t).norm());
            worst = std::max(worst, (back.r - p.r).norm());
        }
        ok = ok && worst < 1e-9;
        os << "property residual " << worst << " (< 1e-9)";
    }

    // self-registration on the default phantom
    {
        PhantomConfig cfg;
        cfg.seed = 70707;
        auto [v, gt] = generate_reference(cfg);
        const RegistrationResult r = register_volumes(v, v);
        const bool self_ok = r.success && r.transform.translation.norm() <= 0.1 &&
                             rotation_angle_deg(r.transform) <= 0.1;
        ok = ok && self_ok;
        os << "; self-registration |t| " << fmt2(r.transform.translation.norm()) << " mm, rot "
           << fmt2(rotation_angle_deg(r.transform)) << " deg (<= 0.1)";

        // MetaImage round-trip, bit-exact
        write_mha(v, (g_work / "rt.mha").string());
        const Volume3 back = read_mha((g_work / "rt.mha").string());
        const bool mha_ok = back.data == v.data;
        ok = ok && mha_ok;
        os << "; mha round-trip " << (mha_ok ? "bit-exact" : "MISMATCH");
    }

    // same-seed phantom generation across thread counts
    {
        PhantomConfig cfg;
        cfg.seed = 70899;
        set_thread_count(1);
        auto [v1, gt1] = generate_reference(cfg);
        set_thread_count(2);
        auto [v2, gt2] = generate_reference(cfg);
        set_thread_count(0);
        const bool det_ok = v1.data == v2.data;
        ok = ok && det_ok;
        os << "; threaded generation " << (det_ok ? "bit-identical" : "MISMATCH");
    }

    return {ok, os.str()};
}

Outcome criterion8() {
    struct PipelineResult {
        int n = 0, hits = 0;
        bool ok = false;
    };
    auto pipeline = [&](double sigma, const std::string& tag) {
        PipelineResult pr;
        const fs::path dir = g_work / ("smoke_" + tag);
        fs::create_directories(dir / "tf");
        std::ostringstream gen;
        gen << "phantom gen --out-dir " << dir.string()
            << " --session 12 --motion 10mm,10deg --aim-sigma " << sigma << " --seed 31415";
        if (run_cli(gen.str()) != 0) return pr;
        for (int i = 1; i <= 12; ++i) {
            char name[16];
            std::snprintf(name, sizeof name, "bx_%03d", i);
            std::ostringstream reg;
            reg << "register --ref " << (dir / "reference.mha").string() << " --moving "
                << (dir / (std::string(name) + ".mha")).string() << " --out "
                << (dir / "tf" / (std::string(name) + ".json")).string();
            if (run_cli(reg.str()) != 0) return pr;
        }
        std::ostringstream map_cmd;
        map_cmd << "map --session " << (dir / "session.json").string() << " --transforms "
                << (dir / "tf").string() << " --out " << (dir / "mapped.json").string();
        if (run_cli(map_cmd.str()) != 0) return pr;
        std::ostringstream rep;
        rep << "report --mapped " << (dir / "mapped.json").string() << " --out "
            << (dir / "report.csv").string() << " --json " << (dir / "report.json").string()
            << " --min-len 1.0";
        if (run_cli(rep.str()) != 0) return pr;

        std::ifstream in(dir / "report.json");
        nlohmann::json j;
        in >> j;
        pr.n = j.at("totals").at("n").get<int>();
        pr.hits = j.at("totals").at("hits").get<int>();
        pr.ok = true;
        return pr;
    };

    const PipelineResult perfect = pipeline(0.0, "sigma0");
    const PipelineResult noisy = pipeline(6.0, "sigma6");
    std::ostringstream os;
    if (!perfect.ok || !noisy.ok) return {false, "pipeline exited nonzero (see cli_log.txt)"};
    os << "sigma 0: " << perfect.hits << "/" << perfect.n << " hits (want 12/12); sigma 6 mm: "
       << noisy.hits << "/" << noisy.n << " (want strictly fewer)";
    const bool ok = perfect.n == 12 && perfect.hits == 12 && noisy.n == 12 &&
                    noisy.hits < perfect.hits;
    return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    const char* cli_env = std::getenv("TRUSMAP_CLI");
    if (argc > 1) g_cli = argv[1];
    else if (cli_env) g_cli = cli_env;
    else {
        std::cerr << "usage: trusmap_acceptance <path-to-trusmap-cli>  (or set TRUSMAP_CLI)\n";
        return 64;
    }
    g_work = fs::current_path() / "acceptance_work";
    fs::create_directories(g_work);

    struct Criterion {
        const char* name;
        Outcome (*fn)();
    };
    const std::array<Criterion, 8> criteria = {{
        {"registration accuracy", criterion1},
        {"success rate", criterion2},
        {"runtime", criterion3},
        {"chi-square fidelity", criterion4},
        {"targeting table fidelity", criterion5},
        {"geometry oracle", criterion6},
        {"transform/property suites", criterion7},
        {"end-to-end pipeline", criterion8},
    }};

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::printf("[%s] criterion %zu (%s): %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures;
}
