#pragma once

#include <span>
#include <string>
#include <vector>

#include "trusmap/biopsy.hpp"
#include "trusmap/sector.hpp"

namespace trusmap {

// Per-analysis-target hit statistics. Means are reported two ways because the
// source table does not say which it used: over all planned biopsies (misses
// count their clip length, usually 0) and over hits only.
struct TargetStats {
    TargetLabel label;              // fused-apex analysis label
    int n_biopsies = 0;
    int n_hits = 0;
    double hit_pct = 0.0;           // 100 * hits / n
    double mean_inner_length = 0.0; // mm, all planned biopsies
    double mean_inner_length_hits = 0.0;  // mm, hits only
};

struct ReportTotals {
    int n_biopsies = 0;
    int n_hits = 0;
    double hit_pct = 0.0;
    double mean_inner_length = 0.0;       // biopsy-count weighted
    double mean_inner_length_hits = 0.0;  // hit-count weighted
};

// Fixed 10-row fused-apex layout: BL-R, BL-L, BS-R, BS-L, ML-R, ML-L, MS-R,
// MS-L, AP-R, AP-L.
struct Report {
    std::vector<TargetStats> rows;
    ReportTotals totals;
    double min_len_mm = 1.0;
};

// Buckets mapped biopsies by their fused intended target. Biopsies with
// failed registrations never contribute.
Report per_target_stats(std::span<const MappedBiopsy> mapped, const SectorGrid& grid,
                        double min_len);

// Recomputes totals from rows (also done internally on every report).
ReportTotals aggregate(const Report& report);

// Pearson chi-square statistic for the 2x2 table [[a,b],[c,d]]. No continuity
// correction by default; Yates' correction available as an option.
double chi2_2x2(long a, long b, long c, long d, bool yates = false);

// Survival function of chi-square with 1 degree of freedom: erfc(sqrt(x/2)).
double chi2_sf_df1(double x);

struct HalfCount {
    long n = 0;
    long hits = 0;
};

struct LearningCurveResult {
    int split_index = 0;
    HalfCount first, second;
    double rate_first = 0.0;   // fraction in [0,1]
    double rate_second = 0.0;
    double chi2 = 0.0;
    double p_value = 1.0;
};

// One mapped session with its own planning grid.
struct MappedSession {
    std::string patient_id;
    int chronological_rank = 1;
    SectorGrid grid;
    std::vector<MappedBiopsy> biopsies;
};

// Chronological split: sessions [0, split) vs [split, end). Pools hits and
// misses per half (unmapped biopsies excluded) and tests independence with
// the 2x2 chi-square.
LearningCurveResult learning_curve(std::span<const MappedSession> sessions, int split_index,
                                   double min_len);

}  // namespace trusmap
