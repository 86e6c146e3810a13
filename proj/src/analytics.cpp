#include "trusmap/analytics.hpp"

#include <cmath>

#include "trusmap/errors.hpp"

namespace trusmap {

Report per_target_stats(std::span<const MappedBiopsy> mapped, const SectorGrid& grid,
                        double min_len) {
    Report report;
    report.min_len_mm = min_len;
    std::vector<double> len_sum(10, 0.0), len_sum_hits(10, 0.0);
    for (const TargetLabel& label : analysis_labels()) {
        TargetStats s;
        s.label = label;
        report.rows.push_back(s);
    }

    for (const MappedBiopsy& b : mapped) {
        if (!b.registration_success || !b.segment_ref) continue;
        const TargetLabel target = fuse_apex(b.record.intended_target);
        int row = -1;
        for (std::size_t i = 0; i < report.rows.size(); ++i)
            if (report.rows[i].label == target) {
                row = static_cast<int>(i);
                break;
            }
        if (row < 0) throw InvalidArgument("unknown analysis target " + to_code(target));

        const double len = clip_length(*b.segment_ref, grid, target);
        const bool hit = is_hit(*b.segment_ref, grid, target, min_len);
        TargetStats& s = report.rows[row];
        ++s.n_biopsies;
        len_sum[row] += len;
        if (hit) {
            ++s.n_hits;
            len_sum_hits[row] += len;
        }
    }

    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        TargetStats& s = report.rows[i];
        s.hit_pct = s.n_biopsies > 0 ? 100.0 * s.n_hits / s.n_biopsies : 0.0;
        s.mean_inner_length = s.n_biopsies > 0 ? len_sum[i] / s.n_biopsies : 0.0;
        s.mean_inner_length_hits = s.n_hits > 0 ? len_sum_hits[i] / s.n_hits : 0.0;
    }
    report.totals = aggregate(report);
    return report;
}

ReportTotals aggregate(const Report& report) {
    if (report.rows.empty()) throw InvalidArgument("report has no rows");
    ReportTotals t;
    double len_sum = 0.0, len_sum_hits = 0.0;
    for (const TargetStats& s : report.rows) {
        t.n_biopsies += s.n_biopsies;
        t.n_hits += s.n_hits;
        len_sum += s.mean_inner_length * s.n_biopsies;
        len_sum_hits += s.mean_inner_length_hits * s.n_hits;
    }
    t.hit_pct = t.n_biopsies > 0 ? 100.0 * t.n_hits / t.n_biopsies : 0.0;
    t.mean_inner_length = t.n_biopsies > 0 ? len_sum / t.n_biopsies : 0.0;
    t.mean_inner_length_hits = t.n_hits > 0 ? len_sum_hits / t.n_hits : 0.0;
    return t;
}

double chi2_2x2(long a, long b, long c, long d, bool yates) {
    if (a < 0 || b < 0 || c < 0 || d < 0) throw InvalidArgument("cell counts must be >= 0");
    const double r1 = static_cast<double>(a) + b;
    const double r2 = static_cast<double>(c) + d;
    const double c1 = static_cast<double>(a) + c;
    const double c2 = static_cast<double>(b) + d;
    if (r1 <= 0.0 || r2 <= 0.0 || c1 <= 0.0 || c2 <= 0.0)
        throw InvalidArgument("all 2x2 marginals must be positive");
    const double n = r1 + r2;
    double num = static_cast<double>(a) * d - static_cast<double>(b) * c;
    num = std::abs(num);
    if (yates) num = std::max(0.0, num - n / 2.0);
    return n * num * num / (r1 * r2 * c1 * c2);
}

double chi2_sf_df1(double x) {
    if (x < 0.0) throw InvalidArgument("chi-square statistic must be >= 0");
    return std::erfc(std::sqrt(0.5 * x));
}

LearningCurveResult learning_curve(std::span<const MappedSession> sessions, int split_index,
                                   double min_len) {
    if (split_index < 1 || static_cast<std::size_t>(split_index) >= sessions.size())
        throw InvalidArgument("split index must satisfy 1 <= split < number of sessions");

    LearningCurveResult lc;
    lc.split_index = split_index;
    for (std::size_t i = 0; i < sessions.size(); ++i) {
        HalfCount& half = static_cast<int>(i) < split_index ? lc.first : lc.second;
        const MappedSession& s = sessions[i];
        for (const MappedBiopsy& b : s.biopsies) {
            if (!b.registration_success || !b.segment_ref) continue;
            ++half.n;
            if (is_hit(*b.segment_ref, s.grid, fuse_apex(b.record.intended_target), min_len))
                ++half.hits;
        }
    }
    if (lc.first.n == 0 || lc.second.n == 0)
        throw InvalidArgument("each chronological half needs at least one mapped biopsy");

    lc.rate_first = static_cast<double>(lc.first.hits) / lc.first.n;
    lc.rate_second = static_cast<double>(lc.second.hits) / lc.second.n;
    lc.chi2 = chi2_2x2(lc.first.hits, lc.first.n - lc.first.hits, lc.second.hits,
                       lc.second.n - lc.second.hits);
    lc.p_value = chi2_sf_df1(lc.chi2);
    return lc;
}

}  // namespace trusmap
