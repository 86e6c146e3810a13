#include "trusmap/registration.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <functional>

#include "trusmap/errors.hpp"

namespace trusmap {

void RegistrationConfig::validate() const {
    if (n_levels < 1) throw InvalidArgument("n_levels must be >= 1");
    if (sampling_steps.empty()) throw InvalidArgument("sampling_steps must not be empty");
    for (int s : sampling_steps)
        if (s < 1) throw InvalidArgument("sampling steps must be >= 1");
    if (!(param_tolerance > 0.0) || !(function_tolerance > 0.0))
        throw InvalidArgument("tolerances must be positive");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(angle_scale > 0.0)) throw InvalidArgument("angle_scale must be positive");
    if (!(success_max_translation_mm > 0.0) || !(success_max_rotation_deg > 0.0))
        throw InvalidArgument("plausibility bounds must be positive");
    if (coarse_search.enabled && (!(coarse_search.range_mm > 0.0) || !(coarse_search.step_mm > 0.0)))
        throw InvalidArgument("coarse search range and step must be positive");
}

int RegistrationConfig::step_for_level(int level) const {
    const std::size_t i = std::min(static_cast<std::size_t>(level), sampling_steps.size() - 1);
    return sampling_steps[i];
}

namespace {

using Params6 = std::array<double, 6>;

TransformParams unpack(const Params6& p, double angle_scale) {
    TransformParams tp;
    tp.t = {p[0], p[1], p[2]};
    tp.r = {p[3] / angle_scale, p[4] / angle_scale, p[5] / angle_scale};
    return tp;
}

Params6 pack(const TransformParams& tp, double angle_scale) {
    return {tp.t.x, tp.t.y, tp.t.z, tp.r.x * angle_scale, tp.r.y * angle_scale,
            tp.r.z * angle_scale};
}

// Objective for the maximizer: negated score, with metric failures mapped to
// a sentinel worse than any correlation so line searches retreat from them.
class Objective {
public:
    Objective(const Volume3& ref, const Volume3& mov, const Vec3& center, double angle_scale,
              int step)
        : ref_(ref), mov_(mov), center_(center), angle_scale_(angle_scale), step_(step) {}

    double operator()(const Params6& p) const {
        SimilarityResult r;
        const auto status =
            similarity_nothrow(ref_, mov_, from_params(unpack(p, angle_scale_), center_), step_, r);
        if (status != SimilarityStatus::Ok) return kFailure;
        return -r.score;
    }

    static constexpr double kFailure = 2.0;

private:
    const Volume3& ref_;
    const Volume3& mov_;
    Vec3 center_;
    double angle_scale_;
    int step_;
};

struct Line {
    const Objective& f;
    const Params6& origin;
    const Params6& dir;

    double operator()(double t) const {
        Params6 p;
        for (int i = 0; i < 6; ++i) p[i] = origin[i] + t * dir[i];
        return f(p);
    }
};

constexpr double kGolden = 1.618033988749895;

// Expands a downhill bracket (a,b,c) with f(b) <= f(a), f(c), starting from
// (0, step). Capped so a single line search cannot leave the capture range.
bool bracket(const Line& line, double& a, double& b, double& c, double& fa, double& fb,
             double& fc) {
    fa = line(a);
    fb = line(b);
    if (fb > fa) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    c = b + kGolden * (b - a);
    fc = line(c);
    int guard = 0;
    while (fc < fb) {
        if (++guard > 30 || std::abs(c) > 60.0) return false;
        a = b;
        fa = fb;
        b = c;
        fb = fc;
        c = b + kGolden * (b - a);
        fc = line(c);
    }
    return true;
}

// Brent's parabolic/golden minimization inside the bracket (ax, bx, cx),
// where bx is the best of the triplet with value fbx.
double brent(const Line& line, double ax, double bx, double cx, double fbx, double xtol,
             double& fmin) {
    constexpr int kMaxIter = 60;
    constexpr double eps = 1e-12;
    double lo = std::min(ax, cx), hi = std::max(ax, cx);
    double x = bx, w = bx, v = bx;
    double fx = fbx, fw = fbx, fv = fbx;
    double d = 0.0, e = 0.0;

    for (int it = 0; it < kMaxIter; ++it) {
        const double m = 0.5 * (lo + hi);
        const double tol = eps * std::abs(x) + xtol;
        if (std::abs(x - m) <= 2.0 * tol - 0.5 * (hi - lo)) break;
        bool golden = true;
        if (std::abs(e) > tol) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (lo - x) && p < q * (hi - x)) {
                d = p / q;
                const double u_try = x + d;
                if (u_try - lo < 2.0 * tol || hi - u_try < 2.0 * tol) d = m > x ? tol : -tol;
                golden = false;
            }
        }
        if (golden) {
            e = (x < m ? hi : lo) - x;
            d = 0.381966 * e;
        }
        const double u = std::abs(d) >= tol ? x + d : x + (d > 0.0 ? tol : -tol);
        const double fu = line(u);
        if (fu <= fx) {
            if (u < x) hi = x; else lo = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) lo = u; else hi = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    fmin = fx;
    return x;
}

// Minimizes along dir from p; moves p to the line minimum when it improves.
// Returns the achieved function value, never worse than f0.
double line_minimize(const Objective& f, Params6& p, const Params6& dir_in, double f0,
                     double xtol) {
    double norm = 0.0;
    for (double d : dir_in) norm += d * d;
    norm = std::sqrt(norm);
    if (norm == 0.0) return f0;
    Params6 dir;
    for (int i = 0; i < 6; ++i) dir[i] = dir_in[i] / norm;
    const Line line{f, p, dir};

    double a = 0.0, b = 1.0, c, fa, fb, fc;
    if (!bracket(line, a, b, c, fa, fb, fc)) return f0;
    double fmin;
    double t = brent(line, a, b, c, fb, xtol, fmin);
    if (fb < fmin) {  // defensive: keep the bracket optimum if Brent regressed
        t = b;
        fmin = fb;
    }
    if (fmin < f0) {
        for (int i = 0; i < 6; ++i) p[i] += t * dir[i];
        return fmin;
    }
    return f0;
}

// Powell's direction-set method (minimization). Derivative-free on purpose:
// the correlation surface is not smooth under speckle.
double powell(const Objective& f, Params6& p, double param_tol, double ftol, int max_iter,
              int& iterations) {
    std::array<Params6, 6> dirs{};
    for (int i = 0; i < 6; ++i) dirs[i][i] = 1.0;
    const double xtol = param_tol * 0.25;

    double fp = f(p);

    for (int it = 0; it < max_iter; ++it) {
        ++iterations;
        const double f_begin = fp;
        const Params6 p_begin = p;
        int biggest_dir = 0;
        double biggest_drop = 0.0;

        for (int k = 0; k < 6; ++k) {
            const double f_prev = fp;
            fp = line_minimize(f, p, dirs[k], fp, xtol);
            if (f_prev - fp > biggest_drop) {
                biggest_drop = f_prev - fp;
                biggest_dir = k;
            }
        }

        if (2.0 * (f_begin - fp) <= ftol * (std::abs(f_begin) + std::abs(fp)) + 1e-25) break;
        double max_move = 0.0;
        for (int i = 0; i < 6; ++i) max_move = std::max(max_move, std::abs(p[i] - p_begin[i]));
        if (max_move < param_tol) break;

        // Powell's update: try the extrapolated point and, when profitable,
        // replace the direction of largest gain with the net sweep direction.
        Params6 p_extrap;
        Params6 sweep;
        for (int i = 0; i < 6; ++i) {
            p_extrap[i] = 2.0 * p[i] - p_begin[i];
            sweep[i] = p[i] - p_begin[i];
        }
        const double f_extrap = f(p_extrap);
        if (f_extrap < f_begin) {
            const double t = 2.0 * (f_begin - 2.0 * fp + f_extrap) *
                                 (f_begin - fp - biggest_drop) * (f_begin - fp - biggest_drop) -
                             biggest_drop * (f_begin - f_extrap) * (f_begin - f_extrap);
            if (t < 0.0) {
                fp = line_minimize(f, p, sweep, fp, xtol);
                dirs[biggest_dir] = dirs[5];
                dirs[5] = sweep;
            }
        }
    }
    return fp;
}

}  // namespace

TransformParams optimize_level(const Volume3& ref, const Volume3& mov, const TransformParams& init,
                               const RegistrationConfig& cfg, const Vec3& center, int step,
                               int& iterations) {
    cfg.validate();
    // Propagates InsufficientOverlap / DegenerateIntensity when the starting
    // transform is unusable; later trial points map failures to a bad score.
    similarity(ref, mov, from_params(init, center), step);
    const Objective f(ref, mov, center, cfg.angle_scale, step);
    Params6 p = pack(init, cfg.angle_scale);
    powell(f, p, cfg.param_tolerance, cfg.function_tolerance, cfg.max_iterations, iterations);
    return unpack(p, cfg.angle_scale);
}

RegistrationResult register_volumes(const Volume3& ref, const Volume3& mov,
                                    const RegistrationConfig& cfg) {
    cfg.validate();
    validate_volume(ref);
    validate_volume(mov);
    const auto t_start = std::chrono::steady_clock::now();

    const Pyramid ref_pyr = build_pyramid(ref, cfg.n_levels);
    const Pyramid mov_pyr = build_pyramid(mov, cfg.n_levels);
    const Vec3 center = volume_center(ref);

    TransformParams params;
    int iterations = 0;

    const int coarsest = cfg.n_levels - 1;
    if (cfg.coarse_search.enabled) {
        const Volume3& cref = ref_pyr.levels[coarsest];
        const Volume3& cmov = mov_pyr.levels[coarsest];
        const int step = cfg.step_for_level(coarsest);
        const int cells = static_cast<int>(cfg.coarse_search.range_mm / cfg.coarse_search.step_mm);
        double best = 2.0;
        Vec3 best_t{0, 0, 0};
        for (int iz = -cells; iz <= cells; ++iz)
            for (int iy = -cells; iy <= cells; ++iy)
                for (int ix = -cells; ix <= cells; ++ix) {
                    TransformParams trial;
                    trial.t = {ix * cfg.coarse_search.step_mm, iy * cfg.coarse_search.step_mm,
                               iz * cfg.coarse_search.step_mm};
                    SimilarityResult r;
                    if (similarity_nothrow(cref, cmov, from_params(trial, center), step, r) !=
                        SimilarityStatus::Ok)
                        continue;
                    if (-r.score < best) {
                        best = -r.score;
                        best_t = trial.t;
                    }
                }
        params.t = best_t;
    }

    for (int level = coarsest; level >= 0; --level)
        params = optimize_level(ref_pyr.levels[level], mov_pyr.levels[level], params, cfg, center,
                                cfg.step_for_level(level), iterations);

    RegistrationResult result;
    result.transform = from_params(params, center);
    result.iterations = iterations;

    SimilarityResult final_sim;
    const auto status =
        similarity_nothrow(ref, mov, result.transform, cfg.step_for_level(0), final_sim);
    result.score = status == SimilarityStatus::Ok ? final_sim.score : -1.0;
    result.overlap_fraction = final_sim.overlap;

    result.success = status == SimilarityStatus::Ok && result.score >= cfg.success_min_score &&
                     params.t.norm() <= cfg.success_max_translation_mm &&
                     rotation_angle_deg(result.transform) <= cfg.success_max_rotation_deg;

    result.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

}  // namespace trusmap
