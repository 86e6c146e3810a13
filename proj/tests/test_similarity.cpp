#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "trusmap/errors.hpp"
#include "trusmap/phantom.hpp"
#include "trusmap/similarity.hpp"
#include "trusmap/threading.hpp"

using namespace trusmap;
using trusmap::testing::small_phantom_config;

TEST_SUITE_BEGIN("similarity");

TEST_CASE("self-similarity is exactly 1 with full overlap") {
    const PhantomConfig cfg = small_phantom_config(61);
    auto [v, gt] = generate_reference(cfg);
    const SimilarityResult r = similarity(v, v, RigidTransform::identity(), 1);
    CHECK(r.score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.overlap == doctest::Approx(1.0));
}

TEST_CASE("negative affine remap gives score -1") {
    const PhantomConfig cfg = small_phantom_config(62);
    auto [v, gt] = generate_reference(cfg);
    Volume3 negated = v;
    for (float& x : negated.data) x = -2.0f * x + 17.0f;
    const SimilarityResult r = similarity(v, negated, RigidTransform::identity(), 1);
    CHECK(r.score == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("score at the true transform beats a 5 mm offset") {
    const PhantomConfig cfg = small_phantom_config(63);
    auto [ref, gt_ref] = generate_reference(cfg);
    trusmap::testing::TestRng rng(630);
    const RigidTransform T_true = rng.rigid(6.0, deg_to_rad(5.0), volume_center(ref));
    auto [mov, gt] = generate_moving(cfg, T_true, 631);

    const double at_truth = similarity(ref, mov, T_true, 2).score;
    RigidTransform shifted = T_true;
    shifted.translation += Vec3{5, 0, 0};
    const double at_offset = similarity(ref, mov, shifted, 2).score;
    CHECK(at_truth > at_offset);
}

TEST_CASE("insufficient overlap and degenerate intensity are distinct errors") {
    const PhantomConfig cfg = small_phantom_config(64);
    auto [v, gt] = generate_reference(cfg);
    RigidTransform far = RigidTransform::identity();
    far.translation = {500, 0, 0};
    CHECK_THROWS_AS(similarity(v, v, far, 1), InsufficientOverlap);

    Volume3 flat = make_volume({32, 32, 32}, {1, 1, 1});
    std::fill(flat.data.begin(), flat.data.end(), 7.0f);
    CHECK_THROWS_AS(similarity(flat, flat, RigidTransform::identity(), 1), DegenerateIntensity);
    CHECK_THROWS_AS(similarity(v, v, RigidTransform::identity(), 0), InvalidArgument);
}

TEST_CASE("score is identical across thread counts") {
    const PhantomConfig cfg = small_phantom_config(65);
    auto [ref, gt_ref] = generate_reference(cfg);
    trusmap::testing::TestRng rng(650);
    const RigidTransform T = rng.rigid(4.0, deg_to_rad(4.0), volume_center(ref));
    auto [mov, gt] = generate_moving(cfg, T, 651);

    set_thread_count(1);
    const SimilarityResult a = similarity(ref, mov, T, 2);
    set_thread_count(2);
    const SimilarityResult b = similarity(ref, mov, T, 2);
    set_thread_count(0);
    CHECK(a.score == b.score);  // bitwise
    CHECK(a.overlap == b.overlap);
}

TEST_CASE("score stays within [-1, 1] and overlap within [0, 1]") {
    const PhantomConfig cfg = small_phantom_config(66);
    auto [ref, gt_ref] = generate_reference(cfg);
    auto [mov, gt] = generate_moving(cfg, RigidTransform::identity(), 660);
    trusmap::testing::TestRng rng(661);
    for (int i = 0; i < 20; ++i) {
        const RigidTransform T = rng.rigid(12.0, deg_to_rad(10.0), volume_center(ref));
        const SimilarityResult r = similarity(ref, mov, T, 3);
        CHECK(r.score >= -1.0);
        CHECK(r.score <= 1.0);
        CHECK(r.overlap >= 0.0);
        CHECK(r.overlap <= 1.0);
    }
}

TEST_SUITE_END();
