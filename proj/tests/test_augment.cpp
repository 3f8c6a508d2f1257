#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "signet/augment.hpp"
#include "signet/rng.hpp"
#include "signet/toycorpus.hpp"

using namespace signet;

namespace {

Tensor asymmetric_image(std::uint64_t seed) {
    Rng rng(seed);
    Tensor img({28, 28, 1});
    for (auto& v : img.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    return img;
}

}  // namespace

TEST_CASE("rotation by zero is the identity homography") {
    AugmentOpSpec spec;
    spec.kind = AugmentOp::rotate;
    spec.rotate_deg = 0.0;
    CHECK(homography_for(spec).is_identity());
    const Tensor img = asymmetric_image(1);
    CHECK(bit_equal(warp(img, homography_for(spec)), img));
}

TEST_CASE("translate homography has the translation column") {
    AugmentOpSpec spec;
    spec.kind = AugmentOp::translate;
    spec.dx = 2;
    spec.dy = 3;
    const Mat3 h = homography_for(spec);
    CHECK(h.m[0] == 1.0);
    CHECK(h.m[2] == 2.0);
    CHECK(h.m[4] == 1.0);
    CHECK(h.m[5] == 3.0);
}

TEST_CASE("scale(1) is identity; perspective with zero offsets is identity") {
    AugmentOpSpec sc;
    sc.kind = AugmentOp::scale;
    sc.scale = 1.0;
    CHECK(homography_for(sc).is_identity());
    AugmentOpSpec pe;
    pe.kind = AugmentOp::perspective;
    const Mat3 h = homography_for(pe);
    for (int i = 0; i < 9; ++i) CHECK(std::abs(h.m[static_cast<std::size_t>(i)] - Mat3::identity().m[static_cast<std::size_t>(i)]) < 1e-9);
}

TEST_CASE("solved homography maps each correspondence within 1e-6") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<std::array<double, 2>, 4> from = {{{0, 0}, {27, 0}, {27, 27}, {0, 27}}};
        std::array<std::array<double, 2>, 4> to;
        for (int i = 0; i < 4; ++i)
            to[static_cast<std::size_t>(i)] = {from[static_cast<std::size_t>(i)][0] + rng.uniform(-4, 4),
                                               from[static_cast<std::size_t>(i)][1] + rng.uniform(-4, 4)};
        const Mat3 h = solve_homography(from, to);
        for (int i = 0; i < 4; ++i) {
            const double x = from[static_cast<std::size_t>(i)][0], y = from[static_cast<std::size_t>(i)][1];
            const double w = h.m[6] * x + h.m[7] * y + h.m[8];
            const double u = (h.m[0] * x + h.m[1] * y + h.m[2]) / w;
            const double v = (h.m[3] * x + h.m[4] * y + h.m[5]) / w;
            CHECK(std::abs(u - to[static_cast<std::size_t>(i)][0]) < 1e-6);
            CHECK(std::abs(v - to[static_cast<std::size_t>(i)][1]) < 1e-6);
        }
    }
}

TEST_CASE("degenerate correspondences are rejected") {
    std::array<std::array<double, 2>, 4> from = {{{0, 0}, {27, 0}, {27, 27}, {0, 27}}};
    std::array<std::array<double, 2>, 4> collinear = {{{0, 0}, {1, 1}, {2, 2}, {3, 3}}};
    CHECK_THROWS_WITH_AS(solve_homography(from, collinear), doctest::Contains("degenerate"), Error);
}

TEST_CASE("rotate 90 equals the explicit index permutation") {
    const Tensor img = asymmetric_image(3);
    AugmentOpSpec spec;
    spec.kind = AugmentOp::rotate;
    spec.rotate_deg = 90.0;
    const Tensor rotated = warp(img, homography_for(spec));
    for (int i = 0; i < 28; ++i)
        for (int j = 0; j < 28; ++j)
            CHECK(rotated.at3(i, j, 0) == doctest::Approx(img.at3(j, 27 - i, 0)).epsilon(1e-4));
}

TEST_CASE("warp composition approximates composed homography") {
    // Smooth field: the 0.1 tolerance is an interpolation bound, not an
    // edge-aliasing bound.
    Tensor img({28, 28, 1});
    for (int y = 0; y < 28; ++y)
        for (int x = 0; x < 28; ++x)
            img.at3(y, x, 0) = 0.8f * std::sin(0.3f * static_cast<float>(x)) * std::cos(0.25f * static_cast<float>(y));
    AugmentOpSpec r1;
    r1.kind = AugmentOp::rotate;
    r1.rotate_deg = 7.0;
    AugmentOpSpec r2;
    r2.kind = AugmentOp::rotate;
    r2.rotate_deg = 5.0;
    const Mat3 h1 = homography_for(r1);
    const Mat3 h2 = homography_for(r2);
    const Tensor two_step = warp(warp(img, h2), h1);
    const Tensor one_step = warp(img, h2 * h1);
    for (std::int64_t i = 0; i < img.numel(); ++i)
        CHECK(std::abs(two_step.data[static_cast<std::size_t>(i)] - one_step.data[static_cast<std::size_t>(i)]) < 0.1f);
}

TEST_CASE("warp rejects a singular matrix") {
    Mat3 h;
    h.m = {1, 0, 0, 2, 0, 0, 0, 0, 1};  // rank deficient
    CHECK_THROWS_WITH_AS(warp(asymmetric_image(9), h), doctest::Contains("singular"), Error);
}

TEST_CASE("flip is an involution and flips rows/columns") {
    const Tensor img = asymmetric_image(11);
    CHECK(bit_equal(flip(flip(img, true), true), img));
    CHECK(bit_equal(flip(flip(img, false), false), img));
    const Tensor fh = flip(img, true);
    CHECK(fh.at3(0, 0, 0) == img.at3(0, 27, 0));
    // flip_h then flip_v equals 180-degree index rotation
    const Tensor fhv = flip(flip(img, true), false);
    for (int i = 0; i < 28; ++i)
        for (int j = 0; j < 28; ++j) CHECK(fhv.at3(i, j, 0) == img.at3(27 - i, 27 - j, 0));
}

TEST_CASE("salt and pepper extremes") {
    const Tensor img = asymmetric_image(13);
    CHECK(bit_equal(salt_pepper(img, 0.0, 5), img));
    const Tensor all = salt_pepper(img, 1.0, 5);
    for (float v : all.data) CHECK((v == -1.0f || v == 1.0f));
}

TEST_CASE("salt and pepper corruption counts follow the binomial") {
    // 28x28 pixels at p=0.1: mean 78.4, sigma = sqrt(784*0.1*0.9) = 8.4.
    Tensor zeros({28, 28, 1});
    double total = 0;
    int outliers = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const Tensor noisy = salt_pepper(zeros, 0.1, seed);
        int corrupted = 0;
        for (float v : noisy.data)
            if (v != 0.0f) ++corrupted;
        total += corrupted;
        if (std::abs(corrupted - 78.4) > 3 * 8.4) ++outliers;
    }
    CHECK(outliers == 0);
    CHECK(std::abs(total / 100.0 - 78.4) < 3 * 8.4 / 10.0);  // mean over seeds
}

TEST_CASE("lighting identity, clamping, and formula") {
    const Tensor img = asymmetric_image(15);
    CHECK(bit_equal(adjust_lighting(img, 0.0, 1.0), img));
    const Tensor bright = adjust_lighting(img, 2.0, 1.0);
    for (float v : bright.data) CHECK(v == 1.0f);
    Rng rng(16);
    const double b = rng.uniform(-0.4, 0.4), c = rng.uniform(0.5, 1.5);
    const Tensor lit = adjust_lighting(img, b, c);
    for (std::int64_t i = 0; i < img.numel(); ++i) {
        const double expect = std::clamp(c * img.data[static_cast<std::size_t>(i)] + b, -1.0, 1.0);
        CHECK(lit.data[static_cast<std::size_t>(i)] == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("policy: class 9 flips horizontally but not vertically") {
    const ClassPolicy policy = ClassPolicy::defaults();
    CHECK(op_allowed(9, policy, AugmentOp::flip_h));
    CHECK_FALSE(op_allowed(9, policy, AugmentOp::flip_v));
}

TEST_CASE("policy: text-bearing classes never flip") {
    const ClassPolicy policy = ClassPolicy::defaults();
    for (int c : {2, 3, 4, 5, 6}) {
        CHECK_FALSE(op_allowed(c, policy, AugmentOp::flip_h));
        CHECK_FALSE(op_allowed(c, policy, AugmentOp::flip_v));
    }
}

TEST_CASE("policy: class 0 permits all eight kinds") {
    const ClassPolicy policy = ClassPolicy::defaults();
    CHECK(allowed_ops(0, policy).size() == 8);
}

TEST_CASE("policy: unknown class is an error") {
    CHECK_THROWS_WITH_AS(allowed_ops(10, ClassPolicy::defaults()), doctest::Contains("unknown class"), Error);
}

TEST_CASE("policy text round trip preserves permissions and caps") {
    const ClassPolicy policy = ClassPolicy::defaults();
    const ClassPolicy back = ClassPolicy::from_text(policy.to_text());
    for (int c = 0; c < 10; ++c) {
        CHECK(allowed_ops(c, back) == allowed_ops(c, policy));
        CHECK(back.rotate_cap_deg[static_cast<std::size_t>(c)] ==
              doctest::Approx(policy.rotate_cap_deg[static_cast<std::size_t>(c)]));
    }
}

TEST_CASE("build_augmented_dataset with multiplier zero is the input") {
    const Dataset ds = make_toy_dataset(3, 21);
    AugmentPlan plan;
    plan.multiplier = 0;
    plan.seed = 9;
    const Dataset out = build_augmented_dataset(ds, plan);
    REQUIRE(out.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) CHECK(bit_equal(out[i].pixels, ds[i].pixels));
}

TEST_CASE("build_augmented_dataset multiplies counts and preserves labels") {
    const Dataset ds = make_toy_dataset(10, 22);  // 100 images
    AugmentPlan plan;
    plan.multiplier = 2;
    plan.seed = 10;
    std::vector<EmissionRecord> log;
    const Dataset out = build_augmented_dataset(ds, plan, &log);
    CHECK(out.size() == 300);
    CHECK(log.size() == 200);
    const auto hist_in = class_histogram(ds);
    const auto hist_out = class_histogram(out);
    for (int c = 0; c < 10; ++c)
        CHECK(hist_out[static_cast<std::size_t>(c)] == 3 * hist_in[static_cast<std::size_t>(c)]);
    for (const auto& rec : log) CHECK(rec.class_id == ds[rec.source_index].class_id);
}

TEST_CASE("every emitted variant satisfies the class policy") {
    const Dataset ds = make_toy_dataset(12, 23);
    AugmentPlan plan;
    plan.multiplier = 4;
    plan.seed = 77;
    std::vector<EmissionRecord> log;
    const Dataset out = build_augmented_dataset(ds, plan, &log);
    std::string why;
    for (const auto& rec : log) {
        const bool ok = spec_within_policy(rec.class_id, plan.policy, rec.op, &why);
        INFO("class " << rec.class_id << " op " << rec.op.describe() << ": " << why);
        CHECK(ok);
    }
    for (const auto& img : out)
        for (float v : img.pixels.data) {
            CHECK(v >= -1.0f);
            CHECK(v <= 1.0f);
        }
}

TEST_CASE("augmentation is deterministic for identical plans") {
    const Dataset ds = make_toy_dataset(5, 31);
    AugmentPlan plan;
    plan.multiplier = 3;
    plan.seed = 123;
    const Dataset a = build_augmented_dataset(ds, plan);
    const Dataset b = build_augmented_dataset(ds, plan);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(bit_equal(a[i].pixels, b[i].pixels));
}

TEST_CASE("emission log text has one line per variant") {
    const Dataset ds = make_toy_dataset(2, 41);
    AugmentPlan plan;
    plan.multiplier = 2;
    plan.seed = 5;
    std::vector<EmissionRecord> log;
    build_augmented_dataset(ds, plan, &log);
    const std::string text = emission_log_text(log);
    CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<std::ptrdiff_t>(log.size()));
}
