// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wgs/error.hpp"
#include "wgs/train.hpp"

using namespace wgs;

namespace {

std::vector<Camera> ring_cameras(int n, double radius, double elevation_deg, int size, double focal) {
    std::vector<Camera> cams;
    const double el = elevation_deg * std::numbers::pi / 180.0;
    for (int i = 0; i < n; ++i) {
        const double az = 2.0 * std::numbers::pi * i / n;
        const Eigen::Vector3d pos(radius * std::cos(el) * std::sin(az), radius * std::sin(el),
                                  -radius * std::cos(el) * std::cos(az));
        cams.push_back(Camera::look_at(pos, Eigen::Vector3d::Zero(), focal, size, size));
    }
    return cams;
}

GaussianPrimitive make_gaussian(const Eigen::Vector3d& c, double scale, double opacity, const Eigen::Vector3d& rgb) {
    GaussianPrimitive g;
    g.center = c;
    g.log_scale = Eigen::Vector3d::Constant(std::log(scale));
    g.opacity_logit = logit(opacity);
    for (int k = 0; k < 3; ++k) g.color[k] = logit(rgb[k]);
    return g;
}

struct SelfRecon {
    GaussianCloud truth;
    GaussianCloud init;
    std::vector<TrainView> views;
};

SelfRecon self_reconstruction_task() {
    SelfRecon t;
    t.truth.primitives.push_back(make_gaussian({0.2, -0.1, 0.15}, 0.3, 0.8, {0.8, 0.3, 0.5}));
    t.truth.primitives[0].log_scale = {std::log(0.35), std::log(0.25), std::log(0.3)};
    t.init.primitives.push_back(make_gaussian({0.0, 0.0, 0.0}, 0.25, 0.5, {0.5, 0.5, 0.5}));
    for (const auto& cam : ring_cameras(4, 4.0, 20.0, 32, 40.0)) {
        Image img = render(t.truth, cam);
        img.alpha.clear();
        t.views.push_back({cam, img, std::nullopt});
    }
    return t;
}

}  // namespace

TEST_CASE("single gaussian self-reconstruction recovers the center") {
    auto task = self_reconstruction_task();
    TrainConfig cfg;
    const auto result = train(task.init, task.views, 600, cfg);
    const double err = (result.cloud.primitives[0].center - task.truth.primitives[0].center).norm();
    MESSAGE("center error " << err << ", final loss " << result.losses.back());
    CHECK(err <= 1e-2);
    CHECK(result.losses.size() == 600);
    CHECK(std::abs(result.cloud.primitives[0].rotation.norm() - 1.0) < 1e-12);

    // 50-iteration window means never increase during the first 500 iterations.
    double previous = 1e300;
    for (int start = 0; start + 50 <= 500; start += 50) {
        double mean = 0.0;
        for (int i = start; i < start + 50; ++i) mean += result.losses[i] / 50.0;
        CHECK(mean <= previous);
        previous = mean;
    }
}

TEST_CASE("training contract errors") {
    auto task = self_reconstruction_task();
    TrainConfig cfg;
    CHECK_THROWS_AS(train(task.init, task.views, 0, cfg), InvalidInput);
    CHECK_THROWS_AS(train(task.init, std::span<const TrainView>{}, 10, cfg), InvalidInput);

    // A non-finite target produces a non-finite loss; the error names view and iteration.
    auto bad = task.views;
    bad[0].image.data[5] = std::nan("");
    bad[1].image.data[5] = std::nan("");
    bad[2].image.data[5] = std::nan("");
    bad[3].image.data[5] = std::nan("");
    try {
        train(task.init, bad, 5, cfg);
        FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
        const std::string msg = e.what();
        CHECK(msg.find("iteration 0") != std::string::npos);
        CHECK(msg.find("view") != std::string::npos);
    }
}

TEST_CASE("masked training leaves masked-only evidence unused") {
    auto task = self_reconstruction_task();
    TrainConfig cfg;
    // Masking every pixel means zero gradient: parameters stay put.
    MaskProvider all_masked = [&](std::size_t, int) { return Mask(32, 32, 0); };
    const auto result = train(task.init, task.views, 5, cfg, all_masked);
    CHECK(result.cloud.primitives[0].center == task.init.primitives[0].center);
    for (double l : result.losses) CHECK(l == 0.0);
}

TEST_CASE("view cycler visits every view once per epoch") {
    ViewCycler cycler(5, 42);
    for (int epoch = 0; epoch < 3; ++epoch) {
        std::vector<int> seen(5, 0);
        for (int i = 0; i < 5; ++i) ++seen[cycler.next()];
        for (int s : seen) CHECK(s == 1);
    }
}

TEST_CASE("novel cameras interpolate between references") {
    const auto refs = ring_cameras(4, 4.0, 0.0, 16, 20.0);
    SUBCASE("zero count") { CHECK(sample_novel_cameras(refs, 0).empty()); }
    SUBCASE("midpoint of two references at 0 and 90 degrees") {
        std::vector<Camera> two = {refs[0], refs[1]};
        const auto out = sample_novel_cameras(two, 1, 7);
        REQUIRE(out.size() == 1);
        const Eigen::Vector3d p = out[0].position;
        CHECK(std::abs(p.norm() - 4.0) <= 1e-9);
        const double az = std::atan2(p.x(), -p.z()) * 180.0 / std::numbers::pi;
        CHECK(az == doctest::Approx(45.0).epsilon(1e-12));
        // Oriented toward the center.
        CHECK((out[0].forward() + p.normalized()).norm() < 1e-12);
    }
    SUBCASE("radius follows linear interpolation") {
        std::vector<Camera> two = {refs[0], Camera::look_at(refs[1].position * 1.5, Eigen::Vector3d::Zero(), 20.0, 16, 16)};
        const auto out = sample_novel_cameras(two, 3, 0);
        for (int k = 0; k < 3; ++k) {
            const double t = (k + 1) / 4.0;
            CHECK(std::abs(out[k].position.norm() - ((1 - t) * 4.0 + t * 6.0)) <= 1e-9);
        }
    }
    SUBCASE("cyclic arcs and determinism") {
        const auto a = sample_novel_cameras(refs, 16, 3);
        const auto b = sample_novel_cameras(refs, 16, 3);
        REQUIRE(a.size() == 16);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].position == b[i].position);
            CHECK(std::abs(a[i].position.norm() - 4.0) <= 1e-9);
            a[i].validate();
        }
    }
    SUBCASE("collinear references") {
        std::vector<Camera> opposite = {refs[0], refs[2]};
        CHECK_THROWS_AS(sample_novel_cameras(opposite, 2), DegenerateGeometry);
        std::vector<Camera> one = {refs[0]};
        CHECK_THROWS_AS(sample_novel_cameras(one, 2), InvalidInput);
    }
}
