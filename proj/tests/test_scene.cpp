// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wgs/error.hpp"
#include "wgs/scene.hpp"

using namespace wgs;

namespace {

SceneConfig small_scene() {
    SceneConfig cfg;
    cfg.image_size = 32;
    cfg.held_out_views = 4;
    cfg.primitives = 120;
    return cfg;
}

double elevation_deg(const Camera& cam) {
    return std::asin(cam.position.y() / cam.position.norm()) * 180.0 / std::numbers::pi;
}

}  // namespace

TEST_CASE("torus knot cloud is valid and seeded") {
    const GaussianCloud a = torus_knot_cloud(50, 3);
    CHECK(a.count() == 50);
    CHECK_NOTHROW(a.validate());
    CHECK(a.pack() == torus_knot_cloud(50, 3).pack());
    for (const auto& g : a.primitives) CHECK(g.center.norm() < 1.3);
}

TEST_CASE("orbit cameras look at the origin") {
    const auto cams = orbit_cameras(6, 20.0, 10.0, 4.0, 50.0, 32);
    REQUIRE(cams.size() == 6);
    for (const auto& cam : cams) {
        CHECK(cam.position.norm() == doctest::Approx(4.0));
        CHECK(elevation_deg(cam) == doctest::Approx(20.0));
        CHECK((cam.forward() + cam.position.normalized()).norm() < 1e-12);
        CHECK_NOTHROW(cam.validate());
    }
}

TEST_CASE("synthesized scene layout") {
    const SceneConfig cfg = small_scene();
    const Scene scene = synthesize_scene(cfg);
    REQUIRE(scene.train.size() == 4);
    REQUIRE(scene.held_out.size() == 4);
    for (const auto& v : scene.train) {
        CHECK(elevation_deg(v.camera) == doctest::Approx(20.0));
        CHECK(v.image.height == 32);
        CHECK(v.image.channels == 3);
        CHECK_FALSE(v.image.has_alpha());
        for (double s : v.image.data) CHECK(std::abs(s * 255.0 - std::round(s * 255.0)) < 1e-9);
        CHECK(v.object_mask.count() > 20);
        CHECK(v.object_mask.count() < 32 * 32);
    }
    // Held-out views sit off the training ring.
    for (const auto& v : scene.held_out) CHECK(std::abs(elevation_deg(v.camera) - 20.0) > 10.0);

    const Scene again = synthesize_scene(cfg);
    CHECK(again.train[2].image.data == scene.train[2].image.data);
    CHECK(again.held_out[3].object_mask.values == scene.held_out[3].object_mask.values);
}

TEST_CASE("visual hull seeds project inside every object mask") {
    const Scene scene = synthesize_scene(small_scene());
    const GaussianCloud init = visual_hull_init(scene.train, 200, 11);
    REQUIRE(init.count() == 200);
    CHECK_NOTHROW(init.validate());
    for (const auto& g : init.primitives) {
        for (const auto& v : scene.train) {
            const Eigen::Vector3d p = v.camera.to_camera(g.center);
            REQUIRE(p.z() > 0.0);
            const int x = static_cast<int>(std::floor(v.camera.focal * p.x() / p.z() + 0.5 * v.camera.width));
            const int y = static_cast<int>(std::floor(v.camera.focal * p.y() / p.z() + 0.5 * v.camera.height));
            REQUIRE(x >= 0);
            REQUIRE(y >= 0);
            REQUIRE(x < v.camera.width);
            REQUIRE(y < v.camera.height);
            CHECK(v.object_mask.at(y, x) == 1);
        }
    }
    CHECK(visual_hull_init(scene.train, 200, 11).pack() == init.pack());
    CHECK(visual_hull_init(scene.train, 200, 12).pack() != init.pack());
}

TEST_CASE("visual hull init errors") {
    Scene scene = synthesize_scene(small_scene());
    CHECK_THROWS_AS(visual_hull_init({}, 10, 0), InvalidInput);
    for (auto& v : scene.train) v.object_mask.values.assign(v.object_mask.values.size(), 0);
    CHECK_THROWS_AS(visual_hull_init(scene.train, 10, 0), InsufficientData);
}
