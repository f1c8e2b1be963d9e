// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/scene.hpp"

#include <cmath>
#include <numbers>

#include "wgs/error.hpp"
#include "wgs/random.hpp"

namespace wgs {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kKnotScale = 0.3;
constexpr double kHullBound = 1.3;

Eigen::Vector3d knot_point(double phi) {
    const double r = 2.0 + std::cos(3.0 * phi);
    return kKnotScale * Eigen::Vector3d(r * std::cos(2.0 * phi), std::sin(3.0 * phi), r * std::sin(2.0 * phi));
}

Eigen::Vector3d hue_to_rgb(double hue) {
    Eigen::Vector3d c;
    for (int k = 0; k < 3; ++k) c[k] = 0.5 + 0.4 * std::cos(2.0 * std::numbers::pi * (hue - k / 3.0));
    return c;
}

// Quaternion (w, x, y, z) turning +x onto `dir`.
Eigen::Vector4d align_x(const Eigen::Vector3d& dir) {
    const Eigen::Quaterniond q = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitX(), dir);
    return {q.w(), q.x(), q.y(), q.z()};
}

}  // namespace

GaussianCloud torus_knot_cloud(int count, std::uint64_t seed) {
    if (count < 1) throw InvalidInput("torus_knot_cloud: count must be positive");
    Rng rng(mix_seed(seed, 0x6b6e6f74));
    GaussianCloud cloud;
    cloud.primitives.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double phi = 2.0 * std::numbers::pi * (i + 0.5) / count;
        GaussianPrimitive g;
        g.center = knot_point(phi) + 0.02 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
        const Eigen::Vector3d tangent = (knot_point(phi + 1e-3) - knot_point(phi - 1e-3)).normalized();
        g.rotation = align_x(tangent);
        g.log_scale = Eigen::Vector3d(std::log(0.09), std::log(0.05), std::log(0.05));
        g.opacity_logit = logit(0.85);
        const Eigen::Vector3d rgb = hue_to_rgb(phi / (2.0 * std::numbers::pi) + 0.05 * rng.normal());
        for (int k = 0; k < 3; ++k) g.color[k] = logit(std::clamp(rgb[k], 0.02, 0.98));
        cloud.primitives.push_back(g);
    }
    return cloud;
}

std::vector<Camera> orbit_cameras(int count, double elevation_deg, double azimuth_offset_deg,
                                  double distance, double focal, int size) {
    std::vector<Camera> cams;
    for (int k = 0; k < count; ++k) {
        const double az = (azimuth_offset_deg + 360.0 * k / count) * kDeg;
        const double el = elevation_deg * kDeg;
        const Eigen::Vector3d pos = distance * Eigen::Vector3d(std::cos(el) * std::sin(az), std::sin(el),
                                                               std::cos(el) * std::cos(az));
        cams.push_back(Camera::look_at(pos, Eigen::Vector3d::Zero(), focal, size, size));
    }
    return cams;
}

SceneView make_view(const GaussianCloud& truth, const Camera& cam) {
    SceneView v;
    v.camera = cam;
    v.image = quantized_8bit(clamped(render(truth, cam)));
    v.object_mask = alpha_mask(v.image, 0.5);
    v.image.alpha.clear();
    return v;
}

Scene synthesize_scene(const SceneConfig& cfg) {
    if (cfg.image_size < 11) throw InvalidInput("synthesize_scene: image_size must be at least 11");
    if (cfg.train_views < 2 || cfg.held_out_views < 1)
        throw InvalidInput("synthesize_scene: need at least 2 training and 1 held-out view");
    Scene scene;
    scene.truth = torus_knot_cloud(cfg.primitives, cfg.seed);
    const double focal = 1.6 * cfg.image_size;
    for (const Camera& c : orbit_cameras(cfg.train_views, cfg.train_elevation_deg, 0.0, cfg.camera_distance,
                                         focal, cfg.image_size))
        scene.train.push_back(make_view(scene.truth, c));
    const int half = (cfg.held_out_views + 1) / 2;
    const double step = 360.0 / cfg.held_out_views;
    const auto low = orbit_cameras(half, 5.0, 0.5 * step, cfg.camera_distance, focal, cfg.image_size);
    const auto high = orbit_cameras(cfg.held_out_views - half, 35.0, 1.5 * step, cfg.camera_distance, focal,
                                    cfg.image_size);
    for (std::size_t i = 0; i < low.size() || i < high.size(); ++i) {
        if (i < low.size()) scene.held_out.push_back(make_view(scene.truth, low[i]));
        if (i < high.size()) scene.held_out.push_back(make_view(scene.truth, high[i]));
    }
    return scene;
}

GaussianCloud visual_hull_init(std::span<const SceneView> views, int count, std::uint64_t seed) {
    if (views.empty()) throw InvalidInput("visual_hull_init: no views");
    if (count < 1) throw InvalidInput("visual_hull_init: count must be positive");
    Rng rng(mix_seed(seed, 0x68756c6c));
    GaussianCloud cloud;
    const long max_draws = 1000L * count;
    for (long draw = 0; draw < max_draws && static_cast<int>(cloud.count()) < count; ++draw) {
        const Eigen::Vector3d p(rng.uniform(-kHullBound, kHullBound), rng.uniform(-kHullBound, kHullBound),
                                rng.uniform(-kHullBound, kHullBound));
        Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
        bool inside = true;
        for (const SceneView& v : views) {
            const Eigen::Vector3d q = v.camera.to_camera(p);
            if (q.z() <= 0.0) {
                inside = false;
                break;
            }
            const int x = static_cast<int>(std::floor(v.camera.focal * q.x() / q.z() + 0.5 * v.camera.width));
            const int y = static_cast<int>(std::floor(v.camera.focal * q.y() / q.z() + 0.5 * v.camera.height));
            if (x < 0 || y < 0 || x >= v.camera.width || y >= v.camera.height || !v.object_mask.at(y, x)) {
                inside = false;
                break;
            }
            for (int k = 0; k < 3; ++k) rgb[k] += v.image.at(k, y, x);
        }
        if (!inside) continue;
        rgb /= static_cast<double>(views.size());
        GaussianPrimitive g;
        g.center = p;
        g.log_scale.setConstant(std::log(0.04));
        g.opacity_logit = logit(0.5);
        for (int k = 0; k < 3; ++k) g.color[k] = logit(std::clamp(rgb[k], 0.02, 0.98));
        cloud.primitives.push_back(g);
    }
    if (static_cast<int>(cloud.count()) < count)
        throw InsufficientData("visual_hull_init: only " + std::to_string(cloud.count()) + " of " +
                               std::to_string(count) + " samples landed inside the hull");
    return cloud;
}

}  // namespace wgs
