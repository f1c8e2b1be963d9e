// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wgs/camera.hpp"
#include "wgs/gaussian.hpp"
#include "wgs/image.hpp"
#include "wgs/render.hpp"

namespace wgs {

struct SceneConfig {
    int image_size = 64;
    int train_views = 4;
    int held_out_views = 16;
    int primitives = 300;
    double train_elevation_deg = 20.0;
    double camera_distance = 4.0;
    std::uint64_t seed = 0;
};

struct SceneView {
    Camera camera;
    Image image;               // 8-bit quantized
    BinaryPlane object_mask;   // rendered alpha > 0.5
};

struct Scene {
    GaussianCloud truth;
    std::vector<SceneView> train;
    std::vector<SceneView> held_out;
};

/// Colored Gaussians strung along a (2, 3) torus knot about the origin.
GaussianCloud torus_knot_cloud(int count, std::uint64_t seed);

/// `count` cameras evenly spaced in azimuth (starting at `azimuth_offset_deg`)
/// at the given elevation, all looking at the origin.
std::vector<Camera> orbit_cameras(int count, double elevation_deg, double azimuth_offset_deg,
                                  double distance, double focal, int size);

/// Training cameras on one elevation ring; held-out cameras interleaved in
/// azimuth on alternating lower and higher rings.
Scene synthesize_scene(const SceneConfig& cfg);

SceneView make_view(const GaussianCloud& truth, const Camera& cam);

/// Seeds `count` primitives uniformly inside the region that projects onto
/// the object in every view, colored by the mean observed color.
/// Throws InsufficientData if the hull is too thin to sample.
GaussianCloud visual_hull_init(std::span<const SceneView> views, int count, std::uint64_t seed);

}  // namespace wgs
