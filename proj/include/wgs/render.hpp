// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "wgs/camera.hpp"
#include "wgs/gaussian.hpp"
#include "wgs/image.hpp"

namespace wgs {

struct RenderOptions {
    /// Screen-space support cutoff in standard deviations (Mahalanobis radius).
    double cutoff_sigma = 3.0;
    /// Added to the projected 2-D covariance diagonal.
    double cov_epsilon = 1e-6;
    double max_alpha = 0.999;
    /// Gaussians closer than this along the camera axis are skipped.
    double near_plane = 0.01;
    int tile_size = 16;
};

/// Per-Gaussian screen-space quantities from the forward pass.
struct ProjectedGaussian {
    bool visible = false;
    Eigen::Vector3d cam_point = Eigen::Vector3d::Zero();
    Eigen::Matrix3d cam_cov = Eigen::Matrix3d::Zero();
    Eigen::Matrix<double, 2, 3> jacobian = Eigen::Matrix<double, 2, 3>::Zero();
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    double cov_a = 0, cov_b = 0, cov_c = 0;        // projected covariance [a b; b c]
    double conic_a = 0, conic_b = 0, conic_c = 0;  // its inverse
    double opacity = 0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounds
};

/// Forward-pass record reused by the backward pass.
struct RenderState {
    std::vector<ProjectedGaussian> projected;
    std::vector<int> depth_order;              // visible indices, front to back
    std::vector<std::vector<int>> tile_lists;  // per tile, front to back
    int tiles_x = 0;
    int tiles_y = 0;
};

/// Front-to-back alpha compositing of the projected Gaussians over a black
/// background. The result has 3 channels plus an alpha plane. Equal depths
/// are ordered by primitive index.
Image render(const GaussianCloud& cloud, const Camera& cam, const RenderOptions& opts = {},
             RenderState* state = nullptr);

/// Gradient of a scalar loss with respect to the packed cloud parameters,
/// given d loss / d color for every pixel of the image produced by `render`.
std::vector<double> render_backward(const GaussianCloud& cloud, const Camera& cam,
                                    const RenderState& state, const Image& grad_color,
                                    const RenderOptions& opts = {});

}  // namespace wgs
