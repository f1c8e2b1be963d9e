// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wgs {

/// Pinhole camera. `rotation` maps world directions to camera axes
/// (x right, y down, z forward); the principal point is the image center and
/// pixel (x, y) has its center at (x + 0.5, y + 0.5).
struct Camera {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    double focal = 1.0;
    int height = 0;
    int width = 0;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
        return rotation * (world - position);
    }
    Eigen::Vector3d forward() const { return rotation.row(2).transpose(); }

    /// Throws InvalidInput unless the rotation is orthonormal and focal > 0.
    void validate() const;

    /// Camera at `position` looking at `target` with world +y as up.
    static Camera look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                          double focal, int height, int width);
};

/// Least-squares intersection of the cameras' optical axes.
Eigen::Vector3d common_target(std::span<const Camera> cameras);

/// `count` cameras on great-circle arcs between consecutive reference cameras
/// (cyclic when there are more than two), at linearly interpolated radii, all
/// looking at the shared target. `seed` rotates which arc receives the first
/// sample. Throws DegenerateGeometry when an arc's endpoints are collinear
/// with the target.
std::vector<Camera> sample_novel_cameras(std::span<const Camera> reference, int count,
                                         std::uint64_t seed = 0);

}  // namespace wgs
