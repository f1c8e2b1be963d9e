// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wgs/error.hpp"

namespace wgs {

void Camera::validate() const {
    if (!(focal > 0.0)) throw InvalidInput("camera focal length must be positive");
    if (height < 1 || width < 1) throw InvalidInput("camera image size must be positive");
    const double err = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
    if (!(err <= 1e-9)) throw InvalidInput("camera rotation is not orthonormal");
}

Camera Camera::look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                       double focal, int height, int width) {
    Eigen::Vector3d fwd = target - position;
    if (fwd.norm() <= 0.0) throw DegenerateGeometry("look_at: camera sits on its target");
    fwd.normalize();
    Eigen::Vector3d up(0.0, 1.0, 0.0);
    if (std::abs(fwd.dot(up)) > 1.0 - 1e-9) up = Eigen::Vector3d(0.0, 0.0, 1.0);
    const Eigen::Vector3d right = fwd.cross(up).normalized();
    const Eigen::Vector3d down = fwd.cross(right);
    Camera cam;
    cam.position = position;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = fwd.transpose();
    cam.focal = focal;
    cam.height = height;
    cam.width = width;
    return cam;
}

Eigen::Vector3d common_target(std::span<const Camera> cameras) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& cam : cameras) {
        const Eigen::Vector3d d = cam.forward();
        const Eigen::Matrix3d p = Eigen::Matrix3d::Identity() - d * d.transpose();
        a += p;
        b += p * cam.position;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
    lu.setThreshold(1e-9);
    if (cameras.size() < 2 || lu.rank() < 3)
        throw DegenerateGeometry("reference cameras do not share a common look-at target");
    return lu.solve(b);
}

std::vector<Camera> sample_novel_cameras(std::span<const Camera> reference, int count,
                                         std::uint64_t seed) {
    if (reference.size() < 2)
        throw InvalidInput("sample_novel_cameras: need at least 2 reference cameras");
    if (count < 0) throw InvalidInput("sample_novel_cameras: negative count");
    if (count == 0) return {};

    const Eigen::Vector3d center = common_target(reference);
    const std::size_t m = reference.size();
    const std::size_t arcs = m == 2 ? 1 : m;

    struct Arc {
        Eigen::Vector3d from, to;
        double r0, r1, angle;
        const Camera* base;
    };
    std::vector<Arc> arc_list;
    for (std::size_t i = 0; i < arcs; ++i) {
        const Camera& a = reference[i];
        const Camera& b = reference[(i + 1) % m];
        const Eigen::Vector3d da = a.position - center;
        const Eigen::Vector3d db = b.position - center;
        const double ra = da.norm(), rb = db.norm();
        if (ra <= 1e-12 || rb <= 1e-12)
            throw DegenerateGeometry("reference camera located at the scene center");
        const Eigen::Vector3d ua = da / ra, ub = db / rb;
        const double angle = std::acos(std::clamp(ua.dot(ub), -1.0, 1.0));
        if (angle < 1e-6 || angle > std::numbers::pi - 1e-6)
            throw DegenerateGeometry("reference cameras " + std::to_string(i) + " and " +
                                     std::to_string((i + 1) % m) +
                                     " are collinear with the scene center");
        arc_list.push_back({ua, ub, ra, rb, angle, &a});
    }

    // Sample k goes to arc (k + seed) mod arcs; samples on one arc are evenly
    // spaced strictly between the endpoints.
    const std::size_t offset = static_cast<std::size_t>(seed % arcs);
    std::vector<int> per_arc(arcs, 0);
    for (int k = 0; k < count; ++k) ++per_arc[(k + offset) % arcs];
    std::vector<int> used(arcs, 0);

    std::vector<Camera> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        const std::size_t ai = (k + offset) % arcs;
        const Arc& arc = arc_list[ai];
        const double t = static_cast<double>(++used[ai]) / (per_arc[ai] + 1);
        const double s = std::sin(arc.angle);
        const Eigen::Vector3d dir = (std::sin((1.0 - t) * arc.angle) / s) * arc.from +
                                    (std::sin(t * arc.angle) / s) * arc.to;
        const double radius = (1.0 - t) * arc.r0 + t * arc.r1;
        out.push_back(Camera::look_at(center + radius * dir.normalized(), center,
                                      arc.base->focal, arc.base->height, arc.base->width));
    }
    return out;
}

}  // namespace wgs
