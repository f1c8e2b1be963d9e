// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "wgs/error.hpp"
#include "wgs/parallel.hpp"

namespace wgs {
namespace {

// Accumulated screen-space gradient slots per Gaussian.
enum Slot { kU, kV, kConicA, kConicB, kConicC, kOpacity, kR, kG, kB, kSlots };

ProjectedGaussian project(const GaussianPrimitive& g, const Camera& cam,
                          const RenderOptions& opts) {
    ProjectedGaussian p;
    const Eigen::Vector3d t = cam.to_camera(g.center);
    if (t.z() < opts.near_plane) return p;

    const Eigen::Vector4d qn = g.rotation.normalized();
    const Eigen::Matrix3d rq = quaternion_to_matrix(qn);
    const Eigen::Vector3d scale = g.log_scale.array().exp();
    const Eigen::Matrix3d m = rq * scale.asDiagonal();
    const Eigen::Matrix3d cam_cov = cam.rotation * (m * m.transpose()) * cam.rotation.transpose();

    const double f = cam.focal;
    const double iz = 1.0 / t.z();
    Eigen::Matrix<double, 2, 3> j;
    j << f * iz, 0.0, -f * t.x() * iz * iz, 0.0, f * iz, -f * t.y() * iz * iz;
    const Eigen::Matrix2d cov2 = j * cam_cov * j.transpose();

    p.cam_point = t;
    p.cam_cov = cam_cov;
    p.jacobian = j;
    p.cov_a = cov2(0, 0) + opts.cov_epsilon;
    p.cov_b = 0.5 * (cov2(0, 1) + cov2(1, 0));
    p.cov_c = cov2(1, 1) + opts.cov_epsilon;
    const double det = p.cov_a * p.cov_c - p.cov_b * p.cov_b;
    if (!(det > 0.0)) return p;
    p.conic_a = p.cov_c / det;
    p.conic_b = -p.cov_b / det;
    p.conic_c = p.cov_a / det;

    p.mean = {f * t.x() * iz + 0.5 * cam.width, f * t.y() * iz + 0.5 * cam.height};
    const double half = 0.5 * (p.cov_a + p.cov_c);
    const double lambda_max =
        half + std::sqrt(std::max(0.0, 0.25 * (p.cov_a - p.cov_c) * (p.cov_a - p.cov_c) +
                                           p.cov_b * p.cov_b));
    const double r = opts.cutoff_sigma * std::sqrt(lambda_max);
    p.x0 = std::max(0, static_cast<int>(std::ceil(p.mean.x() - r - 0.5)));
    p.x1 = std::min(cam.width - 1, static_cast<int>(std::floor(p.mean.x() + r - 0.5)));
    p.y0 = std::max(0, static_cast<int>(std::ceil(p.mean.y() - r - 0.5)));
    p.y1 = std::min(cam.height - 1, static_cast<int>(std::floor(p.mean.y() + r - 0.5)));
    if (p.x0 > p.x1 || p.y0 > p.y1) return p;

    p.opacity = sigmoid(g.opacity_logit);
    for (int k = 0; k < 3; ++k) p.color[k] = sigmoid(g.color[k]);
    p.visible = true;
    return p;
}

struct Contribution {
    int id;
    double alpha;
    double gauss;
    double transmittance;  // before this Gaussian
    bool clamped;
    double dx, dy;
};

// Composites one pixel; fills `trace` with the contributing Gaussians when given.
void shade_pixel(const RenderState& st, const std::vector<int>& list, int x, int y,
                 const RenderOptions& opts, std::array<double, 3>& color, double& alpha,
                 std::vector<Contribution>* trace) {
    const double px = x + 0.5, py = y + 0.5;
    const double cutoff2 = opts.cutoff_sigma * opts.cutoff_sigma;
    double t = 1.0;
    color = {0.0, 0.0, 0.0};
    for (int id : list) {
        const ProjectedGaussian& p = st.projected[id];
        if (x < p.x0 || x > p.x1 || y < p.y0 || y > p.y1) continue;
        const double dx = px - p.mean.x();
        const double dy = py - p.mean.y();
        const double m = p.conic_a * dx * dx + 2.0 * p.conic_b * dx * dy + p.conic_c * dy * dy;
        if (m > cutoff2) continue;
        const double gauss = std::exp(-0.5 * m);
        double a = p.opacity * gauss;
        const bool clamped = a > opts.max_alpha;
        if (clamped) a = opts.max_alpha;
        if (trace) trace->push_back({id, a, gauss, t, clamped, dx, dy});
        for (int k = 0; k < 3; ++k) color[k] += p.color[k] * a * t;
        t *= 1.0 - a;
    }
    alpha = 1.0 - t;
}

}  // namespace

Image render(const GaussianCloud& cloud, const Camera& cam, const RenderOptions& opts,
             RenderState* state) {
    cloud.validate();
    cam.validate();
    RenderState local;
    RenderState& st = state ? *state : local;
    const std::size_t n = cloud.count();
    st.projected.assign(n, ProjectedGaussian{});
    parallel_for(n, [&](std::size_t i) { st.projected[i] = project(cloud.primitives[i], cam, opts); });

    st.depth_order.clear();
    for (std::size_t i = 0; i < n; ++i)
        if (st.projected[i].visible) st.depth_order.push_back(static_cast<int>(i));
    std::stable_sort(st.depth_order.begin(), st.depth_order.end(), [&](int a, int b) {
        return st.projected[a].cam_point.z() < st.projected[b].cam_point.z();
    });

    const int ts = opts.tile_size;
    st.tiles_x = (cam.width + ts - 1) / ts;
    st.tiles_y = (cam.height + ts - 1) / ts;
    st.tile_lists.assign(static_cast<std::size_t>(st.tiles_x) * st.tiles_y, {});
    for (int id : st.depth_order) {
        const auto& p = st.projected[id];
        for (int ty = p.y0 / ts; ty <= p.y1 / ts; ++ty)
            for (int tx = p.x0 / ts; tx <= p.x1 / ts; ++tx)
                st.tile_lists[static_cast<std::size_t>(ty) * st.tiles_x + tx].push_back(id);
    }

    Image out(cam.height, cam.width, 3);
    out.alpha.assign(out.plane_size(), 0.0);
    parallel_for(st.tile_lists.size(), [&](std::size_t tile) {
        const int tx = static_cast<int>(tile) % st.tiles_x;
        const int ty = static_cast<int>(tile) / st.tiles_x;
        const auto& list = st.tile_lists[tile];
        for (int y = ty * ts; y < std::min(cam.height, (ty + 1) * ts); ++y)
            for (int x = tx * ts; x < std::min(cam.width, (tx + 1) * ts); ++x) {
                std::array<double, 3> c;
                double a;
                shade_pixel(st, list, x, y, opts, c, a, nullptr);
                for (int k = 0; k < 3; ++k) out.at(k, y, x) = c[k];
                out.alpha[static_cast<std::size_t>(y) * cam.width + x] = a;
            }
    });
    return out;
}

std::vector<double> render_backward(const GaussianCloud& cloud, const Camera& cam,
                                    const RenderState& st, const Image& grad_color,
                                    const RenderOptions& opts) {
    if (grad_color.height != cam.height || grad_color.width != cam.width ||
        grad_color.channels != 3)
        throw InvalidInput("render_backward: gradient image does not match the camera");
    const std::size_t n = cloud.count();
    if (st.projected.size() != n) throw InvalidInput("render_backward: stale render state");
    const int ts = opts.tile_size;

    // Screen-space gradients per tile, reduced in tile order afterwards so the
    // sum does not depend on scheduling.
    std::vector<std::vector<double>> tile_grads(st.tile_lists.size());
    parallel_for(st.tile_lists.size(), [&](std::size_t tile) {
        const auto& list = st.tile_lists[tile];
        auto& acc = tile_grads[tile];
        acc.assign(list.size() * kSlots, 0.0);
        if (list.empty()) return;
        std::vector<int> local(n, -1);
        for (std::size_t j = 0; j < list.size(); ++j) local[list[j]] = static_cast<int>(j);

        const int tx = static_cast<int>(tile) % st.tiles_x;
        const int ty = static_cast<int>(tile) / st.tiles_x;
        std::vector<Contribution> trace;
        for (int y = ty * ts; y < std::min(cam.height, (ty + 1) * ts); ++y)
            for (int x = tx * ts; x < std::min(cam.width, (tx + 1) * ts); ++x) {
                std::array<double, 3> gc;
                bool any = false;
                for (int k = 0; k < 3; ++k) {
                    gc[k] = grad_color.at(k, y, x);
                    any = any || gc[k] != 0.0;
                }
                if (!any) continue;
                trace.clear();
                std::array<double, 3> color;
                double alpha;
                shade_pixel(st, list, x, y, opts, color, alpha, &trace);

                // Walk back to front; `behind` holds the color composited
                // behind the current Gaussian (already attenuated by it).
                std::array<double, 3> behind = {0.0, 0.0, 0.0};
                for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
                    const ProjectedGaussian& p = st.projected[it->id];
                    double* g = acc.data() + static_cast<std::size_t>(local[it->id]) * kSlots;
                    const double w = it->alpha * it->transmittance;
                    double d_alpha = 0.0;
                    for (int k = 0; k < 3; ++k) {
                        g[kR + k] += w * gc[k];
                        d_alpha += gc[k] * (p.color[k] * it->transmittance -
                                            behind[k] / (1.0 - it->alpha));
                        behind[k] += p.color[k] * w;
                    }
                    if (it->clamped) continue;
                    g[kOpacity] += it->gauss * d_alpha;
                    const double d_m = -0.5 * p.opacity * it->gauss * d_alpha;
                    const double dx = it->dx, dy = it->dy;
                    g[kU] += d_m * -2.0 * (p.conic_a * dx + p.conic_b * dy);
                    g[kV] += d_m * -2.0 * (p.conic_b * dx + p.conic_c * dy);
                    g[kConicA] += d_m * dx * dx;
                    g[kConicB] += d_m * 2.0 * dx * dy;
                    g[kConicC] += d_m * dy * dy;
                }
            }
    });

    std::vector<double> screen(n * kSlots, 0.0);
    for (std::size_t tile = 0; tile < st.tile_lists.size(); ++tile) {
        const auto& list = st.tile_lists[tile];
        for (std::size_t j = 0; j < list.size(); ++j)
            for (int s = 0; s < kSlots; ++s)
                screen[static_cast<std::size_t>(list[j]) * kSlots + s] += tile_grads[tile][j * kSlots + s];
    }

    std::vector<double> grad(cloud.parameter_count(), 0.0);
    parallel_for(n, [&](std::size_t i) {
        const ProjectedGaussian& p = st.projected[i];
        if (!p.visible) return;
        const double* s = screen.data() + i * kSlots;
        const GaussianPrimitive& prim = cloud.primitives[i];
        double* out = grad.data() + i * kParamsPerPrimitive;

        for (int k = 0; k < 3; ++k) out[kColorOffset + k] = s[kR + k] * p.color[k] * (1.0 - p.color[k]);
        out[kOpacityOffset] = s[kOpacity] * p.opacity * (1.0 - p.opacity);

        // Conic -> projected covariance.
        const double a = p.cov_a, b = p.cov_b, c = p.cov_c;
        const double det = a * c - b * b;
        const double id2 = 1.0 / (det * det);
        const double ga = (s[kConicA] * -c * c + s[kConicB] * b * c + s[kConicC] * -b * b) * id2;
        const double gb = s[kConicA] * 2.0 * b * c * id2 +
                          s[kConicB] * (-1.0 / det - 2.0 * b * b * id2) +
                          s[kConicC] * 2.0 * a * b * id2;
        const double gcv = (s[kConicA] * -b * b + s[kConicB] * a * b + s[kConicC] * -a * a) * id2;
        Eigen::Matrix2d g2;
        g2 << ga, 0.5 * gb, 0.5 * gb, gcv;

        const Eigen::Matrix<double, 2, 3>& j = p.jacobian;
        const Eigen::Matrix3d g_cam_cov = j.transpose() * g2 * j;
        const Eigen::Matrix<double, 2, 3> g_j = 2.0 * g2 * j * p.cam_cov;

        // Camera point from the mean and the Jacobian.
        const double f = cam.focal;
        const Eigen::Vector3d& t = p.cam_point;
        const double iz = 1.0 / t.z(), iz2 = iz * iz, iz3 = iz2 * iz;
        Eigen::Vector3d g_t;
        g_t.x() = s[kU] * f * iz + g_j(0, 2) * -f * iz2;
        g_t.y() = s[kV] * f * iz + g_j(1, 2) * -f * iz2;
        g_t.z() = s[kU] * -f * t.x() * iz2 + s[kV] * -f * t.y() * iz2 + g_j(0, 0) * -f * iz2 +
                  g_j(1, 1) * -f * iz2 + g_j(0, 2) * 2.0 * f * t.x() * iz3 +
                  g_j(1, 2) * 2.0 * f * t.y() * iz3;
        const Eigen::Vector3d g_center = cam.rotation.transpose() * g_t;
        for (int k = 0; k < 3; ++k) out[kCenterOffset + k] = g_center[k];

        // World covariance -> scale and rotation.
        const Eigen::Matrix3d g_sigma = cam.rotation.transpose() * g_cam_cov * cam.rotation;
        const double qnorm = prim.rotation.norm();
        const Eigen::Vector4d qn = prim.rotation / qnorm;
        const Eigen::Matrix3d rq = quaternion_to_matrix(qn);
        const Eigen::Vector3d scale = prim.log_scale.array().exp();
        const Eigen::Matrix3d m = rq * scale.asDiagonal();
        const Eigen::Matrix3d g_m = 2.0 * g_sigma * m;
        for (int k = 0; k < 3; ++k)
            out[kLogScaleOffset + k] = g_m.col(k).dot(rq.col(k)) * scale[k];
        const Eigen::Matrix3d g_r = g_m * scale.asDiagonal();

        const double w = qn[0], x = qn[1], y = qn[2], z = qn[3];
        Eigen::Matrix3d dw, dx, dy, dz;
        dw << 0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0;
        dx << 0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x;
        dy << -4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y;
        dz << -4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0;
        const Eigen::Vector4d g_qn(g_r.cwiseProduct(dw).sum(), g_r.cwiseProduct(dx).sum(),
                                   g_r.cwiseProduct(dy).sum(), g_r.cwiseProduct(dz).sum());
        const Eigen::Vector4d g_q = (g_qn - qn * qn.dot(g_qn)) / qnorm;
        for (int k = 0; k < 4; ++k) out[kRotationOffset + k] = g_q[k];
    });
    return grad;
}

}  // namespace wgs
