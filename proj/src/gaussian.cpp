// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/gaussian.hpp"

#include <cmath>

#include "wgs/error.hpp"

namespace wgs {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

Eigen::Matrix3d quaternion_to_matrix(const Eigen::Vector4d& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

void GaussianCloud::validate() const {
    if (primitives.empty()) throw InvalidInput("gaussian cloud is empty");
    for (std::size_t i = 0; i < primitives.size(); ++i) {
        const auto& g = primitives[i];
        const bool finite = g.center.allFinite() && g.log_scale.allFinite() &&
                            g.rotation.allFinite() && std::isfinite(g.opacity_logit) &&
                            g.color.allFinite();
        if (!finite) throw InvalidInput("primitive " + std::to_string(i) + " has non-finite parameters");
        if (g.rotation.norm() <= 0.0)
            throw InvalidInput("primitive " + std::to_string(i) + " has a zero quaternion");
    }
}

std::vector<double> GaussianCloud::pack() const {
    std::vector<double> p(parameter_count());
    for (std::size_t i = 0; i < count(); ++i) {
        const auto& g = primitives[i];
        double* d = p.data() + i * kParamsPerPrimitive;
        for (int k = 0; k < 3; ++k) {
            d[kCenterOffset + k] = g.center[k];
            d[kLogScaleOffset + k] = g.log_scale[k];
            d[kColorOffset + k] = g.color[k];
        }
        for (int k = 0; k < 4; ++k) d[kRotationOffset + k] = g.rotation[k];
        d[kOpacityOffset] = g.opacity_logit;
    }
    return p;
}

void GaussianCloud::unpack(std::span<const double> params) {
    if (params.size() != parameter_count())
        throw InvalidInput("unpack: parameter vector has the wrong length");
    for (std::size_t i = 0; i < count(); ++i) {
        auto& g = primitives[i];
        const double* d = params.data() + i * kParamsPerPrimitive;
        for (int k = 0; k < 3; ++k) {
            g.center[k] = d[kCenterOffset + k];
            g.log_scale[k] = d[kLogScaleOffset + k];
            g.color[k] = d[kColorOffset + k];
        }
        for (int k = 0; k < 4; ++k) g.rotation[k] = d[kRotationOffset + k];
        g.opacity_logit = d[kOpacityOffset];
    }
}

void GaussianCloud::normalize_rotations() {
    for (auto& g : primitives) {
        const double n = g.rotation.norm();
        if (n > 0.0) g.rotation /= n;
        else g.rotation = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    }
}

GaussianCloud rounded_f32(GaussianCloud cloud) {
    auto p = cloud.pack();
    for (double& v : p) v = static_cast<double>(static_cast<float>(v));
    cloud.unpack(p);
    return cloud;
}

}  // namespace wgs
