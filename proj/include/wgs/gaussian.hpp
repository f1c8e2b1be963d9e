// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wgs {

/// One anisotropic 3-D Gaussian. Covariance is R(q)·diag(exp(2·log_scale))·R(q)ᵀ,
/// opacity is sigmoid(opacity_logit) and color is sigmoid(color) per channel.
struct GaussianPrimitive {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
    Eigen::Vector4d rotation{1.0, 0.0, 0.0, 0.0};  // (w, x, y, z)
    double opacity_logit = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();  // logits; rendered through a sigmoid
};

/// Flat parameter layout per primitive, in declaration order.
inline constexpr std::size_t kParamsPerPrimitive = 14;
inline constexpr std::size_t kCenterOffset = 0;
inline constexpr std::size_t kLogScaleOffset = 3;
inline constexpr std::size_t kRotationOffset = 6;
inline constexpr std::size_t kOpacityOffset = 10;
inline constexpr std::size_t kColorOffset = 11;

struct GaussianCloud {
    std::vector<GaussianPrimitive> primitives;

    std::size_t count() const { return primitives.size(); }
    std::size_t parameter_count() const { return count() * kParamsPerPrimitive; }

    /// Throws InvalidInput when empty or when any parameter is non-finite.
    void validate() const;

    std::vector<double> pack() const;
    void unpack(std::span<const double> params);

    /// Renormalize every quaternion to unit length.
    void normalize_rotations();
};

/// Every parameter rounded to single precision (checkpoint precision).
GaussianCloud rounded_f32(GaussianCloud cloud);

double sigmoid(double x);
double logit(double p);

/// Rotation matrix of a unit quaternion (w, x, y, z).
Eigen::Matrix3d quaternion_to_matrix(const Eigen::Vector4d& q);

}  // namespace wgs
