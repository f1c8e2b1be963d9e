// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wgs/image.hpp"

namespace wgs {

/// One drifting rectangle. Coordinates are normalized to the object's bounding
/// box; the center at iteration t is
/// base_center + drift_amplitude ⊙ sin(drift_angular_frequency · t + drift_phase).
struct MaskRegion {
    Eigen::Vector2d base_center = Eigen::Vector2d::Zero();
    Eigen::Vector2d half_extent = Eigen::Vector2d::Zero();
    Eigen::Vector2d drift_amplitude = Eigen::Vector2d::Zero();
    Eigen::Vector2d drift_angular_frequency = Eigen::Vector2d::Zero();  // rad / iteration
    Eigen::Vector2d drift_phase = Eigen::Vector2d::Zero();

    Eigen::Vector2d center_at(double t) const;
};

struct MaskSpec {
    std::vector<MaskRegion> regions;
    double target_coverage = 0.5;
    std::uint64_t seed = 0;
    std::size_t view_index = 0;

    void validate() const;
};

/// Deterministic per-view region layout derived from (global_seed, view_index).
MaskSpec spec_for_view(std::uint64_t global_seed, std::size_t view_index, int n_regions,
                       double coverage);

/// Masked object fraction tolerance enforced by rasterize_mask.
inline constexpr double kCoverageTolerance = 0.02;

struct MaskRaster {
    Mask mask;              // 1 = supervised, 0 = masked
    double scale = 1.0;     // extent multiplier chosen by the bisection
    double fraction = 0.0;  // masked share of object pixels
};

/// Rasterizes the drifting regions at iteration `t`, intersected with the
/// object, with extents rescaled so the masked object fraction is within
/// kCoverageTolerance of the target. Throws CoverageInfeasible when no scale
/// reaches the tolerance and InvalidInput for an empty object mask.
MaskRaster rasterize_mask_detailed(const MaskSpec& spec, double t, const BinaryPlane& object_mask);

Mask rasterize_mask(const MaskSpec& spec, double t, const BinaryPlane& object_mask);

/// Fraction of object pixels whose mask value is 0.
double masked_fraction(const Mask& mask, const BinaryPlane& object_mask);

struct LooSplit {
    std::vector<std::size_t> train;
    std::size_t held_out = 0;
};

/// The N leave-one-out splits of views 0..N-1. Throws InvalidInput for N < 2.
std::vector<LooSplit> loo_partitions(std::size_t view_count);

/// Flat `key = value` text block describing the spec.
std::string to_key_values(const MaskSpec& spec);

}  // namespace wgs
