// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wgs/adam.hpp"
#include "wgs/camera.hpp"
#include "wgs/gaussian.hpp"
#include "wgs/image.hpp"
#include "wgs/loss.hpp"
#include "wgs/render.hpp"

namespace wgs {

struct SplatOptimizerConfig {
    double center_lr = 1e-2;
    double other_lr = 5e-3;
    /// Learning rates decay exponentially to this fraction at the last step.
    double final_lr_ratio = 0.1;
    AdamConfig adam{0.9, 0.999, 1e-15};
};

struct TrainConfig {
    LossConfig loss;
    SplatOptimizerConfig optimizer;
    RenderOptions render;
    std::uint64_t seed = 0;
};

/// A supervised view: camera, target image and an optional fixed mask.
struct TrainView {
    Camera camera;
    Image image;
    std::optional<Mask> mask;
};

/// Mask for (view index, iteration); overrides fixed per-view masks.
using MaskProvider = std::function<Mask(std::size_t view, int iteration)>;

/// Owns a cloud and its Adam state; one call to step() is one iteration.
class SplatTrainer {
public:
    SplatTrainer(GaussianCloud init, int total_iterations, TrainConfig cfg);

    /// One gradient step against `target`. Returns the loss before the step.
    /// Throws NumericalFailure on a non-finite loss, naming `view_label`.
    double step(const Camera& cam, const Image& target, const Mask* mask,
                const std::string& view_label);

    const GaussianCloud& cloud() const { return cloud_; }
    int iteration() const { return iteration_; }

private:
    GaussianCloud cloud_;
    TrainConfig cfg_;
    int total_;
    int iteration_ = 0;
    Adam adam_;
    std::vector<double> params_;
};

/// Visits views in a fresh seeded permutation every epoch.
class ViewCycler {
public:
    ViewCycler(std::size_t count, std::uint64_t seed);
    std::size_t next();

private:
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    std::uint64_t seed_;
    std::uint64_t epoch_ = 0;
};

struct TrainResult {
    GaussianCloud cloud;
    std::vector<double> losses;  // one per iteration
};

/// Adam over all primitive parameters for `iterations` steps, one view per step.
TrainResult train(GaussianCloud init, std::span<const TrainView> views, int iterations,
                  const TrainConfig& cfg, const MaskProvider& masks = {});

}  // namespace wgs
