// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/train.hpp"

#include <cmath>

#include "wgs/error.hpp"
#include "wgs/random.hpp"

namespace wgs {

SplatTrainer::SplatTrainer(GaussianCloud init, int total_iterations, TrainConfig cfg)
    : cloud_(std::move(init)), cfg_(std::move(cfg)), total_(total_iterations),
      adam_(cloud_.parameter_count(), cfg_.optimizer.adam) {
    if (total_iterations < 1) throw InvalidInput("training needs at least one iteration");
    cloud_.validate();
    cfg_.loss.validate();
    params_ = cloud_.pack();
}

double SplatTrainer::step(const Camera& cam, const Image& target, const Mask* mask,
                          const std::string& view_label) {
    RenderState state;
    const Image rendered = render(cloud_, cam, cfg_.render, &state);
    LossResult loss = loss_3dgs(rendered, target, cfg_.loss, mask);
    if (!std::isfinite(loss.value))
        throw NumericalFailure("non-finite loss at iteration " + std::to_string(iteration_) +
                               " on view " + view_label);
    const auto grad = render_backward(cloud_, cam, state, loss.grad, cfg_.render);

    const double progress = total_ > 1 ? static_cast<double>(iteration_) / (total_ - 1) : 0.0;
    const double decay = std::pow(cfg_.optimizer.final_lr_ratio, std::min(progress, 1.0));
    const double center_lr = cfg_.optimizer.center_lr * decay;
    const double other_lr = cfg_.optimizer.other_lr * decay;
    adam_.step(params_, grad, [&](std::size_t i) {
        return i % kParamsPerPrimitive < kLogScaleOffset ? center_lr : other_lr;
    });
    cloud_.unpack(params_);
    cloud_.normalize_rotations();
    params_ = cloud_.pack();
    ++iteration_;
    return loss.value;
}

ViewCycler::ViewCycler(std::size_t count, std::uint64_t seed) : order_(count), seed_(seed) {
    if (count == 0) throw InvalidInput("no views to cycle through");
    for (std::size_t i = 0; i < count; ++i) order_[i] = i;
    pos_ = count;
}

std::size_t ViewCycler::next() {
    if (pos_ == order_.size()) {
        Rng rng(mix_seed(seed_, epoch_++));
        rng.shuffle(order_);
        pos_ = 0;
    }
    return order_[pos_++];
}

TrainResult train(GaussianCloud init, std::span<const TrainView> views, int iterations,
                  const TrainConfig& cfg, const MaskProvider& masks) {
    if (views.empty()) throw InvalidInput("train: no views");
    if (iterations < 1) throw InvalidInput("train: iterations must be >= 1");
    SplatTrainer trainer(std::move(init), iterations, cfg);
    ViewCycler cycler(views.size(), cfg.seed);
    TrainResult result;
    result.losses.reserve(iterations);
    for (int it = 0; it < iterations; ++it) {
        const std::size_t v = cycler.next();
        std::optional<Mask> dynamic;
        const Mask* mask = views[v].mask ? &*views[v].mask : nullptr;
        if (masks) {
            dynamic = masks(v, it);
            mask = &*dynamic;
        }
        result.losses.push_back(
            trainer.step(views[v].camera, views[v].image, mask, std::to_string(v)));
    }
    result.cloud = trainer.cloud();
    return result;
}

}  // namespace wgs
