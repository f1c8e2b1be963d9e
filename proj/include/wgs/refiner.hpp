// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wgs/image.hpp"
#include "wgs/repair.hpp"

namespace wgs {

/// Residual 3-layer convolutional net over concatenated HF subbands:
/// 9 → 16 → 16 → 9 channels, 3×3 kernels with zero padding, leaky ReLU
/// (slope 0.01) after the first two layers, output added to the input.
/// Parameters are stored flat in layer order; each layer is its weights
/// indexed [out][in][ky][kx] followed by its biases.
class RefinerNet {
public:
    static constexpr int kChannels = 9;
    static constexpr int kHidden = 16;
    static constexpr double kLeak = 0.01;

    struct Layer {
        int in = 0;
        int out = 0;
    };
    static constexpr std::array<Layer, 3> kLayers{{{kChannels, kHidden}, {kHidden, kHidden}, {kHidden, kChannels}}};

    /// First two layers He-normal from `seed`; last layer zero, so the net
    /// starts as the identity.
    explicit RefinerNet(std::uint64_t seed = 0);

    static std::size_t parameter_count();
    static std::size_t layer_offset(int layer);

    const std::vector<double>& parameters() const { return params_; }
    void set_parameters(std::vector<double> params);

    Image forward(const Image& input) const;

    /// Mean squared error of forward(input) against `target` and its gradient
    /// with respect to every parameter.
    double loss_and_gradient(const Image& input, const Image& target, std::vector<double>* grad) const;

private:
    std::vector<double> params_;
};

struct RefinerTrainConfig {
    double learning_rate = 1e-3;
    double val_fraction = 0.25;
    int patience = 20;
    int max_epochs = 500;
    std::uint64_t seed = 0;
};

struct RefinerTrainReport {
    double initial_val_loss = 0.0;  // epoch 0, before any update
    double best_val_loss = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
    std::vector<double> val_losses;  // index = epoch
};

/// Adam on per-sample MSE over the leading samples; the trailing
/// val_fraction (at least one sample) is held out. Stops after `patience`
/// epochs without a validation improvement and restores the best checkpoint.
/// Throws InsufficientData below 4 samples and InvalidInput for LL data.
RefinerNet train_refiner(RefinerNet net, const SubbandPairDataset& data, const RefinerTrainConfig& cfg,
                         RefinerTrainReport* report = nullptr);

RefinerNet rounded_f32(RefinerNet net);

/// Forward pass; throws InvalidInput unless the input has 9 channels.
Image repair_hf(const RefinerNet& net, const Image& corrupted_hf);

}  // namespace wgs
