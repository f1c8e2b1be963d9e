// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wgs/image.hpp"
#include "wgs/metrics.hpp"

namespace wgs {

/// (1 − lambda)·L1 + lambda·D-SSIM with D-SSIM = (1 − SSIM)/2.
struct LossConfig {
    double lambda = 0.2;
    SsimConfig ssim;

    void validate() const;
};

struct LossResult {
    double value = 0.0;
    double l1 = 0.0;
    double ssim = 1.0;
    Image grad;  // d value / d rendered
};

/// Photometric loss against `gt`. With a mask (1 = supervised) both terms are
/// restricted to supervised pixels: L1 averages over them and SSIM compares
/// the masked images, so masked pixels carry zero loss and zero gradient.
LossResult loss_3dgs(const Image& rendered, const Image& gt, const LossConfig& cfg,
                     const Mask* mask = nullptr);

}  // namespace wgs
