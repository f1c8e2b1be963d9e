// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/loss.hpp"

#include <cmath>

#include "wgs/error.hpp"

namespace wgs {

void LossConfig::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw InvalidInput("loss lambda must lie in [0, 1]");
}

LossResult loss_3dgs(const Image& rendered, const Image& gt, const LossConfig& cfg,
                     const Mask* mask) {
    cfg.validate();
    if (!rendered.same_shape(gt))
        throw InvalidInput("loss_3dgs: rendered " + std::to_string(rendered.height) + "x" +
                           std::to_string(rendered.width) + "x" +
                           std::to_string(rendered.channels) + " vs ground truth " +
                           std::to_string(gt.height) + "x" + std::to_string(gt.width) + "x" +
                           std::to_string(gt.channels));
    if (mask && (mask->height != gt.height || mask->width != gt.width))
        throw InvalidInput("loss_3dgs: mask size does not match the images");

    const std::size_t n = gt.plane_size();
    LossResult out;
    out.grad = Image(gt.height, gt.width, gt.channels);

    std::size_t supervised = n;
    if (mask) supervised = mask->count();
    if (supervised == 0) {
        out.ssim = 1.0;
        return out;
    }
    const double l1_norm = 1.0 / (static_cast<double>(supervised) * gt.channels);
    double l1 = 0.0;
    for (int c = 0; c < gt.channels; ++c)
        for (std::size_t i = 0; i < n; ++i) {
            if (mask && !mask->values[i]) continue;
            const double d = rendered.data[c * n + i] - gt.data[c * n + i];
            l1 += std::abs(d);
            out.grad.data[c * n + i] = (1.0 - cfg.lambda) * l1_norm * ((d > 0) - (d < 0));
        }
    out.l1 = l1 * l1_norm;
    out.value = (1.0 - cfg.lambda) * out.l1;

    if (cfg.lambda > 0.0) {
        SsimGradient s;
        if (mask) {
            Image r = rendered, g = gt;
            for (int c = 0; c < gt.channels; ++c)
                for (std::size_t i = 0; i < n; ++i)
                    if (!mask->values[i]) {
                        r.data[c * n + i] = 0.0;
                        g.data[c * n + i] = 0.0;
                    }
            s = ssim_with_gradient(r, g, cfg.ssim);
        } else {
            s = ssim_with_gradient(rendered, gt, cfg.ssim);
        }
        out.ssim = s.value;
        out.value += cfg.lambda * 0.5 * (1.0 - s.value);
        for (int c = 0; c < gt.channels; ++c)
            for (std::size_t i = 0; i < n; ++i) {
                if (mask && !mask->values[i]) continue;
                out.grad.data[c * n + i] += -0.5 * cfg.lambda * s.grad.data[c * n + i];
            }
    }
    return out;
}

}  // namespace wgs
