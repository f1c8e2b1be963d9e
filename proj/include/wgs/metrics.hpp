// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wgs/image.hpp"

namespace wgs {

/// Windowed SSIM parameters on a [0, 1] dynamic range.
struct SsimConfig {
    int window = 11;
    double sigma = 1.5;
    double c1 = 1e-4;  // (0.01)^2
    double c2 = 9e-4;  // (0.03)^2
};

/// 10·log10(1/MSE), capped at 99 dB for identical inputs. When `object_mask`
/// is given only its positive pixels count.
double psnr(const Image& a, const Image& b, const BinaryPlane* object_mask = nullptr);

/// Mean SSIM over all fully-contained windows and channels.
double ssim(const Image& a, const Image& b, const SsimConfig& cfg = {});

struct SsimGradient {
    double value = 0.0;
    Image grad;  // d value / d a
};

/// SSIM together with its gradient with respect to the first argument.
SsimGradient ssim_with_gradient(const Image& a, const Image& b, const SsimConfig& cfg = {});

/// Normalized 1-D Gaussian window.
std::vector<double> gaussian_window(int size, double sigma);

struct ViewMetric {
    std::string view_id;
    double psnr = 0.0;
    double ssim = 0.0;
};

/// Evaluation summary. LPIPS is not computed and has no field.
struct MetricReport {
    double psnr = 0.0;
    double ssim = 0.0;
    std::vector<ViewMetric> per_view;
};

/// Mean of the per-view values.
MetricReport summarize(std::vector<ViewMetric> per_view);

}  // namespace wgs
