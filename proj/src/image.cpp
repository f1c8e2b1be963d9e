// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wgs {

Image::Image(int h, int w, int c, double fill)
    : height(h), width(w), channels(c),
      data(static_cast<std::size_t>(h) * w * c, fill) {}

std::size_t BinaryPlane::count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                  [](std::uint8_t v) { return v != 0; }));
}

Image clamped(Image img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
    return img;
}

Image quantized_8bit(Image img) {
    auto q = [](double v) { return std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0; };
    for (double& v : img.data) v = q(v);
    for (double& v : img.alpha) v = q(v);
    return img;
}

Image rounded_f32(Image img) {
    for (double& v : img.data) v = static_cast<double>(static_cast<float>(v));
    for (double& v : img.alpha) v = static_cast<double>(static_cast<float>(v));
    return img;
}

BinaryPlane alpha_mask(const Image& img, double threshold) {
    BinaryPlane m(img.height, img.width, 0);
    if (!img.has_alpha()) {
        std::fill(m.values.begin(), m.values.end(), std::uint8_t{1});
        return m;
    }
    for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = img.alpha[i] > threshold;
    return m;
}

}  // namespace wgs
