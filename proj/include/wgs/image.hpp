// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wgs {

/// Floating-point raster stored channel-planar: sample (c, y, x) lives at
/// `data[(c * height + y) * width + x]`. Renders additionally carry an alpha
/// plane (accumulated coverage); other images leave `alpha` empty.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;
    std::vector<double> alpha;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0);

    std::size_t plane_size() const { return static_cast<std::size_t>(height) * width; }
    std::size_t index(int c, int y, int x) const {
        return (static_cast<std::size_t>(c) * height + y) * width + x;
    }
    double& at(int c, int y, int x) { return data[index(c, y, x)]; }
    double at(int c, int y, int x) const { return data[index(c, y, x)]; }

    std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(int c) const {
        return {data.data() + c * plane_size(), plane_size()};
    }

    bool empty() const { return data.empty(); }
    bool has_alpha() const { return !alpha.empty(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

/// Binary H×W plane. For supervision masks 1 = supervised, 0 = masked out;
/// for object masks 1 = object pixel.
struct BinaryPlane {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> values;

    BinaryPlane() = default;
    BinaryPlane(int h, int w, std::uint8_t fill = 0)
        : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

    std::uint8_t& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count() const;
};

using Mask = BinaryPlane;

/// Clamp every sample to [0, 1].
Image clamped(Image img);

/// Round every sample (and alpha) to the nearest 8-bit level v/255.
Image quantized_8bit(Image img);

/// Round every sample to single precision; used at stage boundaries so that
/// in-memory runs match runs that go through the f32 on-disk formats.
Image rounded_f32(Image img);

/// Pixels whose alpha exceeds `threshold`.
BinaryPlane alpha_mask(const Image& img, double threshold = 0.5);

}  // namespace wgs
