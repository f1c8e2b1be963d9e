// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wgs/error.hpp"

namespace wgs {
namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

FilterMatrices banded(int rows, int cols, const std::array<double, 2>& low,
                      const std::array<double, 2>& high) {
    if (rows < 2 || cols < 2 || rows % 2 != 0 || cols % 2 != 0)
        throw InvalidInput("filter matrices need even dimensions >= 2, got " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    FilterMatrices m;
    m.low_rows = Eigen::MatrixXd::Zero(rows / 2, rows);
    m.high_rows = Eigen::MatrixXd::Zero(rows / 2, rows);
    for (int k = 0; k < rows / 2; ++k) {
        m.low_rows(k, 2 * k) = low[0];
        m.low_rows(k, 2 * k + 1) = low[1];
        m.high_rows(k, 2 * k) = high[0];
        m.high_rows(k, 2 * k + 1) = high[1];
    }
    m.low_cols = Eigen::MatrixXd::Zero(cols, cols / 2);
    m.high_cols = Eigen::MatrixXd::Zero(cols, cols / 2);
    for (int k = 0; k < cols / 2; ++k) {
        m.low_cols(2 * k, k) = low[0];
        m.low_cols(2 * k + 1, k) = low[1];
        m.high_cols(2 * k, k) = high[0];
        m.high_cols(2 * k + 1, k) = high[1];
    }
    return m;
}

}  // namespace

WaveletFilters WaveletFilters::haar() {
    return {{kInvSqrt2, kInvSqrt2},
            {-kInvSqrt2, kInvSqrt2},
            {kInvSqrt2, kInvSqrt2},
            {kInvSqrt2, -kInvSqrt2}};
}

FilterMatrices build_analysis_matrices(int rows, int cols) {
    const auto f = WaveletFilters::haar();
    return banded(rows, cols, f.analysis_low, f.analysis_high);
}

FilterMatrices build_synthesis_matrices(int rows, int cols) {
    const auto f = WaveletFilters::haar();
    return banded(rows, cols, {f.synthesis_low[1], f.synthesis_low[0]},
                  {f.synthesis_high[1], f.synthesis_high[0]});
}

SubbandSet forward_dwt(const Image& img) {
    if (img.height < 1 || img.width < 1 || img.channels < 1 || img.empty())
        throw InvalidInput("forward_dwt: empty image");
    const int h2 = (img.height + 1) / 2;
    const int w2 = (img.width + 1) / 2;
    SubbandSet sb;
    sb.original_height = img.height;
    sb.original_width = img.width;
    sb.ll = Image(h2, w2, img.channels);
    sb.lh = Image(h2, w2, img.channels);
    sb.hl = Image(h2, w2, img.channels);
    sb.hh = Image(h2, w2, img.channels);

    // Edge-replicate padding: index 2k+1 past the border reuses the last row/col.
    const int ymax = img.height - 1;
    const int xmax = img.width - 1;
    for (int c = 0; c < img.channels; ++c) {
        for (int i = 0; i < h2; ++i) {
            const int y0 = 2 * i;
            const int y1 = std::min(2 * i + 1, ymax);
            for (int j = 0; j < w2; ++j) {
                const int x0 = 2 * j;
                const int x1 = std::min(2 * j + 1, xmax);
                const double a = img.at(c, y0, x0);
                const double b = img.at(c, y0, x1);
                const double d = img.at(c, y1, x0);
                const double e = img.at(c, y1, x1);
                // Row pass (vertical filtering) then column pass.
                const double lo0 = (a + d) * kInvSqrt2;
                const double lo1 = (b + e) * kInvSqrt2;
                const double hi0 = (d - a) * kInvSqrt2;
                const double hi1 = (e - b) * kInvSqrt2;
                sb.ll.at(c, i, j) = (lo0 + lo1) * kInvSqrt2;
                sb.hl.at(c, i, j) = (lo1 - lo0) * kInvSqrt2;
                sb.lh.at(c, i, j) = (hi0 + hi1) * kInvSqrt2;
                sb.hh.at(c, i, j) = (hi1 - hi0) * kInvSqrt2;
            }
        }
    }
    return sb;
}

Image inverse_dwt(const SubbandSet& sb) {
    const Image& ll = sb.ll;
    if (!ll.same_shape(sb.lh) || !ll.same_shape(sb.hl) || !ll.same_shape(sb.hh) || ll.empty())
        throw InvalidInput("inverse_dwt: subband shapes differ or are empty");
    const int h = sb.original_height > 0 ? sb.original_height : 2 * ll.height;
    const int w = sb.original_width > 0 ? sb.original_width : 2 * ll.width;
    if ((h + 1) / 2 != ll.height || (w + 1) / 2 != ll.width)
        throw InvalidInput("inverse_dwt: recorded size " + std::to_string(h) + "x" +
                           std::to_string(w) + " inconsistent with subband size " +
                           std::to_string(ll.height) + "x" + std::to_string(ll.width));
    Image out(h, w, ll.channels);
    for (int c = 0; c < ll.channels; ++c) {
        for (int i = 0; i < ll.height; ++i) {
            for (int j = 0; j < ll.width; ++j) {
                const double vll = sb.ll.at(c, i, j);
                const double vlh = sb.lh.at(c, i, j);
                const double vhl = sb.hl.at(c, i, j);
                const double vhh = sb.hh.at(c, i, j);
                // Undo the column pass, then the row pass.
                const double lo0 = (vll - vhl) * kInvSqrt2;
                const double lo1 = (vll + vhl) * kInvSqrt2;
                const double hi0 = (vlh - vhh) * kInvSqrt2;
                const double hi1 = (vlh + vhh) * kInvSqrt2;
                const int y0 = 2 * i, y1 = 2 * i + 1;
                const int x0 = 2 * j, x1 = 2 * j + 1;
                // Padded samples fall outside the crop and are dropped.
                out.at(c, y0, x0) = (lo0 - hi0) * kInvSqrt2;
                if (x1 < w) out.at(c, y0, x1) = (lo1 - hi1) * kInvSqrt2;
                if (y1 < h) out.at(c, y1, x0) = (lo0 + hi0) * kInvSqrt2;
                if (y1 < h && x1 < w) out.at(c, y1, x1) = (lo1 + hi1) * kInvSqrt2;
            }
        }
    }
    return out;
}

Image concat_hf(const SubbandSet& sb) {
    const int c = sb.lh.channels;
    Image hf(sb.lh.height, sb.lh.width, 3 * c);
    const std::size_t n = sb.lh.data.size();
    std::copy(sb.lh.data.begin(), sb.lh.data.end(), hf.data.begin());
    std::copy(sb.hl.data.begin(), sb.hl.data.end(), hf.data.begin() + n);
    std::copy(sb.hh.data.begin(), sb.hh.data.end(), hf.data.begin() + 2 * n);
    return hf;
}

void assign_hf(SubbandSet& sb, const Image& hf) {
    if (hf.channels % 3 != 0 || hf.channels == 0)
        throw InvalidInput("assign_hf: channel count must be a multiple of 3");
    const int c = hf.channels / 3;
    const std::size_t n = hf.plane_size() * c;
    sb.lh = Image(hf.height, hf.width, c);
    sb.hl = Image(hf.height, hf.width, c);
    sb.hh = Image(hf.height, hf.width, c);
    std::copy(hf.data.begin(), hf.data.begin() + n, sb.lh.data.begin());
    std::copy(hf.data.begin() + n, hf.data.begin() + 2 * n, sb.hl.data.begin());
    std::copy(hf.data.begin() + 2 * n, hf.data.end(), sb.hh.data.begin());
}

double subband_energy(const SubbandSet& sb) {
    double e = 0.0;
    for (const Image* img : {&sb.ll, &sb.lh, &sb.hl, &sb.hh})
        for (double v : img->data) e += v * v;
    return e;
}

SubbandSet rounded_f32(SubbandSet sb) {
    sb.ll = rounded_f32(std::move(sb.ll));
    sb.lh = rounded_f32(std::move(sb.lh));
    sb.hl = rounded_f32(std::move(sb.hl));
    sb.hh = rounded_f32(std::move(sb.hh));
    return sb;
}

}  // namespace wgs
