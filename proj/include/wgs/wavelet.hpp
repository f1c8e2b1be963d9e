// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include <Eigen/Dense>

#include "wgs/image.hpp"

namespace wgs {

/// Two-tap Haar filter bank. Analysis taps are listed in the order they are
/// laid along a matrix row; synthesis taps are in convolution order, so the
/// corresponding synthesis matrix band holds them reversed.
struct WaveletFilters {
    std::array<double, 2> analysis_low;
    std::array<double, 2> analysis_high;
    std::array<double, 2> synthesis_low;
    std::array<double, 2> synthesis_high;

    static WaveletFilters haar();
};

/// Single-level decomposition. Subbands reuse `Image`; their samples are not
/// restricted to [0, 1].
struct SubbandSet {
    Image ll;
    Image lh;
    Image hl;
    Image hh;
    int original_height = 0;
    int original_width = 0;
};

/// Separable Haar analysis. Odd dimensions are edge-replicate padded to even
/// and the source size is recorded for exact inversion. Throws InvalidInput
/// on an empty image.
SubbandSet forward_dwt(const Image& img);

/// Haar synthesis, cropped back to the recorded original size.
Image inverse_dwt(const SubbandSet& sb);

/// Dense banded filter matrices. `low_rows`/`high_rows` (rows/2 × rows) act on
/// the left, `low_cols`/`high_cols` (cols × cols/2) on the right, so that
/// LL = low_rows · X · low_cols, LH = high_rows · X · low_cols, etc.
struct FilterMatrices {
    Eigen::MatrixXd low_rows;
    Eigen::MatrixXd high_rows;
    Eigen::MatrixXd low_cols;
    Eigen::MatrixXd high_cols;
};

/// Analysis matrices for an even-sized rows × cols image.
FilterMatrices build_analysis_matrices(int rows, int cols);

/// Synthesis matrices, same shapes; reconstruction is
/// X = L̃ᵀ·LL·L̃ᵀ + ... with the transposes placed as in the inverse transform.
FilterMatrices build_synthesis_matrices(int rows, int cols);

/// Concatenate LH, HL, HH (each `c` channels) into one 3c-channel image.
Image concat_hf(const SubbandSet& sb);

/// Split a 3c-channel image produced by concat_hf back into `sb`.
void assign_hf(SubbandSet& sb, const Image& hf);

/// Sum of squared samples across all four subbands.
double subband_energy(const SubbandSet& sb);

SubbandSet rounded_f32(SubbandSet sb);

}  // namespace wgs
