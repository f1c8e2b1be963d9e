// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "wgs/image.hpp"
#include "wgs/wavelet.hpp"

namespace wgs {

enum class RepairKind { identity, ll_inpaint, hf_refiner };

std::string to_string(RepairKind kind);

struct InpaintConfig {
    double confidence_threshold = 0.5;
    double tolerance = 1e-5;
    int max_iterations = 2000;
    /// Leave low-confidence components that touch the frame edge untouched;
    /// those are usually empty background rather than holes in the object.
    bool keep_border_connected = false;
};

/// LL-side repairer. The HF side is a RefinerNet (see refiner.hpp).
struct RepairModel {
    RepairKind kind = RepairKind::identity;
    InpaintConfig inpaint;
};

struct LlRepairResult {
    Image image;
    bool fallback = false;  // every pixel was low-confidence; global mean fill
    int iterations = 0;
};

/// Repairs an LL plane set. `confidence` is a single-channel plane of the LL
/// size; when null the image's own alpha plane is used if present, otherwise
/// every pixel counts as confident. Pixels at or above the threshold are never
/// modified; the rest are filled by Gauss-Seidel sweeps of the 4-neighbour
/// average until the largest update falls below the tolerance.
LlRepairResult repair_ll(const RepairModel& model, const Image& corrupted_ll,
                         const Image* confidence = nullptr);

/// 2×2 box average of a render's alpha plane, edge-replicated for odd sizes,
/// so the result matches the LL subband size.
Image downsample_confidence(const Image& render);

/// Low-confidence pixels that the inpainter would replace.
BinaryPlane repair_region(const Image& confidence, const InpaintConfig& cfg);

enum class DatasetDomain { ll, hf };

struct SubbandPair {
    Image corrupted;
    Image clean;
    Image confidence;  // LL-domain only; may be empty
};

struct SubbandPairDataset {
    DatasetDomain domain = DatasetDomain::ll;
    std::vector<SubbandPair> samples;

    /// Throws InvalidInput on mismatched pair shapes or wrong channel counts
    /// (LL samples: 3 channels, HF samples: 9).
    void validate() const;
};

/// Inverse transform of repaired planes, clamped to [0, 1].
Image assemble_pseudo_gt(const Image& repaired_ll, const Image& repaired_hf, int original_height,
                         int original_width);

}  // namespace wgs
