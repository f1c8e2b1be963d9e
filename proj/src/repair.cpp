// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/repair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "wgs/error.hpp"

namespace wgs {

std::string to_string(RepairKind kind) {
    switch (kind) {
        case RepairKind::identity: return "identity";
        case RepairKind::ll_inpaint: return "ll-inpaint";
        case RepairKind::hf_refiner: return "hf-refiner";
    }
    return "unknown";
}

BinaryPlane repair_region(const Image& confidence, const InpaintConfig& cfg) {
    const int h = confidence.height, w = confidence.width;
    BinaryPlane low(h, w, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) low.at(y, x) = confidence.at(0, y, x) < cfg.confidence_threshold;
    if (!cfg.keep_border_connected) return low;

    // Flood from the frame edge and drop everything reached.
    std::queue<std::pair<int, int>> frontier;
    auto seed = [&](int y, int x) {
        if (low.at(y, x)) {
            low.at(y, x) = 0;
            frontier.emplace(y, x);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(0, x);
        seed(h - 1, x);
    }
    for (int y = 0; y < h; ++y) {
        seed(y, 0);
        seed(y, w - 1);
    }
    while (!frontier.empty()) {
        auto [y, x] = frontier.front();
        frontier.pop();
        if (y > 0) seed(y - 1, x);
        if (y + 1 < h) seed(y + 1, x);
        if (x > 0) seed(y, x - 1);
        if (x + 1 < w) seed(y, x + 1);
    }
    return low;
}

LlRepairResult repair_ll(const RepairModel& model, const Image& corrupted_ll,
                         const Image* confidence) {
    if (corrupted_ll.empty()) throw InvalidInput("repair_ll: empty input");
    LlRepairResult out;
    out.image = corrupted_ll;
    if (model.kind == RepairKind::identity) return out;
    if (model.kind != RepairKind::ll_inpaint)
        throw InvalidInput("repair_ll: model kind " + to_string(model.kind) + " is not an LL repairer");

    const int h = corrupted_ll.height, w = corrupted_ll.width;
    Image conf;
    if (confidence) {
        conf = *confidence;
    } else if (corrupted_ll.has_alpha()) {
        conf = Image(h, w, 1);
        conf.data = corrupted_ll.alpha;
    } else {
        return out;
    }
    if (conf.height != h || conf.width != w || conf.channels != 1)
        throw InvalidInput("repair_ll: confidence plane must be single-channel and match the LL size");

    const BinaryPlane hole = repair_region(conf, model.inpaint);
    const std::size_t n_hole = hole.count();
    if (n_hole == 0) return out;

    Image& img = out.image;
    if (n_hole == hole.values.size()) {
        for (int c = 0; c < img.channels; ++c) {
            auto p = img.plane(c);
            double mean = 0.0;
            for (double v : p) mean += v;
            mean /= static_cast<double>(p.size());
            std::fill(p.begin(), p.end(), mean);
        }
        out.fallback = true;
        return out;
    }

    // Pixel lists keep the sweep order fixed (row-major).
    std::vector<int> holes;
    std::vector<int> boundary;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int i = y * w + x;
            if (hole.values[i]) {
                holes.push_back(i);
                continue;
            }
            const bool touches = (y > 0 && hole.values[i - w]) || (y + 1 < h && hole.values[i + w]) ||
                                 (x > 0 && hole.values[i - 1]) || (x + 1 < w && hole.values[i + 1]);
            if (touches) boundary.push_back(i);
        }

    int iterations = 0;
    for (int c = 0; c < img.channels; ++c) {
        auto p = img.plane(c);
        // Start from the boundary mean so every iterate stays within the
        // boundary range.
        double start = 0.0;
        for (int i : boundary) start += p[i];
        start /= static_cast<double>(boundary.size());
        for (int i : holes) p[i] = start;

        int it = 0;
        for (; it < model.inpaint.max_iterations; ++it) {
            double max_change = 0.0;
            for (int i : holes) {
                const int y = i / w, x = i % w;
                double sum = 0.0;
                int n = 0;
                if (y > 0) sum += p[i - w], ++n;
                if (y + 1 < h) sum += p[i + w], ++n;
                if (x > 0) sum += p[i - 1], ++n;
                if (x + 1 < w) sum += p[i + 1], ++n;
                const double v = sum / n;
                max_change = std::max(max_change, std::abs(v - p[i]));
                p[i] = v;
            }
            if (max_change < model.inpaint.tolerance) {
                ++it;
                break;
            }
        }
        iterations = std::max(iterations, it);
    }
    out.iterations = iterations;
    return out;
}

Image downsample_confidence(const Image& render) {
    if (!render.has_alpha()) throw InvalidInput("downsample_confidence: render has no alpha plane");
    const int h = render.height, w = render.width;
    const int lh = (h + 1) / 2, lw = (w + 1) / 2;
    Image out(lh, lw, 1);
    auto a = [&](int y, int x) {
        y = std::min(y, h - 1);
        x = std::min(x, w - 1);
        return render.alpha[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < lh; ++y)
        for (int x = 0; x < lw; ++x)
            out.at(0, y, x) =
                0.25 * (a(2 * y, 2 * x) + a(2 * y, 2 * x + 1) + a(2 * y + 1, 2 * x) + a(2 * y + 1, 2 * x + 1));
    return out;
}

void SubbandPairDataset::validate() const {
    const int want = domain == DatasetDomain::ll ? 3 : 9;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (!s.corrupted.same_shape(s.clean))
            throw InvalidInput("dataset sample " + std::to_string(i) + ": corrupted/clean shape mismatch");
        if (s.clean.channels != want)
            throw InvalidInput("dataset sample " + std::to_string(i) + ": expected " +
                               std::to_string(want) + " channels, got " +
                               std::to_string(s.clean.channels));
        if (!s.confidence.empty() &&
            (s.confidence.height != s.clean.height || s.confidence.width != s.clean.width))
            throw InvalidInput("dataset sample " + std::to_string(i) + ": confidence size mismatch");
    }
}

Image assemble_pseudo_gt(const Image& repaired_ll, const Image& repaired_hf, int original_height,
                         int original_width) {
    if (repaired_hf.channels != 3 * repaired_ll.channels || repaired_hf.height != repaired_ll.height ||
        repaired_hf.width != repaired_ll.width)
        throw InvalidInput("assemble_pseudo_gt: LL and HF planes disagree in shape");
    if ((original_height + 1) / 2 != repaired_ll.height || (original_width + 1) / 2 != repaired_ll.width)
        throw InvalidInput("assemble_pseudo_gt: original size inconsistent with subband size");
    SubbandSet sb;
    sb.ll = repaired_ll;
    sb.ll.alpha.clear();
    sb.original_height = original_height;
    sb.original_width = original_width;
    assign_hf(sb, repaired_hf);
    return clamped(inverse_dwt(sb));
}

}  // namespace wgs
