// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/masking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "wgs/error.hpp"
#include "wgs/random.hpp"

namespace wgs {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Box {
    int x0, y0, x1, y1;
    int width() const { return x1 - x0 + 1; }
    int height() const { return y1 - y0 + 1; }
};

Box bounding_box(const BinaryPlane& obj) {
    Box b{obj.width, obj.height, -1, -1};
    for (int y = 0; y < obj.height; ++y)
        for (int x = 0; x < obj.width; ++x)
            if (obj.at(y, x)) {
                b.x0 = std::min(b.x0, x);
                b.x1 = std::max(b.x1, x);
                b.y0 = std::min(b.y0, y);
                b.y1 = std::max(b.y1, y);
            }
    return b;
}

// Marks the union of the scaled rectangles in `covered` and returns how many
// object pixels it hits.
std::size_t rasterize_union(const std::vector<Eigen::Vector2d>& centers, const MaskSpec& spec,
                            double scale, const Box& box, const BinaryPlane& obj,
                            std::vector<std::uint8_t>& covered) {
    std::fill(covered.begin(), covered.end(), std::uint8_t{0});
    for (std::size_t r = 0; r < centers.size(); ++r) {
        const double cx = box.x0 + centers[r].x() * box.width();
        const double cy = box.y0 + centers[r].y() * box.height();
        const double hx = spec.regions[r].half_extent.x() * scale * box.width();
        const double hy = spec.regions[r].half_extent.y() * scale * box.height();
        const int xa = std::max(0, static_cast<int>(std::ceil(cx - hx - 0.5)));
        const int xb = std::min(obj.width - 1, static_cast<int>(std::floor(cx + hx - 0.5)));
        const int ya = std::max(0, static_cast<int>(std::ceil(cy - hy - 0.5)));
        const int yb = std::min(obj.height - 1, static_cast<int>(std::floor(cy + hy - 0.5)));
        for (int y = ya; y <= yb; ++y)
            for (int x = xa; x <= xb; ++x) covered[static_cast<std::size_t>(y) * obj.width + x] = 1;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < covered.size(); ++i) hits += covered[i] && obj.values[i];
    return hits;
}

}  // namespace

Eigen::Vector2d MaskRegion::center_at(double t) const {
    return {base_center.x() + drift_amplitude.x() * std::sin(drift_angular_frequency.x() * t + drift_phase.x()),
            base_center.y() + drift_amplitude.y() * std::sin(drift_angular_frequency.y() * t + drift_phase.y())};
}

void MaskSpec::validate() const {
    if (regions.empty()) throw InvalidInput("mask spec has no regions");
    if (!(target_coverage > 0.0 && target_coverage < 1.0))
        throw InvalidInput("mask coverage must lie strictly between 0 and 1");
    for (const auto& r : regions) {
        if (!(r.half_extent.x() > 0.0 && r.half_extent.y() > 0.0))
            throw InvalidInput("mask region half extents must be positive");
        if (!r.base_center.allFinite() || !r.drift_amplitude.allFinite() ||
            !r.drift_angular_frequency.allFinite() || !r.drift_phase.allFinite())
            throw InvalidInput("mask region parameters must be finite");
    }
}

MaskSpec spec_for_view(std::uint64_t global_seed, std::size_t view_index, int n_regions,
                       double coverage) {
    if (n_regions < 1) throw InvalidInput("spec_for_view: n_m must be >= 1");
    MaskSpec spec;
    spec.seed = global_seed;
    spec.view_index = view_index;
    spec.target_coverage = coverage;
    Rng rng(mix_seed(global_seed, 0x6d61736bULL + view_index));
    const double area = coverage / n_regions;
    for (int i = 0; i < n_regions; ++i) {
        MaskRegion r;
        r.base_center = {rng.uniform(), rng.uniform()};
        const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
        r.half_extent = {0.5 * std::sqrt(area * aspect), 0.5 * std::sqrt(area / aspect)};
        r.drift_amplitude = {rng.uniform(0.02, 0.1), rng.uniform(0.02, 0.1)};
        r.drift_angular_frequency = {rng.uniform(kTwoPi / 400.0, kTwoPi / 100.0),
                                     rng.uniform(kTwoPi / 400.0, kTwoPi / 100.0)};
        r.drift_phase = {rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi)};
        spec.regions.push_back(r);
    }
    spec.validate();
    return spec;
}

MaskRaster rasterize_mask_detailed(const MaskSpec& spec, double t, const BinaryPlane& obj) {
    spec.validate();
    const std::size_t object_pixels = obj.count();
    if (object_pixels == 0) throw InvalidInput("rasterize_mask: object mask is empty");
    const Box box = bounding_box(obj);

    std::vector<Eigen::Vector2d> centers;
    centers.reserve(spec.regions.size());
    for (const auto& r : spec.regions) centers.push_back(r.center_at(t));

    std::vector<std::uint8_t> covered(obj.values.size());
    const double total = static_cast<double>(object_pixels);
    auto fraction_at = [&](double s) {
        return static_cast<double>(rasterize_union(centers, spec, s, box, obj, covered)) / total;
    };

    const double target = spec.target_coverage;
    double lo = 0.0, hi = 1.0;
    double f_lo = 0.0, f_hi = fraction_at(hi);
    for (int grow = 0; f_hi < target && grow < 16; ++grow) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = fraction_at(hi);
    }
    if (f_hi < target)
        throw CoverageInfeasible("rasterize_mask: regions cannot reach the target coverage");
    // Bisect towards the scale where the union first reaches the target.
    for (int it = 0; it < 32 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = fraction_at(mid);
        if (f < target) {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    const bool use_hi = std::abs(f_hi - target) <= std::abs(f_lo - target);
    const double scale = use_hi ? hi : lo;
    const double fraction = use_hi ? f_hi : f_lo;
    if (std::abs(fraction - target) > kCoverageTolerance + 1e-12)
        throw CoverageInfeasible("rasterize_mask: closest reachable coverage " +
                                 std::to_string(fraction) + " misses target " +
                                 std::to_string(target) + " by more than the tolerance");

    fraction_at(scale);
    MaskRaster out;
    out.mask = Mask(obj.height, obj.width, 1);
    for (std::size_t i = 0; i < covered.size(); ++i)
        if (covered[i] && obj.values[i]) out.mask.values[i] = 0;
    out.scale = scale;
    out.fraction = fraction;
    return out;
}

Mask rasterize_mask(const MaskSpec& spec, double t, const BinaryPlane& object_mask) {
    return rasterize_mask_detailed(spec, t, object_mask).mask;
}

double masked_fraction(const Mask& mask, const BinaryPlane& obj) {
    std::size_t total = 0, masked = 0;
    for (std::size_t i = 0; i < obj.values.size(); ++i)
        if (obj.values[i]) {
            ++total;
            masked += mask.values[i] == 0;
        }
    return total ? static_cast<double>(masked) / static_cast<double>(total) : 0.0;
}

std::vector<LooSplit> loo_partitions(std::size_t view_count) {
    if (view_count < 2) throw InvalidInput("loo_partitions: need at least 2 views");
    std::vector<LooSplit> splits(view_count);
    for (std::size_t k = 0; k < view_count; ++k) {
        splits[k].held_out = k;
        for (std::size_t i = 0; i < view_count; ++i)
            if (i != k) splits[k].train.push_back(i);
    }
    return splits;
}

std::string to_key_values(const MaskSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << "mask.seed = " << spec.seed << "\n";
    os << "mask.view_index = " << spec.view_index << "\n";
    os << "mask.target_coverage = " << spec.target_coverage << "\n";
    os << "mask.n_regions = " << spec.regions.size() << "\n";
    for (std::size_t i = 0; i < spec.regions.size(); ++i) {
        const auto& r = spec.regions[i];
        const std::string p = "mask.region" + std::to_string(i) + ".";
        os << p << "base_center = " << r.base_center.x() << " " << r.base_center.y() << "\n";
        os << p << "half_extent = " << r.half_extent.x() << " " << r.half_extent.y() << "\n";
        os << p << "drift_amplitude = " << r.drift_amplitude.x() << " " << r.drift_amplitude.y() << "\n";
        os << p << "drift_angular_frequency = " << r.drift_angular_frequency.x() << " "
           << r.drift_angular_frequency.y() << "\n";
        os << p << "drift_phase = " << r.drift_phase.x() << " " << r.drift_phase.y() << "\n";
    }
    return os.str();
}

}  // namespace wgs
