// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "wgs/io.hpp"

namespace wgs {

enum class Strategy { orm_online, orm_offline, loo };
enum class RepairMode { identity, wavelet, wavelet_hf };

std::string to_string(Strategy s);
std::string to_string(RepairMode r);

struct PipelineConfig {
    int n_views = 4;
    int coarse_iters = 100;
    int dataset_iters = 300;
    int fine_iters = 900;
    int n_m = 10;
    double coverage = 0.5;
    double lambda = 0.2;
    double pseudo_gt_ratio = 0.5;
    int novel_view_count = 16;
    std::uint64_t seed = 0;
    Strategy strategy = Strategy::orm_online;
    RepairMode repair = RepairMode::wavelet_hf;

    int image_size = 64;
    int held_out_views = 16;
    int scene_primitives = 300;
    int init_primitives = 512;

    int refiner_max_epochs = 500;
    int refiner_patience = 20;
    double refiner_lr = 1e-3;
    double val_fraction = 0.25;

    /// Regenerate pseudo ground truths from the current model every this many
    /// fine iterations; 0 keeps the targets made from the coarse model.
    int pseudo_gt_refresh = 0;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

/// Unknown keys, duplicates, unparseable values and invariant violations
/// raise ConfigError naming the offending line. Missing keys keep defaults.
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig parse_config(const std::filesystem::path& path);

/// Every field as `key = value` pairs; parse_config_text inverts it.
KeyValues to_key_values(const PipelineConfig& cfg);

/// Applies a single `key = value` override (used for command-line flags).
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

}  // namespace wgs
