// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wgs/config.hpp"
#include "wgs/io.hpp"
#include "wgs/pipeline.hpp"
#include "wgs/scene.hpp"

namespace wgs {

/// On-disk layout of a run. Each stage reads only what earlier stages wrote:
///
///   scene/    cameras.txt, {train,heldout}_<i>.ppm, {train,heldout}_<i>_mask.pgm
///   coarse/   init.wgsc, coarse.wgsc, subbands_<i>.wsb, losses.csv
///   dataset/  ll.wspd, hf.wspd, dataset.txt, losses.csv, mask_<i>_{first,last}.pgm
///   repair/   ll_repair.txt, refiner.wgrn, refiner_val.csv
///   fine/     fine.wgsc, losses.csv, novel_cameras.txt, pseudo_gt_<k>.ppm
///   eval/     coarse_metrics.csv, final_metrics.csv
class Workspace {
public:
    explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path scene_dir() const { return root_ / "scene"; }
    std::filesystem::path coarse_dir() const { return root_ / "coarse"; }
    std::filesystem::path dataset_dir() const { return root_ / "dataset"; }
    std::filesystem::path repair_dir() const { return root_ / "repair"; }
    std::filesystem::path fine_dir() const { return root_ / "fine"; }
    std::filesystem::path eval_dir() const { return root_ / "eval"; }

    void write_scene(const Scene& scene) const;
    Scene read_scene() const;

    void write_coarse(const CoarseResult& r) const;
    CoarseResult read_coarse() const;

    void write_dataset(const DatasetResult& r) const;
    DatasetResult read_dataset() const;

    void write_repair(const RepairModels& m) const;
    RepairModels read_repair() const;

    void write_fine(const FineResult& r) const;
    GaussianCloud read_fine() const;

    void write_metrics(const MetricReport& coarse, const MetricReport& final_report) const;

private:
    std::filesystem::path root_;
};

/// Serialized camera: position, row-major rotation, focal, height, width.
std::string format_camera(const Camera& cam);
Camera parse_camera(const std::string& text);

std::string losses_csv(const std::vector<double>& losses);
std::string metrics_csv(const MetricReport& report);

struct RunManifest {
    std::string command;
    KeyValues config;
    std::uint64_t seed = 0;
    std::vector<std::filesystem::path> artifacts;
    std::string tool_version;
    std::string started;
    std::string finished;

    /// Throws IoError if any listed artifact is missing.
    void write(const std::filesystem::path& path) const;
};

/// UTC timestamp, ISO-8601.
std::string utc_now();

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace wgs
