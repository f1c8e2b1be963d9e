// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "wgs/config.hpp"
#include "wgs/gaussian.hpp"
#include "wgs/masking.hpp"
#include "wgs/metrics.hpp"
#include "wgs/refiner.hpp"
#include "wgs/repair.hpp"
#include "wgs/scene.hpp"
#include "wgs/train.hpp"
#include "wgs/wavelet.hpp"

namespace wgs {

SceneConfig scene_config(const PipelineConfig& cfg);

/// Coarse stage output. Every field is rounded to single precision so the
/// in-memory pipeline matches one that passes through the on-disk formats.
struct CoarseResult {
    GaussianCloud init;
    GaussianCloud cloud;
    std::vector<SubbandSet> render_subbands;  // one per training view
    std::vector<double> losses;
};

struct DatasetResult {
    SubbandPairDataset ll;
    SubbandPairDataset hf;
    int models_trained = 0;
    std::vector<double> losses;  // concatenated over every model trained
    /// ORM only: each view's mask at the first and last dataset iteration.
    std::vector<Mask> first_masks;
    std::vector<Mask> last_masks;
};

/// How the LL inpainter was tuned on the LL-domain pairs.
struct LlCalibration {
    double threshold = 0.5;
    bool keep_border_connected = false;
    double iou = 0.0;           // detected vs high-error LL pixels
    double mse_before = 0.0;    // LL MSE of the corrupted samples
    double mse_after = 0.0;     // ... after inpainting with the chosen settings
    bool enabled = false;       // false when inpainting did not lower the MSE
};

struct RepairModels {
    RepairModel ll;
    RefinerNet hf;
    bool hf_trained = false;
    LlCalibration calibration;
    RefinerTrainReport refiner_report;
};

struct FineResult {
    GaussianCloud cloud;
    std::vector<double> losses;
    std::vector<Camera> novel_cameras;
    std::vector<Image> pseudo_gt;  // as last generated
    int pseudo_steps = 0;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct ExperimentLog {
    std::vector<StageTiming> timings;
    double total_seconds = 0.0;
    std::map<std::string, std::vector<double>> losses;  // keyed by stage
    MetricReport coarse_metrics;
    MetricReport final_metrics;
    int dataset_models_trained = 0;
    LlCalibration calibration;
    RefinerTrainReport refiner_report;
    KeyValues config;

    double stage_seconds(const std::string& stage) const;
    /// Flat `key = value` summary (timings included).
    KeyValues summary() const;
};

/// Pixel error above which an LL sample counts as corrupted during
/// calibration, in image units (LL samples are twice the local mean).
inline constexpr double kLlErrorThreshold = 0.1;

std::vector<TrainView> train_views(const Scene& scene);

CoarseResult stage_coarse(const PipelineConfig& cfg, const Scene& scene);

/// The drifting-mask layout the dataset stage uses for training view `view`.
MaskSpec dataset_mask_spec(const PipelineConfig& cfg, std::size_t view);

DatasetResult stage_dataset(const PipelineConfig& cfg, const Scene& scene, const CoarseResult& coarse);

LlCalibration calibrate_ll_inpaint(const SubbandPairDataset& ll);

RepairModels stage_repair_fit(const PipelineConfig& cfg, const DatasetResult& data);

/// Render → DWT → LL and HF repair → inverse DWT, clamped to [0, 1].
Image make_pseudo_gt(const GaussianCloud& cloud, const Camera& cam, const RepairModels& models,
                     const RenderOptions& opts = {});

FineResult stage_fine(const PipelineConfig& cfg, const Scene& scene, const GaussianCloud& coarse,
                      const RepairModels& models);

/// Held-out metrics over the full frame.
MetricReport evaluate(const GaussianCloud& cloud, std::span<const SceneView> views);

/// Stages coarse → dataset → repair fit → fine → evaluate, each timed.
ExperimentLog run_experiment(const PipelineConfig& cfg, const Scene& scene);

}  // namespace wgs
