// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "wgs/error.hpp"
#include "wgs/masking.hpp"
#include "wgs/random.hpp"

namespace wgs {
namespace {

// Stream tags for mix_seed, one per consumer of randomness.
enum SeedTag : std::uint64_t {
    kInitSeed = 1,
    kCoarseSeed,
    kDatasetSeed,
    kMaskSeed,
    kRefinerSeed,
    kFineSeed,
    kNovelSeed,
};

TrainConfig train_config(const PipelineConfig& cfg, SeedTag tag, std::uint64_t extra = 0) {
    TrainConfig t;
    t.loss.lambda = cfg.lambda;
    t.seed = mix_seed(mix_seed(cfg.seed, tag), extra);
    return t;
}

Image without_alpha(Image img) {
    img.alpha.clear();
    return img;
}

SubbandPair ll_pair(const Image& render, const Image& clean) {
    const SubbandSet r = rounded_f32(forward_dwt(without_alpha(render)));
    const SubbandSet c = rounded_f32(forward_dwt(without_alpha(clean)));
    return {r.ll, c.ll, rounded_f32(downsample_confidence(render))};
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(10);
    ss << v;
    return ss.str();
}

template <typename F>
auto timed(ExperimentLog& log, const std::string& stage, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        auto result = fn();
        log.timings.push_back({stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
        return result;
    } catch (const ConfigError& e) {
        throw ConfigError(stage + " stage: " + e.detail(), e.line());
    } catch (const NumericalFailure& e) {
        throw NumericalFailure(stage + " stage: " + e.what());
    } catch (const InsufficientData& e) {
        throw InsufficientData(stage + " stage: " + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput(stage + " stage: " + e.what());
    }
}

}  // namespace

SceneConfig scene_config(const PipelineConfig& cfg) {
    SceneConfig s;
    s.image_size = cfg.image_size;
    s.train_views = cfg.n_views;
    s.held_out_views = cfg.held_out_views;
    s.primitives = cfg.scene_primitives;
    s.seed = cfg.seed;
    return s;
}

std::vector<TrainView> train_views(const Scene& scene) {
    std::vector<TrainView> views;
    for (const SceneView& v : scene.train) views.push_back({v.camera, without_alpha(v.image), std::nullopt});
    return views;
}

CoarseResult stage_coarse(const PipelineConfig& cfg, const Scene& scene) {
    cfg.validate();
    if (static_cast<int>(scene.train.size()) != cfg.n_views)
        throw InvalidInput("scene has " + std::to_string(scene.train.size()) + " training views, config expects " +
                           std::to_string(cfg.n_views));
    CoarseResult out;
    out.init = rounded_f32(visual_hull_init(scene.train, cfg.init_primitives, mix_seed(cfg.seed, kInitSeed)));
    const auto views = train_views(scene);
    TrainResult r = train(out.init, views, cfg.coarse_iters, train_config(cfg, kCoarseSeed));
    out.cloud = rounded_f32(std::move(r.cloud));
    out.losses = std::move(r.losses);
    for (const SceneView& v : scene.train)
        out.render_subbands.push_back(rounded_f32(forward_dwt(without_alpha(render(out.cloud, v.camera)))));
    return out;
}

MaskSpec dataset_mask_spec(const PipelineConfig& cfg, std::size_t view) {
    return spec_for_view(mix_seed(cfg.seed, kMaskSeed), view, cfg.n_m, cfg.coverage);
}

DatasetResult stage_dataset(const PipelineConfig& cfg, const Scene& scene, const CoarseResult& coarse) {
    cfg.validate();
    const auto views = train_views(scene);
    const std::size_t n = views.size();
    if (coarse.render_subbands.size() != n) throw InvalidInput("coarse subband cache does not match the views");
    DatasetResult out;
    out.ll.domain = DatasetDomain::ll;
    out.hf.domain = DatasetDomain::hf;

    if (cfg.strategy == Strategy::loo) {
        const auto splits = loo_partitions(n);
        for (std::size_t k = 0; k < splits.size(); ++k) {
            std::vector<TrainView> subset;
            for (std::size_t i : splits[k].train) subset.push_back(views[i]);
            TrainResult r = train(coarse.init, subset, cfg.dataset_iters, train_config(cfg, kDatasetSeed, k));
            ++out.models_trained;
            out.losses.insert(out.losses.end(), r.losses.begin(), r.losses.end());
            const GaussianCloud model = rounded_f32(std::move(r.cloud));
            const SceneView& held = scene.train[splits[k].held_out];
            out.ll.samples.push_back(ll_pair(render(model, held.camera), held.image));
        }
    } else {
        const bool online = cfg.strategy == Strategy::orm_online;
        std::vector<MaskSpec> specs;
        for (std::size_t v = 0; v < n; ++v)
            specs.push_back(dataset_mask_spec(cfg, v));
        const MaskProvider masks = [&](std::size_t v, int t) {
            return rasterize_mask(specs[v], online ? t : 0.0, scene.train[v].object_mask);
        };
        TrainResult r = train(coarse.init, views, cfg.dataset_iters, train_config(cfg, kDatasetSeed), masks);
        out.models_trained = 1;
        out.losses = std::move(r.losses);
        const GaussianCloud model = rounded_f32(std::move(r.cloud));
        for (std::size_t v = 0; v < n; ++v) {
            out.ll.samples.push_back(ll_pair(render(model, scene.train[v].camera), scene.train[v].image));
            out.first_masks.push_back(masks(v, 0));
            out.last_masks.push_back(masks(v, cfg.dataset_iters - 1));
        }
    }

    for (std::size_t v = 0; v < n; ++v) {
        const SubbandSet clean = rounded_f32(forward_dwt(without_alpha(scene.train[v].image)));
        out.hf.samples.push_back({concat_hf(coarse.render_subbands[v]), concat_hf(clean), Image()});
    }
    return out;
}

LlCalibration calibrate_ll_inpaint(const SubbandPairDataset& ll) {
    if (ll.domain != DatasetDomain::ll) throw InvalidInput("calibration needs an LL-domain dataset");
    if (ll.samples.empty()) throw InsufficientData("calibration needs at least one LL sample");
    ll.validate();

    std::vector<BinaryPlane> truth;
    for (const SubbandPair& s : ll.samples) {
        if (s.confidence.empty()) throw InvalidInput("LL samples need a confidence plane");
        BinaryPlane t(s.clean.height, s.clean.width);
        for (int y = 0; y < t.height; ++y)
            for (int x = 0; x < t.width; ++x) {
                double e = 0.0;
                for (int c = 0; c < s.clean.channels; ++c)
                    e = std::max(e, std::abs(s.corrupted.at(c, y, x) - s.clean.at(c, y, x)));
                t.at(y, x) = 0.5 * e > kLlErrorThreshold;
            }
        truth.push_back(std::move(t));
    }

    LlCalibration best;
    best.iou = -1.0;
    for (bool border : {false, true})
        for (int k = 1; k <= 19; ++k) {
            InpaintConfig ic;
            ic.confidence_threshold = 0.05 * k;
            ic.keep_border_connected = border;
            std::size_t inter = 0, uni = 0;
            for (std::size_t i = 0; i < ll.samples.size(); ++i) {
                const BinaryPlane det = repair_region(ll.samples[i].confidence, ic);
                for (std::size_t p = 0; p < det.values.size(); ++p) {
                    inter += det.values[p] && truth[i].values[p];
                    uni += det.values[p] || truth[i].values[p];
                }
            }
            const double iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
            if (iou > best.iou) {
                best.iou = iou;
                best.threshold = ic.confidence_threshold;
                best.keep_border_connected = border;
            }
        }

    RepairModel model{RepairKind::ll_inpaint, {}};
    model.inpaint.confidence_threshold = best.threshold;
    model.inpaint.keep_border_connected = best.keep_border_connected;
    double before = 0.0, after = 0.0, count = 0.0;
    for (const SubbandPair& s : ll.samples) {
        const Image fixed = repair_ll(model, s.corrupted, &s.confidence).image;
        for (std::size_t p = 0; p < s.clean.data.size(); ++p) {
            before += std::pow(s.corrupted.data[p] - s.clean.data[p], 2);
            after += std::pow(fixed.data[p] - s.clean.data[p], 2);
        }
        count += static_cast<double>(s.clean.data.size());
    }
    best.mse_before = before / count;
    best.mse_after = after / count;
    best.enabled = best.mse_after < best.mse_before;
    return best;
}

RepairModels stage_repair_fit(const PipelineConfig& cfg, const DatasetResult& data) {
    cfg.validate();
    RepairModels out;
    out.hf = rounded_f32(RefinerNet(mix_seed(cfg.seed, kRefinerSeed)));
    if (cfg.repair == RepairMode::identity) return out;

    out.calibration = calibrate_ll_inpaint(data.ll);
    if (out.calibration.enabled) {
        out.ll.kind = RepairKind::ll_inpaint;
        out.ll.inpaint.confidence_threshold = out.calibration.threshold;
        out.ll.inpaint.keep_border_connected = out.calibration.keep_border_connected;
    }
    if (cfg.repair == RepairMode::wavelet_hf) {
        RefinerTrainConfig rc;
        rc.learning_rate = cfg.refiner_lr;
        rc.val_fraction = cfg.val_fraction;
        rc.patience = cfg.refiner_patience;
        rc.max_epochs = cfg.refiner_max_epochs;
        rc.seed = mix_seed(cfg.seed, kRefinerSeed);
        out.hf = rounded_f32(train_refiner(out.hf, data.hf, rc, &out.refiner_report));
        out.hf_trained = true;
    }
    return out;
}

Image make_pseudo_gt(const GaussianCloud& cloud, const Camera& cam, const RepairModels& models,
                     const RenderOptions& opts) {
    const Image rendered = render(cloud, cam, opts);
    const Image confidence = downsample_confidence(rendered);
    const SubbandSet sb = forward_dwt(without_alpha(rendered));
    const Image ll = repair_ll(models.ll, sb.ll, &confidence).image;
    const Image hf = repair_hf(models.hf, concat_hf(sb));
    return assemble_pseudo_gt(ll, hf, rendered.height, rendered.width);
}

FineResult stage_fine(const PipelineConfig& cfg, const Scene& scene, const GaussianCloud& coarse,
                      const RepairModels& models) {
    cfg.validate();
    const auto views = train_views(scene);
    FineResult out;
    std::vector<Camera> refs;
    for (const TrainView& v : views) refs.push_back(v.camera);
    out.novel_cameras = sample_novel_cameras(refs, cfg.novel_view_count, mix_seed(cfg.seed, kNovelSeed));

    const TrainConfig tc = train_config(cfg, kFineSeed);
    auto regenerate = [&](const GaussianCloud& source) {
        out.pseudo_gt.clear();
        for (const Camera& cam : out.novel_cameras)
            out.pseudo_gt.push_back(make_pseudo_gt(source, cam, models, tc.render));
    };
    if (cfg.pseudo_gt_ratio > 0.0) regenerate(coarse);

    SplatTrainer trainer(coarse, cfg.fine_iters, tc);
    ViewCycler real(views.size(), mix_seed(tc.seed, 1));
    ViewCycler novel(out.novel_cameras.size(), mix_seed(tc.seed, 2));
    Rng coin(mix_seed(tc.seed, 3));
    out.losses.reserve(cfg.fine_iters);
    for (int it = 0; it < cfg.fine_iters; ++it) {
        if (cfg.pseudo_gt_refresh > 0 && it > 0 && it % cfg.pseudo_gt_refresh == 0 && cfg.pseudo_gt_ratio > 0.0)
            regenerate(trainer.cloud());
        if (coin.uniform() < cfg.pseudo_gt_ratio) {
            const std::size_t k = novel.next();
            out.losses.push_back(
                trainer.step(out.novel_cameras[k], out.pseudo_gt[k], nullptr, "novel " + std::to_string(k)));
            ++out.pseudo_steps;
        } else {
            const std::size_t v = real.next();
            out.losses.push_back(trainer.step(views[v].camera, views[v].image, nullptr, std::to_string(v)));
        }
    }
    out.cloud = rounded_f32(trainer.cloud());
    return out;
}

MetricReport evaluate(const GaussianCloud& cloud, std::span<const SceneView> views) {
    std::vector<ViewMetric> per_view;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const Image rendered = clamped(without_alpha(render(cloud, views[i].camera)));
        const Image gt = without_alpha(views[i].image);
        per_view.push_back({std::to_string(i), psnr(rendered, gt), ssim(rendered, gt)});
    }
    return summarize(std::move(per_view));
}

double ExperimentLog::stage_seconds(const std::string& stage) const {
    for (const StageTiming& t : timings)
        if (t.stage == stage) return t.seconds;
    return 0.0;
}

KeyValues ExperimentLog::summary() const {
    KeyValues kv = config;
    for (const StageTiming& t : timings) kv.emplace_back("time_" + t.stage + "_s", fmt(t.seconds));
    kv.emplace_back("time_total_s", fmt(total_seconds));
    kv.emplace_back("dataset_models_trained", std::to_string(dataset_models_trained));
    kv.emplace_back("ll_threshold", fmt(calibration.threshold));
    kv.emplace_back("ll_keep_border_connected", calibration.keep_border_connected ? "true" : "false");
    kv.emplace_back("ll_detection_iou", fmt(calibration.iou));
    kv.emplace_back("ll_mse_before", fmt(calibration.mse_before));
    kv.emplace_back("ll_mse_after", fmt(calibration.mse_after));
    kv.emplace_back("ll_inpaint_enabled", calibration.enabled ? "true" : "false");
    kv.emplace_back("refiner_epochs", std::to_string(refiner_report.epochs_run));
    kv.emplace_back("refiner_initial_val_loss", fmt(refiner_report.initial_val_loss));
    kv.emplace_back("refiner_best_val_loss", fmt(refiner_report.best_val_loss));
    kv.emplace_back("coarse_psnr", fmt(coarse_metrics.psnr));
    kv.emplace_back("coarse_ssim", fmt(coarse_metrics.ssim));
    kv.emplace_back("final_psnr", fmt(final_metrics.psnr));
    kv.emplace_back("final_ssim", fmt(final_metrics.ssim));
    return kv;
}

ExperimentLog run_experiment(const PipelineConfig& cfg, const Scene& scene) {
    cfg.validate();
    ExperimentLog log;
    log.config = to_key_values(cfg);
    const auto start = std::chrono::steady_clock::now();

    const CoarseResult coarse = timed(log, "coarse", [&] { return stage_coarse(cfg, scene); });
    log.losses["coarse"] = coarse.losses;
    DatasetResult data;
    if (cfg.repair != RepairMode::identity) {
        data = timed(log, "dataset", [&] { return stage_dataset(cfg, scene, coarse); });
        log.losses["dataset"] = data.losses;
        log.dataset_models_trained = data.models_trained;
    } else {
        log.timings.push_back({"dataset", 0.0});
    }
    const RepairModels models = timed(log, "repair_fit", [&] { return stage_repair_fit(cfg, data); });
    log.calibration = models.calibration;
    log.refiner_report = models.refiner_report;
    const FineResult fine = timed(log, "fine", [&] { return stage_fine(cfg, scene, coarse.cloud, models); });
    log.losses["fine"] = fine.losses;
    timed(log, "evaluate", [&] {
        log.coarse_metrics = evaluate(coarse.cloud, scene.held_out);
        log.final_metrics = evaluate(fine.cloud, scene.held_out);
        return 0;
    });
    log.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return log;
}

}  // namespace wgs
