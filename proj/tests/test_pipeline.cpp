// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <unistd.h>

#include "test_helpers.hpp"
#include "wgs/error.hpp"
#include "wgs/masking.hpp"
#include "wgs/parallel.hpp"
#include "wgs/pipeline.hpp"
#include "wgs/render.hpp"
#include "wgs/workspace.hpp"

using namespace wgs;
using wgs::testing::max_abs_diff;

namespace {

PipelineConfig small_config() {
    PipelineConfig cfg;
    cfg.image_size = 32;
    cfg.held_out_views = 4;
    cfg.scene_primitives = 120;
    cfg.init_primitives = 128;
    cfg.coarse_iters = 20;
    cfg.dataset_iters = 20;
    cfg.fine_iters = 40;
    cfg.novel_view_count = 4;
    cfg.refiner_max_epochs = 4;
    cfg.seed = 5;
    return cfg;
}

const Scene& small_scene() {
    static const Scene scene = synthesize_scene(scene_config(small_config()));
    return scene;
}

const CoarseResult& small_coarse() {
    static const CoarseResult coarse = stage_coarse(small_config(), small_scene());
    return coarse;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag)
        : path(std::filesystem::temp_directory_path() / ("wgs_pipe_" + tag + "_" + std::to_string(::getpid()))) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

bool same_report(const MetricReport& a, const MetricReport& b) {
    if (a.psnr != b.psnr || a.ssim != b.ssim || a.per_view.size() != b.per_view.size()) return false;
    for (std::size_t i = 0; i < a.per_view.size(); ++i)
        if (a.per_view[i].psnr != b.per_view[i].psnr || a.per_view[i].ssim != b.per_view[i].ssim) return false;
    return true;
}

}  // namespace

TEST_CASE("coarse stage caches one subband set per view") {
    const CoarseResult& coarse = small_coarse();
    REQUIRE(coarse.render_subbands.size() == small_scene().train.size());
    CHECK(coarse.losses.size() == 20);
    CHECK(coarse.init.count() == 128);
    const RenderOptions opts;
    for (std::size_t v = 0; v < coarse.render_subbands.size(); ++v) {
        Image r = render(coarse.cloud, small_scene().train[v].camera, opts);
        r.alpha.clear();
        // Cached coefficients are stored at single precision.
        CHECK(max_abs_diff(inverse_dwt(coarse.render_subbands[v]), r) < 1e-6);
    }
}

TEST_CASE("dataset stage shapes and model counts") {
    for (Strategy s : {Strategy::orm_online, Strategy::orm_offline, Strategy::loo}) {
        CAPTURE(to_string(s));
        PipelineConfig cfg = small_config();
        cfg.strategy = s;
        const DatasetResult data = stage_dataset(cfg, small_scene(), small_coarse());
        CHECK(data.models_trained == (s == Strategy::loo ? 4 : 1));
        CHECK(data.losses.size() == static_cast<std::size_t>(data.models_trained * cfg.dataset_iters));
        REQUIRE(data.ll.samples.size() == 4);
        REQUIRE(data.hf.samples.size() == 4);
        CHECK(data.ll.domain == DatasetDomain::ll);
        CHECK(data.hf.domain == DatasetDomain::hf);
        CHECK_NOTHROW(data.ll.validate());
        CHECK_NOTHROW(data.hf.validate());
        for (const auto& p : data.ll.samples) {
            CHECK(p.corrupted.height == 16);
            CHECK(p.corrupted.width == 16);
            CHECK(p.corrupted.channels == 3);
            CHECK(p.confidence.channels == 1);
        }
        for (const auto& p : data.hf.samples) CHECK(p.clean.channels == 9);
        if (s == Strategy::loo) {
            CHECK(data.first_masks.empty());
        } else {
            REQUIRE(data.first_masks.size() == 4);
            for (std::size_t v = 0; v < 4; ++v) {
                const double f = masked_fraction(data.last_masks[v], small_scene().train[v].object_mask);
                CHECK(std::abs(f - cfg.coverage) <= kCoverageTolerance);
            }
            const bool moved = data.first_masks[0].values != data.last_masks[0].values;
            CHECK(moved == (s == Strategy::orm_online));
        }
    }
}

TEST_CASE("repair fit honours the repair mode") {
    PipelineConfig cfg = small_config();
    const DatasetResult data = stage_dataset(cfg, small_scene(), small_coarse());
    const Image hf_in = concat_hf(small_coarse().render_subbands[0]);

    cfg.repair = RepairMode::identity;
    RepairModels m = stage_repair_fit(cfg, data);
    CHECK(m.ll.kind == RepairKind::identity);
    CHECK_FALSE(m.hf_trained);
    CHECK(repair_hf(m.hf, hf_in).data == hf_in.data);

    cfg.repair = RepairMode::wavelet;
    m = stage_repair_fit(cfg, data);
    CHECK_FALSE(m.hf_trained);
    CHECK(m.calibration.threshold > 0.0);
    CHECK(m.calibration.threshold < 1.0);
    CHECK(m.ll.kind == (m.calibration.enabled ? RepairKind::ll_inpaint : RepairKind::identity));

    cfg.repair = RepairMode::wavelet_hf;
    m = stage_repair_fit(cfg, data);
    CHECK(m.hf_trained);
    CHECK(m.refiner_report.best_val_loss <= m.refiner_report.initial_val_loss);
}

TEST_CASE("pseudo ground truth with identity repair is the clamped render") {
    PipelineConfig cfg = small_config();
    cfg.repair = RepairMode::identity;
    const RepairModels m = stage_repair_fit(cfg, DatasetResult{});
    const Camera& cam = small_scene().held_out[1].camera;
    Image r = render(small_coarse().cloud, cam);
    r.alpha.clear();
    for (double& v : r.data) v = std::clamp(v, 0.0, 1.0);
    const Image p = make_pseudo_gt(small_coarse().cloud, cam, m);
    REQUIRE(p.same_shape(r));
    CHECK(max_abs_diff(p, r) < 1e-12);
}

TEST_CASE("fine stage") {
    PipelineConfig cfg = small_config();
    const DatasetResult data = stage_dataset(cfg, small_scene(), small_coarse());
    const RepairModels models = stage_repair_fit(cfg, data);

    SUBCASE("pseudo targets are full-size and in range") {
        const FineResult fine = stage_fine(cfg, small_scene(), small_coarse().cloud, models);
        CHECK(fine.losses.size() == 40);
        CHECK(fine.novel_cameras.size() == 4);
        REQUIRE(fine.pseudo_gt.size() == 4);
        CHECK(fine.pseudo_steps > 0);
        CHECK(fine.pseudo_steps < 40);
        for (const Image& p : fine.pseudo_gt) {
            CHECK(p.height == 32);
            CHECK(p.width == 32);
            CHECK(p.channels == 3);
            CHECK(*std::min_element(p.data.begin(), p.data.end()) >= 0.0);
            CHECK(*std::max_element(p.data.begin(), p.data.end()) <= 1.0);
        }
    }
    SUBCASE("zero ratio is real-view training only") {
        cfg.pseudo_gt_ratio = 0.0;
        const FineResult fine = stage_fine(cfg, small_scene(), small_coarse().cloud, models);
        CHECK(fine.pseudo_steps == 0);
        CHECK(fine.cloud.pack() != small_coarse().cloud.pack());
    }
    SUBCASE("full ratio never visits a real view") {
        cfg.pseudo_gt_ratio = 1.0;
        CHECK(stage_fine(cfg, small_scene(), small_coarse().cloud, models).pseudo_steps == 40);
    }
}

TEST_CASE("experiment log") {
    PipelineConfig cfg = small_config();
    const ExperimentLog log = run_experiment(cfg, small_scene());
    double sum = 0.0;
    for (const auto& t : log.timings) sum += t.seconds;
    CHECK(std::abs(sum - log.total_seconds) <= 0.01 * log.total_seconds);
    CHECK(log.timings.size() == 5);
    CHECK(log.final_metrics.per_view.size() == 4);
    CHECK(log.losses.at("fine").size() == 40);

    SUBCASE("repeat runs agree exactly, whatever the worker count") {
        set_worker_count(3);
        const ExperimentLog again = run_experiment(cfg, small_scene());
        set_worker_count(0);
        CHECK(same_report(again.coarse_metrics, log.coarse_metrics));
        CHECK(same_report(again.final_metrics, log.final_metrics));
        CHECK(again.losses == log.losses);
    }
    SUBCASE("identity repair skips dataset construction") {
        cfg.repair = RepairMode::identity;
        const ExperimentLog id = run_experiment(cfg, small_scene());
        CHECK(id.dataset_models_trained == 0);
        CHECK(id.stage_seconds("dataset") == 0.0);
    }
}

TEST_CASE("stages through the workspace match the in-memory run") {
    const PipelineConfig cfg = small_config();
    const ExperimentLog log = run_experiment(cfg, small_scene());

    TempDir dir("ws");
    const Workspace ws(dir.path);
    ws.write_scene(synthesize_scene(scene_config(cfg)));
    auto run_from = [&](int first) {
        const Scene scene = ws.read_scene();
        if (first <= 0) ws.write_coarse(stage_coarse(cfg, scene));
        if (first <= 1) ws.write_dataset(stage_dataset(cfg, scene, ws.read_coarse()));
        if (first <= 2) ws.write_repair(stage_repair_fit(cfg, ws.read_dataset()));
        if (first <= 3) ws.write_fine(stage_fine(cfg, scene, ws.read_coarse().cloud, ws.read_repair()));
        return evaluate(ws.read_fine(), scene.held_out);
    };
    const MetricReport disk = run_from(0);
    CHECK(same_report(disk, log.final_metrics));
    CHECK(same_report(evaluate(ws.read_coarse().cloud, ws.read_scene().held_out), log.coarse_metrics));

    // Rerunning a stage from its inputs reproduces the later artifacts.
    const std::string fine_bytes = read_file(ws.fine_dir() / "fine.wgsc");
    const std::string refiner_bytes = read_file(ws.repair_dir() / "refiner.wgrn");
    std::filesystem::remove_all(ws.repair_dir());
    std::filesystem::remove_all(ws.fine_dir());
    CHECK(same_report(run_from(2), log.final_metrics));
    CHECK(read_file(ws.repair_dir() / "refiner.wgrn") == refiner_bytes);
    CHECK(read_file(ws.fine_dir() / "fine.wgsc") == fine_bytes);
}

TEST_CASE("workspace errors") {
    TempDir dir("missing");
    const Workspace ws(dir.path);
    CHECK_THROWS_AS(ws.read_scene(), IoError);
    CHECK_THROWS_AS(ws.read_coarse(), IoError);
    const Camera cam = small_scene().train[0].camera;
    const Camera back = parse_camera(format_camera(cam));
    CHECK(back.position == cam.position);
    CHECK(back.rotation == cam.rotation);
    CHECK(back.focal == cam.focal);
    CHECK_THROWS_AS(parse_camera("1 2 3"), InvalidInput);
}
