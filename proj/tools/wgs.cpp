// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>

#include "wgs/config.hpp"
#include "wgs/error.hpp"
#include "wgs/io.hpp"
#include "wgs/masking.hpp"
#include "wgs/pipeline.hpp"
#include "wgs/workspace.hpp"

namespace fs = std::filesystem;
using namespace wgs;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::string workdir = "wgs_run";
};

PipelineConfig resolve_config(const CommonOptions& o) {
    PipelineConfig cfg = o.config_path.empty() ? PipelineConfig{} : parse_config(o.config_path);
    for (const std::string& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got `" + kv + "`");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed) cfg.seed = *o.seed;
    cfg.validate();
    return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<fs::path> files_in(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

void finish(const std::string& command, const PipelineConfig& cfg, const Workspace& ws, const std::string& started,
            const std::vector<fs::path>& dirs) {
    RunManifest m;
    m.command = command;
    m.config = to_key_values(cfg);
    m.seed = cfg.seed;
    m.tool_version = kToolVersion;
    m.started = started;
    for (const fs::path& d : dirs)
        for (fs::path& f : files_in(d)) m.artifacts.push_back(std::move(f));
    m.finished = utc_now();
    m.write(ws.root() / ("manifest_" + command + ".txt"));
}

// Each stage reads the artifacts of the previous ones from the workspace.
void synth_scene(const PipelineConfig& cfg, const Workspace& ws) {
    fs::create_directories(ws.root());
    ws.write_scene(synthesize_scene(scene_config(cfg)));
}

void train_coarse(const PipelineConfig& cfg, const Workspace& ws) {
    ws.write_coarse(stage_coarse(cfg, ws.read_scene()));
}

void make_dataset(const PipelineConfig& cfg, const Workspace& ws) {
    ws.write_dataset(stage_dataset(cfg, ws.read_scene(), ws.read_coarse()));
}

void fit_repair(const PipelineConfig& cfg, const Workspace& ws) {
    DatasetResult data;
    if (cfg.repair != RepairMode::identity) data = ws.read_dataset();
    ws.write_repair(stage_repair_fit(cfg, data));
}

void train_fine(const PipelineConfig& cfg, const Workspace& ws) {
    ws.write_fine(stage_fine(cfg, ws.read_scene(), ws.read_coarse().cloud, ws.read_repair()));
}

std::pair<MetricReport, MetricReport> evaluate_run(const Workspace& ws) {
    const Scene scene = ws.read_scene();
    MetricReport coarse = evaluate(ws.read_coarse().cloud, scene.held_out);
    MetricReport fine = evaluate(ws.read_fine(), scene.held_out);
    ws.write_metrics(coarse, fine);
    return {coarse, fine};
}

void run_all(const PipelineConfig& cfg, const Workspace& ws) {
    ExperimentLog log;
    log.config = to_key_values(cfg);
    const auto start = std::chrono::steady_clock::now();
    auto stage = [&](const std::string& name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        log.timings.push_back({name, seconds_since(t0)});
        std::fprintf(stderr, "%-10s %8.2f s\n", name.c_str(), log.timings.back().seconds);
    };
    stage("scene", [&] { synth_scene(cfg, ws); });
    stage("coarse", [&] { train_coarse(cfg, ws); });
    if (cfg.repair != RepairMode::identity) {
        stage("dataset", [&] { make_dataset(cfg, ws); });
        log.dataset_models_trained = ws.read_dataset().models_trained;
    }
    stage("repair_fit", [&] { fit_repair(cfg, ws); });
    stage("fine", [&] { train_fine(cfg, ws); });
    stage("evaluate", [&] { std::tie(log.coarse_metrics, log.final_metrics) = evaluate_run(ws); });
    const RepairModels models = ws.read_repair();
    log.calibration = models.calibration;
    log.refiner_report = models.refiner_report;
    log.total_seconds = seconds_since(start);
    write_file_atomic(ws.root() / "summary.txt", format_key_values(log.summary()));
    std::printf("coarse psnr %.3f ssim %.4f\nfinal  psnr %.3f ssim %.4f\n", log.coarse_metrics.psnr,
                log.coarse_metrics.ssim, log.final_metrics.psnr, log.final_metrics.ssim);
}

void bench_strategies(const PipelineConfig& base, const Workspace& ws) {
    synth_scene(base, ws);
    train_coarse(base, ws);
    const Scene scene = ws.read_scene();
    const CoarseResult coarse = ws.read_coarse();
    std::string csv = "strategy,seconds,models_trained\n";
    for (Strategy s : {Strategy::orm_online, Strategy::orm_offline, Strategy::loo}) {
        PipelineConfig cfg = base;
        cfg.strategy = s;
        const auto t0 = std::chrono::steady_clock::now();
        const DatasetResult r = stage_dataset(cfg, scene, coarse);
        const double secs = seconds_since(t0);
        csv += to_string(s) + "," + std::to_string(secs) + "," + std::to_string(r.models_trained) + "\n";
        std::printf("%-12s %8.3f s  models %d\n", to_string(s).c_str(), secs, r.models_trained);
    }
    fs::create_directories(ws.root() / "bench");
    write_file_atomic(ws.root() / "bench" / "strategies.csv", csv);
}

void mask_gen(const PipelineConfig& cfg, const Workspace& ws, const std::vector<double>& times) {
    const Scene scene = ws.read_scene();
    const fs::path dir = ws.root() / "masks";
    fs::create_directories(dir);
    std::string specs;
    for (std::size_t v = 0; v < scene.train.size(); ++v) {
        const MaskSpec spec = dataset_mask_spec(cfg, v);
        specs += to_key_values(spec);
        for (double t : times) {
            const MaskRaster r = rasterize_mask_detailed(spec, t, scene.train[v].object_mask);
            save_mask(r.mask, dir / ("view" + std::to_string(v) + "_t" + std::to_string(static_cast<long>(t)) + ".pgm"));
            std::printf("view %zu t %g masked fraction %.4f\n", v, t, r.fraction);
        }
    }
    write_file_atomic(dir / "specs.txt", specs);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-view Gaussian splatting with wavelet-domain repair"};
    app.require_subcommand(1);
    CommonOptions opts;
    std::vector<double> mask_times{0, 50, 100, 150};

    struct Command {
        const char* name;
        const char* help;
        std::vector<const char*> outputs;
        std::function<void(const PipelineConfig&, const Workspace&)> run;
    };
    const std::vector<Command> commands = {
        {"synth-scene", "Render the synthetic object from training and held-out cameras", {"scene"}, synth_scene},
        {"train-coarse", "Train the coarse model and cache the subbands of its renders", {"coarse"}, train_coarse},
        {"make-dataset", "Curate LL- and HF-domain corrupted/clean pairs", {"dataset"}, make_dataset},
        {"fit-repair", "Calibrate the LL inpainter and train the HF refiner", {"repair"}, fit_repair},
        {"train-fine", "Refine the coarse model with real and pseudo ground truths", {"fine"}, train_fine},
        {"evaluate", "Score the coarse and fine models on held-out views", {"eval"},
         [](const PipelineConfig&, const Workspace& ws) { evaluate_run(ws); }},
        {"run-all", "Run every stage in order", {"scene", "coarse", "dataset", "repair", "fine", "eval"}, run_all},
        {"bench-strategies", "Time the dataset stage under each curation strategy", {"bench"}, bench_strategies},
        {"mask-gen", "Write drifting masks for the training views as PGM files", {"masks"},
         [&](const PipelineConfig& cfg, const Workspace& ws) { mask_gen(cfg, ws, mask_times); }},
    };

    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", opts.config_path, "Config file of `key = value` lines")->check(CLI::ExistingFile);
        sub->add_option("--seed", opts.seed, "Global seed (overrides the config)");
        sub->add_option("--set", opts.overrides, "Override a config key, as key=value (repeatable)");
        sub->add_option("--workdir", opts.workdir, "Directory holding the run's artifacts")->capture_default_str();
        if (std::string(c.name) == "mask-gen")
            sub->add_option("--t", mask_times, "Iterations to rasterize")->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::usage);
    }

    try {
        const PipelineConfig cfg = resolve_config(opts);
        const Workspace ws(opts.workdir);
        for (const Command& c : commands) {
            if (!app.got_subcommand(c.name)) continue;
            const std::string started = utc_now();
            c.run(cfg, ws);
            std::vector<fs::path> dirs;
            for (const char* d : c.outputs)
                if (fs::exists(ws.root() / d)) dirs.push_back(ws.root() / d);
            finish(c.name, cfg, ws, started, dirs);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::data);
    }
    return 0;
}
