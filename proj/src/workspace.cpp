// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/workspace.hpp"

#include <chrono>
#include <ctime>
#include <map>
#include <sstream>

#include "wgs/error.hpp"

namespace wgs {
namespace fs = std::filesystem;
namespace {

std::string num(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

std::vector<double> numbers(const std::string& text, std::size_t expected, const std::string& what) {
    std::istringstream in(text);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof() || out.size() != expected)
        throw InvalidInput(what + ": expected " + std::to_string(expected) + " numbers");
    return out;
}

using Table = std::map<std::string, std::string>;

Table read_table(const fs::path& path) {
    Table t;
    for (const KeyValueLine& kv : parse_key_values(read_file(path))) t[kv.key] = kv.value;
    return t;
}

const std::string& lookup(const Table& t, const std::string& key, const fs::path& path) {
    auto it = t.find(key);
    if (it == t.end()) throw InvalidInput(path.string() + ": missing `" + key + "`");
    return it->second;
}

std::string indexed(const std::string& prefix, std::size_t i, const std::string& suffix) {
    return prefix + "_" + std::to_string(i) + suffix;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<Camera> read_cameras(const Table& t, const std::string& prefix, const fs::path& path) {
    const auto count = static_cast<std::size_t>(numbers(lookup(t, prefix + "_count", path), 1, path.string())[0]);
    std::vector<Camera> cams;
    for (std::size_t i = 0; i < count; ++i) cams.push_back(parse_camera(lookup(t, indexed(prefix, i, ""), path)));
    return cams;
}

void append_cameras(KeyValues& kv, const std::string& prefix, const std::vector<Camera>& cams) {
    kv.emplace_back(prefix + "_count", std::to_string(cams.size()));
    for (std::size_t i = 0; i < cams.size(); ++i) kv.emplace_back(indexed(prefix, i, ""), format_camera(cams[i]));
}

}  // namespace

std::string format_camera(const Camera& cam) {
    std::string s;
    for (int i = 0; i < 3; ++i) s += num(cam.position[i]) + " ";
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) s += num(cam.rotation(r, c)) + " ";
    s += num(cam.focal) + " " + std::to_string(cam.height) + " " + std::to_string(cam.width);
    return s;
}

Camera parse_camera(const std::string& text) {
    const auto v = numbers(text, 15, "camera");
    Camera cam;
    cam.position = Eigen::Vector3d(v[0], v[1], v[2]);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) cam.rotation(r, c) = v[3 + 3 * r + c];
    cam.focal = v[12];
    cam.height = static_cast<int>(v[13]);
    cam.width = static_cast<int>(v[14]);
    cam.validate();
    return cam;
}

std::string losses_csv(const std::vector<double>& losses) {
    std::string out = "iteration,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i) out += std::to_string(i) + "," + num(losses[i]) + "\n";
    return out;
}

std::string metrics_csv(const MetricReport& report) {
    std::string out = "view_id,psnr,ssim\n";
    for (const ViewMetric& m : report.per_view) out += m.view_id + "," + num(m.psnr) + "," + num(m.ssim) + "\n";
    return out;
}

void Workspace::write_scene(const Scene& scene) const {
    const fs::path dir = scene_dir();
    ensure_dir(dir);
    KeyValues kv;
    std::vector<Camera> train, held;
    for (const SceneView& v : scene.train) train.push_back(v.camera);
    for (const SceneView& v : scene.held_out) held.push_back(v.camera);
    append_cameras(kv, "train", train);
    append_cameras(kv, "heldout", held);
    write_file_atomic(dir / "cameras.txt", format_key_values(kv));
    for (std::size_t i = 0; i < scene.train.size(); ++i) {
        save_image(scene.train[i].image, dir / indexed("train", i, ".ppm"));
        save_mask(scene.train[i].object_mask, dir / indexed("train", i, "_mask.pgm"));
    }
    for (std::size_t i = 0; i < scene.held_out.size(); ++i) {
        save_image(scene.held_out[i].image, dir / indexed("heldout", i, ".ppm"));
        save_mask(scene.held_out[i].object_mask, dir / indexed("heldout", i, "_mask.pgm"));
    }
}

Scene Workspace::read_scene() const {
    const fs::path dir = scene_dir();
    const fs::path cams = dir / "cameras.txt";
    const Table t = read_table(cams);
    Scene scene;
    auto load = [&](const std::string& prefix, std::vector<SceneView>& out) {
        const auto list = read_cameras(t, prefix, cams);
        for (std::size_t i = 0; i < list.size(); ++i) {
            SceneView v;
            v.camera = list[i];
            v.image = load_image(dir / indexed(prefix, i, ".ppm"));
            v.object_mask = load_mask(dir / indexed(prefix, i, "_mask.pgm"));
            if (v.image.height != v.camera.height || v.image.width != v.camera.width || v.image.channels != 3)
                throw InvalidInput(indexed(prefix, i, ".ppm") + " does not match its camera");
            out.push_back(std::move(v));
        }
    };
    load("train", scene.train);
    load("heldout", scene.held_out);
    return scene;
}

void Workspace::write_coarse(const CoarseResult& r) const {
    const fs::path dir = coarse_dir();
    ensure_dir(dir);
    save_cloud(r.init, dir / "init.wgsc");
    save_cloud(r.cloud, dir / "coarse.wgsc");
    for (std::size_t i = 0; i < r.render_subbands.size(); ++i)
        save_subbands(r.render_subbands[i], dir / indexed("subbands", i, ".wsb"));
    write_file_atomic(dir / "losses.csv", losses_csv(r.losses));
}

CoarseResult Workspace::read_coarse() const {
    const fs::path dir = coarse_dir();
    CoarseResult r;
    r.init = load_cloud(dir / "init.wgsc");
    r.cloud = load_cloud(dir / "coarse.wgsc");
    for (std::size_t i = 0; fs::exists(dir / indexed("subbands", i, ".wsb")); ++i)
        r.render_subbands.push_back(load_subbands(dir / indexed("subbands", i, ".wsb")));
    return r;
}

void Workspace::write_dataset(const DatasetResult& r) const {
    const fs::path dir = dataset_dir();
    ensure_dir(dir);
    save_dataset(r.ll, dir / "ll.wspd");
    save_dataset(r.hf, dir / "hf.wspd");
    write_file_atomic(dir / "dataset.txt",
                      format_key_values({{"models_trained", std::to_string(r.models_trained)}}));
    write_file_atomic(dir / "losses.csv", losses_csv(r.losses));
    for (std::size_t i = 0; i < r.first_masks.size(); ++i) {
        save_mask(r.first_masks[i], dir / indexed("mask", i, "_first.pgm"));
        save_mask(r.last_masks[i], dir / indexed("mask", i, "_last.pgm"));
    }
}

DatasetResult Workspace::read_dataset() const {
    const fs::path dir = dataset_dir();
    DatasetResult r;
    r.ll = load_dataset(dir / "ll.wspd");
    r.hf = load_dataset(dir / "hf.wspd");
    const Table t = read_table(dir / "dataset.txt");
    r.models_trained = std::stoi(lookup(t, "models_trained", dir / "dataset.txt"));
    return r;
}

void Workspace::write_repair(const RepairModels& m) const {
    const fs::path dir = repair_dir();
    ensure_dir(dir);
    const LlCalibration& c = m.calibration;
    write_file_atomic(dir / "ll_repair.txt",
                      format_key_values({{"kind", to_string(m.ll.kind)},
                                         {"confidence_threshold", num(m.ll.inpaint.confidence_threshold)},
                                         {"keep_border_connected", m.ll.inpaint.keep_border_connected ? "1" : "0"},
                                         {"calibrated_threshold", num(c.threshold)},
                                         {"calibrated_keep_border_connected", c.keep_border_connected ? "1" : "0"},
                                         {"detection_iou", num(c.iou)},
                                         {"mse_before", num(c.mse_before)},
                                         {"mse_after", num(c.mse_after)},
                                         {"enabled", c.enabled ? "1" : "0"},
                                         {"hf_trained", m.hf_trained ? "1" : "0"},
                                         {"refiner_epochs", std::to_string(m.refiner_report.epochs_run)},
                                         {"refiner_best_epoch", std::to_string(m.refiner_report.best_epoch)},
                                         {"refiner_initial_val_loss", num(m.refiner_report.initial_val_loss)},
                                         {"refiner_best_val_loss", num(m.refiner_report.best_val_loss)}}));
    save_refiner(m.hf, dir / "refiner.wgrn");
    std::string val = "epoch,val_loss\n";
    for (std::size_t e = 0; e < m.refiner_report.val_losses.size(); ++e)
        val += std::to_string(e) + "," + num(m.refiner_report.val_losses[e]) + "\n";
    write_file_atomic(dir / "refiner_val.csv", val);
}

RepairModels Workspace::read_repair() const {
    const fs::path dir = repair_dir();
    const fs::path meta = dir / "ll_repair.txt";
    const Table t = read_table(meta);
    RepairModels m;
    const std::string& kind = lookup(t, "kind", meta);
    if (kind == "identity")
        m.ll.kind = RepairKind::identity;
    else if (kind == "ll-inpaint")
        m.ll.kind = RepairKind::ll_inpaint;
    else
        throw InvalidInput(meta.string() + ": unknown LL repair kind `" + kind + "`");
    m.ll.inpaint.confidence_threshold = std::stod(lookup(t, "confidence_threshold", meta));
    m.ll.inpaint.keep_border_connected = lookup(t, "keep_border_connected", meta) == "1";
    m.calibration.threshold = std::stod(lookup(t, "calibrated_threshold", meta));
    m.calibration.keep_border_connected = lookup(t, "calibrated_keep_border_connected", meta) == "1";
    m.calibration.iou = std::stod(lookup(t, "detection_iou", meta));
    m.calibration.mse_before = std::stod(lookup(t, "mse_before", meta));
    m.calibration.mse_after = std::stod(lookup(t, "mse_after", meta));
    m.calibration.enabled = lookup(t, "enabled", meta) == "1";
    m.hf_trained = lookup(t, "hf_trained", meta) == "1";
    m.refiner_report.epochs_run = std::stoi(lookup(t, "refiner_epochs", meta));
    m.refiner_report.best_epoch = std::stoi(lookup(t, "refiner_best_epoch", meta));
    m.refiner_report.initial_val_loss = std::stod(lookup(t, "refiner_initial_val_loss", meta));
    m.refiner_report.best_val_loss = std::stod(lookup(t, "refiner_best_val_loss", meta));
    m.hf = load_refiner(dir / "refiner.wgrn");
    return m;
}

void Workspace::write_fine(const FineResult& r) const {
    const fs::path dir = fine_dir();
    ensure_dir(dir);
    save_cloud(r.cloud, dir / "fine.wgsc");
    write_file_atomic(dir / "losses.csv", losses_csv(r.losses));
    KeyValues kv;
    append_cameras(kv, "novel", r.novel_cameras);
    kv.emplace_back("pseudo_steps", std::to_string(r.pseudo_steps));
    write_file_atomic(dir / "novel_cameras.txt", format_key_values(kv));
    for (std::size_t k = 0; k < r.pseudo_gt.size(); ++k)
        save_image(r.pseudo_gt[k], dir / indexed("pseudo_gt", k, ".ppm"));
}

GaussianCloud Workspace::read_fine() const { return load_cloud(fine_dir() / "fine.wgsc"); }

void Workspace::write_metrics(const MetricReport& coarse, const MetricReport& final_report) const {
    const fs::path dir = eval_dir();
    ensure_dir(dir);
    write_file_atomic(dir / "coarse_metrics.csv", metrics_csv(coarse));
    write_file_atomic(dir / "final_metrics.csv", metrics_csv(final_report));
}

void RunManifest::write(const fs::path& path) const {
    KeyValues kv{{"command", command}, {"seed", std::to_string(seed)}, {"tool_version", tool_version},
                 {"started", started}, {"finished", finished}};
    for (const auto& [k, v] : config) kv.emplace_back("config." + k, v);
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        if (!fs::exists(artifacts[i])) throw IoError("artifact missing at end of run: " + artifacts[i].string());
        kv.emplace_back(indexed("artifact", i, ""), artifacts[i].string());
    }
    write_file_atomic(path, format_key_values(kv));
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace wgs
