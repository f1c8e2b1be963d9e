// Copyright The wgs Authors
// SPDX-License-Identifier: Apache-2.0
#include "wgs/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

#include "wgs/error.hpp"

namespace wgs {
namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& s) {
    T v{};
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) throw ConfigError("cannot parse `" + s + "` for " + key);
    return v;
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

struct Field {
    const char* key;
    std::function<void(PipelineConfig&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Field number_field(const char* key, T PipelineConfig::*member) {
    return {key,
            [key, member](PipelineConfig& c, const std::string& v) { c.*member = parse_number<T>(key, v); },
            [member](const PipelineConfig& c) {
                if constexpr (std::is_floating_point_v<T>)
                    return format_double(c.*member);
                else
                    return std::to_string(c.*member);
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        number_field("n_views", &PipelineConfig::n_views),
        number_field("coarse_iters", &PipelineConfig::coarse_iters),
        number_field("dataset_iters", &PipelineConfig::dataset_iters),
        number_field("fine_iters", &PipelineConfig::fine_iters),
        number_field("n_m", &PipelineConfig::n_m),
        number_field("coverage", &PipelineConfig::coverage),
        number_field("lambda", &PipelineConfig::lambda),
        number_field("pseudo_gt_ratio", &PipelineConfig::pseudo_gt_ratio),
        number_field("novel_view_count", &PipelineConfig::novel_view_count),
        number_field("seed", &PipelineConfig::seed),
        {"strategy",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "orm-online")
                 c.strategy = Strategy::orm_online;
             else if (v == "orm-offline")
                 c.strategy = Strategy::orm_offline;
             else if (v == "loo")
                 c.strategy = Strategy::loo;
             else
                 throw ConfigError("strategy must be orm-online, orm-offline or loo, got `" + v + "`");
         },
         [](const PipelineConfig& c) { return to_string(c.strategy); }},
        {"repair",
         [](PipelineConfig& c, const std::string& v) {
             if (v == "identity")
                 c.repair = RepairMode::identity;
             else if (v == "wavelet")
                 c.repair = RepairMode::wavelet;
             else if (v == "wavelet+hf")
                 c.repair = RepairMode::wavelet_hf;
             else
                 throw ConfigError("repair must be identity, wavelet or wavelet+hf, got `" + v + "`");
         },
         [](const PipelineConfig& c) { return to_string(c.repair); }},
        number_field("image_size", &PipelineConfig::image_size),
        number_field("held_out_views", &PipelineConfig::held_out_views),
        number_field("scene_primitives", &PipelineConfig::scene_primitives),
        number_field("init_primitives", &PipelineConfig::init_primitives),
        number_field("refiner_max_epochs", &PipelineConfig::refiner_max_epochs),
        number_field("refiner_patience", &PipelineConfig::refiner_patience),
        number_field("refiner_lr", &PipelineConfig::refiner_lr),
        number_field("val_fraction", &PipelineConfig::val_fraction),
        number_field("pseudo_gt_refresh", &PipelineConfig::pseudo_gt_refresh),
    };
    return table;
}

const Field* find_field(const std::string& key) {
    for (const Field& f : fields())
        if (key == f.key) return &f;
    return nullptr;
}

// Checks whichever invariant involves `key`; an empty key checks them all.
void check(const PipelineConfig& c, const std::string& key) {
    auto want = [&](const char* k, bool ok, const std::string& msg) {
        if ((key.empty() || key == k) && !ok) throw ConfigError(std::string(k) + " " + msg);
    };
    want("n_views", c.n_views >= 2, "must be at least 2");
    for (auto [k, v] : {std::pair{"coarse_iters", c.coarse_iters}, {"dataset_iters", c.dataset_iters},
                        {"fine_iters", c.fine_iters}, {"n_m", c.n_m}, {"novel_view_count", c.novel_view_count},
                        {"held_out_views", c.held_out_views}, {"scene_primitives", c.scene_primitives},
                        {"init_primitives", c.init_primitives}, {"refiner_max_epochs", c.refiner_max_epochs},
                        {"refiner_patience", c.refiner_patience}})
        want(k, v >= 1, "must be at least 1");
    want("coverage", c.coverage > 0.0 && c.coverage < 1.0, "must lie in (0, 1)");
    want("lambda", c.lambda >= 0.0 && c.lambda <= 1.0, "must lie in [0, 1]");
    want("pseudo_gt_ratio", c.pseudo_gt_ratio >= 0.0 && c.pseudo_gt_ratio <= 1.0, "must lie in [0, 1]");
    want("image_size", c.image_size >= 22 && c.image_size % 2 == 0,
         "must be even and at least 22 so the half-resolution subbands fit an SSIM window");
    want("refiner_lr", c.refiner_lr > 0.0 && std::isfinite(c.refiner_lr), "must be positive");
    want("val_fraction", c.val_fraction > 0.0 && c.val_fraction < 1.0, "must lie in (0, 1)");
    want("pseudo_gt_refresh", c.pseudo_gt_refresh >= 0, "must be non-negative");
}

}  // namespace

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::orm_online: return "orm-online";
        case Strategy::orm_offline: return "orm-offline";
        case Strategy::loo: return "loo";
    }
    return "unknown";
}

std::string to_string(RepairMode r) {
    switch (r) {
        case RepairMode::identity: return "identity";
        case RepairMode::wavelet: return "wavelet";
        case RepairMode::wavelet_hf: return "wavelet+hf";
    }
    return "unknown";
}

void PipelineConfig::validate() const { check(*this, ""); }

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    const Field* f = find_field(key);
    if (!f) throw ConfigError("unknown key `" + key + "`");
    f->set(cfg, value);
    check(cfg, key);
}

PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig cfg;
    std::set<std::string> seen;
    for (const KeyValueLine& kv : parse_key_values(text)) {
        if (!seen.insert(kv.key).second) throw ConfigError("duplicate key `" + kv.key + "`", kv.line);
        try {
            set_config_value(cfg, kv.key, kv.value);
        } catch (const ConfigError& e) {
            throw ConfigError(e.detail(), kv.line);
        }
    }
    cfg.validate();
    return cfg;
}

PipelineConfig parse_config(const std::filesystem::path& path) {
    try {
        return parse_config_text(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.detail(), e.line());
    }
}

KeyValues to_key_values(const PipelineConfig& cfg) {
    KeyValues kv;
    for (const Field& f : fields()) kv.emplace_back(f.key, f.get(cfg));
    return kv;
}

}  // namespace wgs
