#include "fgdet/config.hpp"

#include <fstream>

#include <json.hpp>

#include "fgdet/checkpoint.hpp"

namespace fgdet {

namespace {

using nlohmann::json;

json parse_or_config_error(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const char* where) {
    if (!obj.is_object()) throw ConfigError(std::string("config: ") + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError(std::string("config: unknown key '") + key + "' in " + where);
    }
}

template <class T>
void get_if(const json& obj, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

GapShape shape_from_json(const json& obj) {
    reject_unknown(obj, {"stages", "branches", "iters", "mode", "preproc_len", "band_policy", "tied"},
                   "shape");
    GapShape s;
    get_if(obj, "stages", s.stages);
    get_if(obj, "branches", s.branches);
    get_if(obj, "iters", s.iters);
    get_if(obj, "preproc_len", s.preproc_len);
    get_if(obj, "tied", s.tied);
    std::string mode = "matched", policy = "channel";
    get_if(obj, "mode", mode);
    get_if(obj, "band_policy", policy);
    try {
        s.mode = preproc_mode_from_string(mode);
        s.policy = band_policy_from_string(policy);
    } catch (const std::runtime_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (s.stages < 1 || s.branches < 1 || s.iters < 1)
        throw ConfigError("config: shape needs stages, branches, iters >= 1");
    if (s.mode == PreprocMode::Matched ? s.preproc_len != 0 : s.preproc_len < 1)
        throw ConfigError("config: preproc_len must be 0 under matched mode, >= 1 otherwise");
    return s;
}

}  // namespace

SweepConfig sweep_config_from_json(const std::string& text) {
    const json root = parse_or_config_error(text);
    reject_unknown(root,
                   {"channel", "constellation", "K", "boundary_index", "ebno_db", "detectors",
                    "iters", "blocks", "min_bits", "seed", "alpha", "fixed_alpha", "checkpoint",
                    "lmmse_order"},
                   "root");
    SweepConfig c;
    get_if(root, "channel", c.channel);
    get_if(root, "constellation", c.constellation);
    get_if(root, "K", c.K);
    get_if(root, "boundary_index", c.boundary_index);
    get_if(root, "ebno_db", c.ebno_db);
    get_if(root, "detectors", c.detectors);
    get_if(root, "iters", c.iters);
    get_if(root, "blocks", c.blocks);
    get_if(root, "min_bits", c.min_bits);
    get_if(root, "seed", c.seed);
    get_if(root, "alpha", c.alpha);
    get_if(root, "fixed_alpha", c.fixed_alpha);
    get_if(root, "checkpoint", c.checkpoint);
    get_if(root, "lmmse_order", c.lmmse_order);

    if (c.K < 1) throw ConfigError("config: K must be >= 1");
    if (c.blocks < 1) throw ConfigError("config: blocks must be >= 1");
    if (c.iters < 1) throw ConfigError("config: iters must be >= 1");
    if (c.ebno_db.empty()) throw ConfigError("config: ebno_db must be non-empty");
    if (c.detectors.empty()) throw ConfigError("config: detectors must be non-empty");
    if (c.alpha != "golden" && c.alpha != "fixed")
        throw ConfigError("config: alpha must be 'golden' or 'fixed'");
    for (const auto& d : c.detectors)
        if (d != "bcjr" && d != "bruteforce" && d != "lmmse" && d != "ufg" && d != "gfg" &&
            d != "gap")
            throw ConfigError("config: unknown detector '" + d + "'");
    return c;
}

TrainJobConfig train_config_from_json(const std::string& text) {
    const json root = parse_or_config_error(text);
    reject_unknown(root,
                   {"channel", "constellation", "K", "ebno_db", "boundary_index", "shape", "steps",
                    "blocks_per_step", "lr", "seed", "taps_only", "multiloss", "init_checkpoint",
                    "eval_blocks"},
                   "root");
    TrainJobConfig c;
    get_if(root, "channel", c.channel);
    get_if(root, "constellation", c.constellation);
    get_if(root, "K", c.K);
    get_if(root, "ebno_db", c.ebno_db);
    get_if(root, "boundary_index", c.boundary_index);
    if (root.contains("shape")) c.shape = shape_from_json(root.at("shape"));
    get_if(root, "steps", c.steps);
    get_if(root, "blocks_per_step", c.blocks_per_step);
    get_if(root, "lr", c.lr);
    get_if(root, "seed", c.seed);
    get_if(root, "taps_only", c.taps_only);
    get_if(root, "multiloss", c.multiloss);
    get_if(root, "init_checkpoint", c.init_checkpoint);
    get_if(root, "eval_blocks", c.eval_blocks);

    if (c.K < 1) throw ConfigError("config: K must be >= 1");
    if (c.steps < 1 || c.blocks_per_step < 1)
        throw ConfigError("config: steps and blocks_per_step must be >= 1");
    if (!(c.lr > 0.0)) throw ConfigError("config: lr must be positive");
    if (c.eval_blocks < 1) throw ConfigError("config: eval_blocks must be >= 1");
    return c;
}

namespace {
std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("config: cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}
}  // namespace

SweepConfig load_sweep_config(const std::string& path) { return sweep_config_from_json(slurp(path)); }
TrainJobConfig load_train_config(const std::string& path) { return train_config_from_json(slurp(path)); }

}  // namespace fgdet
