#include "fgdet/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace fgdet {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const char* where) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw std::runtime_error(std::string("checkpoint: unknown key '") + key +
                                          "' in " + where);
    }
}

std::vector<double> concat_field(const GapParams& p, const std::vector<double> GapUnit::* wp,
                                 const std::vector<double> NbpParams::* nf) {
    std::vector<double> out;
    for (const auto& u : p.units) {
        const std::vector<double>& v = nf ? u.nbp.*nf : u.*wp;
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

}  // namespace

std::string to_string(PreprocMode mode) {
    switch (mode) {
        case PreprocMode::Matched: return "matched";
        case PreprocMode::Generic: return "generic";
        case PreprocMode::Structured: return "structured";
    }
    throw std::logic_error("bad preprocessor mode");
}

std::string to_string(BandPolicy policy) {
    return policy == BandPolicy::Channel ? "channel" : "full";
}

PreprocMode preproc_mode_from_string(const std::string& s) {
    if (s == "matched") return PreprocMode::Matched;
    if (s == "generic") return PreprocMode::Generic;
    if (s == "structured") return PreprocMode::Structured;
    throw std::runtime_error("unknown preprocessor mode '" + s + "'");
}

BandPolicy band_policy_from_string(const std::string& s) {
    if (s == "channel") return BandPolicy::Channel;
    if (s == "full") return BandPolicy::Full;
    throw std::runtime_error("unknown band policy '" + s + "'");
}

std::string checkpoint_to_json(const Checkpoint& ck) {
    json shape;
    shape["stages"] = ck.shape.stages;
    shape["branches"] = ck.shape.branches;
    shape["iters"] = ck.shape.iters;
    shape["K"] = ck.K;
    shape["L"] = ck.L;
    shape["preproc_len"] = ck.shape.preproc_len;
    shape["mode"] = to_string(ck.shape.mode);
    shape["band_policy"] = to_string(ck.shape.policy);
    shape["tied"] = ck.shape.tied;

    json params;
    params["w_v"] = concat_field(ck.params, nullptr, &NbpParams::w_v);
    params["w_f"] = concat_field(ck.params, nullptr, &NbpParams::w_f);
    params["kappa"] = concat_field(ck.params, nullptr, &NbpParams::kappa);
    params["lambda"] = concat_field(ck.params, nullptr, &NbpParams::lambda);
    params["w_p"] = concat_field(ck.params, &GapUnit::w_p, nullptr);
    std::vector<double> taps;
    for (const auto& u : ck.params.units)
        for (const auto& t : u.pre.taps) {
            taps.push_back(t.re);
            taps.push_back(t.im);
        }
    params["preproc_taps"] = taps;

    json root;
    root["format_version"] = kCheckpointFormatVersion;
    root["shape"] = shape;
    root["params"] = params;
    return root.dump(2) + "\n";
}

namespace {

Checkpoint checkpoint_from_parsed(const json& root) {
    reject_unknown(root, {"format_version", "shape", "params"}, "root");
    if (root.at("format_version").get<int>() != kCheckpointFormatVersion)
        throw std::runtime_error("checkpoint: unsupported format version");

    const json& shape = root.at("shape");
    reject_unknown(shape,
                   {"stages", "branches", "iters", "K", "L", "preproc_len", "mode", "band_policy",
                    "tied"},
                   "shape");
    Checkpoint ck;
    ck.shape.stages = shape.at("stages").get<int>();
    ck.shape.branches = shape.at("branches").get<int>();
    ck.shape.iters = shape.at("iters").get<int>();
    ck.K = shape.at("K").get<int>();
    ck.L = shape.at("L").get<int>();
    ck.shape.preproc_len = shape.at("preproc_len").get<int>();
    ck.shape.mode = preproc_mode_from_string(shape.at("mode").get<std::string>());
    ck.shape.policy = band_policy_from_string(shape.at("band_policy").get<std::string>());
    ck.shape.tied = shape.at("tied").get<bool>();
    if (ck.shape.stages < 1 || ck.shape.branches < 1 || ck.shape.iters < 1 || ck.K < 1 || ck.L < 0)
        throw std::runtime_error("checkpoint: invalid shape");

    const ChannelTaps dims{std::vector<cplx>((std::size_t)ck.L + 1, cplx(1.0, 0.0))};
    const int band = observation_band(dims, ck.shape.mode, ck.shape.preproc_len, ck.shape.policy);
    const std::size_t units = (std::size_t)ck.shape.stages * ck.shape.branches;
    const std::size_t kp = ck.shape.tied ? 1 : (std::size_t)ck.K;
    const std::size_t n = (std::size_t)ck.shape.iters;
    const std::size_t per_wv = n * kp * 2 * band, per_kap = n * kp * 3, per_lam = n * kp * band;

    const json& params = root.at("params");
    reject_unknown(params, {"w_v", "w_f", "kappa", "lambda", "w_p", "preproc_taps"}, "params");
    auto field = [&](const char* name, std::size_t per_unit) {
        const auto v = params.at(name).get<std::vector<double>>();
        if (v.size() != per_unit * units)
            throw std::runtime_error(std::string("checkpoint: field '") + name +
                                     "' has the wrong length");
        return v;
    };
    const auto wv = field("w_v", per_wv), wf = field("w_f", per_wv), kap = field("kappa", per_kap),
               lam = field("lambda", per_lam), wp = field("w_p", n),
               taps = field("preproc_taps", 2 * (std::size_t)ck.shape.preproc_len);

    ck.params.shape = ck.shape;
    ck.params.units.resize(units);
    for (std::size_t u = 0; u < units; ++u) {
        GapUnit& unit = ck.params.units[u];
        unit.nbp.N = ck.shape.iters;
        unit.nbp.K = ck.shape.tied ? 1 : ck.K;
        unit.nbp.band = band;
        unit.nbp.tied = ck.shape.tied;
        unit.nbp.w_v.assign(wv.begin() + u * per_wv, wv.begin() + (u + 1) * per_wv);
        unit.nbp.w_f.assign(wf.begin() + u * per_wv, wf.begin() + (u + 1) * per_wv);
        unit.nbp.kappa.assign(kap.begin() + u * per_kap, kap.begin() + (u + 1) * per_kap);
        unit.nbp.lambda.assign(lam.begin() + u * per_lam, lam.begin() + (u + 1) * per_lam);
        unit.w_p.assign(wp.begin() + u * n, wp.begin() + (u + 1) * n);
        unit.pre.mode = ck.shape.mode;
        unit.pre.taps.resize(ck.shape.preproc_len);
        for (int t = 0; t < ck.shape.preproc_len; ++t) {
            unit.pre.taps[t].re = taps[u * 2 * ck.shape.preproc_len + 2 * t];
            unit.pre.taps[t].im = taps[u * 2 * ck.shape.preproc_len + 2 * t + 1];
        }
    }
    return ck;
}

}  // namespace

Checkpoint checkpoint_from_json(const std::string& text) {
    // Surface every malformed-input failure (bad JSON, missing keys, wrong
    // element types) under one exception type with a checkpoint-scoped message.
    try {
        return checkpoint_from_parsed(json::parse(text));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("checkpoint: malformed file: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    f << checkpoint_to_json(ck);
    if (!f) throw std::runtime_error("checkpoint: write to '" + path + "' failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return checkpoint_from_json(text);
}

}  // namespace fgdet
