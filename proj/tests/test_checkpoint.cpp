#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "fgdet/channel.hpp"
#include "fgdet/checkpoint.hpp"
#include "fgdet/training.hpp"

using namespace fgdet;

namespace {

Checkpoint sample_checkpoint() {
    const auto taps = channel_by_name("proakis-b");
    GapShape shape;
    shape.stages = 2;
    shape.branches = 2;
    shape.iters = 3;
    shape.mode = PreprocMode::Structured;
    shape.preproc_len = 4;
    shape.policy = BandPolicy::Channel;
    shape.tied = true;

    Checkpoint ck;
    ck.shape = shape;
    ck.K = 16;
    ck.L = taps.L();
    ck.params = init_gap_params(shape, taps, ck.K, 77);
    // Make the values visibly non-default.
    auto x = flatten_params(ck.params);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += 0.001 * (double)i;
    ck.params = unflatten_params(shape, taps, ck.K, x);
    return ck;
}

}  // namespace

TEST_SUITE("checkpoint") {
    TEST_CASE("serialize, parse, and re-serialize byte-identically") {
        const auto ck = sample_checkpoint();
        const std::string text = checkpoint_to_json(ck);
        const auto back = checkpoint_from_json(text);
        CHECK(checkpoint_to_json(back) == text);

        CHECK(back.K == ck.K);
        CHECK(back.L == ck.L);
        CHECK(back.shape.stages == 2);
        CHECK(back.shape.branches == 2);
        CHECK(back.shape.iters == 3);
        CHECK(back.shape.mode == PreprocMode::Structured);
        CHECK(back.shape.preproc_len == 4);
        CHECK(back.shape.tied);
        CHECK(flatten_params(back.params) == flatten_params(ck.params));
    }

    TEST_CASE("file round trip") {
        const auto ck = sample_checkpoint();
        const std::string path = "test_checkpoint_roundtrip.json";
        save_checkpoint(path, ck);
        const auto back = load_checkpoint(path);
        CHECK(flatten_params(back.params) == flatten_params(ck.params));

        // Saving the loaded checkpoint reproduces the file exactly.
        const std::string path2 = "test_checkpoint_roundtrip2.json";
        save_checkpoint(path2, back);
        std::ifstream f1(path), f2(path2);
        const std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
        const std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
        CHECK(s1 == s2);
        CHECK(!s1.empty());
        CHECK(s1.back() == '\n');
        f1.close();
        f2.close();
        std::remove(path.c_str());
        std::remove(path2.c_str());
    }

    TEST_CASE("matched-mode checkpoints carry no taps") {
        const auto taps = channel_by_name("proakis-b");
        GapShape shape;
        shape.iters = 2;
        Checkpoint ck;
        ck.shape = shape;
        ck.K = 8;
        ck.L = taps.L();
        ck.params = init_gap_params(shape, taps, ck.K, 1);
        const auto text = checkpoint_to_json(ck);
        const auto back = checkpoint_from_json(text);
        CHECK(back.params.units[0].pre.taps.empty());
        CHECK(flatten_params(back.params) == flatten_params(ck.params));
    }

    TEST_CASE("unknown keys are rejected everywhere") {
        const auto ck = sample_checkpoint();
        std::string text = checkpoint_to_json(ck);

        auto inject = [&](const std::string& anchor, const std::string& extra) {
            std::string t = text;
            const auto pos = t.find(anchor);
            REQUIRE(pos != std::string::npos);
            t.insert(pos, extra);
            return t;
        };
        // Top level.
        CHECK_THROWS_AS(checkpoint_from_json(inject("\"format_version\"", "\"surprise\": 1, ")),
                        std::runtime_error);
        // Inside shape.
        CHECK_THROWS_AS(checkpoint_from_json(inject("\"stages\"", "\"surprise\": 1, ")),
                        std::runtime_error);
        // Inside params.
        CHECK_THROWS_AS(checkpoint_from_json(inject("\"w_v\"", "\"surprise\": [], ")),
                        std::runtime_error);
    }

    TEST_CASE("wrong version and malformed shapes are rejected") {
        const auto ck = sample_checkpoint();
        std::string text = checkpoint_to_json(ck);

        std::string bumped = text;
        const auto pos = bumped.find("\"format_version\": 1");
        REQUIRE(pos != std::string::npos);
        bumped.replace(pos, std::string("\"format_version\": 1").size(), "\"format_version\": 2");
        CHECK_THROWS_AS(checkpoint_from_json(bumped), std::runtime_error);

        // Truncating a parameter array breaks the length check.
        auto mutilated = checkpoint_from_json(text);
        mutilated.params.units[0].nbp.w_v.pop_back();
        CHECK_THROWS_AS(checkpoint_from_json(checkpoint_to_json(mutilated)), std::runtime_error);

        // Plain garbage.
        CHECK_THROWS_AS(checkpoint_from_json("not json at all"), std::runtime_error);
        CHECK_THROWS_AS(checkpoint_from_json("{}"), std::runtime_error);
    }

    TEST_CASE("missing file throws") {
        CHECK_THROWS_AS(load_checkpoint("definitely_missing_checkpoint.json"), std::runtime_error);
    }

    TEST_CASE("mode strings round trip") {
        for (auto mode : {PreprocMode::Matched, PreprocMode::Generic, PreprocMode::Structured})
            CHECK(preproc_mode_from_string(to_string(mode)) == mode);
        for (auto policy : {BandPolicy::Channel, BandPolicy::Full})
            CHECK(band_policy_from_string(to_string(policy)) == policy);
        CHECK_THROWS_AS(preproc_mode_from_string("other"), std::runtime_error);
        CHECK_THROWS_AS(band_policy_from_string("other"), std::runtime_error);
    }
}
