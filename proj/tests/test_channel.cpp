#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fgdet/channel.hpp"

using namespace fgdet;

TEST_SUITE("channel") {
    TEST_CASE("reference channels are pinned") {
        const auto a = channel_by_name("proakis-a");
        REQUIRE(a.h.size() == 11);
        CHECK(a.h[0].real() == doctest::Approx(0.04));
        CHECK(a.h[3].real() == doctest::Approx(-0.21));
        CHECK(a.h[5].real() == doctest::Approx(0.72));
        CHECK(a.h[10].real() == doctest::Approx(0.07));

        const auto b = channel_by_name("proakis-b");
        REQUIRE(b.h.size() == 3);
        CHECK(b.h[0].real() == doctest::Approx(0.407));
        CHECK(b.h[1].real() == doctest::Approx(0.815));
        CHECK(b.h[2].real() == doctest::Approx(0.407));
        CHECK(b.L() == 2);

        const auto c = channel_by_name("proakis-c");
        REQUIRE(c.h.size() == 5);
        CHECK(c.h[2].real() == doctest::Approx(0.688));
        CHECK(c.h[0].real() == c.h[4].real());
        CHECK(c.h[1].real() == c.h[3].real());

        const auto bm = channel_by_name("proakis-b-mismatched");
        REQUIRE(bm.h.size() == 3);
        CHECK(bm.h[0].real() == doctest::Approx(0.59));
        CHECK(bm.h[1].real() == doctest::Approx(0.76));
        CHECK(bm.h[2].real() == doctest::Approx(0.28));

        CHECK_THROWS_AS(channel_by_name("proakis-d"), std::invalid_argument);
    }

    TEST_CASE("explicit tap lists parse") {
        const auto real2 = parse_channel("0.8;0.6");
        REQUIRE(real2.h.size() == 2);
        CHECK(real2.h[0].real() == doctest::Approx(0.8));
        CHECK(real2.h[0].imag() == doctest::Approx(0.0));
        CHECK(real2.h[1].real() == doctest::Approx(0.6));

        const auto cx = parse_channel("1,0;0,1");
        REQUIRE(cx.h.size() == 2);
        CHECK(cx.h[0].real() == doctest::Approx(1.0));
        CHECK(cx.h[0].imag() == doctest::Approx(0.0));
        CHECK(cx.h[1].real() == doctest::Approx(0.0));
        CHECK(cx.h[1].imag() == doctest::Approx(1.0));

        // Names pass through the same entry point.
        CHECK(parse_channel("proakis-b").h.size() == 3);

        CHECK_THROWS_AS(parse_channel("not;a;number"), std::invalid_argument);
        CHECK_THROWS_AS(parse_channel(""), std::invalid_argument);
    }

    TEST_CASE("noise variance from target snr") {
        // ||h||^2 = 0.407^2 + 0.815^2 + 0.407^2 = 0.995523; at 10 dB with one
        // bit per symbol: sigma^2 = 0.995523 / 10 = 0.0995523.
        const auto b = channel_by_name("proakis-b");
        CHECK(noise_sigma_sq(b, 10.0, 1) == doctest::Approx(0.0995523).epsilon(1e-12));
        // 0 dB, one bit: sigma^2 = ||h||^2.
        const auto id = parse_channel("1");
        CHECK(noise_sigma_sq(id, 0.0, 1) == doctest::Approx(1.0).epsilon(1e-12));
        // More bits per symbol lowers the per-symbol noise for the same Eb/N0.
        CHECK(noise_sigma_sq(b, 10.0, 2) == doctest::Approx(0.0995523 / 2).epsilon(1e-12));
        CHECK_THROWS_AS(noise_sigma_sq(b, 10.0, 0), std::invalid_argument);
        CHECK_THROWS_AS(noise_sigma_sq(ChannelTaps{{}}, 10.0, 1), std::invalid_argument);
    }

    TEST_CASE("convolution matrix layout") {
        // h = (0.8, 0.6), K = 2: H is 3x4 with h_1 on the main band.
        const auto taps = parse_channel("0.8;0.6");
        const auto H = convolution_matrix(taps, 2);
        REQUIRE(H.size() == 3);
        REQUIRE(H[0].size() == 4);
        CHECK(H[0][0].real() == doctest::Approx(0.6));
        CHECK(H[0][1].real() == doctest::Approx(0.8));
        CHECK(H[0][2].real() == doctest::Approx(0.0));
        CHECK(H[0][3].real() == doctest::Approx(0.0));
        CHECK(H[1][0].real() == doctest::Approx(0.0));
        CHECK(H[1][1].real() == doctest::Approx(0.6));
        CHECK(H[1][2].real() == doctest::Approx(0.8));
        CHECK(H[2][2].real() == doctest::Approx(0.6));
        CHECK(H[2][3].real() == doctest::Approx(0.8));
    }

    TEST_CASE("extend and convolve a tiny block") {
        // K = 1, h = (0.8, 0.6), BPSK all-ones boundary: extended symbols are
        // (+1, +1, +1), so y = (0.8 + 0.6, 0.8 + 0.6) = (1.4, 1.4).
        const auto taps = parse_channel("0.8;0.6");
        const auto cons = make_constellation("bpsk");
        const auto ext = extend_symbols(taps, cons, {0}, 0);
        REQUIRE(ext.size() == 3);
        const auto y = apply_channel(taps, ext);
        REQUIRE(y.size() == 2);
        CHECK(y[0].real() == doctest::Approx(1.4).epsilon(1e-15));
        CHECK(y[1].real() == doctest::Approx(1.4).epsilon(1e-15));
    }

    TEST_CASE("noiseless transmit matches the dense matrix") {
        const auto taps = channel_by_name("proakis-b");
        const auto cons = make_constellation("qpsk");
        Rng rng(321);
        const auto block = transmit(taps, cons, 0.0, 6, 0, rng);
        REQUIRE(block.symbols.size() == 6);
        REQUIRE(block.y.size() == 6 + 2);

        const auto ext = extend_symbols(taps, cons, block.symbols, 0);
        const auto H = convolution_matrix(taps, 6);
        for (std::size_t r = 0; r < H.size(); ++r) {
            cplx acc = 0.0;
            for (std::size_t c = 0; c < H[r].size(); ++c) acc += H[r][c] * ext[c];
            CHECK(std::abs(acc - block.y[r]) < 1e-12);
        }
    }

    TEST_CASE("noise power matches the requested variance") {
        const auto taps = parse_channel("1");
        const auto cons = make_constellation("bpsk");
        Rng rng(99);
        double sum = 0.0;
        int n = 0;
        for (int trial = 0; trial < 2000; ++trial) {
            const auto block = transmit(taps, cons, 0.5, 4, 0, rng);
            const auto ext = extend_symbols(taps, cons, block.symbols, 0);
            const auto clean = apply_channel(taps, ext);
            for (std::size_t k = 0; k < clean.size(); ++k) {
                sum += std::norm(block.y[k] - clean[k]);
                ++n;
            }
        }
        CHECK(sum / n == doctest::Approx(0.5).epsilon(0.05));
    }
}
