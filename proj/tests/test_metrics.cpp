#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fgdet/metrics.hpp"

using namespace fgdet;

namespace {

// log2(1 + e^x) at extended precision, for frozen-value cross-checks.
long double softplus2_ld(long double x) {
    return (x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x))) /
           std::log((long double)2.0);
}

DetectorOutput make_output(int K, int M, std::vector<double> log_app) {
    DetectorOutput out;
    out.K = K;
    out.M = M;
    out.log_app = std::move(log_app);
    return out;
}

}  // namespace

TEST_SUITE("metrics") {
    TEST_CASE("bit groups partition the constellation") {
        for (const char* name : {"bpsk", "qpsk", "16qam"}) {
            const auto cons = make_constellation(name);
            const auto bg = make_bit_groups(cons);
            REQUIRE(bg.bits == cons.bits);
            for (int i = 0; i < bg.bits; ++i) {
                CHECK((int)(bg.zero[i].size() + bg.one[i].size()) == cons.M);
                CHECK(bg.zero[i].size() == bg.one[i].size());
                std::set<int> all(bg.zero[i].begin(), bg.zero[i].end());
                all.insert(bg.one[i].begin(), bg.one[i].end());
                CHECK((int)all.size() == cons.M);
                for (int s : bg.zero[i]) CHECK(cons.label_bit(s, i) == 0);
                for (int s : bg.one[i]) CHECK(cons.label_bit(s, i) == 1);
            }
        }
    }

    TEST_CASE("bit error counting") {
        const auto cons = make_constellation("16qam");
        // Two symbols: decisions 5 vs truth 5 (0 errors), 12 vs 10
        // (12^10 = 0b0110 -> 2 bit errors).
        std::vector<double> app(2 * 16, -20.0);
        app[0 * 16 + 5] = 0.0;
        app[1 * 16 + 12] = 0.0;
        const auto out = make_output(2, 16, std::move(app));
        ErrorCount ec;
        count_bit_errors(out, {5, 10}, cons, ec);
        CHECK(ec.bits == 8);
        CHECK(ec.errors == 2);
        CHECK(ec.rate() == doctest::Approx(0.25));

        // Accumulation keeps adding.
        count_bit_errors(out, {5, 12}, cons, ec);
        CHECK(ec.bits == 16);
        CHECK(ec.errors == 2);
    }

    TEST_CASE("argmax decision ties go to the lowest label") {
        const auto cons = make_constellation("bpsk");
        const auto out = make_output(1, 2, {-0.693, -0.693});
        ErrorCount ec;
        count_bit_errors(out, {1}, cons, ec);
        CHECK(ec.errors == 1);  // tie decided as symbol 0, truth is 1
    }

    TEST_CASE("bitwise llr on bpsk is the posterior log ratio") {
        const auto cons = make_constellation("bpsk");
        const auto bg = make_bit_groups(cons);
        const auto out = make_output(2, 2, {-0.2, -1.7, -3.0, -0.05});
        const auto llr = bitwise_llrs(out, bg);
        REQUIRE(llr.size() == 2);
        CHECK(llr[0] == doctest::Approx(-0.2 + 1.7).epsilon(1e-12));
        CHECK(llr[1] == doctest::Approx(-3.0 + 0.05).epsilon(1e-12));

        // Scaling multiplies, clipping saturates.
        const auto scaled = bitwise_llrs(out, bg, 3.0);
        CHECK(scaled[0] == doctest::Approx(4.5).epsilon(1e-12));
        const auto clipped = bitwise_llrs(out, bg, 100.0);
        CHECK(clipped[0] == doctest::Approx(kLlrClip));
        CHECK(clipped[1] == doctest::Approx(-kLlrClip));
    }

    TEST_CASE("qpsk llrs marginalize over the other bit") {
        const auto cons = make_constellation("qpsk");
        const auto bg = make_bit_groups(cons);
        const std::vector<double> app = {-0.9, -1.4, -2.2, -0.8};
        const auto out = make_output(1, 4, std::vector<double>(app));
        const auto llr = bitwise_llrs(out, bg);
        REQUIRE(llr.size() == 2);
        for (int i = 0; i < 2; ++i) {
            double l0 = -1e300, l1 = -1e300;
            for (int m = 0; m < 4; ++m) {
                if (cons.label_bit(m, i) == 0)
                    l0 = max_star(l0, app[m]);
                else
                    l1 = max_star(l1, app[m]);
            }
            CHECK(llr[i] == doctest::Approx(l0 - l1).epsilon(1e-12));
        }
    }

    TEST_CASE("bank-based information rate has a frozen single-bit value") {
        const auto cons = make_constellation("bpsk");
        const auto bg = make_bit_groups(cons);
        // One symbol with posterior log-ratio exactly 2, transmitted bit 0.
        const double l0 = std::log(1.0 / (1.0 + std::exp(-2.0)));
        const double l1 = std::log(std::exp(-2.0) / (1.0 + std::exp(-2.0)));
        const auto out = make_output(1, 2, {l0, l1});

        LlrBank bank;
        bank.add_block(out, {0}, cons, bg);
        REQUIRE(bank.llr.size() == 1);
        CHECK(bank.llr[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(bank.bit[0] == 0);

        const double penalty = (double)softplus2_ld(-2.0L);
        CHECK(penalty == doctest::Approx(0.183119).epsilon(1e-5));
        CHECK(bmi_at(bank, 1.0) == doctest::Approx(1.0 - penalty).epsilon(1e-12));
    }

    TEST_CASE("uninformative llrs give zero rate, perfect ones approach capacity") {
        const auto cons = make_constellation("qpsk");
        const auto bg = make_bit_groups(cons);
        LlrBank zero;
        zero.bits_per_symbol = 2;
        zero.llr = {0.0, 0.0, 0.0, 0.0};
        zero.bit = {0, 1, 1, 0};
        CHECK(bmi_at(zero, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

        LlrBank perfect;
        perfect.bits_per_symbol = 2;
        perfect.llr = {200.0, -200.0, -200.0, 200.0};
        perfect.bit = {0, 1, 1, 0};
        // Clipping at 50 still leaves ~2^-72 penalty per bit.
        CHECK(bmi_at(perfect, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    }

    TEST_CASE("wrong-sign llrs are penalized") {
        LlrBank bank;
        bank.bits_per_symbol = 1;
        bank.llr = {4.0};
        bank.bit = {1};  // llr points to bit 0, truth is 1
        CHECK(bmi_at(bank, 1.0) < 0.0);
    }

    TEST_CASE("scale calibration recovers a known miscalibration") {
        // Well-calibrated llrs for bit b are distributed as N(+-2/s^2...); a
        // simple synthetic: draw calibrated llr l, store s*l, and the
        // optimizer should find alpha near 1/s.
        const double s = 4.0;
        LlrBank bank;
        bank.bits_per_symbol = 1;
        unsigned long long state = 88172645463325252ull;
        auto next_u = [&]() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            return (double)(state >> 11) / 9007199254740992.0;
        };
        for (int i = 0; i < 20000; ++i) {
            const double u1 = next_u(), u2 = next_u();
            const double g = std::sqrt(-2.0 * std::log(u1 + 1e-300)) * std::cos(6.283185307179586 * u2);
            const int b = next_u() < 0.5 ? 0 : 1;
            const double mean = 2.0;  // calibrated llr ~ N(2, 4) toward the true bit
            const double l = mean + 2.0 * g;
            bank.llr.push_back(s * (b == 0 ? l : -l));
            bank.bit.push_back((unsigned char)b);
        }
        const auto res = optimize_alpha(bank);
        CHECK(res.alpha == doctest::Approx(1.0 / s).epsilon(0.25));
        CHECK(res.bmi >= bmi_at(bank, 1.0));
        CHECK(res.bmi == doctest::Approx(bmi_at(bank, res.alpha)).epsilon(1e-12));
    }

    TEST_CASE("calibration never loses to the uncalibrated scale") {
        // Already calibrated: alpha = 1 must be kept (ties break toward 1).
        LlrBank bank;
        bank.bits_per_symbol = 1;
        for (int i = 0; i < 500; ++i) {
            const double l = 1.0 + 0.001 * i;
            bank.llr.push_back(i % 2 ? -l : l);
            bank.bit.push_back((unsigned char)(i % 2));
        }
        const auto res = optimize_alpha(bank);
        CHECK(res.bmi >= bmi_at(bank, 1.0));
    }

    TEST_CASE("empty bank degrades gracefully") {
        LlrBank bank;
        bank.bits_per_symbol = 1;
        const auto res = optimize_alpha(bank);
        CHECK(res.alpha == 1.0);
        CHECK(res.bmi == 0.0);
        CHECK(bmi_at(bank, 1.0) == 0.0);
    }
}
