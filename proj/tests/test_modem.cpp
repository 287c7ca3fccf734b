#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "fgdet/modem.hpp"

using namespace fgdet;

namespace {

// Hamming distance between two symbol labels.
int hamming(int a, int b) {
    int d = 0, x = a ^ b;
    while (x) {
        d += x & 1;
        x >>= 1;
    }
    return d;
}

// Every pair of nearest-neighbour points must differ in exactly one bit.
void check_gray_neighbours(const Constellation& cons) {
    const int M = cons.M;
    double dmin = 1e300;
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j)
            dmin = std::min(dmin, std::abs(cons.points[i] - cons.points[j]));
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j)
            if (std::abs(cons.points[i] - cons.points[j]) < dmin * 1.0001)
                CHECK(hamming(i, j) == 1);
}

double mean_energy(const Constellation& cons) {
    double e = 0.0;
    for (const auto& p : cons.points) e += std::norm(p);
    return e / (double)cons.points.size();
}

}  // namespace

TEST_SUITE("modem") {
    TEST_CASE("bpsk mapping is pinned") {
        const auto cons = make_constellation("bpsk");
        CHECK(cons.M == 2);
        CHECK(cons.bits == 1);
        REQUIRE(cons.points.size() == 2);
        CHECK(cons.points[0].real() == doctest::Approx(1.0));
        CHECK(cons.points[0].imag() == doctest::Approx(0.0));
        CHECK(cons.points[1].real() == doctest::Approx(-1.0));
        CHECK(cons.points[1].imag() == doctest::Approx(0.0));
    }

    TEST_CASE("qpsk has unit energy and gray labels") {
        const auto cons = make_constellation("qpsk");
        CHECK(cons.bits == 2);
        REQUIRE(cons.points.size() == 4);
        CHECK(mean_energy(cons) == doctest::Approx(1.0).epsilon(1e-12));
        check_gray_neighbours(cons);
    }

    TEST_CASE("16qam has unit energy, distinct points, gray labels") {
        const auto cons = make_constellation("16qam");
        CHECK(cons.bits == 4);
        REQUIRE(cons.points.size() == 16);
        CHECK(mean_energy(cons) == doctest::Approx(1.0).epsilon(1e-12));
        std::set<std::pair<double, double>> uniq;
        for (const auto& p : cons.points) uniq.insert(std::make_pair(p.real(), p.imag()));
        CHECK(uniq.size() == 16);
        check_gray_neighbours(cons);
    }

    TEST_CASE("16qam label zero sits in the corner") {
        // First label maps to (-3-3j)/sqrt(10) with the pinned Gray layout.
        const auto cons = make_constellation("16qam");
        CHECK(cons.points[0].real() == doctest::Approx(-0.9486832980505138).epsilon(1e-14));
        CHECK(cons.points[0].imag() == doctest::Approx(-0.9486832980505138).epsilon(1e-14));
    }

    TEST_CASE("64qam has unit energy and gray labels") {
        const auto cons = make_constellation("64qam");
        CHECK(cons.bits == 6);
        REQUIRE(cons.points.size() == 64);
        CHECK(mean_energy(cons) == doctest::Approx(1.0).epsilon(1e-12));
        check_gray_neighbours(cons);
    }

    TEST_CASE("label bits are most-significant first") {
        const auto cons = make_constellation("16qam");
        // label 0b1010 = 10: bit 0 (MSB) = 1, bit 1 = 0, bit 2 = 1, bit 3 = 0.
        CHECK(cons.label_bit(10, 0) == 1);
        CHECK(cons.label_bit(10, 1) == 0);
        CHECK(cons.label_bit(10, 2) == 1);
        CHECK(cons.label_bit(10, 3) == 0);
    }

    TEST_CASE("unknown constellation name throws") {
        CHECK_THROWS_AS(make_constellation("8psk"), std::invalid_argument);
        CHECK_THROWS_AS(make_constellation(""), std::invalid_argument);
    }
}
