#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "fgdet/autodiff.hpp"
#include "fgdet/scalar.hpp"

using namespace fgdet;
using ad::Tape;
using ad::Var;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Builds the graph at `x`, returns the root value and the analytic gradient.
struct Probe {
    double value;
    std::vector<double> grad;
};

using Builder = std::function<std::int32_t(Tape&, const std::vector<std::int32_t>&)>;

Probe run(const Builder& build, const std::vector<double>& x) {
    Tape tape;
    std::vector<std::int32_t> leaves;
    leaves.reserve(x.size());
    for (double v : x) leaves.push_back(tape.leaf(v));
    const std::int32_t root = build(tape, leaves);
    tape.backward(root);
    Probe p;
    p.value = tape.val(root);
    for (auto l : leaves) p.grad.push_back(tape.adj(l));
    return p;
}

// Central finite differences on the same builder.
void check_gradient(const Builder& build, std::vector<double> x, double step = 1e-6,
                    double tol = 1e-6) {
    const Probe base = run(build, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + step;
        const double up = run(build, x).value;
        x[i] = keep - step;
        const double dn = run(build, x).value;
        x[i] = keep;
        const double numeric = (up - dn) / (2 * step);
        const double denom = std::max({1.0, std::abs(base.grad[i]), std::abs(numeric)});
        CHECK(std::abs(base.grad[i] - numeric) / denom < tol);
    }
}

}  // namespace

TEST_SUITE("autodiff") {
    TEST_CASE("binary arithmetic forward and backward") {
        // f = (a + b) * (a - b) + a*b = a^2 - b^2 + ab
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.add(t.mul(t.add(v[0], v[1]), t.sub(v[0], v[1])), t.mul(v[0], v[1]));
        };
        const Probe p = run(f, {3.0, 2.0});
        CHECK(p.value == doctest::Approx(9.0 - 4.0 + 6.0));
        CHECK(p.grad[0] == doctest::Approx(2 * 3.0 + 2.0));   // 2a + b
        CHECK(p.grad[1] == doctest::Approx(-2 * 2.0 + 3.0));  // -2b + a
        check_gradient(f, {3.0, 2.0});
        check_gradient(f, {-0.7, 1.9});
    }

    TEST_CASE("constant ops") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.mul_c(t.add_c(v[0], 2.5), -3.0);  // -3(a + 2.5)
        };
        const Probe p = run(f, {1.0});
        CHECK(p.value == doctest::Approx(-10.5));
        CHECK(p.grad[0] == doctest::Approx(-3.0));
    }

    TEST_CASE("pairwise jacobian op matches the closed form") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.max_star(v[0], v[1]);
        };
        const Probe p = run(f, {1.0, 2.0});
        CHECK(p.value == doctest::Approx(2.313261687518223).epsilon(1e-15));
        // Gradient is the softmax pair.
        const double e0 = std::exp(1.0), e1 = std::exp(2.0);
        CHECK(p.grad[0] == doctest::Approx(e0 / (e0 + e1)));
        CHECK(p.grad[1] == doctest::Approx(e1 / (e0 + e1)));
        check_gradient(f, {1.0, 2.0});
        check_gradient(f, {-40.0, 12.0});

        // Equal inputs: value = x + ln 2, both grads = 1/2.
        const Probe q = run(f, {0.5, 0.5});
        CHECK(q.value == doctest::Approx(0.5 + std::log(2.0)));
        CHECK(q.grad[0] == doctest::Approx(0.5));
        CHECK(q.grad[1] == doctest::Approx(0.5));
    }

    TEST_CASE("impossible operand passes through without poisoning gradients") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.max_star(v[0], v[1]);
        };
        Tape tape;
        const auto a = tape.leaf(-kInf);
        const auto b = tape.leaf(1.5);
        const auto r = tape.max_star(a, b);
        tape.backward(r);
        CHECK(tape.val(r) == 1.5);
        CHECK(std::isfinite(tape.adj(b)));
        CHECK(tape.adj(b) == doctest::Approx(1.0));
        CHECK(!std::isnan(tape.adj(a)));
        (void)f;
    }

    TEST_CASE("subtract with floor clamp") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.sub_clamp_floor(v[0], v[1], -2.0);
        };
        // Above the floor: behaves like a - b.
        Probe p = run(f, {1.0, 0.25});
        CHECK(p.value == doctest::Approx(0.75));
        CHECK(p.grad[0] == doctest::Approx(1.0));
        CHECK(p.grad[1] == doctest::Approx(-1.0));
        check_gradient(f, {1.0, 0.25});
        // Below the floor: clamped, zero gradient.
        p = run(f, {-5.0, 0.0});
        CHECK(p.value == -2.0);
        CHECK(p.grad[0] == 0.0);
        CHECK(p.grad[1] == 0.0);
    }

    TEST_CASE("clip") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.clip(v[0], -1.0, 1.0);
        };
        Probe p = run(f, {0.3});
        CHECK(p.value == doctest::Approx(0.3));
        CHECK(p.grad[0] == doctest::Approx(1.0));
        p = run(f, {4.0});
        CHECK(p.value == 1.0);
        CHECK(p.grad[0] == 0.0);
        p = run(f, {-4.0});
        CHECK(p.value == -1.0);
        CHECK(p.grad[0] == 0.0);
    }

    TEST_CASE("binary-entropy style softplus in bits") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.softplus_log2(v[0]);
        };
        Probe p = run(f, {-2.0});
        CHECK(p.value == doctest::Approx(std::log2(1.0 + std::exp(-2.0))).epsilon(1e-14));
        check_gradient(f, {-2.0});
        check_gradient(f, {3.0});
        // Large positive input must not overflow: log2(1+e^x) ~ x/ln2.
        p = run(f, {800.0});
        CHECK(p.value == doctest::Approx(800.0 * 1.4426950408889634).epsilon(1e-12));
        CHECK(std::isfinite(p.grad[0]));
    }

    TEST_CASE("fused n-ary sum and reduce") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            const std::int32_t s = t.sum_n(v.data(), (int)v.size());
            const std::int32_t m = t.max_star_n(v.data(), (int)v.size());
            return t.add(s, m);
        };
        const std::vector<double> x = {0.3, -1.2, 2.0, 0.0};
        const Probe p = run(f, x);
        double lse = 0.0;
        for (double v : x) lse += std::exp(v);
        CHECK(p.value == doctest::Approx(0.3 - 1.2 + 2.0 + 0.0 + std::log(lse)).epsilon(1e-14));
        check_gradient(f, x);
    }

    TEST_CASE("reduce over pairwise sums") {
        // ln sum_t exp(x_t + y_t) over 3 pairs, compared against composing
        // add + max_star_n.
        const Builder fused = [](Tape& t, const std::vector<std::int32_t>& v) {
            const std::int32_t xs[3] = {v[0], v[1], v[2]};
            const std::int32_t ys[3] = {v[3], v[4], v[5]};
            return t.max_star_pairs(xs, ys, 3);
        };
        const Builder composed = [](Tape& t, const std::vector<std::int32_t>& v) {
            std::int32_t sums[3];
            for (int i = 0; i < 3; ++i) sums[i] = t.add(v[i], v[i + 3]);
            return t.max_star_n(sums, 3);
        };
        const std::vector<double> x = {0.1, -0.5, 1.2, 0.7, 0.0, -2.0};
        const Probe a = run(fused, x), b = run(composed, x);
        CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
        for (std::size_t i = 0; i < x.size(); ++i)
            CHECK(a.grad[i] == doctest::Approx(b.grad[i]).epsilon(1e-12));
        check_gradient(fused, x);
    }

    TEST_CASE("linear combination stores its coefficients as gradients") {
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            const double coefs[3] = {2.0, -0.5, 1.25};
            return t.lin_comb(coefs, v.data(), 3);
        };
        const Probe p = run(f, {1.0, 2.0, 3.0});
        CHECK(p.value == doctest::Approx(2.0 - 1.0 + 3.75));
        CHECK(p.grad[0] == doctest::Approx(2.0));
        CHECK(p.grad[1] == doctest::Approx(-0.5));
        CHECK(p.grad[2] == doctest::Approx(1.25));
    }

    TEST_CASE("fan-out accumulates adjoints") {
        // f = a*a + a: df/da = 2a + 1, exercises repeated use of one node.
        const Builder f = [](Tape& t, const std::vector<std::int32_t>& v) {
            return t.add(t.mul(v[0], v[0]), v[0]);
        };
        const Probe p = run(f, {4.0});
        CHECK(p.grad[0] == doctest::Approx(9.0));
    }

    TEST_CASE("tape clears for reuse and keeps results consistent") {
        Tape tape;
        const auto a0 = tape.leaf(2.0);
        const auto r0 = tape.mul(a0, a0);
        tape.backward(r0);
        CHECK(tape.val(r0) == 4.0);
        CHECK(tape.adj(a0) == 4.0);
        const std::size_t n0 = tape.size();
        tape.clear();
        CHECK(tape.size() == 0);
        const auto a1 = tape.leaf(3.0);
        const auto r1 = tape.mul(a1, a1);
        tape.backward(r1);
        CHECK(tape.val(r1) == 9.0);
        CHECK(tape.adj(a1) == 6.0);
        CHECK(tape.size() == n0);
    }

    TEST_CASE("var operators record onto the active tape") {
        Tape tape;
        ad::TapeScope scope(tape);
        Var a{tape.leaf(1.5)}, b{tape.leaf(-2.0)};
        Var s = a + b, d = a - b, m = a * b;
        CHECK(tape.val(s.i) == doctest::Approx(-0.5));
        CHECK(tape.val(d.i) == doctest::Approx(3.5));
        CHECK(tape.val(m.i) == doctest::Approx(-3.0));
    }

    TEST_CASE("templated scalar helpers agree between double and var") {
        // One expression through the generic scalar layer with both types.
        auto expr = [](auto a, auto b) {
            using S = decltype(a);
            auto u = add_c(a, 0.5);
            auto v = mul_c(b, -2.0);
            S list[2] = {u, v};
            auto s = sum_list(list, 2);
            auto r = lse_reduce(list, 2);
            auto c = clip(s + r, -10.0, 10.0);
            return softplus_log2(c);
        };
        const double x = 0.8, y = -0.3;
        const double want = expr(x, y);

        Tape tape;
        ad::TapeScope scope(tape);
        Var a{tape.leaf(x)}, b{tape.leaf(y)};
        Var got = expr(a, b);
        CHECK(tape.val(got.i) == doctest::Approx(want).epsilon(1e-15));
    }
}
