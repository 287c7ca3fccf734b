#pragma once

// Tape-based reverse-mode automatic differentiation.
//
// The detectors are written once as templates over a scalar type S; running
// them with S = double gives the plain evaluation path, and running them with
// S = ad::Var records every operation on a tape so a single backward sweep
// yields exact gradients with respect to all registered parameters.
//
// Design notes (this is the training hot path on a single core):
//  * Values are computed eagerly at push time, so building the tape IS the
//    forward pass.
//  * Most partial derivatives are recomputed from stored values during the
//    backward sweep (Mul, MaxStar*, Softplus...), which keeps nodes small.
//    Only the fused n-ary ops that would need transcendentals again
//    (MaxStarPairsN) and coefficient ops (LinCombN) store partials.
//  * Fused n-ary ops (sum, max*-reduce, max* over pairwise sums, linear
//    combination) cut node counts by ~2-3x versus binary-op chains in the
//    message-passing inner loops.
//
// Gradients are exact for the recorded program; clamps contribute zero
// derivative outside their active range (and at the boundary), which is the
// standard subgradient convention.

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace fgdet::ad {

enum class Op : std::uint8_t {
    Leaf,           // parameter or constant
    Add,            // a + b
    Sub,            // a - b
    Mul,            // a * b
    AddC,           // a + ca
    MulC,           // a * ca
    MaxStar2,       // ln(e^a + e^b)
    SubClampFloor,  // max(a - b, ca)
    Clip,           // min(max(a, ca), cb)
    SoftplusLog2,   // log2(1 + e^a)
    SumN,           // sum over args
    MaxStarN,       // ln sum_i e^{args[i]}
    MaxStarPairsN,  // ln sum_i e^{args[2i] + args[2i+1]}; softmax stored
    LinCombN,       // sum_i coef[i] * args[i]; coefs stored
};

struct Node {
    double ca = 0.0, cb = 0.0;  // constants, or unused
    std::int32_t a = -1, b = -1;  // binary args; n-ary: a = arg offset, b = count
    std::int32_t p = -1;          // offset into partials buffer (n-ary only)
    Op op = Op::Leaf;
};

class Tape {
  public:
    // ---- construction of the expression graph (eager forward) ----

    std::int32_t leaf(double v) { return push(Op::Leaf, v); }

    std::int32_t add(std::int32_t a, std::int32_t b) {
        std::int32_t i = push(Op::Add, vals_[a] + vals_[b]);
        nodes_[i].a = a;
        nodes_[i].b = b;
        return i;
    }

    std::int32_t sub(std::int32_t a, std::int32_t b) {
        std::int32_t i = push(Op::Sub, vals_[a] - vals_[b]);
        nodes_[i].a = a;
        nodes_[i].b = b;
        return i;
    }

    std::int32_t mul(std::int32_t a, std::int32_t b) {
        std::int32_t i = push(Op::Mul, vals_[a] * vals_[b]);
        nodes_[i].a = a;
        nodes_[i].b = b;
        return i;
    }

    std::int32_t add_c(std::int32_t a, double c) {
        std::int32_t i = push(Op::AddC, vals_[a] + c);
        nodes_[i].a = a;
        nodes_[i].ca = c;
        return i;
    }

    std::int32_t mul_c(std::int32_t a, double c) {
        std::int32_t i = push(Op::MulC, vals_[a] * c);
        nodes_[i].a = a;
        nodes_[i].ca = c;
        return i;
    }

    std::int32_t max_star(std::int32_t a, std::int32_t b) {
        const double va = vals_[a], vb = vals_[b];
        double v;
        if (std::isinf(va) && va < 0)
            v = vb;
        else if (std::isinf(vb) && vb < 0)
            v = va;
        else {
            const double hi = va > vb ? va : vb;
            const double lo = va > vb ? vb : va;
            v = hi + std::log1p(std::exp(lo - hi));
        }
        std::int32_t i = push(Op::MaxStar2, v);
        nodes_[i].a = a;
        nodes_[i].b = b;
        return i;
    }

    std::int32_t sub_clamp_floor(std::int32_t a, std::int32_t b, double floor) {
        double v = vals_[a] - vals_[b];
        if (!(v > floor)) v = floor;
        std::int32_t i = push(Op::SubClampFloor, v);
        nodes_[i].a = a;
        nodes_[i].b = b;
        nodes_[i].ca = floor;
        return i;
    }

    std::int32_t clip(std::int32_t a, double lo, double hi) {
        double v = vals_[a];
        if (v < lo) v = lo;
        if (v > hi) v = hi;
        std::int32_t i = push(Op::Clip, v);
        nodes_[i].a = a;
        nodes_[i].ca = lo;
        nodes_[i].cb = hi;
        return i;
    }

    /// log2(1 + e^a), computed in the overflow-safe softplus form.
    std::int32_t softplus_log2(std::int32_t a) {
        const double x = vals_[a];
        const double nat = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
        std::int32_t i = push(Op::SoftplusLog2, nat * 1.4426950408889634);  // 1/ln 2
        nodes_[i].a = a;
        return i;
    }

    std::int32_t sum_n(const std::int32_t* xs, int n) {
        double v = 0.0;
        for (int t = 0; t < n; ++t) v += vals_[xs[t]];
        std::int32_t i = push(Op::SumN, v);
        set_args(i, xs, n);
        return i;
    }

    std::int32_t max_star_n(const std::int32_t* xs, int n) {
        double m = -kInf;
        for (int t = 0; t < n; ++t)
            if (vals_[xs[t]] > m) m = vals_[xs[t]];
        double v;
        if (std::isinf(m) && m < 0) {
            v = m;
        } else {
            double s = 0.0;
            for (int t = 0; t < n; ++t) s += std::exp(vals_[xs[t]] - m);
            v = m + std::log(s);
        }
        std::int32_t i = push(Op::MaxStarN, v);
        set_args(i, xs, n);
        return i;
    }

    /// ln sum_t exp(xs[t] + ys[t]). Stores the softmax weights so the
    /// backward sweep is transcendental-free.
    std::int32_t max_star_pairs(const std::int32_t* xs, const std::int32_t* ys, int n) {
        scratch_.resize(n);
        double m = -kInf;
        for (int t = 0; t < n; ++t) {
            scratch_[t] = vals_[xs[t]] + vals_[ys[t]];
            if (scratch_[t] > m) m = scratch_[t];
        }
        double v;
        std::int32_t i;
        if (std::isinf(m) && m < 0) {
            i = push(Op::MaxStarPairsN, m);
            nodes_[i].p = (std::int32_t)parts_.size();
            parts_.resize(parts_.size() + n, 0.0);
        } else {
            double s = 0.0;
            for (int t = 0; t < n; ++t) {
                scratch_[t] = std::exp(scratch_[t] - m);
                s += scratch_[t];
            }
            v = m + std::log(s);
            i = push(Op::MaxStarPairsN, v);
            nodes_[i].p = (std::int32_t)parts_.size();
            const double inv = 1.0 / s;
            for (int t = 0; t < n; ++t) parts_.push_back(scratch_[t] * inv);
        }
        nodes_[i].a = (std::int32_t)args_.size();
        nodes_[i].b = n;
        for (int t = 0; t < n; ++t) {
            args_.push_back(xs[t]);
            args_.push_back(ys[t]);
        }
        return i;
    }

    std::int32_t lin_comb(const double* coefs, const std::int32_t* xs, int n) {
        double v = 0.0;
        for (int t = 0; t < n; ++t) v += coefs[t] * vals_[xs[t]];
        std::int32_t i = push(Op::LinCombN, v);
        set_args(i, xs, n);
        nodes_[i].p = (std::int32_t)parts_.size();
        parts_.insert(parts_.end(), coefs, coefs + n);
        return i;
    }

    // ---- evaluation ----

    double val(std::int32_t i) const { return vals_[i]; }
    double adj(std::int32_t i) const { return adjs_[i]; }
    std::size_t size() const { return nodes_.size(); }

    /// Reverse sweep from `root` (seed adjoint 1). Leaf adjoints afterwards
    /// hold d(root)/d(leaf).
    void backward(std::int32_t root);

    /// Drops all nodes but keeps allocated capacity for reuse.
    void clear() {
        nodes_.clear();
        vals_.clear();
        adjs_.clear();
        args_.clear();
        parts_.clear();
    }

  private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    std::int32_t push(Op op, double v) {
        Node nd;
        nd.op = op;
        nodes_.push_back(nd);
        vals_.push_back(v);
        return (std::int32_t)nodes_.size() - 1;
    }

    void set_args(std::int32_t i, const std::int32_t* xs, int n) {
        nodes_[i].a = (std::int32_t)args_.size();
        nodes_[i].b = n;
        args_.insert(args_.end(), xs, xs + n);
    }

    std::vector<Node> nodes_;
    std::vector<double> vals_, adjs_;
    std::vector<std::int32_t> args_;
    std::vector<double> parts_;
    std::vector<double> scratch_;
};

/// The tape a Var records onto; set with TapeScope before running templated
/// code with S = Var.
Tape*& active_tape();

struct TapeScope {
    explicit TapeScope(Tape& t) : prev_(active_tape()) { active_tape() = &t; }
    ~TapeScope() { active_tape() = prev_; }
    Tape* prev_;
};

/// Value handle for the templated detector code. Arithmetic on Vars records
/// onto the active tape.
struct Var {
    std::int32_t i = -1;
};

inline Var operator+(Var a, Var b) { return {active_tape()->add(a.i, b.i)}; }
inline Var operator-(Var a, Var b) { return {active_tape()->sub(a.i, b.i)}; }
inline Var operator*(Var a, Var b) { return {active_tape()->mul(a.i, b.i)}; }

}  // namespace fgdet::ad
