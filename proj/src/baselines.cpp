#include "fgdet/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "fgdet/logdomain.hpp"

namespace fgdet {

namespace {

constexpr std::size_t kMaxEnumeration = std::size_t(1) << 20;

std::size_t checked_power(int base, int exp, const char* what) {
    std::size_t v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= (std::size_t)base;
        if (v > kMaxEnumeration) throw std::invalid_argument(what);
    }
    return v;
}

void normalize_rows(std::vector<double>& table, int K, int M) {
    for (int k = 0; k < K; ++k) log_normalize(std::span(table.data() + (std::size_t)k * M, M));
}

// Solve A x = rhs for Hermitian positive-definite A via A = C C^H.
struct HermitianCholesky {
    int n;
    std::vector<cplx> c;  // lower triangle, row-major dense

    explicit HermitianCholesky(const std::vector<cplx>& a, int n_) : n(n_), c(a) {
        for (int j = 0; j < n; ++j) {
            double d = c[(std::size_t)j * n + j].real();
            for (int t = 0; t < j; ++t) d -= std::norm(c[(std::size_t)j * n + t]);
            if (d <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
            const double ljj = std::sqrt(d);
            c[(std::size_t)j * n + j] = ljj;
            for (int i = j + 1; i < n; ++i) {
                cplx s = c[(std::size_t)i * n + j];
                for (int t = 0; t < j; ++t)
                    s -= c[(std::size_t)i * n + t] * std::conj(c[(std::size_t)j * n + t]);
                c[(std::size_t)i * n + j] = s / ljj;
            }
        }
    }

    std::vector<cplx> solve(const std::vector<cplx>& rhs) const {
        std::vector<cplx> x(rhs);
        for (int i = 0; i < n; ++i) {  // C z = rhs
            cplx s = x[i];
            for (int t = 0; t < i; ++t) s -= c[(std::size_t)i * n + t] * x[t];
            x[i] = s / c[(std::size_t)i * n + i].real();
        }
        for (int i = n - 1; i >= 0; --i) {  // C^H x = z
            cplx s = x[i];
            for (int t = i + 1; t < n; ++t) s -= std::conj(c[(std::size_t)t * n + i]) * x[t];
            x[i] = s / c[(std::size_t)i * n + i].real();
        }
        return x;
    }
};

}  // namespace

DetectorOutput bcjr_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                           int K, const Constellation& cons, int boundary_index,
                           const std::vector<double>& prior_log) {
    const int L = taps.L(), M = cons.M;
    if ((int)y.size() != K + L) throw std::invalid_argument("bcjr: y must have K+L samples");
    if (sigma_sq <= 0.0) throw std::invalid_argument("bcjr: noise variance must be positive");
    if (!prior_log.empty() && (int)prior_log.size() != K * M)
        throw std::invalid_argument("bcjr: prior size mismatch");
    const std::size_t ns = checked_power(M, L, "bcjr: trellis exceeds 2^20 states");
    const std::size_t nshift = L > 0 ? ns / M : 1;  // M^(L-1)
    const double inv_ss = 1.0 / sigma_sq;
    const double uni = -std::log((double)M);

    // State encodes the last L symbol indices, most recent in the lowest
    // digit. Step k emits y_k from the state history plus the new symbol.
    std::vector<cplx> hist(ns, cplx(0.0, 0.0));
    for (std::size_t s = 0; s < ns; ++s) {
        std::size_t rem = s;
        cplx acc = 0.0;
        for (int ell = 1; ell <= L; ++ell) {
            acc += taps.h[ell] * cons.points[rem % M];
            rem /= M;
        }
        hist[s] = acc;
    }
    std::size_t s_init = 0;  // all digits = boundary symbol
    for (int i = 0; i < L; ++i) s_init = s_init * M + boundary_index;
    std::vector<cplx> h0c(M);
    for (int a = 0; a < M; ++a) h0c[a] = taps.h[0] * cons.points[a];

    const int steps = K + L;
    std::vector<double> alpha((std::size_t)(steps + 1) * ns, kNegInf);
    std::vector<double> beta((std::size_t)(steps + 1) * ns, kNegInf);
    alpha[s_init] = 0.0;
    beta[(std::size_t)steps * ns + s_init] = 0.0;

    auto gamma = [&](int k, std::size_t s, int a) {  // k in [1, K+L]
        const cplx mean = hist[s] + h0c[a];
        double g = -std::norm(y[k - 1] - mean) * inv_ss;
        if (k <= K) g += prior_log.empty() ? uni : prior_log[(std::size_t)(k - 1) * M + a];
        return g;
    };

    for (int k = 1; k <= steps; ++k) {
        const double* ap = &alpha[(std::size_t)(k - 1) * ns];
        double* an = &alpha[(std::size_t)k * ns];
        for (std::size_t s = 0; s < ns; ++s) {
            if (ap[s] == kNegInf) continue;
            const std::size_t base = (s % nshift) * M;
            const int a_lo = k <= K ? 0 : boundary_index;
            const int a_hi = k <= K ? M - 1 : boundary_index;
            for (int a = a_lo; a <= a_hi; ++a) {
                const std::size_t sn = L > 0 ? base + a : 0;
                an[sn] = max_star(an[sn], ap[s] + gamma(k, s, a));
            }
        }
    }
    for (int k = steps; k >= 1; --k) {
        const double* bn = &beta[(std::size_t)k * ns];
        double* bp = &beta[(std::size_t)(k - 1) * ns];
        for (std::size_t s = 0; s < ns; ++s) {
            const std::size_t base = (s % nshift) * M;
            const int a_lo = k <= K ? 0 : boundary_index;
            const int a_hi = k <= K ? M - 1 : boundary_index;
            double acc = kNegInf;
            for (int a = a_lo; a <= a_hi; ++a) {
                const std::size_t sn = L > 0 ? base + a : 0;
                if (bn[sn] == kNegInf) continue;
                acc = max_star(acc, gamma(k, s, a) + bn[sn]);
            }
            bp[s] = acc;
        }
    }

    DetectorOutput out;
    out.K = K;
    out.M = M;
    out.log_app.assign((std::size_t)K * M, kNegInf);
    for (int k = 1; k <= K; ++k) {
        const double* ap = &alpha[(std::size_t)(k - 1) * ns];
        const double* bn = &beta[(std::size_t)k * ns];
        double* row = &out.log_app[(std::size_t)(k - 1) * M];
        for (std::size_t s = 0; s < ns; ++s) {
            if (ap[s] == kNegInf) continue;
            const std::size_t base = (s % nshift) * M;
            for (int a = 0; a < M; ++a) {
                const std::size_t sn = L > 0 ? base + a : 0;
                if (bn[sn] == kNegInf) continue;
                row[a] = max_star(row[a], ap[s] + gamma(k, s, a) + bn[sn]);
            }
        }
    }
    normalize_rows(out.log_app, K, M);
    return out;
}

DetectorOutput brute_force_map(const ChannelTaps& taps, double sigma_sq,
                               const std::vector<cplx>& y, int K, const Constellation& cons,
                               int boundary_index, const std::vector<double>& prior_log) {
    const int L = taps.L(), M = cons.M;
    if ((int)y.size() != K + L) throw std::invalid_argument("brute_force: y must have K+L samples");
    if (sigma_sq <= 0.0) throw std::invalid_argument("brute_force: noise variance must be positive");
    const std::size_t total = checked_power(M, K, "brute_force: block exceeds 2^20 sequences");
    const double inv_ss = 1.0 / sigma_sq;
    const double uni = -std::log((double)M);

    DetectorOutput out;
    out.K = K;
    out.M = M;
    out.log_app.assign((std::size_t)K * M, kNegInf);

    std::vector<int> symbols(K);
    const cplx bpt = cons.points.at(boundary_index);
    std::vector<cplx> ext((std::size_t)K + 2 * L, bpt);
    for (std::size_t seq = 0; seq < total; ++seq) {
        std::size_t rem = seq;
        double metric = 0.0;
        for (int k = 0; k < K; ++k) {
            symbols[k] = (int)(rem % M);
            rem /= M;
            ext[L + k] = cons.points[symbols[k]];
            metric += prior_log.empty() ? uni : prior_log[(std::size_t)k * M + symbols[k]];
        }
        for (int r = 0; r < K + L; ++r) {
            cplx mean = 0.0;
            for (int ell = 0; ell <= L; ++ell) mean += taps.h[ell] * ext[r + L - ell];
            metric -= std::norm(y[r] - mean) * inv_ss;
        }
        for (int k = 0; k < K; ++k) {
            double& cell = out.log_app[(std::size_t)k * M + symbols[k]];
            cell = max_star(cell, metric);
        }
    }
    normalize_rows(out.log_app, K, M);
    return out;
}

LmmseDesign lmmse_design(const ChannelTaps& taps, double sigma_sq, int order) {
    const int L = taps.L(), n = order + 1;
    if (order < 0) throw std::invalid_argument("lmmse: negative equalizer order");
    if (sigma_sq <= 0.0) throw std::invalid_argument("lmmse: noise variance must be positive");

    auto rho = [&](int d) {  // sum_t h[t+d] conj(h[t])
        cplx acc = 0.0;
        for (int t = std::max(0, -d); t + d <= L && t <= L; ++t) acc += taps.h[t + d] * std::conj(taps.h[t]);
        return acc;
    };
    std::vector<cplx> R((std::size_t)n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            R[(std::size_t)i * n + j] = rho(j - i) + (i == j ? cplx(sigma_sq, 0.0) : cplx(0.0, 0.0));
    const HermitianCholesky chol(R, n);

    LmmseDesign best;
    for (int delay = 0; delay <= order + L; ++delay) {
        std::vector<cplx> r(n, cplx(0.0, 0.0));
        for (int i = 0; i < n; ++i) {
            const int t = delay - i;
            if (t >= 0 && t <= L) r[i] = taps.h[t];
        }
        const std::vector<cplx> w = chol.solve(r);
        double b = 0.0;  // r^H w, real for PSD R
        for (int i = 0; i < n; ++i) b += (std::conj(r[i]) * w[i]).real();
        if (b > best.b) {
            best.w = w;
            best.delay = delay;
            best.b = b;
        }
    }
    if (best.w.empty()) throw std::runtime_error("lmmse: degenerate design (all-zero channel?)");
    return best;
}

DetectorOutput lmmse_detect(const ChannelTaps& taps, double sigma_sq, const std::vector<cplx>& y,
                            int K, const Constellation& cons, int boundary_index, int order) {
    const int L = taps.L(), M = cons.M;
    if ((int)y.size() != K + L) throw std::invalid_argument("lmmse: y must have K+L samples");
    const LmmseDesign design = lmmse_design(taps, sigma_sq, order);
    const int n = order + 1;

    // Subtract the known boundary-symbol contribution, leaving a model in
    // which symbols outside [1, K] are zero; samples outside the observed
    // range are then zero-padded consistently.
    const cplx bpt = cons.points.at(boundary_index);
    std::vector<cplx> adj(y);
    for (int r = 0; r < K + L; ++r)
        for (int ell = 0; ell <= L; ++ell) {
            const int k = r - ell + 1;  // 1-based symbol index feeding sample r
            if (k < 1 || k > K) adj[r] -= taps.h[ell] * bpt;
        }
    auto sample = [&](int t) { return t >= 0 && t < K + L ? adj[t] : cplx(0.0, 0.0); };

    std::vector<cplx> est(K);
    for (int k = 0; k < K; ++k) {
        cplx acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::conj(design.w[i]) * sample(k + design.delay - i);
        est[k] = acc / design.b;
    }

    double err = 0.0;
    for (int k = 0; k < K; ++k) {
        int best = 0;
        for (int m = 1; m < M; ++m)
            if (std::norm(est[k] - cons.points[m]) < std::norm(est[k] - cons.points[best])) best = m;
        err += std::norm(est[k] - cons.points[best]);
    }
    const double var = std::max(err / K, 1e-12);

    DetectorOutput out;
    out.K = K;
    out.M = M;
    out.log_app.resize((std::size_t)K * M);
    for (int k = 0; k < K; ++k)
        for (int m = 0; m < M; ++m)
            out.log_app[(std::size_t)k * M + m] = -std::norm(est[k] - cons.points[m]) / var;
    normalize_rows(out.log_app, K, M);
    return out;
}

}  // namespace fgdet
