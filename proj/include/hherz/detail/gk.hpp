#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval. Nodes are interior,
// so integrable endpoint singularities are never evaluated directly.

namespace hherz::detail {

struct GkResult {
    double value = 0.0;
    double err_est = 0.0;
    long n_evals = 0;
    bool converged = true;
};

namespace gk15 {
// Kronrod-15 abscissae (positive half) and weights; Gauss-7 weights on the
// shared odd-index nodes.
inline constexpr double xk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double wk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};
} // namespace gk15

inline void gk15_apply(const std::function<double(double)>& f, double a, double b,
                       double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * gk15::xk[i]);
        fv[14 - i] = f(c + h * gk15::xk[i]);
    }
    fv[7] = f(c);
    double resk = gk15::wk[7] * fv[7];
    double resg = gk15::wg[3] * fv[7];
    for (int i = 0; i < 7; ++i) {
        resk += gk15::wk[i] * (fv[i] + fv[14 - i]);
        if (i % 2 == 1) resg += gk15::wg[i / 2] * (fv[i] + fv[14 - i]);
    }
    value = resk * h;
    err = std::abs((resk - resg) * h);
}

// Bisects the worst interval until the combined error estimate meets
// max(abs_tol, rel_tol*|I|) or the eval budget runs out.
inline GkResult adaptive_gk(const std::function<double(double)>& f, double a, double b,
                            double rel_tol = 1e-11, double abs_tol = 1e-300,
                            long max_evals = 2'000'000) {
    struct Seg {
        double a, b, value, err;
    };
    GkResult out;
    if (!(b > a)) {
        if (a == b) return out;
        throw std::invalid_argument("adaptive_gk: reversed interval");
    }
    std::vector<Seg> segs;
    Seg s0{a, b, 0, 0};
    gk15_apply(f, a, b, s0.value, s0.err);
    out.n_evals = 15;
    segs.push_back(s0);

    auto totals = [&segs](double& v, double& e) {
        v = 0;
        e = 0;
        for (const auto& s : segs) {
            v += s.value;
            e += s.err;
        }
    };

    double v, e;
    totals(v, e);
    while (e > std::max(abs_tol, rel_tol * std::abs(v)) && out.n_evals + 30 <= max_evals) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err) worst = i;
        Seg cur = segs[worst];
        const double mid = 0.5 * (cur.a + cur.b);
        if (mid <= cur.a || mid >= cur.b) break; // interval at floating-point resolution
        Seg left{cur.a, mid, 0, 0}, right{mid, cur.b, 0, 0};
        gk15_apply(f, left.a, left.b, left.value, left.err);
        gk15_apply(f, right.a, right.b, right.value, right.err);
        out.n_evals += 30;
        segs[worst] = left;
        segs.push_back(right);
        totals(v, e);
        if (!std::isfinite(v))
            throw std::runtime_error("adaptive_gk: non-finite partial integral near [" +
                                     std::to_string(cur.a) + "," + std::to_string(cur.b) + "]");
    }
    totals(v, e);
    out.value = v;
    out.err_est = e;
    out.converged = e <= std::max(abs_tol, std::max(rel_tol, 1e-6) * std::abs(v));
    return out;
}

} // namespace hherz::detail
