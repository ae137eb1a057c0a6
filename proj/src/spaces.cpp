#include "hherz/spaces.hpp"

#include <cmath>
#include <stdexcept>

#include "hherz/detail/par.hpp"
#include "hherz/detail/rng.hpp"

namespace hherz {

TestFunction TestFunction::power(double lambda) {
    TestFunction f;
    f.kind = Kind::power;
    f.lambda = lambda;
    return f;
}

TestFunction TestFunction::char_ball(int k) {
    TestFunction f;
    f.kind = Kind::char_ball;
    f.k = k;
    return f;
}

TestFunction TestFunction::char_annulus(int k1, int k2) {
    if (k1 >= k2) throw std::invalid_argument("char_annulus: k1 < k2 required");
    TestFunction f;
    f.kind = Kind::char_annulus;
    f.k1 = k1;
    f.k2 = k2;
    return f;
}

TestFunction TestFunction::log_norm() {
    TestFunction f;
    f.kind = Kind::log_norm;
    return f;
}

TestFunction TestFunction::bump(double k_center, double width) {
    if (!(width > 0)) throw std::invalid_argument("bump: width must be positive");
    TestFunction f;
    f.kind = Kind::bump;
    f.k_center = k_center;
    f.width = width;
    return f;
}

TestFunction TestFunction::constant(double c) {
    TestFunction f;
    f.kind = Kind::constant;
    f.value = c;
    return f;
}

TestFunction TestFunction::custom(std::function<double(const HPoint&)> fn, bool radial,
                                  bool singular) {
    TestFunction f;
    f.kind = Kind::custom;
    f.custom_fn = std::move(fn);
    f.custom_radial = radial;
    f.custom_singular = singular;
    return f;
}

double TestFunction::radial_eval(double r) const {
    switch (kind) {
        case Kind::power: return std::pow(r, -lambda);
        case Kind::char_ball: return r < std::exp2(static_cast<double>(k)) ? 1.0 : 0.0;
        case Kind::char_annulus:
            return (r >= std::exp2(static_cast<double>(k1)) &&
                    r < std::exp2(static_cast<double>(k2)))
                       ? 1.0
                       : 0.0;
        case Kind::log_norm: return std::log(r);
        case Kind::bump: {
            if (r <= 0.0) return 0.0;
            const double z = (std::log2(r) - k_center) / width;
            return std::exp(-z * z);
        }
        case Kind::constant: return value;
        case Kind::custom: throw std::logic_error("TestFunction::radial_eval: custom kind");
    }
    return 0.0;
}

double TestFunction::operator()(const HPoint& x) const {
    if (kind == Kind::custom) return custom_fn(x);
    return radial_eval(hnorm(x));
}

bool TestFunction::origin_singular() const {
    switch (kind) {
        case Kind::power: return lambda > 0.0;
        case Kind::log_norm: return true;
        case Kind::custom: return custom_singular;
        default: return false;
    }
}

Integrand TestFunction::as_integrand() const {
    Integrand g;
    TestFunction self = *this;
    g.fn = [self](const HPoint& x) { return self(x); };
    g.radial = radial();
    g.origin_singular = origin_singular();
    return g;
}

QuadResult lq_norm(const Integrand& g, double q, const Region& region, const Weight& w,
                   const QuadSpec& spec, const GroupDims& dims) {
    if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: need q >= 1");
    Integrand h;
    h.fn = [gf = g.fn, w, q](const HPoint& x) { return std::pow(std::abs(gf(x)), q) * w(x); };
    h.radial = g.radial && w.radial();
    h.origin_singular = g.origin_singular || w.origin_singular();
    QuadSpec sp = spec;
    if (sp.method == QuadMethod::radial_1d && !h.radial)
        sp.method = QuadMethod::stratified_monte_carlo;
    QuadResult out = integrate_region(h, region, sp, dims);
    const double I = out.value;
    out.value = std::pow(std::max(I, 0.0), 1.0 / q);
    // delta method: d(I^{1/q}) = (1/q) I^{1/q - 1} dI
    out.err_est = I > 0.0 ? out.err_est * out.value / (q * I) : out.err_est;
    return out;
}

HerzResult herz_norm(const Integrand& g, const HerzParams& hp, const QuadSpec& spec,
                     const GroupDims& dims) {
    if (hp.k_min >= hp.k_max) throw std::invalid_argument("herz_norm: k_min < k_max required");
    if (!(hp.p >= 1.0)) throw std::invalid_argument("herz_norm: need p >= 1");
    if (!(hp.q > 1.0)) throw std::invalid_argument("herz_norm: need q > 1");
    const int count = hp.k_max - hp.k_min + 1;
    struct Term {
        double t = 0, t_err = 0, wb = 0;
        long evals = 0;
    };
    std::vector<Term> rows(static_cast<std::size_t>(count));
    detail::parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        const int k = hp.k_min + static_cast<int>(i);
        QuadSpec sp = spec;
        sp.seed = rng::substream(spec.seed, 0x4e72, static_cast<std::uint64_t>(i));
        const QuadResult r =
            lq_norm(g, hp.q, Region::annulus(k - 1, k), hp.weight, sp, dims);
        Term t;
        t.t = r.value;
        t.t_err = r.err_est;
        t.evals = r.n_evals;
        const double R = std::exp2(static_cast<double>(k));
        if (auto cb = hp.weight.closed_ball_measure(dims, R)) {
            t.wb = *cb;
        } else {
            QuadSpec sw = spec;
            sw.seed = rng::substream(spec.seed, 0x3b17, static_cast<std::uint64_t>(i));
            t.wb = weighted_measure(hp.weight, Region::ball(R), sw, dims).value;
        }
        rows[i] = t;
    });

    HerzResult out;
    out.terms.resize(rows.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double wfac = std::pow(rows[i].wb, hp.alpha * hp.p / dims.Q);
        out.terms[i] = wfac * std::pow(rows[i].t, hp.p);
        sum += out.terms[i];
        out.n_evals += rows[i].evals;
    }
    out.value = std::pow(sum, 1.0 / hp.p);
    if (sum > 0.0) {
        out.edge_lo_frac = out.terms.front() / sum;
        out.edge_hi_frac = out.terms.back() / sum;
        out.flagged = out.edge_lo_frac > 0.01 || out.edge_hi_frac > 0.01;
        // error propagation through ( sum_k c_k t_k^p )^{1/p}
        double acc = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].t <= 0.0) continue;
            const double dterm = out.terms[i] * hp.p / rows[i].t; // d(sum)/d t_k
            const double dval = dterm / hp.p * std::pow(sum, 1.0 / hp.p - 1.0);
            acc += dval * dval * rows[i].t_err * rows[i].t_err;
        }
        out.err_est = std::sqrt(acc);
    }
    return out;
}

double ball_average(const Integrand& g, double radius, const QuadSpec& spec,
                    const GroupDims& dims) {
    QuadSpec sp = spec;
    if (sp.method == QuadMethod::radial_1d && !g.radial)
        sp.method = QuadMethod::stratified_monte_carlo;
    // Self-normalizing ratio estimator: the measure is integrated on the same
    // nodes as g, so constants average to themselves exactly and b -> b + c
    // shifts cancel in oscillation integrands.
    const QuadResult I = integrate_region(g, Region::ball(radius), sp, dims);
    Integrand unit;
    unit.fn = [](const HPoint&) { return 1.0; };
    unit.radial = true;
    unit.origin_singular = g.origin_singular; // keep the stratification identical
    const QuadResult V = integrate_region(unit, Region::ball(radius), sp, dims);
    return I.value / V.value;
}

CbmoResult cbmo_norm(const Integrand& b, double q, const Weight& w, int j_min, int j_max,
                     const QuadSpec& spec, const GroupDims& dims) {
    if (!(q > 1.0)) throw std::invalid_argument("cbmo_norm: need q > 1");
    if (j_min > j_max) throw std::invalid_argument("cbmo_norm: j_min <= j_max required");
    const int count = j_max - j_min + 1;
    struct Row {
        double osc = 0, err = 0;
        long evals = 0;
    };
    std::vector<Row> rows(static_cast<std::size_t>(count));
    detail::parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        const int j = j_min + static_cast<int>(i);
        const double R = std::exp2(static_cast<double>(j));
        QuadSpec sp = spec;
        sp.seed = rng::substream(spec.seed, 0xcb30, static_cast<std::uint64_t>(i));
        if (sp.method == QuadMethod::radial_1d && !(b.radial && w.radial()))
            sp.method = QuadMethod::stratified_monte_carlo;
        const double avg = ball_average(b, R, sp, dims);

        Integrand osc;
        osc.fn = [bf = b.fn, w, avg, q](const HPoint& x) {
            return std::pow(std::abs(bf(x) - avg), q) * w(x);
        };
        osc.radial = b.radial && w.radial();
        osc.origin_singular = b.origin_singular || w.origin_singular();
        const QuadResult O = integrate_region(osc, Region::ball(R), sp, dims);

        double wB;
        if (auto cb = w.closed_ball_measure(dims, R))
            wB = *cb;
        else {
            QuadSpec sw = sp;
            sw.seed = rng::substream(spec.seed, 0xcb31, static_cast<std::uint64_t>(i));
            wB = weighted_measure(w, Region::ball(R), sw, dims).value;
        }
        Row row;
        row.osc = std::pow(std::max(O.value, 0.0) / wB, 1.0 / q);
        row.err = O.value > 0.0 ? O.err_est * row.osc / (q * O.value) : 0.0;
        row.evals = O.n_evals;
        rows[i] = row;
    });

    CbmoResult out;
    out.per_radius.resize(rows.size());
    out.argmax_j = j_min;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.per_radius[i] = rows[i].osc;
        out.n_evals += rows[i].evals;
        if (rows[i].osc > out.value) {
            out.value = rows[i].osc;
            out.err_est = rows[i].err;
            out.argmax_j = j_min + static_cast<int>(i);
        }
    }
    return out;
}

} // namespace hherz
