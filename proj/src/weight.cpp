#include "hherz/weight.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hherz/detail/rng.hpp"

namespace hherz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ball_volume(const GroupDims& dims, double R) {
    return dims.omega_Q * std::pow(R, dims.Q);
}

// Average of w^e over the ball, honoring spec.method. The radial path needs
// an origin-centered ball and a radial weight.
QuadResult avg_pow(const Weight& w, double e, const Ball& ball, const QuadSpec& spec,
                   const GroupDims& dims) {
    Integrand g = w.pow_integrand(e);
    QuadSpec sp = spec;
    if (sp.method == QuadMethod::radial_1d && (!g.radial || !ball.at_origin()))
        sp.method = QuadMethod::stratified_monte_carlo;
    QuadResult q = integrate_region(g, ball.region(), sp, dims);
    const double vol = ball_volume(dims, ball.radius);
    q.value /= vol;
    q.err_est /= vol;
    return q;
}

double essinf_estimate(const Weight& w, const Ball& ball, const QuadSpec& spec,
                       const GroupDims& dims) {
    const int n = dims.n;
    const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
    const double R = ball.radius;
    rng::Xoshiro256pp gen(rng::substream(spec.seed, 0xe551, 0));
    HPoint z = HPoint::zero(n);
    const long pass1 = std::max<long>(1000, spec.budget / 4);
    double best = kInf;
    HPoint best_y = ball.center;
    const bool translated = !ball.at_origin();
    for (long i = 0; i < pass1; ++i) {
        for (std::size_t j = 0; j + 1 < d; ++j) z.c[j] = gen.uniform(-R, R);
        z.c[d - 1] = gen.uniform(-R * R, R * R);
        if (hnorm(z) >= R) continue;
        const HPoint y = translated ? group_mul(ball.center, z) : z;
        const double v = w(y);
        if (v < best) {
            best = v;
            best_y = y;
        }
    }
    // refinement near the argmin
    const double r2 = R / 32.0;
    const long pass2 = std::max<long>(500, spec.budget / 8);
    for (long i = 0; i < pass2; ++i) {
        for (std::size_t j = 0; j + 1 < d; ++j) z.c[j] = gen.uniform(-r2, r2);
        z.c[d - 1] = gen.uniform(-r2 * r2, r2 * r2);
        if (hnorm(z) >= r2) continue;
        const HPoint y = group_mul(best_y, z);
        if (hdist(y, ball.center) >= R) continue;
        const double v = w(y);
        if (v < best) best = v;
    }
    return best;
}

} // namespace

Weight Weight::power(double beta) {
    if (!std::isfinite(beta)) throw std::invalid_argument("Weight::power: beta must be finite");
    Weight w;
    w.kind = Kind::power;
    w.beta = beta;
    return w;
}

Weight Weight::custom(std::function<double(const HPoint&)> fn, bool radial) {
    Weight w;
    w.kind = Kind::custom;
    w.custom_fn = std::move(fn);
    w.custom_radial = radial;
    return w;
}

double Weight::operator()(const HPoint& x) const {
    switch (kind) {
        case Kind::unit: return 1.0;
        case Kind::power: return std::pow(hnorm(x), beta);
        case Kind::custom: return custom_fn(x);
    }
    return 0.0;
}

std::optional<double> Weight::closed_ball_measure(const GroupDims& dims, double R) const {
    if (kind == Kind::unit) return ball_volume(dims, R);
    if (kind == Kind::power) {
        if (beta <= -static_cast<double>(dims.Q)) return std::nullopt;
        return dims.w_Q * std::pow(R, dims.Q + beta) / (beta + dims.Q);
    }
    return std::nullopt;
}

Integrand Weight::pow_integrand(double e) const {
    Integrand g;
    if (kind == Kind::unit || e == 0.0) {
        g.fn = [](const HPoint&) { return 1.0; };
        g.radial = true;
        return g;
    }
    if (kind == Kind::power) {
        const double expnt = beta * e;
        g.fn = [expnt](const HPoint& x) { return std::pow(hnorm(x), expnt); };
        g.radial = true;
        g.origin_singular = expnt < 0.0;
        return g;
    }
    auto fn = custom_fn;
    g.fn = [fn, e](const HPoint& x) { return std::pow(fn(x), e); };
    g.radial = custom_radial;
    return g;
}

WeightIndices power_weight_indices(const GroupDims& dims, double beta) {
    if (!(beta > -static_cast<double>(dims.Q)))
        throw std::invalid_argument("power_weight_indices: need beta > -Q");
    WeightIndices wi;
    wi.q_w = beta <= 0.0 ? 1.0 : (dims.Q + beta) / dims.Q;
    wi.r_w = beta >= 0.0 ? kInf : dims.Q / (-beta);
    return wi;
}

double power_ball_measure(const GroupDims& dims, double beta, int k) {
    if (!(beta > -static_cast<double>(dims.Q)))
        throw std::invalid_argument("power_ball_measure: need beta > -Q");
    return dims.w_Q * std::exp2(static_cast<double>(k) * (dims.Q + beta)) / (beta + dims.Q);
}

QuadResult weighted_measure(const Weight& w, const Region& region, const QuadSpec& spec,
                            const GroupDims& dims) {
    return integrate_region(w.pow_integrand(1.0), region, spec, dims);
}

RatioResult ap_ratio(const Weight& w, double p, const Ball& ball, const QuadSpec& spec,
                     const GroupDims& dims) {
    if (!(p >= 1.0)) throw std::invalid_argument("ap_ratio: need p >= 1");
    RatioResult out;
    const QuadResult avg_w = avg_pow(w, 1.0, ball, spec, dims);
    if (p == 1.0) {
        const double essinf = essinf_estimate(w, ball, spec, dims);
        if (essinf <= 0.0) {
            out.value = kInf;
            out.flagged = true;
            out.note = "essinf_zero";
            return out;
        }
        out.value = avg_w.value / essinf;
        return out;
    }
    // p > 1: exponent of the dual average is -p'/p = -1/(p-1)
    const double s = 1.0 / (p - 1.0);
    QuadResult avg_dual;
    try {
        avg_dual = avg_pow(w, -s, ball, spec, dims);
    } catch (const std::runtime_error& e) {
        out.value = kInf;
        out.flagged = true;
        out.note = std::string("dual_average_divergent: ") + e.what();
        return out;
    }
    if (avg_dual.value <= 0.0 || !std::isfinite(avg_dual.value)) {
        out.value = kInf;
        out.flagged = true;
        out.note = "dual_average_not_positive";
        return out;
    }
    out.value = avg_w.value * std::pow(avg_dual.value, p - 1.0);
    out.flagged = avg_w.flagged || avg_dual.flagged;
    if (out.flagged) out.note = "quadrature_tolerance";
    return out;
}

RatioResult rh_ratio(const Weight& w, double r, const Ball& ball, const QuadSpec& spec,
                     const GroupDims& dims) {
    if (!(r > 1.0)) throw std::invalid_argument("rh_ratio: need r > 1");
    RatioResult out;
    const QuadResult avg_w = avg_pow(w, 1.0, ball, spec, dims);
    QuadResult avg_r;
    try {
        avg_r = avg_pow(w, r, ball, spec, dims);
    } catch (const std::runtime_error& e) {
        out.value = kInf;
        out.flagged = true;
        out.note = std::string("divergent: ") + e.what();
        return out;
    }
    if (avg_w.value <= 0.0) {
        out.value = kInf;
        out.flagged = true;
        out.note = "weight_mass_zero";
        return out;
    }
    out.value = std::pow(avg_r.value, 1.0 / r) / avg_w.value;
    out.flagged = avg_w.flagged || avg_r.flagged;
    if (out.flagged) out.note = "quadrature_tolerance";
    return out;
}

RwSweep confirm_rw_sweep(const Weight& w, const QuadSpec& spec, const GroupDims& dims) {
    RwSweep sw;
    if (!w.is_power_like()) return sw; // cannot confirm for custom weights
    const WeightIndices wi = power_weight_indices(dims, w.power_exponent());
    const Ball b = Ball::origin(dims.n, 1.0);
    QuadSpec sp = spec;
    sp.method = QuadMethod::radial_1d;
    sp.budget = std::min<long>(spec.budget, 200'000);
    if (std::isinf(wi.r_w)) {
        sw.r_below = 4.0;
        const RatioResult fin = rh_ratio(w, sw.r_below, b, sp, dims);
        sw.value_below = fin.value;
        sw.r_above = kInf;
        sw.above_divergent = true; // vacuous: no finite critical index to cross
        sw.confirmed = !fin.flagged && std::isfinite(fin.value);
        return sw;
    }
    sw.r_below = 1.0 + 0.9 * (wi.r_w - 1.0);
    const RatioResult fin = rh_ratio(w, sw.r_below, b, sp, dims);
    sw.value_below = fin.value;
    sw.r_above = 1.1 * wi.r_w;
    const RatioResult div = rh_ratio(w, sw.r_above, b, sp, dims);
    sw.above_divergent = div.flagged;
    sw.confirmed = !fin.flagged && std::isfinite(fin.value) && sw.above_divergent;
    return sw;
}

SandwichReport sandwich_check(const Weight& w, double p, double r,
                              const std::vector<NestedPair>& pairs, const QuadSpec& spec,
                              const GroupDims& dims) {
    SandwichReport rep;
    rep.c1 = kInf;
    rep.c2 = 0.0;
    const double upper_expnt = (r - 1.0) / r;
    for (const auto& pr : pairs) {
        const QuadResult wE = weighted_measure(w, pr.subset, spec, dims);
        const QuadResult wB = weighted_measure(w, pr.ball.region(), spec, dims);
        // |E| via unit-weight quadrature of the same region keeps both ratios
        // on the same footing.
        const QuadResult mE = weighted_measure(Weight::unit(), pr.subset, spec, dims);
        const double mB = ball_volume(dims, pr.ball.radius);
        if (wB.value <= 0.0 || mB <= 0.0 || mE.value <= 0.0) continue;
        const double w_ratio = wE.value / wB.value;
        const double m_ratio = mE.value / mB;
        rep.c1 = std::min(rep.c1, w_ratio / std::pow(m_ratio, p));
        rep.c2 = std::max(rep.c2, w_ratio / std::pow(m_ratio, upper_expnt));
        ++rep.n_pairs;
    }
    for (double lambda : {2.0, 4.0, 8.0}) {
        SandwichReport::Doubling d;
        d.lambda = lambda;
        d.bound = std::pow(lambda, dims.Q * p);
        double wB, wLB;
        if (auto cb = w.closed_ball_measure(dims, 1.0)) {
            wB = *cb;
            wLB = *w.closed_ball_measure(dims, lambda);
        } else {
            wB = weighted_measure(w, Region::ball(1.0), spec, dims).value;
            wLB = weighted_measure(w, Region::ball(lambda), spec, dims).value;
        }
        d.ratio = wLB / wB;
        d.holds = d.ratio <= d.bound * (1.0 + 1e-12);
        rep.doubling.push_back(d);
    }
    rep.holds = rep.n_pairs > 0 && rep.c1 > 0.0 && std::isfinite(rep.c1) &&
                std::isfinite(rep.c2) && rep.c2 > 0.0;
    for (const auto& d : rep.doubling) rep.holds = rep.holds && d.holds;
    return rep;
}

AvgBoundReport weighted_avg_bound_check(const Weight& w, double p, const Integrand& f,
                                        const Ball& ball, const QuadSpec& spec,
                                        const GroupDims& dims) {
    if (!(p >= 1.0)) throw std::invalid_argument("weighted_avg_bound_check: need p >= 1");
    AvgBoundReport rep;
    QuadSpec sp = spec;
    if (sp.method == QuadMethod::radial_1d && (!f.radial || !w.radial() || !ball.at_origin()))
        sp.method = QuadMethod::stratified_monte_carlo;

    Integrand abs_f;
    abs_f.fn = [fn = f.fn](const HPoint& x) { return std::abs(fn(x)); };
    abs_f.radial = f.radial;
    abs_f.origin_singular = f.origin_singular;
    const QuadResult If = integrate_region(abs_f, ball.region(), sp, dims);
    rep.lhs = If.value / ball_volume(dims, ball.radius);

    Integrand fpw;
    fpw.fn = [fn = f.fn, &w, p](const HPoint& x) { return std::pow(std::abs(fn(x)), p) * w(x); };
    fpw.radial = f.radial && w.radial();
    fpw.origin_singular = f.origin_singular || w.origin_singular();
    const QuadResult Ifp = integrate_region(fpw, ball.region(), sp, dims);

    double wB;
    if (auto cb = w.closed_ball_measure(dims, ball.radius); cb && ball.at_origin())
        wB = *cb;
    else
        wB = weighted_measure(w, ball.region(), sp, dims).value;
    rep.rhs = std::pow(Ifp.value / wB, 1.0 / p);
    rep.c_required = rep.rhs > 0.0 ? rep.lhs / rep.rhs : kInf;
    return rep;
}

} // namespace hherz
