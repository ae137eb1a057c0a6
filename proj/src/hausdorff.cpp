#include "hherz/hausdorff.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace hherz {

namespace {

constexpr double kSlack = 1e-12;

QuadSpec windowed(const QuadSpec& spec, const Kernel& phi) {
    QuadSpec sp = spec;
    sp.tail_k = phi.window_hi(spec);
    sp.tail_k_lo = phi.window_lo(spec);
    return sp;
}

[[noreturn]] void hypothesis_error(const char* who, const HypothesisReport& rep) {
    std::ostringstream os;
    os << who << ": hypotheses violated:";
    for (const auto& v : rep.violations) os << " [" << v << "]";
    throw std::invalid_argument(os.str());
}

} // namespace

Kernel Kernel::char_shell(double r1, double r2) {
    if (!(r1 >= 0) || !(r2 >= r1))
        throw std::invalid_argument("Kernel::char_shell: need 0 <= r1 <= r2");
    Kernel k;
    k.kind = Kind::char_shell;
    k.r1 = r1;
    k.r2 = r2;
    return k;
}

Kernel Kernel::power_decay(double sigma, double r0) {
    if (!(r0 > 0)) throw std::invalid_argument("Kernel::power_decay: need r0 > 0");
    Kernel k;
    k.kind = Kind::power_decay;
    k.sigma = sigma;
    k.r0 = r0;
    return k;
}

Kernel Kernel::custom(std::function<double(const HPoint&)> fn, bool radial) {
    Kernel k;
    k.kind = Kind::custom;
    k.custom_fn = std::move(fn);
    k.custom_radial = radial;
    return k;
}

double Kernel::radial_eval(double r) const {
    switch (kind) {
        case Kind::char_shell: return (r >= r1 && r <= r2) ? 1.0 : 0.0;
        case Kind::power_decay: return r >= r0 ? std::pow(r, -sigma) : 0.0;
        case Kind::custom: throw std::logic_error("Kernel::radial_eval: custom kind");
    }
    return 0.0;
}

double Kernel::operator()(const HPoint& y) const {
    if (kind == Kind::custom) return custom_fn(y);
    return radial_eval(hnorm(y));
}

int Kernel::window_lo(const QuadSpec& spec) const {
    switch (kind) {
        case Kind::char_shell:
            if (r1 <= 0.0 || empty_support()) return spec.tail_k_lo;
            return std::max(spec.tail_k_lo, static_cast<int>(std::floor(std::log2(r1))));
        case Kind::power_decay:
            return std::max(spec.tail_k_lo, static_cast<int>(std::floor(std::log2(r0))));
        case Kind::custom: return spec.tail_k_lo;
    }
    return spec.tail_k_lo;
}

int Kernel::window_hi(const QuadSpec& spec) const {
    if (kind == Kind::char_shell && !empty_support()) {
        const int hi = static_cast<int>(std::ceil(std::log2(r2)));
        return std::max(std::min(spec.tail_k, hi), window_lo(spec) + 1);
    }
    return spec.tail_k;
}

bool kernel_integrable(const Kernel& phi, const QuadSpec& spec, const GroupDims& dims,
                       std::string* note) {
    if (phi.empty_support()) return true;
    Integrand g;
    g.fn = [&phi, Q = dims.Q](const HPoint& y) {
        const double v = std::abs(phi(y));
        if (v == 0.0) return 0.0;
        return v / std::pow(hnorm(y), Q);
    };
    g.radial = phi.radial();
    g.origin_singular = true;
    if (phi.kind == Kernel::Kind::power_decay && phi.sigma > 0)
        g.tail_exponent = phi.sigma + dims.Q; // |Phi(y)|/|y|^Q <= |y|^{-(sigma+Q)}
    QuadSpec sp = windowed(spec, phi);
    sp.budget = std::min<long>(sp.budget, 100'000);
    if (sp.method == QuadMethod::radial_1d && !g.radial)
        sp.method = QuadMethod::stratified_monte_carlo;
    try {
        const QuadResult r = integrate_region(g, Region::whole_space(), sp, dims);
        if (!std::isfinite(r.value)) {
            if (note) *note = "kernel integral non-finite";
            return false;
        }
    } catch (const std::exception& e) {
        if (note) *note = e.what();
        return false;
    }
    return true;
}

HypothesisReport check_hypotheses(const TheoremParams& tp, const GroupDims& dims,
                                  const QuadSpec& spec) {
    HypothesisReport rep;
    auto fail = [&rep](const std::string& msg) { rep.violations.push_back(msg); };
    const double Q = dims.Q;

    if (!(tp.p >= 1.0) || !std::isfinite(tp.p)) fail("need 1 <= p < inf");
    if (!(tp.q > 1.0) || !std::isfinite(tp.q))
        fail("need 1 < q < inf (CBMO requires q > 1; q = 1 scenarios are rejected)");
    if (!(tp.q1 >= 1.0) || !std::isfinite(tp.q1)) fail("need 1 <= q1 < inf");
    if (!(tp.q2 >= 1.0) || !std::isfinite(tp.q2)) fail("need 1 <= q2 < inf");

    if (tp.which == TheoremParams::Which::thm2) {
        rep.selected = TheoremParams::Which::thm2;
        if (!tp.weight.is_power_like())
            fail("thm2 needs a power weight |x|^beta");
        else if (!(tp.weight.power_exponent() > -static_cast<double>(dims.n)))
            fail("thm2 needs beta > -n");
        if (!(tp.q1 > 1.0)) fail("thm2 needs q1 > 1");
        if (!(tp.q2 > 1.0)) fail("thm2 needs q2 > 1");
        if (std::abs(1.0 / tp.q2 - 1.0 / tp.q - 1.0 / tp.q1) > kSlack)
            fail("index identity 1/q2 = 1/q + 1/q1 violated");
        if (std::abs(1.0 / tp.q + tp.alpha2 / Q - tp.alpha1 / Q) > kSlack)
            fail("index identity 1/q + alpha2/Q = alpha1/Q violated");
        rep.ok = rep.violations.empty();
        return rep;
    }

    // Theorem with general A_1 weights, cases i/ii.
    if (!(tp.alpha1 < 0.0)) fail("alpha1 < 0 required");
    rep.s = tp.s();
    if (std::abs(tp.alpha1 / Q + 1.0 / tp.q1 - tp.alpha2 / Q - 1.0 / tp.q2) > kSlack)
        fail("index identity alpha1/Q + 1/q1 = alpha2/Q + 1/q2 violated");

    if (!tp.weight.is_power_like()) {
        fail("critical indices unavailable for custom weights");
    } else {
        const double beta = tp.weight.power_exponent();
        if (!(beta > -Q)) {
            fail("weight must be locally integrable (beta > -Q)");
        } else {
            const WeightIndices wi = power_weight_indices(dims, beta);
            rep.q_w = wi.q_w;
            rep.r_w = wi.r_w;
            if (wi.q_w > 1.0) fail("weight not in A_1 (power weights need beta <= 0)");
            const RwSweep sweep = confirm_rw_sweep(tp.weight, spec, dims);
            if (!sweep.confirmed) fail("reverse-Holder critical index not confirmed by sweep");
            const double s_bound =
                std::isinf(wi.r_w) ? tp.q2 : tp.q2 * wi.r_w / (wi.r_w - 1.0);
            if (!(rep.s > s_bound))
                fail("need s > q2 r_w/(r_w - 1); s = " + std::to_string(rep.s) +
                     ", bound = " + std::to_string(s_bound));
            rep.delta_used = tp.delta != 0.0
                                 ? tp.delta
                                 : (std::isinf(wi.r_w) ? 2.0 : std::min(2.0, 0.5 * (1.0 + wi.r_w)));
            if (!(rep.delta_used > 1.0 && rep.delta_used < wi.r_w))
                fail("need 1 < delta < r_w; delta = " + std::to_string(rep.delta_used));
        }
    }

    const double case_sign = 1.0 / tp.q1 + tp.alpha1 / Q;
    rep.selected = case_sign >= 0.0 ? TheoremParams::Which::thm1_case_i
                                    : TheoremParams::Which::thm1_case_ii;
    if (rep.selected != tp.which)
        fail(case_sign >= 0.0 ? "1/q1 + alpha1/Q >= 0 selects case i"
                              : "1/q1 + alpha1/Q < 0 selects case ii");
    rep.ok = rep.violations.empty();
    return rep;
}

QuadResult apply_hausdorff(const Integrand& f, const Kernel& phi, const MatrixField& A,
                           const HPoint& x, const QuadSpec& spec, const GroupDims& dims) {
    if (f.origin_singular && hnorm(x) == 0.0)
        throw std::invalid_argument("apply_hausdorff: singular f requires x != 0");
    if (phi.empty_support()) return QuadResult{};
    Integrand g;
    g.fn = [&phi, &A, &f, &x, Q = dims.Q](const HPoint& y) {
        const double p = phi(y);
        if (p == 0.0) return 0.0;
        return p / std::pow(hnorm(y), Q) * f.fn(A.apply_at(y, x));
    };
    g.origin_singular = true;
    g.radial = phi.radial() && A.radially_invariant();
    QuadSpec sp = windowed(spec, phi);
    if (sp.method == QuadMethod::radial_1d && !g.radial)
        sp.method = QuadMethod::stratified_monte_carlo;
    return integrate_region(g, Region::whole_space(), sp, dims);
}

QuadResult apply_commutator(const Integrand& b, const Integrand& f, const Kernel& phi,
                            const MatrixField& A, const HPoint& x, const QuadSpec& spec,
                            const GroupDims& dims) {
    if ((f.origin_singular || b.origin_singular) && hnorm(x) == 0.0)
        throw std::invalid_argument("apply_commutator: singular symbol or f requires x != 0");
    if (phi.empty_support()) return QuadResult{};
    const double b_at_x = b.fn(x);
    Integrand g;
    g.fn = [&phi, &A, &f, &b, &x, b_at_x, Q = dims.Q](const HPoint& y) {
        const double p = phi(y);
        if (p == 0.0) return 0.0;
        const HPoint z = A.apply_at(y, x);
        return p / std::pow(hnorm(y), Q) * (b_at_x - b.fn(z)) * f.fn(z);
    };
    g.origin_singular = true;
    g.radial = phi.radial() && A.radially_invariant();
    QuadSpec sp = windowed(spec, phi);
    if (sp.method == QuadMethod::radial_1d && !g.radial)
        sp.method = QuadMethod::stratified_monte_carlo;
    return integrate_region(g, Region::whole_space(), sp, dims);
}

namespace {

// Shared skeleton of K1/K2: |Phi(y)|/|y|^Q (1 + |det A^-1|^{1/q} ||A||^{Q/q})
// |det A^-1|^{1/q1} times the case's region-dependent power and log factor.
QuadResult k12_impl(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                    const QuadSpec& spec, const GroupDims& dims, bool swap_regions,
                    double delta) {
    if (phi.empty_support()) return QuadResult{};
    const double Q = dims.Q;
    const double damp = (tp.alpha1 + Q / tp.q1) * (delta - 1.0) / delta;
    Integrand g;
    g.fn = [&phi, &A, &tp, Q, damp, swap_regions](const HPoint& y) {
        const double p = std::abs(phi(y));
        if (p == 0.0) return 0.0;
        const MatrixField::Sample s = A.sample(y);
        const double common = p / std::pow(hnorm(y), Q) *
                              (1.0 + std::pow(s.abs_det_inv, 1.0 / tp.q) *
                                         std::pow(s.norm, Q / tp.q)) *
                              std::pow(s.abs_det_inv, 1.0 / tp.q1);
        const bool small = s.norm < 1.0;
        const bool plain_branch = swap_regions ? !small : small;
        const double logf = small ? std::log(2.0 / s.norm) : std::log(2.0 * s.norm);
        if (plain_branch) return common * std::pow(s.norm, -tp.alpha1) * logf;
        return common * std::pow(s.norm, Q / tp.q1 - damp) * logf;
    };
    g.origin_singular = true;
    g.radial = phi.radial() && A.radially_invariant();
    QuadSpec sp = windowed(spec, phi);
    if (sp.method == QuadMethod::radial_1d && !g.radial)
        sp.method = QuadMethod::stratified_monte_carlo;
    return integrate_region(g, Region::whole_space(), sp, dims);
}

double theta_from_sample(double abs_phi, double r, const MatrixField::Sample& s,
                         const TheoremParams& tp, const GroupDims& dims) {
    const double Q = dims.Q;
    const double beta = tp.weight.power_exponent();
    const double logf = s.norm < 1.0 ? std::log(2.0 / s.norm) : std::log(2.0 * s.norm);
    return abs_phi / std::pow(r, Q) * std::pow(s.abs_det_inv, 1.0 / tp.q1) * logf *
           MatrixField::g_of_inverse(s, beta / tp.q1) *
           (1.0 + std::pow(s.abs_det_inv, 1.0 / tp.q) *
                      MatrixField::g_of_inverse(s, beta / tp.q) *
                      std::pow(s.norm, (Q + beta) / tp.q));
}

} // namespace

QuadResult k1_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                       const QuadSpec& spec, const GroupDims& dims) {
    const HypothesisReport rep = check_hypotheses(tp, dims, spec);
    if (!rep.ok || tp.which != TheoremParams::Which::thm1_case_i)
        hypothesis_error("k1_constant", rep);
    return k12_impl(phi, A, tp, spec, dims, /*swap_regions=*/false, rep.delta_used);
}

QuadResult k2_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                       const QuadSpec& spec, const GroupDims& dims) {
    const HypothesisReport rep = check_hypotheses(tp, dims, spec);
    if (!rep.ok || tp.which != TheoremParams::Which::thm1_case_ii)
        hypothesis_error("k2_constant", rep);
    return k12_impl(phi, A, tp, spec, dims, /*swap_regions=*/true, rep.delta_used);
}

double theta_weight(const HPoint& y, const Kernel& phi, const MatrixField& A,
                    const TheoremParams& tp, const GroupDims& dims) {
    const double p = std::abs(phi(y));
    if (p == 0.0) return 0.0;
    const double r = hnorm(y);
    if (r == 0.0) throw std::invalid_argument("theta_weight: y must be nonzero");
    return theta_from_sample(p, r, A.sample(y), tp, dims);
}

QuadResult k3_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                       const QuadSpec& spec, const GroupDims& dims) {
    const HypothesisReport rep = check_hypotheses(tp, dims, spec);
    if (!rep.ok || tp.which != TheoremParams::Which::thm2) hypothesis_error("k3_constant", rep);
    if (phi.empty_support()) return QuadResult{};
    const double Q = dims.Q;
    const double beta = tp.weight.power_exponent();
    const bool alpha1_zero = tp.alpha1 == 0.0;
    const double g_expnt = tp.alpha1 * (Q + beta) / Q;
    Integrand g;
    g.fn = [&phi, &A, &tp, &dims, alpha1_zero, g_expnt](const HPoint& y) {
        const double p = std::abs(phi(y));
        if (p == 0.0) return 0.0;
        const MatrixField::Sample s = A.sample(y);
        const double theta = theta_from_sample(p, hnorm(y), s, tp, dims);
        if (alpha1_zero) return theta * (1.0 + std::log2(s.norm_inv * s.norm));
        return theta * MatrixField::g_of_inverse(s, g_expnt);
    };
    g.origin_singular = true;
    g.radial = phi.radial() && A.radially_invariant();
    QuadSpec sp = windowed(spec, phi);
    if (sp.method == QuadMethod::radial_1d && !g.radial)
        sp.method = QuadMethod::stratified_monte_carlo;
    return integrate_region(g, Region::whole_space(), sp, dims);
}

QuadResult k_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                      const QuadSpec& spec, const GroupDims& dims) {
    switch (tp.which) {
        case TheoremParams::Which::thm1_case_i: return k1_constant(phi, A, tp, spec, dims);
        case TheoremParams::Which::thm1_case_ii: return k2_constant(phi, A, tp, spec, dims);
        case TheoremParams::Which::thm2: return k3_constant(phi, A, tp, spec, dims);
    }
    throw std::logic_error("k_constant: unreachable");
}

} // namespace hherz
