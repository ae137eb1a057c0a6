#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hherz/hausdorff.hpp"
#include "test_helpers.hpp"

using namespace hherz;
using testutil::kPi2;
using testutil::pt;
using testutil::rel_err;

namespace {

QuadSpec mc_spec(long budget = 300'000, std::uint64_t seed = 51) {
    QuadSpec sp;
    sp.budget = budget;
    sp.seed = seed;
    return sp;
}

QuadSpec radial_spec(long budget = 200'000) {
    QuadSpec sp;
    sp.method = QuadMethod::radial_1d;
    sp.budget = budget;
    return sp;
}

TheoremParams thm1_worked() {
    TheoremParams tp;
    tp.which = TheoremParams::Which::thm1_case_i;
    tp.p = 1.0;
    tp.q = 4.0;
    tp.q1 = 2.0;
    tp.q2 = 1.25;
    tp.alpha1 = -1.0;
    tp.alpha2 = -2.2;
    tp.weight = Weight::unit();
    return tp;
}

TheoremParams thm2_worked() {
    TheoremParams tp;
    tp.which = TheoremParams::Which::thm2;
    tp.p = 1.0;
    tp.q = 4.0;
    tp.q1 = 2.0;
    tp.q2 = 4.0 / 3.0;
    tp.alpha1 = 0.0;
    tp.alpha2 = -1.0;
    tp.weight = Weight::power(0.5);
    return tp;
}

} // namespace

TEST_CASE("hypothesis checker") {
    const GroupDims dims = group_constants(1);
    const QuadSpec sp = mc_spec(50'000);

    const auto ok1 = check_hypotheses(thm1_worked(), dims, sp);
    CHECK(ok1.ok);
    CHECK(ok1.selected == TheoremParams::Which::thm1_case_i);
    CHECK(ok1.s == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(ok1.delta_used == doctest::Approx(2.0));

    const auto ok2 = check_hypotheses(thm2_worked(), dims, sp);
    CHECK(ok2.ok);

    TheoremParams bad = thm1_worked();
    bad.alpha1 = 1.0;
    bad.alpha2 = bad.alpha1 + dims.Q * (1.0 / bad.q1 - 1.0 / bad.q2);
    const auto r = check_hypotheses(bad, dims, sp);
    CHECK(!r.ok);
    bool found = false;
    for (const auto& v : r.violations) found = found || v.find("alpha1 < 0") != std::string::npos;
    CHECK(found);

    TheoremParams q1case = thm1_worked();
    q1case.q = 1.0; // CBMO needs q > 1
    CHECK(!check_hypotheses(q1case, dims, sp).ok);

    TheoremParams mismatch = thm1_worked();
    mismatch.which = TheoremParams::Which::thm1_case_ii; // params select case i
    CHECK(!check_hypotheses(mismatch, dims, sp).ok);

    TheoremParams not_a1 = thm1_worked();
    not_a1.weight = Weight::power(1.0); // beta > 0 is not A_1
    CHECK(!check_hypotheses(not_a1, dims, sp).ok);

    TheoremParams s_bad = thm1_worked();
    s_bad.q2 = 2.0; // s = 4/3 fails s > q2
    s_bad.alpha2 = dims.Q * (s_bad.alpha1 / dims.Q + 1.0 / s_bad.q1 - 1.0 / s_bad.q2);
    CHECK(!check_hypotheses(s_bad, dims, sp).ok);

    TheoremParams custom_w = thm1_worked();
    custom_w.weight = Weight::custom([](const HPoint&) { return 1.0; }, true);
    CHECK(!check_hypotheses(custom_w, dims, sp).ok);
}

TEST_CASE("kernel catalog and windows") {
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    CHECK(shell(pt({1.5, 0, 0})) == 1.0);
    CHECK(shell(pt({2.5, 0, 0})) == 0.0);
    QuadSpec sp = mc_spec();
    sp.tail_k = 8;
    sp.tail_k_lo = -12;
    CHECK(shell.window_lo(sp) == 0);
    CHECK(shell.window_hi(sp) == 1);

    const Kernel decay = Kernel::power_decay(6.0, 1.0);
    CHECK(decay(pt({2, 0, 0})) == doctest::Approx(std::pow(2.0, -6)).epsilon(1e-14));
    CHECK(decay(pt({0.5, 0, 0})) == 0.0);
    CHECK(decay.window_lo(sp) == 0);
    CHECK(decay.window_hi(sp) == 8);

    std::string note;
    const GroupDims dims = group_constants(1);
    CHECK(kernel_integrable(shell, sp, dims, &note));
    CHECK(kernel_integrable(decay, sp, dims, &note));
    CHECK(Kernel::char_shell(1.0, 1.0).empty_support());
}

TEST_CASE("hausdorff operator: eigenfunction identity") {
    const GroupDims dims = group_constants(1);
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const Integrand f = TestFunction::power(2.0).as_integrand();

    // T_Phi |x|^{-2} = (w_Q Int_1^2 r dr) |x|^{-2} = 3 pi^2 |x|^{-2}
    for (const HPoint& x : {pt({1, 0, 0}), pt({0.5, -0.5, 0.3}), pt({0, 0, 9})}) {
        const double nx = hnorm(x);
        const auto mc = apply_hausdorff(f, shell, invdil, x, mc_spec(400'000), dims);
        CHECK(rel_err(mc.value * nx * nx, 3 * kPi2) < 0.01);
        const auto rd = apply_hausdorff(f, shell, invdil, x, radial_spec(), dims);
        CHECK(rel_err(rd.value * nx * nx, 3 * kPi2) < 1e-8);
    }

    // zero function maps to zero
    const auto z = apply_hausdorff(TestFunction::constant(0.0).as_integrand(), shell, invdil,
                                   pt({1, 0, 0}), mc_spec(), dims);
    CHECK(z.value == 0.0);

    // constant identity field factors the integral: (w_Q Int_1^2 dr/r) f(x)
    const MatrixField ident = MatrixField::constant(GradedMatrix::identity(1));
    const Integrand bumpf = TestFunction::bump(0.0, 0.6).as_integrand();
    const HPoint x0 = pt({0.8, 0.1, -0.2});
    const auto t = apply_hausdorff(bumpf, shell, ident, x0, radial_spec(), dims);
    CHECK(rel_err(t.value, 2 * kPi2 * std::log(2.0) * bumpf.fn(x0)) < 1e-8);

    CHECK_THROWS_AS(apply_hausdorff(f, shell, invdil, HPoint::zero(1), mc_spec(), dims),
                    std::invalid_argument);
}

TEST_CASE("commutator: closed form, constants vanish, linearity") {
    const GroupDims dims = group_constants(1);
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const Integrand b = TestFunction::log_norm().as_integrand();
    const Integrand f = TestFunction::power(2.0).as_integrand();
    const HPoint x0 = pt({0.8, -0.4, 0.6});
    const double nx = hnorm(x0);

    // T^b f = (w_Q Int_1^2 r log r dr) |x|^{-2} = 2 pi^2 (2 log 2 - 3/4) |x|^{-2}
    const double want = 2 * kPi2 * (2 * std::log(2.0) - 0.75);
    const auto mc = apply_commutator(b, f, shell, invdil, x0, mc_spec(400'000), dims);
    CHECK(rel_err(mc.value * nx * nx, want) < 0.01);
    const auto rd = apply_commutator(b, f, shell, invdil, x0, radial_spec(), dims);
    CHECK(rel_err(rd.value * nx * nx, want) < 1e-8);

    // constant symbol commutes: integrand vanishes identically
    const auto zero = apply_commutator(TestFunction::constant(7.0).as_integrand(), f, shell,
                                       invdil, x0, mc_spec(), dims);
    CHECK(zero.value == 0.0);

    // symbol shift invariance on shared nodes
    Integrand b_shift = b;
    b_shift.fn = [fn = b.fn](const HPoint& x) { return fn(x) + 5.0; };
    const auto shifted = apply_commutator(b_shift, f, shell, invdil, x0, mc_spec(400'000), dims);
    CHECK(rel_err(shifted.value, mc.value) < 1e-10);

    // linearity on shared nodes: T^b(2f + g) = 2 T^b(f) + T^b(g)
    const Integrand g = TestFunction::char_ball(1).as_integrand();
    Integrand comb;
    comb.fn = [ff = f.fn, gg = g.fn](const HPoint& x) { return 2.0 * ff(x) + gg(x); };
    comb.origin_singular = true;
    const auto tc = apply_commutator(b, comb, shell, invdil, x0, mc_spec(200'000, 5), dims);
    const auto tf = apply_commutator(b, f, shell, invdil, x0, mc_spec(200'000, 5), dims);
    const auto tg = apply_commutator(b, g, shell, invdil, x0, mc_spec(200'000, 5), dims);
    CHECK(rel_err(tc.value, 2.0 * tf.value + tg.value) < 1e-10);
}

TEST_CASE("K1 constant") {
    const GroupDims dims = group_constants(1);
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const TheoremParams tp = thm1_worked();
    const double want = 4 * kPi2 * (3 * std::log(2.0) - 1.0);

    CHECK(rel_err(k1_constant(shell, invdil, tp, mc_spec(600'000), dims).value, want) < 0.01);
    CHECK(rel_err(k1_constant(shell, invdil, tp, radial_spec(), dims).value, want) < 1e-8);

    // zero kernel gives zero
    CHECK(k1_constant(Kernel::char_shell(1.0, 1.0), invdil, tp, mc_spec(), dims).value == 0.0);

    // scaling Phi -> c Phi scales K1 by |c| on shared nodes (custom kernels
    // share the same integration window, hence the same node set)
    const Kernel base = Kernel::custom([shell](const HPoint& y) { return shell(y); }, true);
    const Kernel scaled = Kernel::custom(
        [shell](const HPoint& y) { return -2.5 * shell(y); }, true);
    QuadSpec sp9 = mc_spec(100'000, 9);
    sp9.tail_k = 1;
    sp9.tail_k_lo = -4;
    const double k1 = k1_constant(base, invdil, tp, sp9, dims).value;
    const double k1s = k1_constant(scaled, invdil, tp, sp9, dims).value;
    CHECK(rel_err(k1s, 2.5 * k1) < 1e-12);

    // hypothesis gate fires before integration
    TheoremParams bad = tp;
    bad.alpha1 = 0.5;
    CHECK_THROWS_AS(k1_constant(shell, invdil, bad, mc_spec(), dims), std::invalid_argument);
    CHECK_THROWS_AS(k2_constant(shell, invdil, tp, mc_spec(), dims), std::invalid_argument);
}

TEST_CASE("K1 with an A_1 power weight") {
    // beta = -1: r_w = Q = 4, so the s-condition s > q2 r_w/(r_w-1) needs
    // q2 < 3s/4; q = 8, q1 = 2 gives s = 1.6 and q2 = 1.1 works.
    const GroupDims dims = group_constants(1);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    TheoremParams tp;
    tp.which = TheoremParams::Which::thm1_case_i;
    tp.p = 1.0;
    tp.q = 8.0;
    tp.q1 = 2.0;
    tp.q2 = 1.1;
    tp.alpha1 = -1.0;
    tp.alpha2 = dims.Q * (tp.alpha1 / dims.Q + 1.0 / tp.q1 - 1.0 / tp.q2);
    tp.weight = Weight::power(-1.0);

    const auto rep = check_hypotheses(tp, dims, mc_spec(50'000));
    CHECK(rep.ok);
    CHECK(rep.r_w == doctest::Approx(4.0));
    CHECK(rep.delta_used == doctest::Approx(2.0)); // min(2, (1+r_w)/2)
    CHECK(rep.s == doctest::Approx(1.6));

    // K1 reduces radially to 2 w_Q Int_1^2 r^{Q/q1 + alpha1 - 1} log(2r) dr
    // = 2 w_Q Int_1^2 log(2r) dr, same as the unit-weight worked value
    const double want = 4 * kPi2 * (3 * std::log(2.0) - 1.0);
    CHECK(rel_err(k1_constant(shell, invdil, tp, radial_spec(), dims).value, want) < 1e-8);

    // the same indices fail once the weight leaves A_1
    TheoremParams bad = tp;
    bad.weight = Weight::power(0.5);
    CHECK(!check_hypotheses(bad, dims, mc_spec(50'000)).ok);
}

TEST_CASE("K2 constant") {
    const GroupDims dims = group_constants(1);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const Kernel inner_shell = Kernel::char_shell(0.25, 0.5);
    TheoremParams tp;
    tp.which = TheoremParams::Which::thm1_case_ii;
    tp.p = 1.0;
    tp.q = 4.0;
    tp.q1 = 8.0; // 1/q1 + alpha1/Q = 1/8 - 1/4 < 0: case ii
    tp.q2 = 40.0 / 37.0;
    tp.alpha1 = -1.0;
    tp.alpha2 = dims.Q * (tp.alpha1 / dims.Q + 1.0 / tp.q1 - 1.0 / tp.q2);
    tp.weight = Weight::unit();

    // on the shell ||A(y)|| = 1/|y| in (2,4): only the ||A|| >= 1 branch fires;
    // radial reduction: 2 w_Q Int_{1/4}^{1/2} r^{Q/q1 + alpha1 - 1} log(2/r) dr
    const double want =
        4 * kPi2 * (4 * std::sqrt(2.0) * (1 - std::log(2.0)) - 8 + 12 * std::log(2.0));
    CHECK(rel_err(k2_constant(inner_shell, invdil, tp, radial_spec(), dims).value, want) < 1e-8);
    CHECK(rel_err(k2_constant(inner_shell, invdil, tp, mc_spec(600'000), dims).value, want) <
          0.01);
}

TEST_CASE("theta weight") {
    const GroupDims dims = group_constants(1);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const Kernel one = Kernel::power_decay(0.0, 1e-9);
    TheoremParams tp;
    tp.which = TheoremParams::Which::thm2;
    tp.q = 2.0;
    tp.q1 = 2.0;
    tp.q2 = 1.0;
    tp.alpha1 = 1.0; // theta does not involve alpha; keep any value
    tp.alpha2 = 0.0;
    tp.weight = Weight::power(0.0);

    // worked value at |y|_h = 2 with beta = 0, q = q1 = 2
    CHECK(theta_weight(pt({2, 0, 0}), one, invdil, tp, dims) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // Phi = 0 at y gives 0
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    CHECK(theta_weight(pt({4, 0, 0}), shell, invdil, tp, dims) == 0.0);

    // continuity across ||A(y)|| = 1: both log branches meet at log 2
    const double lo = theta_weight(pt({1.0 - 1e-9, 0, 0}), one, invdil, tp, dims);
    const double hi = theta_weight(pt({1.0 + 1e-9, 0, 0}), one, invdil, tp, dims);
    CHECK(rel_err(lo, hi) < 1e-6);
}

TEST_CASE("K3 constant") {
    const GroupDims dims = group_constants(1);
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const TheoremParams tp = thm2_worked();

    // alpha1 = 0 with inverse dilation: ||A^{-1}|| ||A|| = 1, the log_2 factor
    // drops, K3 = Int Theta = 2 w_Q Int_1^2 r^{5/4} log(2r) dr
    const double hand = 2 * dims.w_Q *
                        (std::pow(2.0, 2.25) * (std::log(4.0) / 2.25 - 1.0 / (2.25 * 2.25)) -
                         (std::log(2.0) / 2.25 - 1.0 / (2.25 * 2.25)));
    CHECK(rel_err(k3_constant(shell, invdil, tp, radial_spec(), dims).value, hand) < 1e-8);
    CHECK(rel_err(k3_constant(shell, invdil, tp, mc_spec(600'000), dims).value, hand) < 0.01);

    CHECK(k3_constant(Kernel::char_shell(2.0, 2.0), invdil, tp, mc_spec(), dims).value == 0.0);

    // degree-1 homogeneity in |Phi| on shared nodes
    {
        const Kernel base = Kernel::custom([](const HPoint& y) {
            const double r = hnorm(y);
            return (r >= 1.0 && r <= 2.0) ? 1.0 : 0.0;
        }, true);
        const Kernel scaled = Kernel::custom([](const HPoint& y) {
            const double r = hnorm(y);
            return (r >= 1.0 && r <= 2.0) ? -2.5 : 0.0;
        }, true);
        QuadSpec sp = mc_spec(100'000, 23);
        sp.tail_k = 1;
        sp.tail_k_lo = -4;
        const double a = k3_constant(base, invdil, tp, sp, dims).value;
        const double b2 = k3_constant(scaled, invdil, tp, sp, dims).value;
        CHECK(rel_err(b2, 2.5 * a) < 1e-12);
    }

    // alpha1 != 0 with a constant field: the G factor is constant, so
    // K3 = G(A^{-1}, alpha1 (Q+beta)/Q) * Int Theta on shared nodes.
    TheoremParams tpc = tp;
    tpc.alpha1 = 0.5;
    tpc.alpha2 = tpc.alpha1 - dims.Q / tpc.q; // identity 1/q + alpha2/Q = alpha1/Q
    const GradedMatrix M(1, {2, 0, 0, 3}, 16.0);
    const MatrixField cf = MatrixField::constant(M);
    const double k3 = k3_constant(shell, cf, tpc, mc_spec(200'000, 13), dims).value;
    Integrand theta_int;
    theta_int.fn = [&](const HPoint& y) { return theta_weight(y, shell, cf, tpc, dims); };
    theta_int.origin_singular = true;
    theta_int.radial = true;
    QuadSpec sp = mc_spec(200'000, 13);
    sp.tail_k = shell.window_hi(sp);
    sp.tail_k_lo = shell.window_lo(sp);
    const double theta_total = integrate_region(theta_int, Region::whole_space(), sp, dims).value;
    const double gfac =
        g_function(M.inverse(), tpc.alpha1 * (dims.Q + tp.weight.power_exponent()) / dims.Q);
    CHECK(rel_err(k3, gfac * theta_total) < 1e-12);

    // thm1 params are rejected by the thm2 gate
    CHECK_THROWS_AS(k3_constant(shell, invdil, thm1_worked(), mc_spec(), dims),
                    std::invalid_argument);
}

TEST_CASE("power-decay kernel: truncated whole-space operator") {
    const GroupDims dims = group_constants(1);
    const Kernel decay = Kernel::power_decay(6.0, 1.0);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const Integrand f = TestFunction::power(2.0).as_integrand();
    // eigenvalue w_Q Int_1^inf r^{-6} r dr = w_Q / 4; the truncated tail past
    // 2^tail_k is O(2^{-4 tail_k})
    QuadSpec sp = mc_spec(4'000'000);
    sp.tail_k = 4;
    const HPoint x = pt({0.9, 0.2, -0.5});
    const double nx = hnorm(x);
    const auto t = apply_hausdorff(f, decay, invdil, x, sp, dims);
    CHECK(rel_err(t.value * nx * nx, dims.w_Q / 4.0) < 0.02);

    QuadSpec rs = radial_spec();
    rs.tail_k = 4;
    const auto r = apply_hausdorff(f, decay, invdil, x, rs, dims);
    const double truncated = dims.w_Q * (1.0 - std::pow(16.0, -4.0)) / 4.0;
    CHECK(rel_err(r.value * nx * nx, truncated) < 1e-8);

    std::string note;
    const auto ig = kernel_integrable(decay, sp, dims, &note);
    CHECK(ig);
}

TEST_CASE("eigenfunction identity at n = 2") {
    const GroupDims dims = group_constants(2);
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    const MatrixField invdil = MatrixField::inverse_dilation(2);
    const Integrand f = TestFunction::power(2.0).as_integrand();
    // T_Phi |x|^{-2} = (w_Q Int_1^2 r dr) |x|^{-2} with Q = 6
    HPoint x = HPoint::zero(2);
    x.c[0] = 0.7;
    x.c[2] = -0.4;
    x.c[4] = 0.5;
    const double nx = hnorm(x);
    const auto t = apply_hausdorff(f, shell, invdil, x, mc_spec(600'000), dims);
    CHECK(rel_err(t.value * nx * nx, dims.w_Q * 1.5) < 0.015);
    const auto rd = apply_hausdorff(f, shell, invdil, x, radial_spec(), dims);
    CHECK(rel_err(rd.value * nx * nx, dims.w_Q * 1.5) < 1e-8);
}

TEST_CASE("K3 alpha1=0 with a non-dilation field keeps the log_2 factor") {
    // constant A with ||A^{-1}|| ||A|| = 2: K3 = (1 + log_2 2) Int Theta = 2 Int Theta
    const GroupDims dims = group_constants(1);
    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    const TheoremParams tp = thm2_worked(); // alpha1 = 0
    const GradedMatrix M(1, {2, 0, 0, 3}, 16.0); // ||A|| = 4, ||A^{-1}|| = 1/2
    const MatrixField cf = MatrixField::constant(M);

    const double k3 = k3_constant(shell, cf, tp, mc_spec(150'000, 17), dims).value;
    Integrand theta_int;
    theta_int.fn = [&](const HPoint& y) { return theta_weight(y, shell, cf, tp, dims); };
    theta_int.origin_singular = true;
    theta_int.radial = true;
    QuadSpec sp = mc_spec(150'000, 17);
    sp.tail_k = shell.window_hi(sp);
    sp.tail_k_lo = shell.window_lo(sp);
    const double theta_total = integrate_region(theta_int, Region::whole_space(), sp, dims).value;
    CHECK(rel_err(k3, 2.0 * theta_total) < 1e-12);
}
