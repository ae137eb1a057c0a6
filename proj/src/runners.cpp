#include <cmath>
#include <vector>

#include "hherz/detail/rng.hpp"
#include "hherz/scenario.hpp"

// run_axioms: the randomized property suite over heis-core and graded-matrix.
// run_calibration: every closed-form oracle recomputed and compared.

namespace hherz {

namespace {

HPoint random_point(rng::Xoshiro256pp& gen, int n) {
    HPoint p = HPoint::zero(n);
    for (int i = 0; i < 2 * n; ++i) p.c[i] = gen.uniform(-2.0, 2.0);
    p.c[2 * n] = gen.uniform(-4.0, 4.0);
    return p;
}

GradedMatrix random_graded(rng::Xoshiro256pp& gen, int n) {
    const int m = 2 * n;
    for (;;) {
        std::vector<double> B(static_cast<std::size_t>(m) * m);
        for (auto& v : B) v = gen.uniform(-2.0, 2.0);
        double a = gen.uniform(0.25, 4.0);
        if (gen.uniform() < 0.5) a = -a;
        try {
            GradedMatrix M(n, std::move(B), a);
            if (M.cond_B() < 50.0) return M;
        } catch (const std::invalid_argument&) {
            // singular draw; try again
        }
    }
}

double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) / scale;
}

double rel_diff_points(const HPoint& a, const HPoint& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.c.size(); ++i) worst = std::max(worst, rel_diff(a.c[i], b.c[i]));
    return worst;
}

} // namespace

AxiomsReport run_axioms(int n, long samples, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("run_axioms: n must be >= 1");
    AxiomsReport rep;
    rep.n = n;
    rep.Q = 2 * n + 2;
    rep.samples = samples;
    rep.seed = seed;
    rng::Xoshiro256pp gen(rng::substream(seed, 0xa210, static_cast<std::uint64_t>(n)));
    const GroupDims dims = group_constants(n);

    auto push = [&rep](const char* name, double worst, double tol, long count) {
        rep.properties.push_back(PropertyResult{name, worst, tol, count, worst <= tol});
    };

    {
        double worst_assoc = 0, worst_ident = 0, worst_inv = 0;
        for (long i = 0; i < samples; ++i) {
            const HPoint x = random_point(gen, n), y = random_point(gen, n),
                         z = random_point(gen, n);
            worst_assoc = std::max(
                worst_assoc,
                rel_diff_points(group_mul(group_mul(x, y), z), group_mul(x, group_mul(y, z))));
            worst_ident = std::max(worst_ident, rel_diff_points(group_mul(x, HPoint::zero(n)), x));
            for (double v : group_mul(x, group_inv(x)).c)
                worst_inv = std::max(worst_inv, std::abs(v));
        }
        push("group_mul_associative", worst_assoc, 1e-12, samples);
        push("group_identity", worst_ident, 0.0, samples);
        push("group_inverse", worst_inv, 0.0, samples);
    }
    {
        double worst_hom = 0, worst_inv_dist = 0, worst_tri = 0;
        for (long i = 0; i < samples; ++i) {
            const HPoint x = random_point(gen, n);
            const double r = std::exp2(gen.uniform(-8.0, 8.0));
            worst_hom = std::max(worst_hom, rel_diff(hnorm(dilate(r, x)), r * hnorm(x)));
            const HPoint p = random_point(gen, n), q = random_point(gen, n),
                         t = random_point(gen, n);
            worst_inv_dist =
                std::max(worst_inv_dist, rel_diff(hdist(group_mul(t, p), group_mul(t, q)),
                                                  hdist(p, q)));
            const double margin = hdist(p, q) - hdist(p, t) - hdist(t, q);
            worst_tri = std::max(worst_tri, margin / std::max(1.0, hdist(p, q)));
        }
        push("norm_dilation_homogeneity", worst_hom, 1e-12, samples);
        push("dist_left_invariance", worst_inv_dist, 1e-12, samples);
        push("dist_triangle_inequality", worst_tri, 1e-12, samples);
    }
    {
        const long n_mat = 20;
        double worst_sandwich = 0, worst_mult = 0, worst_bound = 0, worst_sup_over = 0,
               worst_sup_under = 0;
        for (long i = 0; i < n_mat; ++i) {
            const GradedMatrix M = random_graded(gen, n);
            const DetBoundsReport db = det_inv_bounds_check(M, dims);
            worst_sandwich = std::max({worst_sandwich, (db.lhs - db.mid) / db.mid,
                                       (db.mid - db.rhs) / db.rhs});
            for (int t = 0; t < 10; ++t) {
                const double beta = gen.uniform(-3.0, 3.0);
                const double p = gen.uniform(1.0, 8.0), q = gen.uniform(1.0, 8.0);
                const double lhs = g_function(M, beta * (1.0 / q + 1.0 / p));
                const double rhs = g_function(M, beta / q) * g_function(M, beta / p);
                worst_mult = std::max(worst_mult, rel_diff(lhs, rhs));
            }
            const double beta = gen.uniform(-0.9 * n, 3.0);
            std::vector<HPoint> pts;
            for (int t = 0; t < 500; ++t) pts.push_back(random_point(gen, n));
            const PointBoundReport pb = weighted_point_bound_check(M, beta, pts);
            worst_bound = std::max(worst_bound, (pb.max_ratio - pb.bound) / pb.bound);
            const double sup = heis_norm_sampled_sup(M, 20'000, gen.next());
            worst_sup_over = std::max(worst_sup_over, (sup - M.heis_norm()) / M.heis_norm());
            worst_sup_under = std::max(worst_sup_under, 1.0 - sup / M.heis_norm());
        }
        push("lemma_det_norm_sandwich", worst_sandwich, 1e-12, n_mat);
        push("g_function_multiplicative", worst_mult, 1e-12, n_mat * 10);
        push("power_weight_point_bound", worst_bound, 1e-12, n_mat * 500);
        push("heis_norm_sup_not_exceeded", worst_sup_over, 1e-12, n_mat);
        push("heis_norm_sup_attained", worst_sup_under, 1e-3, n_mat);
    }

    rep.pass = true;
    for (const auto& p : rep.properties) rep.pass = rep.pass && p.pass;
    return rep;
}

CalibrationReport run_calibration(long budget, std::uint64_t seed) {
    CalibrationReport rep;
    rep.budget = budget;
    rep.seed = seed;
    const GroupDims dims = group_constants(1);
    const double pi2 = M_PI * M_PI;

    auto push = [&rep](const std::string& name, double computed, double expected, double tol) {
        CalibrationEntry e;
        e.name = name;
        e.computed = computed;
        e.expected = expected;
        e.rel_err = expected != 0.0 ? std::abs(computed - expected) / std::abs(expected)
                                    : std::abs(computed);
        e.tol = tol;
        e.pass = e.rel_err <= tol;
        rep.entries.push_back(e);
    };

    QuadSpec mc;
    mc.method = QuadMethod::stratified_monte_carlo;
    mc.budget = budget;
    mc.seed = seed;
    QuadSpec radial = mc;
    radial.method = QuadMethod::radial_1d;

    push("omega_Q_1d_reduction", dims.omega_Q, pi2 / 2.0, 1e-9);
    push("omega_Q_monte_carlo", mc_unit_ball_volume(1, 1'000'000, seed), pi2 / 2.0, 5e-3);
    push("sphere_area_w_Q", dims.w_Q, 2.0 * pi2, 1e-9);

    for (double beta : {-2.0, 0.0, 2.0}) {
        for (int k : {-2, 0, 2}) {
            QuadSpec sp = mc;
            sp.seed = rng::substream(seed, 0xca1b, static_cast<std::uint64_t>(k + 8) * 64 +
                                                       static_cast<std::uint64_t>(beta + 4));
            const QuadResult q =
                weighted_measure(Weight::power(beta), Region::ball_k(k), sp, dims);
            push("power_ball_measure_beta" + std::to_string(static_cast<int>(beta)) + "_k" +
                     std::to_string(k),
                 q.value, power_ball_measure(dims, beta, k), 1e-2);
        }
    }

    push("radial_ball_volume", integrate_radial([](double) { return 1.0; }, 0, 1, dims).value,
         pi2 / 2.0, 1e-9);
    push("radial_power_shell",
         integrate_radial([&dims](double r) { return std::pow(r, 2 - dims.Q); }, 1, 2, dims).value,
         3.0 * pi2, 1e-9);
    push("radial_power_log_shell",
         integrate_radial([&dims](double r) { return std::pow(r, 2 - dims.Q) * std::log(r); }, 1,
                          2, dims)
             .value,
         2.0 * pi2 * (2.0 * std::log(2.0) - 0.75), 1e-9);

    {
        Integrand g;
        g.fn = [](const HPoint& y) {
            const double r = hnorm(y);
            return 1.0 / (r * r);
        };
        g.radial = true;
        g.origin_singular = true;
        push("annulus_power_integral", integrate_region(g, Region::annulus(0, 1), mc, dims).value,
             3.0 * pi2, 1e-2);
    }

    const Kernel shell = Kernel::char_shell(1.0, 2.0);
    const MatrixField invdil = MatrixField::inverse_dilation(1);
    const HPoint x0{{0.7, -0.4, 0.9}};
    {
        const QuadResult t = apply_hausdorff(TestFunction::power(2.0).as_integrand(), shell,
                                             invdil, x0, mc, dims);
        const double nx = hnorm(x0);
        push("hausdorff_eigenfunction", t.value * nx * nx, 3.0 * pi2, 1e-2);
    }
    {
        const MatrixField ident = MatrixField::constant(GradedMatrix::identity(1));
        const Integrand fy = TestFunction::bump(0.0, 0.7).as_integrand();
        const QuadResult t = apply_hausdorff(fy, shell, ident, x0, mc, dims);
        push("hausdorff_identity_field", t.value, 2.0 * pi2 * std::log(2.0) * fy.fn(x0), 1e-2);
    }
    {
        const QuadResult t =
            apply_commutator(TestFunction::log_norm().as_integrand(),
                             TestFunction::power(2.0).as_integrand(), shell, invdil, x0, mc, dims);
        const double nx = hnorm(x0);
        push("commutator_closed_form", t.value * nx * nx,
             2.0 * pi2 * (2.0 * std::log(2.0) - 0.75), 1e-2);
    }
    {
        const CbmoResult cb = cbmo_norm(TestFunction::log_norm().as_integrand(), 2.0,
                                        Weight::unit(), -4, 4, mc, dims);
        push("cbmo_log_norm", cb.value, 0.25, 1e-2);
    }
    {
        // CBMO of log|x| against |x|^{1/2}: scale-invariant with value
        // sqrt(2/m^2 - 2/(Qm) + 1/Q^2), m = Q + 1/2.
        const double m = dims.Q + 0.5;
        const double expected =
            std::sqrt(2.0 / (m * m) - 2.0 / (dims.Q * m) + 1.0 / (dims.Q * dims.Q));
        const CbmoResult cb = cbmo_norm(TestFunction::log_norm().as_integrand(), 2.0,
                                        Weight::power(0.5), -4, 4, mc, dims);
        push("cbmo_log_norm_weighted", cb.value, expected, 1e-2);
    }
    {
        HerzParams hp{1.0, 2.0, 2.0, Weight::unit(), -12, 6};
        const HerzResult h = herz_norm(TestFunction::char_ball(0).as_integrand(), hp, mc, dims);
        const double omega = pi2 / 2.0;
        const double expected =
            std::sqrt(std::pow(omega, 1.5) * (15.0 / 16.0) * (64.0 / 63.0));
        push("herz_char_ball", h.value, expected, 1e-2);
    }

    TheoremParams tp1;
    tp1.which = TheoremParams::Which::thm1_case_i;
    tp1.p = 1.0;
    tp1.q = 4.0;
    tp1.q1 = 2.0;
    tp1.q2 = 1.25;
    tp1.alpha1 = -1.0;
    tp1.alpha2 = -2.2;
    tp1.weight = Weight::unit();
    push("k1_worked_value", k1_constant(shell, invdil, tp1, mc, dims).value,
         4.0 * pi2 * (3.0 * std::log(2.0) - 1.0), 1e-2);
    push("k1_worked_radial_oracle", k1_constant(shell, invdil, tp1, radial, dims).value,
         4.0 * pi2 * (3.0 * std::log(2.0) - 1.0), 1e-6);

    {
        TheoremParams tp2 = tp1;
        tp2.which = TheoremParams::Which::thm1_case_ii;
        tp2.q1 = 8.0;
        tp2.q2 = 40.0 / 37.0; // alpha identity with alpha2 below
        tp2.alpha1 = -1.0;
        // alpha2/Q = alpha1/Q + 1/q1 - 1/q2
        tp2.alpha2 = dims.Q * (tp2.alpha1 / dims.Q + 1.0 / tp2.q1 - 1.0 / tp2.q2);
        const Kernel inner_shell = Kernel::char_shell(0.25, 0.5);
        const double expected =
            4.0 * pi2 *
            (4.0 * std::sqrt(2.0) * (1.0 - std::log(2.0)) - 8.0 + 12.0 * std::log(2.0));
        push("k2_worked_value", k2_constant(inner_shell, invdil, tp2, mc, dims).value, expected,
             1e-2);
        push("k2_worked_radial_oracle", k2_constant(inner_shell, invdil, tp2, radial, dims).value,
             expected, 1e-6);
    }

    TheoremParams tp3;
    tp3.which = TheoremParams::Which::thm2;
    tp3.p = 1.0;
    tp3.q = 4.0;
    tp3.q1 = 2.0;
    tp3.q2 = 4.0 / 3.0;
    tp3.alpha1 = 0.0;
    tp3.alpha2 = -1.0;
    tp3.weight = Weight::power(0.5);
    {
        const double mc_val = k3_constant(shell, invdil, tp3, mc, dims).value;
        const double oracle = k3_constant(shell, invdil, tp3, radial, dims).value;
        push("k3_mc_vs_radial_oracle", mc_val, oracle, 1e-2);
        // hand reduction: K3 = 2 w_Q Int_1^2 r^{5/4} log(2r) dr
        const double hand =
            2.0 * dims.w_Q *
            (std::pow(2.0, 2.25) * (std::log(4.0) / 2.25 - 1.0 / (2.25 * 2.25)) -
             (std::log(2.0) / 2.25 - 1.0 / (2.25 * 2.25)));
        push("k3_radial_vs_antiderivative", oracle, hand, 1e-9);
    }
    {
        HPoint y = HPoint::zero(1);
        y.c[0] = 2.0; // |y|_h = 2
        TheoremParams tp = tp3;
        tp.q = 2.0;
        tp.q1 = 2.0;
        tp.q2 = 1.0; // 1/q2 = 1/q + 1/q1
        tp.alpha1 = dims.Q * (1.0 / tp.q + 0.0); // keep identity with alpha2 = 0
        tp.alpha2 = 0.0;
        tp.weight = Weight::power(0.0);
        const Kernel one = Kernel::power_decay(0.0, 1e-9);
        push("theta_worked_value", theta_weight(y, one, invdil, tp, dims), std::log(2.0), 1e-12);
    }

    rep.pass = true;
    for (const auto& e : rep.entries) rep.pass = rep.pass && e.pass;
    return rep;
}

} // namespace hherz
