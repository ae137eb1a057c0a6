#include "hherz/quad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hherz/detail/gk.hpp"
#include "hherz/detail/par.hpp"
#include "hherz/detail/rng.hpp"

namespace hherz {

namespace {

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 0) return 0.0;
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v, 0, v.size()); }

// One sampling cell: a dyadic shell (or the innermost core ball) realized by
// rejection inside the bounding box [-r_hi, r_hi]^{2n} x [-r_hi^2, r_hi^2],
// optionally left-translated by `center`.
struct Stratum {
    double r_lo = 0.0;      // 0 for the core ball
    double r_hi = 0.0;
    double box_volume = 0.0;
    long n_draws = 0;
};

struct StratumResult {
    double value = 0.0;
    double var_term = 0.0; // squared standard error of the stratum estimate
    long n_evals = 0;
};

double box_volume_for_radius(int n, double r_hi) {
    return std::pow(2.0 * r_hi, 2 * n) * 2.0 * r_hi * r_hi;
}

struct ShellPlan {
    std::vector<Stratum> strata;
    double excluded_core_radius = 0.0; // 0 when nothing was excluded
};

// Shells with outer radii outer*2^j down to an innermost core of radius
// ~2^{spec.tail_k_lo} (clamped to outer/16 for small regions). The core ball
// becomes a stratum unless the integrand is origin-singular, in which case it
// is excluded and reported.
ShellPlan ball_shells(int n, double outer, const QuadSpec& spec, bool origin_singular) {
    ShellPlan plan;
    const double core_target = std::exp2(static_cast<double>(spec.tail_k_lo));
    int j_lo = static_cast<int>(std::floor(std::log2(core_target / outer)));
    j_lo = std::min(j_lo, -4);
    j_lo = std::max(j_lo, -48);
    for (int j = j_lo + 1; j <= 0; ++j) {
        Stratum s;
        s.r_hi = outer * std::exp2(static_cast<double>(j));
        s.r_lo = 0.5 * s.r_hi;
        s.box_volume = box_volume_for_radius(n, s.r_hi);
        plan.strata.push_back(s);
    }
    const double core_radius = outer * std::exp2(static_cast<double>(j_lo));
    if (origin_singular) {
        plan.excluded_core_radius = core_radius;
    } else {
        Stratum s;
        s.r_lo = 0.0;
        s.r_hi = core_radius;
        s.box_volume = box_volume_for_radius(n, s.r_hi);
        plan.strata.push_back(s);
    }
    std::reverse(plan.strata.begin(), plan.strata.end()); // innermost first, fixed order
    return plan;
}

ShellPlan dyadic_shells(int n, int k1, int k2) {
    if (k1 >= k2) throw std::invalid_argument("integrate_region: annulus needs k_inner < k_outer");
    if (k2 - k1 > 64) throw std::invalid_argument("integrate_region: annulus spans too many shells");
    ShellPlan plan;
    for (int j = k1 + 1; j <= k2; ++j) {
        Stratum s;
        s.r_hi = std::exp2(static_cast<double>(j));
        s.r_lo = std::exp2(static_cast<double>(j - 1));
        s.box_volume = box_volume_for_radius(n, s.r_hi);
        plan.strata.push_back(s);
    }
    return plan;
}

// Half proportional-to-volume, half equal-share, with a small floor per
// stratum; trimmed deterministically so the total never exceeds the budget.
void allocate_draws(std::vector<Stratum>& strata, long budget) {
    if (strata.empty()) return;
    double total_volume = 0.0;
    for (const auto& s : strata) total_volume += s.box_volume;
    const double equal_share = 1.0 / static_cast<double>(strata.size());
    long assigned = 0;
    for (auto& s : strata) {
        const double mix = 0.5 * (s.box_volume / total_volume) + 0.5 * equal_share;
        s.n_draws = std::max<long>(16, static_cast<long>(static_cast<double>(budget) * mix));
        assigned += s.n_draws;
    }
    while (assigned > budget) {
        std::size_t largest = 0;
        for (std::size_t i = 1; i < strata.size(); ++i)
            if (strata[i].n_draws > strata[largest].n_draws) largest = i;
        const long cut = std::min(assigned - budget, strata[largest].n_draws - 1);
        if (cut <= 0) break; // every stratum is at a single draw already
        strata[largest].n_draws -= cut;
        assigned -= cut;
    }
}

[[noreturn]] void nonfinite_sample_error(const HPoint& x, double v) {
    std::string where = "(";
    for (std::size_t i = 0; i < x.c.size(); ++i)
        where += (i ? "," : "") + std::to_string(x.c[i]);
    where += ")";
    throw std::runtime_error("integrate_region: non-finite integrand sample " +
                             std::to_string(v) + " at " + where);
}

StratumResult run_stratum(const Integrand& g, const Stratum& s, int n, std::uint64_t seed,
                          std::uint64_t stratum_index, const HPoint* translate,
                          double global_core) {
    rng::Xoshiro256pp gen(rng::substream(seed, 0x57a7, stratum_index));
    const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
    HPoint z = HPoint::zero(n);
    double sum = 0.0, comp = 0.0, sumsq = 0.0;
    for (long i = 0; i < s.n_draws; ++i) {
        for (std::size_t j = 0; j + 1 < d; ++j) z.c[j] = gen.uniform(-s.r_hi, s.r_hi);
        z.c[d - 1] = gen.uniform(-s.r_hi * s.r_hi, s.r_hi * s.r_hi);
        const double r = hnorm(z);
        double v = 0.0;
        if (r >= s.r_lo && r < s.r_hi) {
            if (translate) {
                const HPoint y = group_mul(*translate, z);
                if (!(global_core > 0.0) || hnorm(y) >= global_core) {
                    v = g.fn(y);
                    if (!std::isfinite(v)) nonfinite_sample_error(y, v);
                }
            } else {
                v = g.fn(z);
                if (!std::isfinite(v)) nonfinite_sample_error(z, v);
            }
        }
        const double t = v - comp; // Kahan
        const double u = sum + t;
        comp = (u - sum) - t;
        sum = u;
        sumsq += v * v;
    }
    StratumResult out;
    const double nd = static_cast<double>(s.n_draws);
    const double mean = sum / nd;
    out.value = s.box_volume * mean;
    if (s.n_draws > 1) {
        const double var = std::max(0.0, (sumsq - nd * mean * mean) / (nd - 1.0));
        out.n_evals = s.n_draws;
        out.var_term = s.box_volume * s.box_volume * var / nd;
    } else {
        out.n_evals = s.n_draws;
        out.var_term = out.value * out.value;
    }
    return out;
}

QuadResult stratified_mc(const Integrand& g, const Region& region, const QuadSpec& spec,
                         const GroupDims& dims) {
    if (spec.budget < 1) throw std::invalid_argument("integrate_region: budget must be >= 1");
    ShellPlan plan;
    const HPoint* translate = nullptr;
    double global_core = 0.0;

    switch (region.kind) {
        case Region::Kind::ball: {
            plan = ball_shells(dims.n, region.radius, spec, g.origin_singular && !region.center);
            if (region.center) {
                translate = &*region.center;
                if (g.origin_singular && hnorm(*region.center) < region.radius + 1e-12) {
                    global_core = std::exp2(static_cast<double>(spec.tail_k_lo));
                    plan.excluded_core_radius = global_core;
                }
            }
            break;
        }
        case Region::Kind::annulus:
            plan = dyadic_shells(dims.n, region.k_inner, region.k_outer);
            break;
        case Region::Kind::whole_space: {
            if (spec.tail_k <= spec.tail_k_lo)
                throw std::invalid_argument("integrate_region: whole_space needs tail_k > tail_k_lo");
            plan = dyadic_shells(dims.n, spec.tail_k_lo, spec.tail_k);
            if (g.origin_singular) {
                plan.excluded_core_radius = std::exp2(static_cast<double>(spec.tail_k_lo));
            } else {
                Stratum core;
                core.r_lo = 0.0;
                core.r_hi = std::exp2(static_cast<double>(spec.tail_k_lo));
                core.box_volume = box_volume_for_radius(dims.n, core.r_hi);
                plan.strata.insert(plan.strata.begin(), core);
            }
            break;
        }
        case Region::Kind::box: {
            // Slab-stratified box sampling along axis 0.
            if (region.lo.size() != 2 * static_cast<std::size_t>(dims.n) + 1 ||
                region.hi.size() != region.lo.size())
                throw std::invalid_argument("integrate_region: box bounds have wrong dimension");
            break;
        }
    }

    if (region.kind == Region::Kind::box) {
        const std::size_t d = region.lo.size();
        double vol = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            if (!(region.hi[i] > region.lo[i]))
                throw std::invalid_argument("integrate_region: empty box");
            vol *= region.hi[i] - region.lo[i];
        }
        const int slabs = static_cast<int>(std::clamp<long>(spec.budget / 4096, 1, 64));
        const long per = std::max<long>(1, spec.budget / slabs);
        std::vector<StratumResult> results(static_cast<std::size_t>(slabs));
        const double width0 = (region.hi[0] - region.lo[0]) / slabs;
        detail::parallel_for(static_cast<std::size_t>(slabs), [&](std::size_t si) {
            rng::Xoshiro256pp gen(rng::substream(spec.seed, 0xb0c5, si));
            HPoint x = HPoint::zero(dims.n);
            double sum = 0.0, comp = 0.0, sumsq = 0.0;
            const double a0 = region.lo[0] + width0 * static_cast<double>(si);
            for (long i = 0; i < per; ++i) {
                x.c[0] = gen.uniform(a0, a0 + width0);
                for (std::size_t j = 1; j < d; ++j) x.c[j] = gen.uniform(region.lo[j], region.hi[j]);
                double v = g.fn(x);
                if (!std::isfinite(v)) nonfinite_sample_error(x, v);
                const double t = v - comp;
                const double u = sum + t;
                comp = (u - sum) - t;
                sum = u;
                sumsq += v * v;
            }
            StratumResult r;
            const double nd = static_cast<double>(per);
            const double mean = sum / nd;
            const double slab_vol = vol / slabs;
            r.value = slab_vol * mean;
            const double var = per > 1 ? std::max(0.0, (sumsq - nd * mean * mean) / (nd - 1.0)) : 0.0;
            r.var_term = slab_vol * slab_vol * var / nd;
            r.n_evals = per;
            results[si] = r;
        });
        QuadResult out;
        std::vector<double> vals, vars;
        for (const auto& r : results) {
            vals.push_back(r.value);
            vars.push_back(r.var_term);
            out.n_evals += r.n_evals;
        }
        out.value = pairwise_sum(vals);
        out.err_est = std::sqrt(pairwise_sum(vars));
        return out;
    }

    // Degenerate budgets cannot feed every shell; fall back to one stratum
    // spanning the whole radius interval (still unbiased, just coarse).
    if (!plan.strata.empty() && spec.budget < 2 * static_cast<long>(plan.strata.size())) {
        Stratum merged;
        merged.r_lo = plan.strata.front().r_lo;
        merged.r_hi = plan.strata.back().r_hi;
        merged.box_volume = box_volume_for_radius(dims.n, merged.r_hi);
        plan.strata.assign(1, merged);
    }

    allocate_draws(plan.strata, spec.budget);
    std::vector<StratumResult> results(plan.strata.size());
    detail::parallel_for(plan.strata.size(), [&](std::size_t si) {
        results[si] = run_stratum(g, plan.strata[si], dims.n, spec.seed, si, translate, global_core);
    });

    QuadResult out;
    std::vector<double> vals, vars;
    for (const auto& r : results) {
        vals.push_back(r.value);
        vars.push_back(r.var_term);
        out.n_evals += r.n_evals;
    }
    out.value = pairwise_sum(vals);
    out.err_est = std::sqrt(pairwise_sum(vars));
    out.excluded_core_radius = plan.excluded_core_radius;
    if (region.kind == Region::Kind::whole_space && g.tail_exponent) {
        const double e = *g.tail_exponent;
        if (e > dims.Q) {
            const double K = std::exp2(static_cast<double>(spec.tail_k));
            out.tail_majorant = g.tail_coeff * dims.w_Q * std::pow(K, dims.Q - e) / (e - dims.Q);
        }
    }
    return out;
}

struct TensorBox {
    std::vector<double> lo, hi;
    std::function<bool(const HPoint&)> member; // nullptr-like when trivially true
};

TensorBox tensor_bounds(const Region& region, const QuadSpec& spec, const GroupDims& dims) {
    TensorBox tb;
    const std::size_t d = 2 * static_cast<std::size_t>(dims.n) + 1;
    auto radial_box = [&](double R) {
        tb.lo.assign(d, -R);
        tb.hi.assign(d, R);
        tb.lo[d - 1] = -R * R;
        tb.hi[d - 1] = R * R;
    };
    switch (region.kind) {
        case Region::Kind::box:
            tb.lo = region.lo;
            tb.hi = region.hi;
            if (tb.lo.size() != d) throw std::invalid_argument("integrate_region: box dimension");
            return tb;
        case Region::Kind::ball: {
            const double R = region.radius;
            if (region.center) {
                const HPoint& c = *region.center;
                tb.lo.resize(d);
                tb.hi.resize(d);
                for (std::size_t i = 0; i + 1 < d; ++i) {
                    tb.lo[i] = c.c[i] - R;
                    tb.hi[i] = c.c[i] + R;
                }
                double sway = R * R;
                for (int j = 0; j < dims.n; ++j)
                    sway += 2.0 * R * (std::abs(c.c[j]) + std::abs(c.c[dims.n + j]));
                tb.lo[d - 1] = c.c[d - 1] - sway;
                tb.hi[d - 1] = c.c[d - 1] + sway;
                HPoint center = c;
                tb.member = [center, R](const HPoint& x) { return hdist(x, center) < R; };
            } else {
                radial_box(R);
                tb.member = [R](const HPoint& x) { return hnorm(x) < R; };
            }
            return tb;
        }
        case Region::Kind::annulus: {
            const double r_hi = std::exp2(static_cast<double>(region.k_outer));
            const double r_lo = std::exp2(static_cast<double>(region.k_inner));
            radial_box(r_hi);
            tb.member = [r_lo, r_hi](const HPoint& x) {
                const double r = hnorm(x);
                return r >= r_lo && r < r_hi;
            };
            return tb;
        }
        case Region::Kind::whole_space: {
            const double R = std::exp2(static_cast<double>(spec.tail_k));
            radial_box(R);
            tb.member = [R](const HPoint& x) { return hnorm(x) < R; };
            return tb;
        }
    }
    throw std::logic_error("tensor_bounds: unreachable");
}

double tensor_pass(const Integrand& g, const TensorBox& tb, long m, int n, double core,
                   long& evals) {
    const std::size_t d = tb.lo.size();
    std::vector<double> h(d);
    double cell = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        h[i] = (tb.hi[i] - tb.lo[i]) / static_cast<double>(m);
        cell *= h[i];
    }
    long total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= m;
    std::vector<long> idx(d, 0);
    HPoint x = HPoint::zero(n);
    double sum = 0.0, comp = 0.0;
    for (long count = 0; count < total; ++count) {
        for (std::size_t i = 0; i < d; ++i)
            x.c[i] = tb.lo[i] + (static_cast<double>(idx[i]) + 0.5) * h[i];
        ++evals;
        bool inside = !tb.member || tb.member(x);
        if (inside && g.origin_singular && hnorm(x) < core) inside = false;
        if (inside) {
            const double v = g.fn(x);
            if (!std::isfinite(v)) nonfinite_sample_error(x, v);
            const double t = v - comp;
            const double u = sum + t;
            comp = (u - sum) - t;
            sum = u;
        }
        for (std::size_t i = 0; i < d; ++i) {
            if (++idx[i] < m) break;
            idx[i] = 0;
        }
    }
    return sum * cell;
}

QuadResult tensor_grid(const Integrand& g, const Region& region, const QuadSpec& spec,
                       const GroupDims& dims) {
    const TensorBox tb = tensor_bounds(region, spec, dims);
    const std::size_t d = tb.lo.size();
    // Largest even m whose fine grid plus the m/2 Richardson pass fits the budget.
    long m = static_cast<long>(std::floor(std::pow(static_cast<double>(spec.budget),
                                                   1.0 / static_cast<double>(d))));
    auto cost = [d](long mm) {
        double c = 1.0, cc = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            c *= static_cast<double>(mm);
            cc *= static_cast<double>(mm / 2);
        }
        return c + (mm >= 2 ? cc : 0.0);
    };
    while (m > 1 && (m % 2 != 0 || cost(m) > static_cast<double>(spec.budget))) --m;
    if (m < 1) m = 1;

    const double core =
        g.origin_singular ? std::exp2(static_cast<double>(spec.tail_k_lo)) : 0.0;
    QuadResult out;
    const double fine = tensor_pass(g, tb, m, dims.n, core, out.n_evals);
    out.value = fine;
    if (m >= 2) {
        const double coarse = tensor_pass(g, tb, m / 2, dims.n, core, out.n_evals);
        out.err_est = std::abs(fine - coarse) / 3.0; // midpoint rule is O(h^2)
    } else {
        out.err_est = std::abs(fine);
        out.flagged = true;
        out.flag = "budget_too_small_for_refinement";
    }
    if (g.origin_singular) out.excluded_core_radius = core;
    return out;
}

QuadResult radial_dispatch(const Integrand& g, const Region& region, const QuadSpec& spec,
                           const GroupDims& dims) {
    if (!g.radial)
        throw std::invalid_argument("integrate_region: radial_1d requires a radial integrand");
    double lo = 0.0, hi = 0.0;
    switch (region.kind) {
        case Region::Kind::ball:
            if (region.center)
                throw std::invalid_argument("integrate_region: radial_1d needs an origin-centered region");
            hi = region.radius;
            break;
        case Region::Kind::annulus:
            lo = std::exp2(static_cast<double>(region.k_inner));
            hi = std::exp2(static_cast<double>(region.k_outer));
            break;
        case Region::Kind::whole_space:
            lo = g.origin_singular ? std::exp2(static_cast<double>(spec.tail_k_lo)) : 0.0;
            hi = std::exp2(static_cast<double>(spec.tail_k));
            break;
        case Region::Kind::box:
            throw std::invalid_argument("integrate_region: radial_1d does not apply to boxes");
    }
    HPoint probe = HPoint::zero(dims.n);
    auto g1 = [&g, probe](double r) mutable {
        probe.c[0] = r;
        return g.fn(probe);
    };
    QuadResult out = integrate_radial(g1, lo, hi, dims, spec.budget);
    if (region.kind == Region::Kind::whole_space && g.origin_singular)
        out.excluded_core_radius = lo;
    if (region.kind == Region::Kind::whole_space && g.tail_exponent && *g.tail_exponent > dims.Q) {
        const double e = *g.tail_exponent;
        out.tail_majorant = g.tail_coeff * dims.w_Q * std::pow(hi, dims.Q - e) / (e - dims.Q);
    }
    return out;
}

} // namespace

Region Region::box(std::vector<double> lo, std::vector<double> hi) {
    Region r;
    r.kind = Kind::box;
    r.lo = std::move(lo);
    r.hi = std::move(hi);
    return r;
}

Region Region::ball(double radius) {
    if (!(radius > 0)) throw std::invalid_argument("Region::ball: radius must be positive");
    Region r;
    r.kind = Kind::ball;
    r.radius = radius;
    return r;
}

Region Region::ball_k(int k) { return ball(std::exp2(static_cast<double>(k))); }

Region Region::ball_at(HPoint center, double radius) {
    Region r = ball(radius);
    r.center = std::move(center);
    return r;
}

Region Region::annulus(int k1, int k2) {
    if (k1 >= k2) throw std::invalid_argument("Region::annulus: k_inner < k_outer required");
    Region r;
    r.kind = Kind::annulus;
    r.k_inner = k1;
    r.k_outer = k2;
    return r;
}

Region Region::whole_space() {
    Region r;
    r.kind = Kind::whole_space;
    return r;
}

QuadResult integrate_region(const Integrand& g, const Region& region, const QuadSpec& spec,
                            const GroupDims& dims) {
    if (!g.fn) throw std::invalid_argument("integrate_region: empty integrand");
    if (spec.budget < 1) throw std::invalid_argument("integrate_region: budget must be >= 1");
    QuadResult out;
    switch (spec.method) {
        case QuadMethod::tensor_grid: out = tensor_grid(g, region, spec, dims); break;
        case QuadMethod::stratified_monte_carlo: out = stratified_mc(g, region, spec, dims); break;
        case QuadMethod::radial_1d: out = radial_dispatch(g, region, spec, dims); break;
    }
    if (!out.flagged && out.value != 0.0 && out.err_est > spec.target_rel * std::abs(out.value)) {
        out.flagged = true;
        out.flag = "tolerance_not_met";
    }
    return out;
}

QuadResult integrate_radial(const std::function<double(double)>& g, double r_lo, double r_hi,
                            const GroupDims& dims, long max_evals) {
    if (!(r_hi > r_lo) || r_lo < 0)
        throw std::invalid_argument("integrate_radial: need 0 <= r_lo < r_hi");
    const int Q = dims.Q;
    auto weighted = [&g, Q](double r) { return g(r) * std::pow(r, Q - 1); };
    const auto gk = detail::adaptive_gk(weighted, r_lo, r_hi, 1e-11, 1e-300, max_evals);
    if (!gk.converged)
        throw std::runtime_error(
            "integrate_radial: quadrature did not converge (divergent endpoint behavior?); "
            "err_est=" + std::to_string(gk.err_est) + " value=" + std::to_string(gk.value));
    QuadResult out;
    out.value = dims.w_Q * gk.value;
    out.err_est = dims.w_Q * gk.err_est;
    out.n_evals = gk.n_evals;
    return out;
}

} // namespace hherz
