#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hherz/heis.hpp"

// Numerical integration over H^n = R^{2n+1} with Lebesgue measure: tensor
// midpoint grids on boxes, stratified Monte Carlo over dyadic shells for
// balls/annuli/truncated whole-space integrals, and the 1-D radial
// reduction that serves as the high-accuracy oracle for radial integrands.
//
// Determinism contract: a fixed QuadSpec yields a bit-identical QuadResult.
// Every stratum draws from its own seed substream and the cross-stratum
// reduction is pairwise in stratum order, so the thread schedule is
// irrelevant.

namespace hherz {

enum class QuadMethod { tensor_grid, stratified_monte_carlo, radial_1d };

struct QuadSpec {
    QuadMethod method = QuadMethod::stratified_monte_carlo;
    long budget = 100'000;      // max integrand evaluations (MC counts draws)
    std::uint64_t seed = 1;
    int tail_k = 4;             // whole-space integrals truncated to |y|_h < 2^tail_k
    int tail_k_lo = -16;        // excluded-core exponent for origin-singular integrands
    double target_rel = 0.01;   // err_est above this fraction of |value| raises a flag
};

struct QuadResult {
    double value = 0.0;
    double err_est = 0.0;
    long n_evals = 0;
    bool flagged = false;
    std::string flag;
    double excluded_core_radius = 0.0;        // > 0 when an origin core was excluded
    std::optional<double> tail_majorant;      // bound on the discarded tail, when known
};

// Integrand with the metadata quadrature needs: whether the origin must be
// excluded from node sets, whether the radial 1-D reduction applies, and an
// optional tail majorant |g(y)| <= tail_coeff * |y|_h^{-tail_exponent} for
// truncated whole-space integrals.
struct Integrand {
    std::function<double(const HPoint&)> fn;
    bool origin_singular = false;
    bool radial = false;
    std::optional<double> tail_exponent;
    double tail_coeff = 1.0;
};

struct Region {
    enum class Kind { box, ball, annulus, whole_space };
    Kind kind = Kind::box;
    std::vector<double> lo, hi;      // box bounds
    double radius = 0.0;             // ball
    std::optional<HPoint> center;    // off-center ball (left-translated)
    int k_inner = 0, k_outer = 0;    // annulus {2^{k_inner} <= |x|_h < 2^{k_outer}}

    static Region box(std::vector<double> lo, std::vector<double> hi);
    static Region ball(double radius);
    static Region ball_k(int k);                 // radius 2^k
    static Region ball_at(HPoint center, double radius);
    static Region annulus(int k1, int k2);
    static Region whole_space();
};

QuadResult integrate_region(const Integrand& g, const Region& region, const QuadSpec& spec,
                            const GroupDims& dims);

// w_Q * Int_{r_lo}^{r_hi} g(r) r^{Q-1} dr by adaptive Gauss-Kronrod.
// Throws on detected non-convergence (divergent endpoint behavior).
QuadResult integrate_radial(const std::function<double(double)>& g, double r_lo, double r_hi,
                            const GroupDims& dims, long max_evals = 2'000'000);

} // namespace hherz
