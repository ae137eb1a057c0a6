#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hherz/weight.hpp"

// Weighted Lebesgue norms over regions, the homogeneous weighted Herz norm
// over a truncated dyadic-annulus window, unweighted ball averages, the
// weighted central-oscillation (CBMO) norm over a dyadic radius grid, and
// the catalog of test functions and symbols the harness runs on.

namespace hherz {

struct TestFunction {
    enum class Kind { power, char_ball, char_annulus, log_norm, bump, constant, custom };
    Kind kind = Kind::constant;
    double lambda = 0.0;             // power: |x|_h^{-lambda}
    int k = 0, k1 = 0, k2 = 0;       // char_ball(k) / char_annulus(k1,k2)
    double k_center = 0, width = 1;  // bump: exp(-((log2|x| - k_center)/width)^2)
    double value = 0.0;              // constant
    std::function<double(const HPoint&)> custom_fn;
    bool custom_radial = false;
    bool custom_singular = false;

    static TestFunction power(double lambda);
    static TestFunction char_ball(int k);
    static TestFunction char_annulus(int k1, int k2);
    static TestFunction log_norm();
    static TestFunction bump(double k_center, double width);
    static TestFunction constant(double c);
    static TestFunction custom(std::function<double(const HPoint&)> fn, bool radial,
                               bool singular);

    double operator()(const HPoint& x) const;
    double radial_eval(double r) const;
    bool radial() const { return kind != Kind::custom || custom_radial; }
    bool origin_singular() const;
    Integrand as_integrand() const;
};

struct HerzParams {
    double alpha = 0.0;
    double p = 1.0;   // outer exponent, [1, inf)
    double q = 2.0;   // inner exponent, (1, inf)
    Weight weight;
    int k_min = -12, k_max = 12; // truncation window
};

// (Int_region |g|^q w)^{1/q}
QuadResult lq_norm(const Integrand& g, double q, const Region& region, const Weight& w,
                   const QuadSpec& spec, const GroupDims& dims);

struct HerzResult {
    double value = 0.0;
    double err_est = 0.0;
    long n_evals = 0;
    double edge_lo_frac = 0.0; // k_min term's share of the p-th power sum
    double edge_hi_frac = 0.0;
    bool flagged = false;      // an edge term exceeds 1% of the sum
    std::vector<double> terms; // per-annulus contributions w(B_k)^{ap/Q} t_k^p
};

// { sum_k w(B_k)^{alpha p/Q} ||g||_{L^q(E_k;w)}^p }^{1/p} over the window.
// Each annulus draws from its own seed substream so term errors stay
// independent; w(B_k) uses the closed form for unit/power weights.
HerzResult herz_norm(const Integrand& g, const HerzParams& hp, const QuadSpec& spec,
                     const GroupDims& dims);

// Unweighted average over B(0, R), also when a weight is in play elsewhere.
double ball_average(const Integrand& g, double radius, const QuadSpec& spec,
                    const GroupDims& dims);

struct CbmoResult {
    double value = 0.0;
    double err_est = 0.0;
    int argmax_j = 0; // dyadic exponent of the radius attaining the max
    long n_evals = 0;
    std::vector<double> per_radius;
};

// sup over R = 2^j, j in [j_min, j_max], of
// ((1/w(B(0,R))) Int_{B(0,R)} |b - b_avg(R)|^q w)^{1/q}, with b_avg the
// unweighted average over the same ball.
CbmoResult cbmo_norm(const Integrand& b, double q, const Weight& w, int j_min, int j_max,
                     const QuadSpec& spec, const GroupDims& dims);

} // namespace hherz
