#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hherz/quad.hpp"

// Weights on H^n: the unit weight, power weights |x|_h^beta, and custom
// evaluators. Muckenhoupt A_p and reverse-Holder ratio estimators over a
// given ball, the critical indices for power weights, weighted measures,
// and the numerical checks behind the covering/averaging propositions.

namespace hherz {

struct Weight {
    enum class Kind { unit, power, custom };
    Kind kind = Kind::unit;
    double beta = 0.0;
    std::function<double(const HPoint&)> custom_fn;
    bool custom_radial = false;

    static Weight unit() { return Weight{}; }
    static Weight power(double beta);
    static Weight custom(std::function<double(const HPoint&)> fn, bool radial);

    double operator()(const HPoint& x) const;
    bool radial() const { return kind != Kind::custom || custom_radial; }
    bool origin_singular() const { return kind == Kind::power && beta < 0.0; }
    bool is_power_like() const { return kind != Kind::custom; } // unit == power(0)
    double power_exponent() const { return kind == Kind::power ? beta : 0.0; }

    // w(B(0,R)) in closed form for unit/power weights.
    std::optional<double> closed_ball_measure(const GroupDims& dims, double R) const;

    // x |-> w(x)^e with singularity/radial metadata for quadrature.
    Integrand pow_integrand(double e) const;
};

struct WeightIndices {
    double q_w = 1.0; // A_p critical index
    double r_w = 0.0; // reverse-Holder critical index; +infinity for beta >= 0
};

// q_w = 1 for beta <= 0 else (Q+beta)/Q; r_w = +inf for beta >= 0 else Q/(-beta).
WeightIndices power_weight_indices(const GroupDims& dims, double beta);

// Closed form  w_Q 2^{k(Q+beta)} / (beta + Q)  for v = |x|^beta over B_k.
double power_ball_measure(const GroupDims& dims, double beta, int k);

QuadResult weighted_measure(const Weight& w, const Region& region, const QuadSpec& spec,
                            const GroupDims& dims);

struct Ball {
    HPoint center;
    double radius = 1.0;

    static Ball origin(int n, double radius) { return Ball{HPoint::zero(n), radius}; }
    bool at_origin() const { return hnorm(center) == 0.0; }
    Region region() const {
        return at_origin() ? Region::ball(radius) : Region::ball_at(center, radius);
    }
};

struct RatioResult {
    double value = 0.0;
    bool flagged = false;
    std::string note;
};

// A_p ratio over one ball: (avg w)(avg w^{-p'/p})^{p/p'} for p > 1, and
// (avg w)/(essinf w) for p = 1 with essinf estimated as the minimum over
// quadrature nodes plus a refinement pass near the argmin.
RatioResult ap_ratio(const Weight& w, double p, const Ball& ball, const QuadSpec& spec,
                     const GroupDims& dims);

// (avg w^r)^{1/r} / (avg w); divergent integrals are detected numerically
// (radial path: non-convergent refinement; MC path: tolerance flag) and
// reported as flagged.
RatioResult rh_ratio(const Weight& w, double r, const Ball& ball, const QuadSpec& spec,
                     const GroupDims& dims);

// Numeric confirmation of r_w before it enters theorem hypotheses: the RH
// ratio is finite below r_w and the quadrature diverges above it.
struct RwSweep {
    bool confirmed = false;
    double r_below = 0, value_below = 0;
    double r_above = 0;
    bool above_divergent = false;
};
RwSweep confirm_rw_sweep(const Weight& w, const QuadSpec& spec, const GroupDims& dims);

struct NestedPair {
    Region subset; // E
    Ball ball;     // B with E subset of B
};

struct SandwichReport {
    double c1 = 0; // largest admissible lower constant over the family
    double c2 = 0; // smallest admissible upper constant over the family
    std::size_t n_pairs = 0;
    struct Doubling {
        double lambda = 0, ratio = 0, bound = 0;
        bool holds = false;
    };
    std::vector<Doubling> doubling;
    bool holds = false;
};

// C1 (|E|/|B|)^p <= w(E)/w(B) <= C2 (|E|/|B|)^{(r-1)/r} over the pair family,
// plus the doubling bound w(lambda B) <= lambda^{Qp} w(B) for lambda in {2,4,8}.
SandwichReport sandwich_check(const Weight& w, double p, double r,
                              const std::vector<NestedPair>& pairs, const QuadSpec& spec,
                              const GroupDims& dims);

struct AvgBoundReport {
    double lhs = 0;        // (1/|B|) Int_B |f|
    double rhs = 0;        // ((1/w(B)) Int_B |f|^p w)^{1/p}
    double c_required = 0; // lhs / rhs
};

AvgBoundReport weighted_avg_bound_check(const Weight& w, double p, const Integrand& f,
                                        const Ball& ball, const QuadSpec& spec,
                                        const GroupDims& dims);

} // namespace hherz
