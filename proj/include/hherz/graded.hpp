#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "hherz/heis.hpp"

// Invertible linear maps compatible with the Heisenberg grading: a horizontal
// block B on R^{2n} and a center scalar a, acting as (z,t) -> (Bz, a t).
// Only such graded maps have a finite Heisenberg operator norm
// sup |Mx|_h/|x|_h (a map mixing horizontal and center directions makes the
// ratio blow up as t -> infinity or z -> 0), so the constructor rejects
// anything else by taking (B, a) directly.

namespace hherz {

class GradedMatrix {
public:
    // B is 2n x 2n row-major; throws if B is singular or a == 0.
    GradedMatrix(int n, std::vector<double> B, double a);

    static GradedMatrix identity(int n);
    static GradedMatrix dilation(int n, double r); // B = r I, a = r^2

    int n() const { return n_; }
    double a() const { return a_; }
    const std::vector<double>& B() const { return B_; }

    HPoint apply(const HPoint& x) const;
    GradedMatrix inverse() const;

    // max(sigma_max(B), sqrt(|a|)); the closed form for sup |Mx|_h / |x|_h.
    double heis_norm() const { return heis_norm_; }
    // Determinant of the full (2n+1)x(2n+1) map, det(B) * a.
    double det_full() const { return detB_ * a_; }
    double sigma_max() const { return sigma_max_; }
    double sigma_min() const { return sigma_min_; }
    double cond_B() const { return sigma_max_ / sigma_min_; }

private:
    int n_;
    std::vector<double> B_;
    double a_;
    double detB_;
    double sigma_max_, sigma_min_;
    double heis_norm_;
};

// Piecewise norm power: ||M||^e for e > 0, ||M^{-1}||^{-e} for e <= 0,
// taking the composite exponent as one argument. Multiplicative in the
// exponent: G(M, a + b) = G(M, a) G(M, b) whenever a, b share a sign.
double g_function(const GradedMatrix& M, double exponent);

struct DetBoundsReport {
    double lhs = 0, mid = 0, rhs = 0;
    bool holds = false;
};

// ||M||^{-Q} <= |det M^{-1}| <= ||M^{-1}||^Q with 1e-12 slack.
DetBoundsReport det_inv_bounds_check(const GradedMatrix& M, const GroupDims& dims);

struct PointBoundReport {
    double max_ratio = 0; // max over samples of |Mx|^beta / |x|^beta
    double bound = 0;     // G(M, beta)
    bool holds = false;
    std::size_t n_checked = 0;
};

// Pointwise bound |Mx|_h^beta <= G(M,beta) |x|_h^beta over the sample.
PointBoundReport weighted_point_bound_check(const GradedMatrix& M, double beta,
                                            const std::vector<HPoint>& sample);

// Empirical sup of |Mx|_h/|x|_h over n_samples candidate directions: random
// horizontal/vertical/general points plus power-iteration proposals, so the
// sup closes in on the top singular direction even for 2n > 2.
double heis_norm_sampled_sup(const GradedMatrix& M, long n_samples, std::uint64_t seed);

// y |-> A(y). inverse_dilation is A(y) = delta_{1/|y|_h}; constant wraps one
// matrix; custom takes an arbitrary map.
class MatrixField {
public:
    enum class Kind { constant, inverse_dilation, custom };

    static MatrixField constant(GradedMatrix M);
    static MatrixField inverse_dilation(int n);
    static MatrixField custom(int n, std::function<GradedMatrix(const HPoint&)> f);

    Kind kind() const { return kind_; }
    int n() const { return n_; }

    GradedMatrix at(const HPoint& y) const;
    HPoint apply_at(const HPoint& y, const HPoint& x) const;

    // Per-node scalars the operator integrands need; cheap for the catalog
    // kinds (no matrix construction for inverse_dilation).
    struct Sample {
        double norm = 0;        // ||A(y)||
        double norm_inv = 0;    // ||A(y)^{-1}||
        double abs_det_inv = 0; // |det A(y)^{-1}| of the full map
    };
    Sample sample(const HPoint& y) const;

    // G(A^{-1}(y), exponent) from a Sample (norms of A^{-1} are the swapped pair).
    static double g_of_inverse(const Sample& s, double exponent);

    // True when y |-> ||A(y)|| depends on |y|_h only (constant or inverse_dilation).
    bool radially_invariant() const { return kind_ != Kind::custom; }

private:
    MatrixField() = default;
    Kind kind_ = Kind::constant;
    int n_ = 1;
    std::shared_ptr<const GradedMatrix> M_;     // constant
    std::shared_ptr<const GradedMatrix> M_inv_; // cached inverse for constant
    std::function<GradedMatrix(const HPoint&)> fn_;
};

} // namespace hherz
