#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

// Geometry of the Heisenberg group H^n: the group law on R^{2n+1}, the
// anisotropic dilations, the homogeneous norm and the left-invariant
// distance it generates, plus the measure constants that polar-coordinate
// reductions depend on. Coordinates are stored (x_1..x_2n, x_{2n+1}) with
// the center coordinate last.

namespace hherz {

struct HPoint {
    std::vector<double> c; // size 2n+1

    HPoint() = default;
    explicit HPoint(std::vector<double> coords);

    static HPoint zero(int n);

    int n() const { return static_cast<int>((c.size() - 1) / 2); }
    std::size_t dim() const { return c.size(); }
    double center() const { return c.back(); }
    bool finite() const;
};

struct GroupDims {
    int n = 0;
    int Q = 0;         // homogeneous dimension 2n+2
    double omega_Q = 0; // volume of the unit ball {|x|_h < 1}
    double w_Q = 0;     // area of the unit sphere, Q * omega_Q
};

// omega_Q by 1-D quadrature of the radial reduction
//   omega_Q = sigma_{2n-1} * 2 * Int_0^1 r^{2n-1} sqrt(1-r^4) dr,
// sigma_{2n-1} the Euclidean unit-sphere area in R^{2n}. Works for any n >= 1.
GroupDims group_constants(int n);

HPoint group_mul(const HPoint& x, const HPoint& y);
HPoint group_inv(const HPoint& x);
HPoint dilate(double r, const HPoint& x);

double hnorm(const HPoint& x);
double hdist(const HPoint& p, const HPoint& q);

// |B(x, 2^k)| = omega_Q * 2^{kQ}
double ball_measure(const GroupDims& dims, int k);

// {x : 2^{k_inner} <= |x|_h < 2^{k_outer}}; inner_infinite makes it the ball B_{k_outer}.
struct Annulus {
    int k_inner = 0;
    int k_outer = 0;
    bool inner_infinite = false;

    static Annulus ball(int k) { return Annulus{0, k, true}; }
    static Annulus shell(int k) { return Annulus{k - 1, k, false}; } // E_k = B_k \ B_{k-1}

    bool contains(const HPoint& x) const;
};

// Rejection-sampled volume of {|x|_h < 1} in the bounding box
// [-1,1]^{2n} x [-1,1]; the Monte-Carlo cross-check for omega_Q.
double mc_unit_ball_volume(int n, long samples, std::uint64_t seed);

} // namespace hherz
