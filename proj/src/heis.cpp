#include "hherz/heis.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hherz/detail/gk.hpp"
#include "hherz/detail/rng.hpp"

namespace hherz {

HPoint::HPoint(std::vector<double> coords) : c(std::move(coords)) {
    if (c.size() < 3 || c.size() % 2 == 0)
        throw std::invalid_argument("HPoint: coordinate count must be 2n+1 with n >= 1");
    if (!finite()) throw std::invalid_argument("HPoint: non-finite coordinate");
}

HPoint HPoint::zero(int n) {
    HPoint p;
    p.c.assign(2 * static_cast<std::size_t>(n) + 1, 0.0);
    return p;
}

bool HPoint::finite() const {
    for (double v : c)
        if (!std::isfinite(v)) return false;
    return true;
}

static void check_same_dim(const HPoint& x, const HPoint& y, const char* op) {
    if (x.c.size() != y.c.size())
        throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

HPoint group_mul(const HPoint& x, const HPoint& y) {
    check_same_dim(x, y, "group_mul");
    const int n = x.n();
    HPoint z;
    z.c.resize(x.c.size());
    for (std::size_t i = 0; i + 1 < x.c.size(); ++i) z.c[i] = x.c[i] + y.c[i];
    double twist = 0.0;
    for (int j = 0; j < n; ++j) twist += y.c[j] * x.c[n + j] - x.c[j] * y.c[n + j];
    z.c.back() = x.c.back() + y.c.back() + 2.0 * twist;
    return z;
}

HPoint group_inv(const HPoint& x) {
    HPoint z;
    z.c.resize(x.c.size());
    for (std::size_t i = 0; i < x.c.size(); ++i) z.c[i] = -x.c[i];
    return z;
}

HPoint dilate(double r, const HPoint& x) {
    if (!(r > 0.0)) throw std::invalid_argument("dilate: r must be positive");
    HPoint z;
    z.c.resize(x.c.size());
    for (std::size_t i = 0; i + 1 < x.c.size(); ++i) z.c[i] = r * x.c[i];
    z.c.back() = r * r * x.c.back();
    return z;
}

double hnorm(const HPoint& x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.c.size(); ++i) s += x.c[i] * x.c[i];
    const double t = x.c.back();
    return std::sqrt(std::sqrt(s * s + t * t));
}

double hdist(const HPoint& p, const HPoint& q) {
    check_same_dim(p, q, "hdist");
    return hnorm(group_mul(group_inv(q), p));
}

GroupDims group_constants(int n) {
    if (n < 1) throw std::invalid_argument("group_constants: n must be >= 1");
    GroupDims d;
    d.n = n;
    d.Q = 2 * n + 2;
    // Euclidean unit-sphere area in R^{2n}: 2 pi^n / (n-1)!
    double sigma = 2.0;
    for (int i = 0; i < n; ++i) sigma *= M_PI;
    for (int i = 2; i < n; ++i) sigma /= static_cast<double>(i);
    auto profile = [n](double r) {
        return std::pow(r, 2 * n - 1) * std::sqrt(1.0 - r * r * r * r);
    };
    const auto gk = detail::adaptive_gk(profile, 0.0, 1.0, 1e-13);
    d.omega_Q = sigma * 2.0 * gk.value;
    d.w_Q = static_cast<double>(d.Q) * d.omega_Q;
    return d;
}

double ball_measure(const GroupDims& dims, int k) {
    return dims.omega_Q * std::exp2(static_cast<double>(k) * dims.Q);
}

bool Annulus::contains(const HPoint& x) const {
    if (k_inner >= k_outer && !inner_infinite)
        throw std::invalid_argument("Annulus: k_inner must be < k_outer");
    const double r = hnorm(x);
    const bool below = r < std::exp2(static_cast<double>(k_outer));
    if (inner_infinite) return below;
    return below && r >= std::exp2(static_cast<double>(k_inner));
}

double mc_unit_ball_volume(int n, long samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("mc_unit_ball_volume: samples must be >= 1");
    const std::size_t d = 2 * static_cast<std::size_t>(n) + 1;
    rng::Xoshiro256pp gen(rng::substream(seed, 0x0b41, 0));
    HPoint p = HPoint::zero(n);
    long hits = 0;
    for (long i = 0; i < samples; ++i) {
        for (std::size_t j = 0; j < d; ++j) p.c[j] = gen.uniform(-1.0, 1.0);
        if (hnorm(p) < 1.0) ++hits;
    }
    const double box = std::exp2(static_cast<double>(d));
    return box * static_cast<double>(hits) / static_cast<double>(samples);
}

} // namespace hherz
