#include "hherz/graded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hherz/detail/rng.hpp"

namespace hherz {

namespace {

// LU with partial pivoting on an m x m row-major copy; returns det and,
// optionally, the inverse. Sizes here are 2n <= 6, so nothing clever needed.
double lu_det_inverse(int m, const std::vector<double>& A, std::vector<double>* inverse) {
    std::vector<double> lu = A;
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    double det = 1.0;
    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(lu[r * m + col]) > std::abs(lu[pivot * m + col])) pivot = r;
        if (pivot != col) {
            for (int j = 0; j < m; ++j) std::swap(lu[col * m + j], lu[pivot * m + j]);
            std::swap(perm[col], perm[pivot]);
            det = -det;
        }
        const double d = lu[col * m + col];
        det *= d;
        if (d == 0.0 || !std::isfinite(d)) return 0.0;
        for (int r = col + 1; r < m; ++r) {
            const double f = lu[r * m + col] / d;
            lu[r * m + col] = f;
            for (int j = col + 1; j < m; ++j) lu[r * m + j] -= f * lu[col * m + j];
        }
    }
    if (inverse) {
        inverse->assign(static_cast<std::size_t>(m) * m, 0.0);
        std::vector<double> col(m), x(m);
        for (int e = 0; e < m; ++e) {
            for (int i = 0; i < m; ++i) col[i] = perm[i] == e ? 1.0 : 0.0;
            for (int i = 0; i < m; ++i) { // forward
                x[i] = col[i];
                for (int j = 0; j < i; ++j) x[i] -= lu[i * m + j] * x[j];
            }
            for (int i = m - 1; i >= 0; --i) { // back
                for (int j = i + 1; j < m; ++j) x[i] -= lu[i * m + j] * x[j];
                x[i] /= lu[i * m + i];
            }
            for (int i = 0; i < m; ++i) (*inverse)[i * m + e] = x[i];
        }
    }
    return det;
}

// Cyclic Jacobi eigenvalues of the symmetric matrix C (row-major m x m).
std::vector<double> jacobi_eigenvalues(int m, std::vector<double> C) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0, diag = 0.0;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                (i == j ? diag : off) += C[i * m + j] * C[i * m + j];
        if (off <= 1e-30 * std::max(diag, 1e-300)) break;
        for (int p = 0; p < m - 1; ++p) {
            for (int q = p + 1; q < m; ++q) {
                const double apq = C[p * m + q];
                if (apq == 0.0) continue;
                const double app = C[p * m + p], aqq = C[q * m + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < m; ++k) {
                    const double ckp = C[k * m + p], ckq = C[k * m + q];
                    C[k * m + p] = c * ckp - s * ckq;
                    C[k * m + q] = s * ckp + c * ckq;
                }
                for (int k = 0; k < m; ++k) {
                    const double cpk = C[p * m + k], cqk = C[q * m + k];
                    C[p * m + k] = c * cpk - s * cqk;
                    C[q * m + k] = s * cpk + c * cqk;
                }
            }
        }
    }
    std::vector<double> ev(m);
    for (int i = 0; i < m; ++i) ev[i] = C[i * m + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace

GradedMatrix::GradedMatrix(int n, std::vector<double> B, double a)
    : n_(n), B_(std::move(B)), a_(a) {
    if (n < 1) throw std::invalid_argument("GradedMatrix: n must be >= 1");
    const int m = 2 * n;
    if (B_.size() != static_cast<std::size_t>(m) * m)
        throw std::invalid_argument("GradedMatrix: B must be 2n x 2n");
    for (double v : B_)
        if (!std::isfinite(v)) throw std::invalid_argument("GradedMatrix: non-finite entry in B");
    if (!std::isfinite(a_) || a_ == 0.0)
        throw std::invalid_argument("GradedMatrix: center scalar a must be finite and nonzero");
    detB_ = lu_det_inverse(m, B_, nullptr);
    // sigma via eigenvalues of B^T B
    std::vector<double> C(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += B_[k * m + i] * B_[k * m + j];
            C[i * m + j] = s;
        }
    const auto ev = jacobi_eigenvalues(m, std::move(C));
    sigma_min_ = std::sqrt(std::max(0.0, ev.front()));
    sigma_max_ = std::sqrt(std::max(0.0, ev.back()));
    if (detB_ == 0.0 || sigma_min_ <= 0.0 || !std::isfinite(detB_))
        throw std::invalid_argument(
            "GradedMatrix: B is singular (|det|=" + std::to_string(std::abs(detB_)) +
            ", cond=" + std::to_string(sigma_min_ > 0 ? sigma_max_ / sigma_min_ : INFINITY) + ")");
    heis_norm_ = std::max(sigma_max_, std::sqrt(std::abs(a_)));
}

GradedMatrix GradedMatrix::identity(int n) {
    const int m = 2 * n;
    std::vector<double> B(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) B[i * m + i] = 1.0;
    return GradedMatrix(n, std::move(B), 1.0);
}

GradedMatrix GradedMatrix::dilation(int n, double r) {
    if (!(r > 0)) throw std::invalid_argument("GradedMatrix::dilation: r must be positive");
    const int m = 2 * n;
    std::vector<double> B(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) B[i * m + i] = r;
    return GradedMatrix(n, std::move(B), r * r);
}

HPoint GradedMatrix::apply(const HPoint& x) const {
    const int m = 2 * n_;
    if (x.c.size() != static_cast<std::size_t>(m) + 1)
        throw std::invalid_argument("GradedMatrix::apply: dimension mismatch");
    HPoint y = HPoint::zero(n_);
    for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += B_[i * m + j] * x.c[j];
        y.c[i] = s;
    }
    y.c[m] = a_ * x.c[m];
    return y;
}

GradedMatrix GradedMatrix::inverse() const {
    std::vector<double> inv;
    lu_det_inverse(2 * n_, B_, &inv);
    return GradedMatrix(n_, std::move(inv), 1.0 / a_);
}

double g_function(const GradedMatrix& M, double exponent) {
    if (exponent > 0.0) return std::pow(M.heis_norm(), exponent);
    return std::pow(M.inverse().heis_norm(), -exponent);
}

DetBoundsReport det_inv_bounds_check(const GradedMatrix& M, const GroupDims& dims) {
    DetBoundsReport r;
    r.lhs = std::pow(M.heis_norm(), -static_cast<double>(dims.Q));
    r.mid = 1.0 / std::abs(M.det_full());
    r.rhs = std::pow(M.inverse().heis_norm(), static_cast<double>(dims.Q));
    const double slack = 1e-12;
    r.holds = r.lhs <= r.mid * (1.0 + slack) && r.mid <= r.rhs * (1.0 + slack);
    return r;
}

PointBoundReport weighted_point_bound_check(const GradedMatrix& M, double beta,
                                            const std::vector<HPoint>& sample) {
    if (!(beta > -static_cast<double>(M.n())))
        throw std::invalid_argument("weighted_point_bound_check: need beta > -n");
    PointBoundReport rep;
    rep.bound = g_function(M, beta);
    for (const auto& x : sample) {
        const double nx = hnorm(x);
        if (nx == 0.0) throw std::invalid_argument("weighted_point_bound_check: x must be nonzero");
        const double ratio = std::pow(hnorm(M.apply(x)) / nx, beta);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        ++rep.n_checked;
    }
    rep.holds = rep.max_ratio <= rep.bound * (1.0 + 1e-12);
    return rep;
}

double heis_norm_sampled_sup(const GradedMatrix& M, long n_samples, std::uint64_t seed) {
    const int n = M.n();
    const int m = 2 * n;
    rng::Xoshiro256pp gen(rng::substream(seed, 0x5d09, 0));
    auto gauss = [&gen]() {
        double u1 = gen.uniform();
        while (u1 == 0.0) u1 = gen.uniform();
        const double u2 = gen.uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    HPoint x = HPoint::zero(n);
    double best = 0.0;
    auto consider = [&](const HPoint& p) {
        const double np = hnorm(p);
        if (np == 0.0) return;
        best = std::max(best, hnorm(M.apply(p)) / np);
    };

    // vertical and horizontal axis directions
    x.c[m] = 1.0;
    consider(x);
    x.c[m] = 0.0;
    for (int i = 0; i < m; ++i) {
        x.c[i] = 1.0;
        consider(x);
        x.c[i] = 0.0;
    }
    long used = m + 1;

    // power-iteration proposals for the top singular direction of B
    const std::vector<double>& B = M.B();
    for (int start = 0; start < 3; ++start) {
        std::vector<double> v(m), w(m);
        for (int i = 0; i < m; ++i) v[i] = gauss();
        for (int it = 0; it < 30; ++it) {
            for (int i = 0; i < m; ++i) {
                double s = 0.0;
                for (int j = 0; j < m; ++j) s += B[i * m + j] * v[j];
                w[i] = s;
            }
            std::vector<double> u(m, 0.0);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) u[j] += B[i * m + j] * w[i];
            double norm = 0.0;
            for (double e : u) norm += e * e;
            norm = std::sqrt(norm);
            if (norm == 0.0) break;
            for (int i = 0; i < m; ++i) v[i] = u[i] / norm;
        }
        for (int i = 0; i < m; ++i) x.c[i] = v[i];
        x.c[m] = 0.0;
        consider(x);
        ++used;
    }

    const long remaining = std::max<long>(0, n_samples - used);
    const long horiz = remaining / 2;
    for (long s = 0; s < horiz; ++s) { // random horizontal directions
        for (int i = 0; i < m; ++i) x.c[i] = gauss();
        x.c[m] = 0.0;
        consider(x);
    }
    for (long s = horiz; s < remaining; ++s) { // general positions
        for (int i = 0; i < m; ++i) x.c[i] = gauss();
        x.c[m] = gauss();
        consider(x);
    }
    return best;
}

MatrixField MatrixField::constant(GradedMatrix M) {
    MatrixField f;
    f.kind_ = Kind::constant;
    f.n_ = M.n();
    f.M_inv_ = std::make_shared<const GradedMatrix>(M.inverse());
    f.M_ = std::make_shared<const GradedMatrix>(std::move(M));
    return f;
}

MatrixField MatrixField::inverse_dilation(int n) {
    MatrixField f;
    f.kind_ = Kind::inverse_dilation;
    f.n_ = n;
    return f;
}

MatrixField MatrixField::custom(int n, std::function<GradedMatrix(const HPoint&)> fn) {
    MatrixField f;
    f.kind_ = Kind::custom;
    f.n_ = n;
    f.fn_ = std::move(fn);
    return f;
}

GradedMatrix MatrixField::at(const HPoint& y) const {
    switch (kind_) {
        case Kind::constant: return *M_;
        case Kind::inverse_dilation: {
            const double r = hnorm(y);
            if (r == 0.0)
                throw std::runtime_error("MatrixField: inverse_dilation is singular at y = 0");
            return GradedMatrix::dilation(n_, 1.0 / r);
        }
        case Kind::custom: return fn_(y);
    }
    throw std::logic_error("MatrixField::at: unreachable");
}

HPoint MatrixField::apply_at(const HPoint& y, const HPoint& x) const {
    switch (kind_) {
        case Kind::constant: return M_->apply(x);
        case Kind::inverse_dilation: {
            const double r = hnorm(y);
            if (r == 0.0)
                throw std::runtime_error("MatrixField: inverse_dilation is singular at y = 0");
            return dilate(1.0 / r, x);
        }
        case Kind::custom: return fn_(y).apply(x);
    }
    throw std::logic_error("MatrixField::apply_at: unreachable");
}

MatrixField::Sample MatrixField::sample(const HPoint& y) const {
    Sample s;
    switch (kind_) {
        case Kind::constant: {
            s.norm = M_->heis_norm();
            s.norm_inv = M_inv_->heis_norm();
            s.abs_det_inv = std::abs(M_inv_->det_full());
            return s;
        }
        case Kind::inverse_dilation: {
            const double r = hnorm(y);
            if (r == 0.0)
                throw std::runtime_error("MatrixField: inverse_dilation is singular at y = 0");
            s.norm = 1.0 / r;
            s.norm_inv = r;
            s.abs_det_inv = std::pow(r, 2 * n_ + 2);
            return s;
        }
        case Kind::custom: {
            const GradedMatrix A = fn_(y);
            const GradedMatrix Ainv = A.inverse();
            s.norm = A.heis_norm();
            s.norm_inv = Ainv.heis_norm();
            s.abs_det_inv = std::abs(Ainv.det_full());
            return s;
        }
    }
    throw std::logic_error("MatrixField::sample: unreachable");
}

double MatrixField::g_of_inverse(const Sample& s, double exponent) {
    // G(A^{-1}, e): ||A^{-1}||^e for e > 0, ||A||^{-e} for e <= 0.
    if (exponent > 0.0) return std::pow(s.norm_inv, exponent);
    return std::pow(s.norm, -exponent);
}

} // namespace hherz
