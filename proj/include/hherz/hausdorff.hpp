#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hherz/graded.hpp"
#include "hherz/spaces.hpp"

// The matrix Hausdorff operator
//   T_{Phi,A} f(x) = Int Phi(y)/|y|_h^Q f(A(y)x) dy
// (T_Phi is the inverse-dilation field case), its commutator
//   T^b_{Phi,A} f = b T(f) - T(bf),
// the explicit bound constants K1/K2 (general A_1 weights, two index cases)
// and Theta/K3 (power weights), and the hypothesis checker that gates them.

namespace hherz {

struct Kernel {
    enum class Kind { char_shell, power_decay, custom };
    Kind kind = Kind::char_shell;
    double r1 = 1, r2 = 2;   // char_shell: indicator of r1 <= |y|_h <= r2
    double sigma = 0, r0 = 1; // power_decay: |y|^{-sigma} on |y| >= r0
    std::function<double(const HPoint&)> custom_fn;
    bool custom_radial = false;

    static Kernel char_shell(double r1, double r2);
    static Kernel power_decay(double sigma, double r0);
    static Kernel custom(std::function<double(const HPoint&)> fn, bool radial);

    double operator()(const HPoint& y) const;
    double radial_eval(double r) const;
    bool radial() const { return kind != Kind::custom || custom_radial; }
    bool compact_support() const { return kind == Kind::char_shell; }
    bool empty_support() const { return kind == Kind::char_shell && !(r1 < r2); }

    // Dyadic window [window_lo, window_hi] covering the kernel support,
    // clamped to the spec's tail exponents.
    int window_lo(const QuadSpec& spec) const;
    int window_hi(const QuadSpec& spec) const;
};

// Checks Int |Phi(y)|/|y|^Q dy over the truncated window is finite; run at
// scenario load.
bool kernel_integrable(const Kernel& phi, const QuadSpec& spec, const GroupDims& dims,
                       std::string* note = nullptr);

struct TheoremParams {
    enum class Which { thm1_case_i, thm1_case_ii, thm2 };
    Which which = Which::thm1_case_i;
    double p = 1, q = 4, q1 = 2, q2 = 1.25;
    double alpha1 = -1, alpha2 = -2.2;
    double delta = 0; // 0 lets the checker pick min(2, (1+r_w)/2)
    Weight weight;

    double s() const { return 1.0 / (1.0 / q + 1.0 / q1); }
};

struct HypothesisReport {
    bool ok = false;
    TheoremParams::Which selected = TheoremParams::Which::thm1_case_i;
    std::vector<std::string> violations;
    double s = 0;
    double q_w = 0, r_w = 0;
    double delta_used = 0;
};

// Verifies every index identity and inequality of the selected theorem with
// 1e-12 slack, picks case i/ii from the sign of 1/q1 + alpha1/Q, confirms
// the reverse-Holder critical index numerically before using it, and
// resolves delta.
HypothesisReport check_hypotheses(const TheoremParams& tp, const GroupDims& dims,
                                  const QuadSpec& spec);

// T_{Phi,A} f(x) by quadrature over the kernel window.
QuadResult apply_hausdorff(const Integrand& f, const Kernel& phi, const MatrixField& A,
                           const HPoint& x, const QuadSpec& spec, const GroupDims& dims);

// T^b f(x) as a single integral of Phi(y)/|y|^Q (b(x) - b(A(y)x)) f(A(y)x),
// so constant symbols cancel exactly node by node.
QuadResult apply_commutator(const Integrand& b, const Integrand& f, const Kernel& phi,
                            const MatrixField& A, const HPoint& x, const QuadSpec& spec,
                            const GroupDims& dims);

// Theorem constants. Each throws std::invalid_argument before integrating
// if the corresponding hypotheses fail.
QuadResult k1_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                       const QuadSpec& spec, const GroupDims& dims);
QuadResult k2_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                       const QuadSpec& spec, const GroupDims& dims);
QuadResult k3_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                       const QuadSpec& spec, const GroupDims& dims);

// Pointwise Theta(y) of the power-weight theorem.
double theta_weight(const HPoint& y, const Kernel& phi, const MatrixField& A,
                    const TheoremParams& tp, const GroupDims& dims);

// Dispatches to k1/k2/k3 according to tp.which.
QuadResult k_constant(const Kernel& phi, const MatrixField& A, const TheoremParams& tp,
                      const QuadSpec& spec, const GroupDims& dims);

} // namespace hherz
