#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string_view>
#include <vector>

#include "zml/moments.hpp"
#include "zml/quadrature.hpp"
#include "zml/sample_cache.hpp"
#include "zml/special_functions.hpp"

namespace zml {

enum class MellinMethod { direct, continued };

std::string_view to_string(MellinMethod m) noexcept;

/// Z_k(s) = int_1^inf |zeta(1/2+ix)|^{2k} x^{-s} dx at one point.
struct MellinPoint {
    int k = 1;
    Complex s;
    Complex value;
    double err = 0.0;
    MellinMethod method = MellinMethod::direct;
    /// true when the value depends on fitted polynomial coefficients
    bool model_relative = false;
};

/// sigma above which the defining integral converges absolutely:
/// 1 for k <= 2, (k+2)/4 for 3 <= k <= 6.
double convergence_abscissa(int k);

struct MellinOptions {
    /// Upper limit of the error-term integral in the continuations.
    double continuation_X1 = 5000.0;
    double continuation_X2 = 2000.0;
    /// Safety factor on the mean-square estimate of the continuation tail.
    double continuation_safety = 5.0;
    /// Safety factor on the data-derived moment growth constant for Z_direct tails.
    double direct_safety = 2.0;
};

/// Evaluates Z_k from a shared sample cache. Node data for each integral is
/// prepared once and reused across s.
class MellinEngine {
public:
    explicit MellinEngine(SampleCache& cache, MellinOptions opts = {});

    SampleCache& cache() { return cache_; }
    const MellinOptions& options() const { return opts_; }

    /// Direct quadrature over [1, desk ceiling of k] plus an analytic tail bound.
    MellinPoint Z_direct(int k, Complex s, double tol = 1e-8);

    /// The same sum over [1, desk ceiling of k] without the tail; err covers
    /// quadrature and sample error only.
    MellinPoint Z_truncated(int k, Complex s);

    /// Growth model used for the tail of Z_direct(k, .).
    TailPolicy direct_tail_policy(int k);

    /// Continuation through the error term E_1, valid for Re s > 1/4.
    MellinPoint Z1_continued(Complex s, double tol = 1e-8);

    /// Continuation through E_2 relative to poly, valid for Re s > 1/2.
    MellinPoint Z2_continued(Complex s, const MomentPolynomial& poly, double tol = 1e-8);

private:
    struct Kernel {
        std::vector<double> log_t;
        std::vector<double> w_kronrod;  // half-width * Kronrod weight * value
        std::vector<double> w_diff;     // half-width * (Kronrod - Gauss) weight * value
        std::vector<double> w_sens;     // half-width * Kronrod weight * sensitivity
        double X = 0.0;
        double constant = 0.0;  // tail scale (direct) or mean-square constant (continued)
        double moment_err = 0.0;
        Estimate E_at_1;
    };
    struct KernelSum {
        Complex value;
        double panel_err = 0.0;
        double sens = 0.0;
    };

    const Kernel& direct_kernel(int k);
    const Kernel& continuation_kernel(const MomentPolynomial& poly, double X, double theta);
    KernelSum apply(const Kernel& kern, Complex exponent) const;
    MellinPoint continued(Complex s, const MomentPolynomial& poly, double X, double theta);

    SampleCache& cache_;
    MellinOptions opts_;
    std::map<int, Kernel> direct_;
    std::map<std::vector<double>, Kernel> continued_;
};

/// Value with an absolute error bar, as produced by an evaluator. err is the
/// part of the error that may be non-analytic in s; analytic_err bounds an
/// error that is itself an analytic function of s near the contour (omitted
/// tails, fixed quadrature sums), which cannot move a principal part.
struct Evaluated {
    Complex value;
    double err = 0.0;
    double analytic_err = 0.0;
};

/// Every MellinPoint error is the size of a fixed quadrature sum or an omitted
/// tail integral, both analytic in s.
inline Evaluated as_evaluated(const MellinPoint& p) { return {p.value, 0.0, p.err}; }

struct LaurentPrincipalPart {
    Complex center{1.0, 0.0};
    std::map<int, Complex> coeffs;  // pole order m -> coefficient of (s - 1)^{-m}
    std::map<int, double> errors;
};

/// c_{-m} = (1/2 pi i) oint f(s) (s-1)^{m-1} ds on |s - 1| = radius by the
/// trapezoidal rule on `nodes` equispaced points. The aliasing of the analytic
/// part is bounded from 16 samples on |s - 1| = outer_radius (default 1.5 radius),
/// which must lie inside the evaluator's domain.
LaurentPrincipalPart laurent_extract(const std::function<Evaluated(Complex)>& f, int order, double radius,
                                     int nodes = 64, double outer_radius = 0.0);

struct IdentityCheck {
    Complex lhs;
    Complex rhs;
    double lhs_err = 0.0;
    double rhs_err = 0.0;
    double defect = 0.0;

    double combined_err() const { return lhs_err + rhs_err; }
    bool holds() const { return defect <= combined_err(); }
};

/// (int_a^b f(x) x^{-s} dx)^2 against
/// 2 int_{a^2}^{b^2} x^{-s} int_{sqrt x}^{min(x/a, b)} f(u) f(x/u) du/u dx.
template <class F>
IdentityCheck verify_convolution_identity(F&& f, double a, double b, Complex s, double tol);

/// 2 int_1^X x^{-s} int_{sqrt x}^{x} f(u) f(x/u) du/u dx by nested adaptive
/// quadrature; inner_width caps the inner panel width.
template <class F>
ComplexQuad square_identity_body(F&& f, Complex s, double X, double tol, double inner_width);

/// Z_1(s)^2 against the nested representation truncated at X_max, for the
/// zeta samples. Both variables are read from the cache interpolant.
IdentityCheck verify_square_identity(MellinEngine& engine, Complex s, double X_max, double tol);

/// (1 / 2 pi) int_{-t_span}^{t_span} Gamma(c+it) T^{c+it} Z(c+it) dt for an
/// evaluator Z with conjugate symmetry. Segments are fixed so that results
/// for growing t_span nest. Adds the truncation bound for |t| > t_span.
template <class Z>
QuadResult<double> gamma_contour_integral(Z&& z, double T, double c, double t_span, double z_abs_bound, double tol);

/// int_1^inf e^{-x/T} |zeta(1/2+ix)|^2 dx against the gamma contour integral
/// of T^s Z_1(s) on Re s = c.
IdentityCheck gamma_smoothed_crosscheck(MellinEngine& engine, double T, double c, double t_span, double tol);

struct MeanSquareResult {
    double integral = 0.0;
    double loglog_slope = 0.0;
    std::vector<double> T_points;
    std::vector<double> cumulative;
};

/// Trapezoidal int_1^T |Z_k(sigma + it)|^2 dt from continued values at
/// n_samples equispaced points, and the slope of log cumulative vs log T
/// over T/8, T/4, T/2, T. poly is required for k = 2.
MeanSquareResult mean_square_Z(MellinEngine& engine, int k, double sigma, double T, int n_samples,
                               const MomentPolynomial* poly = nullptr);

struct PoleStructureReport {
    double A5 = 0.0;                 // 12 / pi^2
    double four_factorial_a42 = 0.0;  // 4! times the pinned P_4 leading coefficient
    double c2 = 0.0;                  // Euler product at cutoff 10^5
    double atkinson_A = 0.0;
    double max_deviation = 0.0;       // among A5/4!, a42, c2, A
};

PoleStructureReport pole_structure_crosscheck();

// ---------------------------------------------------------------------------

template <class F>
IdentityCheck verify_convolution_identity(F&& f, double a, double b, Complex s, double tol) {
    if (!(a > 0.0) || !(b > a)) throw Error(ErrorCode::DomainError, "convolution identity needs 0 < a < b");
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    auto weight = [&](double x) { return std::exp(-s * std::log(x)); };

    const auto single = integrate_adaptive([&](double x) -> Complex { return f(x) * weight(x); }, a, b, 0.125 * tol);
    IdentityCheck out;
    out.lhs = single.value * single.value;
    out.lhs_err = 2.0 * std::abs(single.value) * single.err_estimate + single.err_estimate * single.err_estimate;

    // int_{a^2}^{b^2} |x^{-s}| dx, to scale the inner tolerance
    const double sigma = s.real();
    auto abs_weight_integral = [&](double lo, double hi) {
        if (std::abs(sigma - 1.0) < 1e-12) return std::log(hi / lo);
        return (std::pow(hi, 1.0 - sigma) - std::pow(lo, 1.0 - sigma)) / (1.0 - sigma);
    };
    const double weight_mass = abs_weight_integral(a * a, b * b);
    const double inner_tol = 0.125 * tol / weight_mass;
    double max_inner_err = 0.0;
    auto inner = [&](double x) -> double {
        const double lo = std::sqrt(x);
        const double hi = std::min(x / a, b);
        if (!(hi > lo)) return 0.0;
        const auto r = integrate_adaptive([&](double u) { return f(u) * f(x / u) / u; }, lo, hi, inner_tol);
        max_inner_err = std::max(max_inner_err, r.err_estimate);
        return r.value;
    };
    auto outer = [&](double x) -> Complex { return weight(x) * inner(x); };
    // the inner upper limit switches from x/a to b at x = ab
    const auto left = integrate_adaptive(outer, a * a, a * b, 0.125 * tol);
    const auto right = integrate_adaptive(outer, a * b, b * b, 0.125 * tol);
    out.rhs = 2.0 * (left.value + right.value);
    out.rhs_err = 2.0 * (left.err_estimate + right.err_estimate + max_inner_err * weight_mass);
    out.defect = std::abs(out.lhs - out.rhs);
    return out;
}

template <class F>
ComplexQuad square_identity_body(F&& f, Complex s, double X, double tol, double inner_width) {
    if (!(X > 1.0)) throw Error(ErrorCode::DomainError, "square identity needs X > 1");
    const double sigma = s.real();
    const double weight_mass = (1.0 - std::pow(X, 1.0 - sigma)) / (sigma - 1.0);
    const double inner_tol = 0.25 * tol / weight_mass;
    QuadOptions inner_opts;
    inner_opts.max_panel_width = inner_width;
    inner_opts.max_panels = 1000000;
    double max_inner_err = 0.0;
    auto outer = [&](double x) -> Complex {
        const double lo = std::sqrt(x);
        if (!(x > lo)) return 0.0;
        const auto r = integrate_adaptive([&](double u) { return f(u) * f(x / u) / u; }, lo, x, inner_tol, inner_opts);
        max_inner_err = std::max(max_inner_err, r.err_estimate);
        return std::exp(-s * std::log(x)) * r.value;
    };
    QuadOptions outer_opts;
    outer_opts.max_panel_width = 1.0;
    auto r = integrate_adaptive(outer, 1.0, X, 0.25 * tol, outer_opts);
    r.value *= 2.0;
    r.err_estimate = 2.0 * (r.err_estimate + max_inner_err * weight_mass);
    return r;
}

template <class Z>
QuadResult<double> gamma_contour_integral(Z&& z, double T, double c, double t_span, double z_abs_bound, double tol) {
    if (!(T > 0.0) || !(t_span > 0.0)) throw Error(ErrorCode::DomainError, "contour needs T > 0 and t_span > 0");
    const double gamma_end = std::abs(gamma(Complex(c, t_span)));
    const double T_c = std::pow(T, c);
    if (!(gamma_end < tol / T_c))
        throw Error(ErrorCode::TruncationNotClosed, "|Gamma(c + i t_span)| = " + std::to_string(gamma_end) +
                                                        " is not below tol * T^-c; increase t_span");
    const double log_T = std::log(T);
    double max_z_err = 0.0;  // reset per segment
    auto integrand = [&](double t) -> double {
        const Complex s(c, t);
        const Evaluated zs = z(s);
        max_z_err = std::max(max_z_err, zs.err + zs.analytic_err);
        return (gamma(s) * std::exp(s * log_T) * zs.value).real();
    };
    // conjugate symmetry: the integral over [-t_span, t_span] is twice the real part over [0, t_span]
    QuadResult<double> total;
    QuadOptions opts;
    opts.max_panel_width = 1.0;
    double propagated = 0.0;  // int |Gamma T^s| err(Z) dt, segment by segment
    double lo = 0.0;
    for (double hi = 10.0; lo < t_span; hi *= 2.0) {
        const double top = std::min(hi, t_span);
        max_z_err = 0.0;
        const auto seg = integrate_adaptive(integrand, lo, top, 0.25 * kPi * tol, opts);
        const auto mass = integrate_adaptive([c](double t) { return std::abs(gamma(Complex(c, t))); }, lo, top,
                                             1e-10, opts);
        propagated += max_z_err * T_c * (mass.value + mass.err_estimate);
        total.value += seg.value;
        total.err_estimate += seg.err_estimate;
        total.evaluations += seg.evaluations;
        total.budget_exhausted = total.budget_exhausted || seg.budget_exhausted;
        lo = top;
    }
    total.value /= kPi;
    total.err_estimate = (total.err_estimate + propagated) / kPi;
    // |Gamma(c+it)| decays at least like e^{-pi (t - t_span)/2} (t/t_span)^{c - 1/2} past t_span
    const double decay = 2.0 / kPi * (1.0 + 2.0 * std::max(c - 0.5, 0.0) / (kPi * t_span));
    total.err_estimate += 2.0 * T_c * z_abs_bound * gamma_end * decay / kPi;
    return total;
}

}  // namespace zml
