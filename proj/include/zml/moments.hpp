#pragma once

#include <string_view>
#include <utility>
#include <vector>

#include "zml/quadrature.hpp"
#include "zml/sample_cache.hpp"

namespace zml {

/// A number with an absolute error estimate.
struct Estimate {
    double value = 0.0;
    double err = 0.0;
};

enum class Provenance { closed_form, fitted, quadrature };

std::string_view to_string(Provenance p) noexcept;

/// Largest T accepted for I_k(T) at desk scale.
double desk_ceiling(int k);

struct MomentRecord {
    int k = 1;
    double T = 0.0;
    double value = 0.0;
    double err = 0.0;
};

/// P_{k^2}(y) = sum_j coeffs[j] y^j for the moment main term T P(log T).
struct MomentPolynomial {
    int k = 1;
    std::vector<double> coeffs;
    std::vector<Provenance> provenance;
    /// Standard error per coefficient; zero for closed forms.
    std::vector<double> std_errors;
    /// Fit diagnostics (fitted polynomials only).
    double fit_lo = 0.0;
    double fit_hi = 0.0;
    double residual_rms = 0.0;
    double condition_number = 0.0;
    std::vector<double> residuals;

    double operator()(double y) const;
    double derivative(double y) const;
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// I_k(T) = int_0^T |zeta(1/2+it)|^{2k} dt. Whole panels come from the cache,
/// the ragged end is integrated with fresh evaluations.
MomentRecord moment_Ik(SampleCache& cache, int k, double T, double tol);

/// I_k(T) from cumulative cache sums plus the panel interpolant; no fresh
/// zeta evaluations once the cache covers T.
Estimate cumulative_moment(SampleCache& cache, int k, double T);

/// k = 1 main-term polynomial y + (2 gamma - 1 - log 2 pi), both closed form.
MomentPolynomial p1_polynomial();

/// Leading coefficient 1/(2 pi^2) of P_4.
double p4_leading_coefficient();

struct FitOptions {
    double max_condition_number = 1e8;
};

/// Fits the lower coefficients of P_4 with the leading one pinned, using
/// samples of moment(T) at n_samples log-spaced points of [T_lo, T_hi].
template <class MomentFn>
MomentPolynomial fit_p4(MomentFn&& moment, double T_lo, double T_hi, int n_samples,
                        const FitOptions& opts = {});

MomentPolynomial p4_polynomial(SampleCache& cache, double T_lo, double T_hi, int n_samples,
                               const FitOptions& opts = {});

/// E_1(T) = I_1(T) - T P_1(log T).
Estimate error_E1(SampleCache& cache, double T, double tol);

/// E_2(T) = I_2(T) - T P_4(log T), relative to the supplied (partly fitted) P_4.
Estimate error_E2(SampleCache& cache, double T, const MomentPolynomial& poly, double tol);

/// E_k(T) relative to poly without checking the fit range; cheap cumulative path.
Estimate error_term(SampleCache& cache, const MomentPolynomial& poly, double T);

/// int_a^T E_k(t)^p dt for p = 1 or 2 using cached panel nodes.
Estimate error_term_integral(SampleCache& cache, const MomentPolynomial& poly, double a, double T, int power);

/// L_k(sigma) = int_0^inf |zeta(1/2+ix)|^{2k} e^{-sigma x} dx, truncated where
/// the exponential tail bound drops below tol/2.
Estimate laplace_Lk(SampleCache& cache, int k, double sigma, double tol);

/// The x where laplace_Lk truncates for the given sigma and tol.
double laplace_cutoff(int k, double sigma, double tol);

/// Upper bound for int_X^inf |zeta(1/2+ix)|^{2k} e^{-sigma x} dx, assuming
/// I_1(x) <= 2 x log x and I_2(x) <= x log^4 x beyond X.
double laplace_tail_bound(int k, double sigma, double X);

/// L_1(2 sigma) - (gamma - log(4 pi sigma)) / (2 sin sigma).
Estimate kober_check(SampleCache& cache, double sigma, double tol = 1e-4);

/// (gamma - log(4 pi sigma)) / (2 sin sigma), the singular part of L_1(2 sigma).
double kober_main_term(double sigma);

struct AtkinsonCoefficients {
    double A;
    double B;
};

AtkinsonCoefficients atkinson_coeffs();

struct SmoothedMomentPoint {
    double T = 0.0;
    double G = 0.0;
    double value = 0.0;
    double err = 0.0;
};

/// Half-width of the u-window used by smoothed_I: grows until the Gaussian
/// tail, weighted by a pointwise bound for |zeta|^4, is below tol/2.
double smoothed_window(double T, double G, double tol);

/// (1/(sqrt(pi) G)) int |zeta(1/2 + iT + iu)|^4 e^{-(u/G)^2} du.
SmoothedMomentPoint smoothed_I(SampleCache& cache, double T, double G, double tol);

/// The same Gaussian average applied to an arbitrary integrand f(t).
template <class F>
SmoothedMomentPoint smoothed_average(F&& f, double T, double G, double tol);

struct Theorem5Exponents {
    double e1;  // E_2 exponent from the pointwise bound
    double e2;  // E_2 exponent from the mean-square bound
    double e3;  // eighth-moment exponent
};

/// Exponents (2rho+1)/(2rho+2), (2r+1)/(2r+2), (4r+1)/(2r+1). Pass linked = true
/// when r is derived from rho, in which case r <= rho is enforced.
Theorem5Exponents theorem5_exponents(double rho, double r, bool linked = false);

// ---------------------------------------------------------------------------

namespace detail {
MomentPolynomial fit_p4_samples(const std::vector<double>& T, const std::vector<double>& moment,
                                const FitOptions& opts);
}

template <class MomentFn>
MomentPolynomial fit_p4(MomentFn&& moment, double T_lo, double T_hi, int n_samples, const FitOptions& opts) {
    if (!(T_lo > 1.0) || !(T_hi > T_lo) || n_samples < 5)
        throw Error(ErrorCode::DomainError, "P_4 fit needs 1 < T_lo < T_hi and at least 5 samples");
    std::vector<double> ts(static_cast<std::size_t>(n_samples));
    std::vector<double> ms(ts.size());
    const double ratio = std::log(T_hi / T_lo);
    for (int i = 0; i < n_samples; ++i) {
        ts[i] = i == n_samples - 1 ? T_hi : T_lo * std::exp(ratio * i / (n_samples - 1));
        ms[i] = moment(ts[i]);
    }
    return detail::fit_p4_samples(ts, ms, opts);
}

template <class F>
SmoothedMomentPoint smoothed_average(F&& f, double T, double G, double tol) {
    if (!(G > 0.0) || !(tol > 0.0)) throw Error(ErrorCode::DomainError, "smoothing needs G > 0 and tol > 0");
    const double half_width = G * std::sqrt(std::log(1.0 / std::min(tol, 0.5)) + 4.0);
    const double norm = 1.0 / (std::sqrt(kPi) * G);
    auto integrand = [&](double u) { return norm * f(T + u) * std::exp(-(u / G) * (u / G)); };
    QuadOptions opts;
    opts.max_panel_width = std::min(0.25 * G, 0.125);
    opts.max_panels = 2000000;
    const auto r = integrate_adaptive(integrand, -half_width, half_width, 0.5 * tol, opts);
    return {T, G, r.value, r.err_estimate};
}

}  // namespace zml
