#pragma once

#include <functional>
#include <vector>

#include "zml/quadrature.hpp"

namespace zml {

/// K_lambda(t) = (lambda / 2 pi) (sin(lambda t / 2) / (lambda t / 2))^2.
double fejer_kernel(double lambda, double t);

/// int_{-inf}^{inf} K_lambda(t) dt: quadrature on |t| <= A plus the analytic
/// tail, whose average of sin^2 is 1/2 up to O(1/(lambda A)^2).
RealQuad fejer_integral(double lambda, double A = 1e4, double tol = 1e-9);

struct TauberianProblem {
    std::function<double(double)> F;
    int M = 0;  // pole order minus one
    std::vector<double> x_grid;
};

/// n points equally spaced in log x on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

struct LeadingCoeffEstimate {
    double gamma_M_over_Mfact = 0.0;
    /// Largest deviation of the sub-window estimates from the full-window one.
    double convergence_diagnostic = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

/// lim F(x) / (x log^M x) from the top decade of the grid, by least squares on
/// F = L x log^M x + c x log^{M-1} x + B (the two-term ratio L + c / log x,
/// with a free constant so that F and F + B give the same L).
LeadingCoeffEstimate estimate_leading(const TauberianProblem& problem);

namespace detail {
/// The fit on the given points alone, no range checks.
double leading_fit(const std::vector<double>& x, const std::vector<double>& F, int M);
}  // namespace detail

}  // namespace zml
