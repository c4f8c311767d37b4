#include "zml/tauberian.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "zml/error.hpp"

namespace zml {

double fejer_kernel(double lambda, double t) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::DomainError, "Fejer kernel needs lambda > 0");
    const double u = 0.5 * lambda * t;
    const double sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
    return lambda / (2.0 * kPi) * sinc * sinc;
}

RealQuad fejer_integral(double lambda, double A, double tol) {
    if (!(lambda > 0.0)) throw Error(ErrorCode::DomainError, "Fejer kernel needs lambda > 0");
    if (!(A * lambda > 10.0)) throw Error(ErrorCode::DomainError, "truncation point must satisfy lambda A > 10");
    QuadOptions opts;
    opts.max_panel_width = kPi / lambda;  // half a period of sin^2
    opts.max_panels = 500000;
    auto r = integrate_adaptive([lambda](double t) { return fejer_kernel(lambda, t); }, 0.0, A, 0.5 * tol, opts);
    r.value *= 2.0;
    r.err_estimate *= 2.0;
    // 2 int_A^inf (2 / (pi lambda)) sin^2(lambda t / 2) / t^2 dt = 2 / (pi lambda A) - (2 / (pi lambda)) int_A^inf cos(lambda t) / t^2 dt
    r.value += 2.0 / (kPi * lambda * A);
    r.err_estimate += 4.0 / (kPi * lambda * lambda * A * A);
    return r;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw Error(ErrorCode::DomainError, "log grid needs 0 < lo < hi and n >= 2");
    std::vector<double> x(static_cast<std::size_t>(n));
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    x.front() = lo;
    x.back() = hi;
    return x;
}

namespace detail {

double leading_fit(const std::vector<double>& x, const std::vector<double>& F, int M) {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (n < 3) throw Error(ErrorCode::InsufficientRange, "leading-coefficient fit needs at least 3 points");
    // rows divided by x log^M x: ratio = L + c / log x + B / (x log^M x)
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = x[static_cast<std::size_t>(i)];
        const double lx = std::log(xi);
        if (!(lx > 0.0)) throw Error(ErrorCode::DomainError, "fit window must lie in x > 1");
        const double scale = xi * std::pow(lx, M);
        A(i, 0) = 1.0;
        A(i, 1) = 1.0 / lx;
        A(i, 2) = 1.0 / scale;
        r(i) = F[static_cast<std::size_t>(i)] / scale;
    }
    Eigen::Vector3d colscale;
    for (int j = 0; j < 3; ++j) {
        colscale(j) = A.col(j).cwiseAbs().maxCoeff();
        A.col(j) /= colscale(j);
    }
    const Eigen::Vector3d beta = A.colPivHouseholderQr().solve(r);
    return beta(0) / colscale(0);
}

}  // namespace detail

LeadingCoeffEstimate estimate_leading(const TauberianProblem& problem) {
    const auto& x = problem.x_grid;
    if (!problem.F) throw Error(ErrorCode::DomainError, "Tauberian problem has no F");
    if (problem.M < 0) throw Error(ErrorCode::DomainError, "M must be non-negative");
    if (x.size() < 2) throw Error(ErrorCode::InsufficientRange, "grid needs at least two points");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0)) throw Error(ErrorCode::DomainError, "grid points must be positive");
        if (i > 0 && !(x[i] > x[i - 1])) throw Error(ErrorCode::DomainError, "grid must be strictly increasing");
    }
    if (x.back() / x.front() < 1000.0 * (1.0 - 1e-12))
        throw Error(ErrorCode::InsufficientRange, "grid spans fewer than 3 decades");

    std::vector<double> F(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        F[i] = problem.F(x[i]);
        if (i > 0 && F[i] < F[i - 1])
            throw Error(ErrorCode::NotMonotone, "F decreases between x = " + std::to_string(x[i - 1]) + " and x = " +
                                                    std::to_string(x[i]));
    }

    const double top = x.back();
    std::vector<double> wx, wF;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= top / 10.0 * (1.0 - 1e-12)) {
            wx.push_back(x[i]);
            wF.push_back(F[i]);
        }
    }
    if (wx.size() < 9) throw Error(ErrorCode::InsufficientRange, "top decade holds fewer than 9 grid points");

    LeadingCoeffEstimate out;
    out.window_lo = wx.front();
    out.window_hi = wx.back();
    out.gamma_M_over_Mfact = detail::leading_fit(wx, wF, problem.M);

    // three sub-windows equal in log x
    const double llo = std::log(wx.front());
    const double lhi = std::log(wx.back());
    for (int w = 0; w < 3; ++w) {
        const double a = llo + (lhi - llo) * w / 3.0;
        const double b = llo + (lhi - llo) * (w + 1) / 3.0;
        std::vector<double> sx, sF;
        for (std::size_t i = 0; i < wx.size(); ++i) {
            const double l = std::log(wx[i]);
            if (l >= a - 1e-12 && l <= b + 1e-12) {
                sx.push_back(wx[i]);
                sF.push_back(wF[i]);
            }
        }
        if (sx.size() < 3) continue;
        const double L = detail::leading_fit(sx, sF, problem.M);
        out.convergence_diagnostic = std::max(out.convergence_diagnostic, std::abs(L - out.gamma_M_over_Mfact));
    }
    return out;
}

}  // namespace zml
