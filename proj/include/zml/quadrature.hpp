#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <queue>
#include <type_traits>
#include <utility>
#include <vector>

#include "zml/error.hpp"
#include "zml/special_functions.hpp"

namespace zml {

/// Value of a numerical integral together with an error estimate and the
/// number of integrand evaluations spent on it.
template <class Value>
struct QuadResult {
    Value value{};
    double err_estimate = 0.0;
    std::size_t evaluations = 0;
    bool budget_exhausted = false;

    bool meets(double tol) const { return !budget_exhausted && err_estimate <= tol; }
};

using RealQuad = QuadResult<double>;
using ComplexQuad = QuadResult<Complex>;

/// 7-point Gauss / 15-point Kronrod pair on [-1, 1]. Nodes are listed for
/// x >= 0 in decreasing order; the last one is the centre.
struct GaussKronrod15 {
    static constexpr std::array<double, 8> xk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    // Gauss weights for xk[1], xk[3], xk[5], xk[7]
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    /// Nodes in increasing order on [-1, 1].
    static std::array<double, 15> ordered_nodes();
    static std::array<double, 15> ordered_kronrod_weights();
    /// Gauss weights aligned with ordered_nodes(); zero at Kronrod-only nodes.
    static std::array<double, 15> ordered_gauss_weights();
};

inline std::array<double, 15> GaussKronrod15::ordered_nodes() {
    std::array<double, 15> x{};
    for (int i = 0; i < 7; ++i) {
        x[i] = -xk[i];
        x[14 - i] = xk[i];
    }
    x[7] = 0.0;
    return x;
}

inline std::array<double, 15> GaussKronrod15::ordered_kronrod_weights() {
    std::array<double, 15> w{};
    for (int i = 0; i < 7; ++i) w[i] = w[14 - i] = wk[i];
    w[7] = wk[7];
    return w;
}

inline std::array<double, 15> GaussKronrod15::ordered_gauss_weights() {
    std::array<double, 15> w{};
    for (int i = 0; i < 3; ++i) w[1 + 2 * i] = w[13 - 2 * i] = wg[i];
    w[7] = wg[3];
    return w;
}

struct QuadOptions {
    /// Initial panels are no wider than this; keeps oscillatory integrands resolved.
    double max_panel_width = std::numeric_limits<double>::infinity();
    /// Hard cap on the number of panels alive at once.
    std::size_t max_panels = 50000;
};

namespace detail {

template <class Value>
struct Panel {
    double a, b;
    Value value;
    double err;
    bool operator<(const Panel& other) const { return err < other.err; }
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }

template <class Value, class F>
Panel<Value> gk15_panel(F& f, double a, double b) {
    using GK = GaussKronrod15;
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const Value fc = f(centre);
    Value kronrod = fc * GK::wk[7];
    Value gauss = fc * GK::wg[3];
    double abs_sum = magnitude(fc) * GK::wk[7];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * GK::xk[i];
        const Value f1 = f(centre - dx);
        const Value f2 = f(centre + dx);
        kronrod += (f1 + f2) * GK::wk[i];
        abs_sum += (magnitude(f1) + magnitude(f2)) * GK::wk[i];
        if (i % 2 == 1) gauss += (f1 + f2) * GK::wg[i / 2];
    }
    const double rounding = 50.0 * std::numeric_limits<double>::epsilon() * abs_sum * half;
    return {a, b, kronrod * half, magnitude(kronrod - gauss) * half + rounding};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b]. The error
/// estimate is the summed |K15 - G7| panel difference, which for smooth
/// integrands overstates the error of the returned Kronrod value. When the
/// panel budget runs out the best value is returned with budget_exhausted set.
template <class F>
auto integrate_adaptive(F&& f, double a, double b, double tol, const QuadOptions& opts = {})
    -> QuadResult<std::decay_t<decltype(f(a))>> {
    using Value = std::decay_t<decltype(f(a))>;
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "quadrature tolerance must be positive");
    if (!(a < b)) throw Error(ErrorCode::DomainError, "integration requires a < b");

    std::size_t initial = 1;
    if (std::isfinite(opts.max_panel_width) && opts.max_panel_width > 0.0)
        initial = static_cast<std::size_t>(std::ceil((b - a) / opts.max_panel_width));
    initial = std::max<std::size_t>(initial, 1);
    if (initial > opts.max_panels)
        throw Error(ErrorCode::DomainError, "panel width forces more panels than the budget allows");

    std::priority_queue<detail::Panel<Value>> queue;
    std::size_t evaluations = 0;
    Value total{};
    double total_err = 0.0;
    const double width = (b - a) / static_cast<double>(initial);
    for (std::size_t i = 0; i < initial; ++i) {
        const double lo = a + width * static_cast<double>(i);
        const double hi = (i + 1 == initial) ? b : a + width * static_cast<double>(i + 1);
        auto p = detail::gk15_panel<Value>(f, lo, hi);
        evaluations += 15;
        total += p.value;
        total_err += p.err;
        queue.push(p);
    }

    bool exhausted = false;
    while (total_err > tol) {
        if (queue.size() >= opts.max_panels) {
            exhausted = true;
            break;
        }
        const auto worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {  // panel can no longer be split
            exhausted = true;
            break;
        }
        queue.pop();
        auto left = detail::gk15_panel<Value>(f, worst.a, mid);
        auto right = detail::gk15_panel<Value>(f, mid, worst.b);
        evaluations += 30;
        total += left.value + right.value - worst.value;
        total_err += left.err + right.err - worst.err;
        queue.push(left);
        queue.push(right);
    }

    // re-sum to shed the drift of the running updates
    Value sum{};
    double err = 0.0;
    while (!queue.empty()) {
        sum += queue.top().value;
        err += queue.top().err;
        queue.pop();
    }
    return {sum, err, evaluations, exhausted};
}

/// Growth model for the tail of int_a^inf x^{-s} dI(x): the caller asserts
/// I(x) <= scale * x^growth_exponent * log(x)^log_power for x >= cutoff.
struct TailPolicy {
    double growth_exponent = 1.0;
    double cutoff = 1.0e4;
    int log_power = 0;
    double scale = 1.0;
    /// Safety factor applied on top of scale.
    double safety = 2.0;
};

/// Gauss-Legendre nodes and weights on [-1, 1], as (node, weight) pairs.
std::vector<std::pair<double, double>> gauss_legendre(int n);

/// int_X^inf x^{-a-1} log(x)^q dx for a > 0, integer q >= 0, X >= 1.
double power_log_tail(double a, int q, double x);

/// Upper bound for |int_X^inf x^{-s} dI(x)| under the policy's growth model,
/// where sigma = Re s: sigma * int_X^inf I(x) x^{-sigma-1} dx.
double tail_bound(const TailPolicy& policy, double sigma);

/// Integrates f over [a, policy.cutoff] and adds the analytic tail bound
/// for [cutoff, inf) to the error estimate. s_decay is the real part of the
/// exponent in the x^{-s} weight carried by f.
template <class F>
auto integrate_tail(F&& f, double a, const TailPolicy& policy, double s_decay, double tol,
                    const QuadOptions& opts = {}) -> QuadResult<std::decay_t<decltype(f(a))>> {
    if (!(s_decay > policy.growth_exponent))
        throw Error(ErrorCode::NotAbsolutelyConvergent,
                    "decay exponent must exceed the growth exponent of the integrand");
    if (!(policy.cutoff > a)) throw Error(ErrorCode::DomainError, "tail cutoff must exceed the lower limit");
    auto body = integrate_adaptive(f, a, policy.cutoff, 0.5 * tol, opts);
    body.err_estimate += tail_bound(policy, s_decay);
    return body;
}

/// (1 / 2 pi i) int g(sigma + i t) i dt over t in [t_lo, t_hi].
template <class G>
ComplexQuad contour_line_integral(G&& g, double sigma, double t_lo, double t_hi, double tol,
                                  const QuadOptions& opts = {}) {
    if (!(t_lo < t_hi)) throw Error(ErrorCode::DomainError, "contour segment requires t_lo < t_hi");
    auto along = [&](double t) -> Complex { return Complex(g(Complex(sigma, t))); };
    auto r = integrate_adaptive(along, t_lo, t_hi, 2.0 * kPi * tol, opts);
    r.value /= 2.0 * kPi;
    r.err_estimate /= 2.0 * kPi;
    return r;
}

}  // namespace zml
