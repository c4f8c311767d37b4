#include "zml/moments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

#include "zml/error.hpp"

namespace zml {

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::closed_form: return "closed_form";
        case Provenance::fitted: return "fitted";
        case Provenance::quadrature: return "quadrature";
    }
    return "unknown";
}

double desk_ceiling(int k) {
    switch (k) {
        case 1: return 5000.0;
        case 2: return 2000.0;
        case 3:
        case 4: return 500.0;
        default: throw Error(ErrorCode::DeskScaleExceeded, "moments are supported for k = 1..4 only");
    }
}

double MomentPolynomial::operator()(double y) const {
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * y + *it;
    return v;
}

double MomentPolynomial::derivative(double y) const {
    double v = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 1;) v = v * y + static_cast<double>(j) * coeffs[j];
    return v;
}

namespace {

void check_desk(int k, double T) {
    const double ceiling = desk_ceiling(k);
    if (T > ceiling)
        throw Error(ErrorCode::DeskScaleExceeded, "I_" + std::to_string(k) + "(T) is limited to T <= " +
                                                      std::to_string(static_cast<int>(ceiling)));
}

}  // namespace

MomentRecord moment_Ik(SampleCache& cache, int k, double T, double tol) {
    check_desk(k, T);
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    if (!(T >= 0.0)) throw Error(ErrorCode::DomainError, "moment requires T >= 0");
    MomentRecord rec{k, T, 0.0, 0.0};
    if (T == 0.0) return rec;
    auto r = integrate_cached(
        cache, 0.0, T, [k](double, double z) { return std::pow(z, k); },
        [k](double, double z) { return k * std::pow(z, k - 1); }, tol);
    rec.value = std::max(r.value, 0.0);
    rec.err = r.err_estimate;
    return rec;
}

Estimate cumulative_moment(SampleCache& cache, int k, double T) {
    check_desk(k, T);
    if (!(T >= 0.0)) throw Error(ErrorCode::DomainError, "moment requires T >= 0");
    const double h = cache.grid_step();
    const auto panel = static_cast<std::size_t>(T / h);
    cache.ensure(static_cast<double>(panel + 1) * h);
    const auto& bounds = cache.boundary_cumulative(k);
    const auto& errs = cache.boundary_cumulative_err(k);
    const double partial = cache.partial_panel_integral(panel, T, k);
    // the partial-panel interpolant is no worse than the full panel's estimate
    const double panel_err = errs[panel + 1] - errs[panel];
    return {bounds[panel] + partial, errs[panel] + panel_err};
}

MomentPolynomial p1_polynomial() {
    const auto& c = constants();
    MomentPolynomial p;
    p.k = 1;
    p.coeffs = {2.0 * c.euler_gamma - 1.0 - c.log_two_pi, 1.0};
    p.provenance = {Provenance::closed_form, Provenance::closed_form};
    p.std_errors = {0.0, 0.0};
    return p;
}

double p4_leading_coefficient() { return 1.0 / (2.0 * kPi * kPi); }

namespace detail {

MomentPolynomial fit_p4_samples(const std::vector<double>& T, const std::vector<double>& moment,
                                const FitOptions& opts) {
    const auto n = static_cast<Eigen::Index>(T.size());
    const double a4 = p4_leading_coefficient();
    Eigen::MatrixXd X(n, 4);
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double y = std::log(T[i]);
        X(i, 0) = 1.0;
        X(i, 1) = y;
        X(i, 2) = y * y;
        X(i, 3) = y * y * y;
        r(i) = moment[i] / T[i] - a4 * std::pow(y, 4);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond <= opts.max_condition_number))
        throw Error(ErrorCode::IllConditionedFit,
                    "design matrix condition number " + std::to_string(cond) + " exceeds the configured limit");
    const Eigen::VectorXd beta = svd.solve(r);
    const Eigen::VectorXd resid = r - X * beta;

    MomentPolynomial p;
    p.k = 2;
    p.coeffs = {beta(0), beta(1), beta(2), beta(3), a4};
    p.provenance = {Provenance::fitted, Provenance::fitted, Provenance::fitted, Provenance::fitted,
                    Provenance::closed_form};
    // (X^T X)^{-1} = V S^{-2} V^T
    const double dof = static_cast<double>(std::max<Eigen::Index>(n - 4, 1));
    const double s2 = resid.squaredNorm() / dof;
    const Eigen::MatrixXd V = svd.matrixV();
    const Eigen::VectorXd inv_s2 = sv.array().square().inverse();
    p.std_errors.assign(5, 0.0);
    for (int j = 0; j < 4; ++j) {
        double var = 0.0;
        for (int m = 0; m < 4; ++m) var += V(j, m) * V(j, m) * inv_s2(m);
        p.std_errors[static_cast<std::size_t>(j)] = std::sqrt(s2 * var);
    }
    p.fit_lo = T.front();
    p.fit_hi = T.back();
    p.condition_number = cond;
    p.residuals.resize(T.size());
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        p.residuals[static_cast<std::size_t>(i)] = resid(i) * T[i];
        ss += resid(i) * T[i] * resid(i) * T[i];
    }
    p.residual_rms = std::sqrt(ss / static_cast<double>(n));
    return p;
}

}  // namespace detail

MomentPolynomial p4_polynomial(SampleCache& cache, double T_lo, double T_hi, int n_samples, const FitOptions& opts) {
    if (!(T_lo >= 50.0)) throw Error(ErrorCode::DomainError, "P_4 fit range must start at T >= 50");
    if (T_hi > desk_ceiling(2)) throw Error(ErrorCode::DeskScaleExceeded, "P_4 fit range is limited to T <= 2000");
    if (n_samples < 20) throw Error(ErrorCode::DomainError, "P_4 fit needs at least 20 samples");
    return fit_p4([&](double T) { return cumulative_moment(cache, 2, T).value; }, T_lo, T_hi, n_samples, opts);
}

Estimate error_E1(SampleCache& cache, double T, double tol) {
    if (!(T >= 2.0)) throw Error(ErrorCode::DomainError, "E_1(T) requires T >= 2");
    const auto I = moment_Ik(cache, 1, T, tol);
    return {I.value - T * p1_polynomial()(std::log(T)), I.err};
}

Estimate error_E2(SampleCache& cache, double T, const MomentPolynomial& poly, double tol) {
    if (poly.k != 2 || poly.coeffs.size() != 5) throw Error(ErrorCode::DomainError, "E_2 needs a k = 2 polynomial");
    const double slack = 1e-9 * poly.fit_hi;
    if (poly.fit_hi > 0.0 && (T < poly.fit_lo - slack || T > poly.fit_hi + slack))
        throw Error(ErrorCode::DomainError, "E_2 is model-relative and only defined on the fit range [" +
                                                std::to_string(poly.fit_lo) + ", " + std::to_string(poly.fit_hi) + "]");
    const auto I = moment_Ik(cache, 2, T, tol);
    return {I.value - T * poly(std::log(T)), I.err};
}

Estimate error_term(SampleCache& cache, const MomentPolynomial& poly, double T) {
    const auto I = cumulative_moment(cache, poly.k, T);
    return {I.value - T * poly(std::log(T)), I.err};
}

Estimate error_term_integral(SampleCache& cache, const MomentPolynomial& poly, double a, double T, int power) {
    if (power != 1 && power != 2) throw Error(ErrorCode::DomainError, "error term integrals support powers 1 and 2");
    if (!(a > 0.0) || !(T > a)) throw Error(ErrorCode::DomainError, "error term integral needs 0 < a < T");
    check_desk(poly.k, T);
    const double h = cache.grid_step();
    const auto p_lo = static_cast<std::size_t>(std::ceil(a / h));
    const auto p_hi = static_cast<std::size_t>(std::floor(T / h));
    cache.ensure(static_cast<double>(p_hi + 1) * h);
    const auto& nodes = cache.node_cumulative(poly.k);
    const auto& errs = cache.boundary_cumulative_err(poly.k);
    const auto& rule = detail::panel_rule();
    const double half = 0.5 * h;

    auto raise = [power](double e) { return power == 1 ? e : e * e; };
    double total = 0.0;
    double quad_err = 0.0;
    double max_abs_e = 0.0;
    for (std::size_t p = p_lo; p < p_hi; ++p) {
        double kron = 0.0;
        double gauss = 0.0;
        for (int j = 0; j < SampleCache::kNodes; ++j) {
            const double t = cache.node_t(p, j);
            const double e = nodes[p * SampleCache::kNodes + j] - t * poly(std::log(t));
            max_abs_e = std::max(max_abs_e, std::abs(e));
            kron += rule.wk[j] * raise(e);
            gauss += rule.wg[j] * raise(e);
        }
        total += half * kron;
        quad_err += half * std::abs(kron - gauss);
    }
    auto ragged = [&](double lo, double hi) {
        if (!(hi > lo)) return;
        auto r = integrate_adaptive(
            [&](double t) {
                const double e = error_term(cache, poly, t).value;
                max_abs_e = std::max(max_abs_e, std::abs(e));
                return raise(e);
            },
            lo, hi, 1e-9 * (1.0 + std::abs(total)));
        total += r.value;
        quad_err += r.err_estimate;
    };
    if (p_lo < p_hi) {
        ragged(a, static_cast<double>(p_lo) * h);
        ragged(static_cast<double>(p_hi) * h, T);
    } else {
        ragged(a, T);
    }
    // the cumulative moment error grows with t, so its value at T bounds it on [a, T]
    const double moment_err = errs[std::min(p_hi + 1, errs.size() - 1)];
    const double propagated = (T - a) * (power == 1 ? moment_err : 2.0 * max_abs_e * moment_err + moment_err * moment_err);
    return {total, quad_err + propagated};
}

namespace {

// Assumed growth I_k(x) <= C x log^q x for x >= 10, checked against data by the tests.
struct MomentGrowth {
    double scale;
    int log_power;
};

MomentGrowth laplace_growth(int k) {
    if (k == 1) return {2.0, 1};
    if (k == 2) return {1.0, 4};
    throw Error(ErrorCode::DomainError, "Laplace transforms are supported for k = 1, 2");
}

// sigma int_X^inf C x log^q x e^{-sigma x} dx, bounding the log-concave factor by its slope at X
double laplace_tail(const MomentGrowth& g, double sigma, double X) {
    const double L = std::log(X);
    const double slope = 1.0 / X + g.log_power / (X * L);
    if (!(sigma > slope)) return std::numeric_limits<double>::infinity();
    return sigma * g.scale * X * std::pow(L, g.log_power) * std::exp(-sigma * X) / (sigma - slope);
}

}  // namespace

double laplace_cutoff(int k, double sigma, double tol) {
    const auto g = laplace_growth(k);
    if (!(sigma > 0.0) || !(tol > 0.0)) throw Error(ErrorCode::DomainError, "Laplace cutoff needs sigma > 0, tol > 0");
    double X = std::max(10.0, (std::log(1.0 / std::min(tol, 1.0)) + 1.0) / sigma);
    while (laplace_tail(g, sigma, X) > 0.5 * tol) X *= 1.02;
    return X;
}

double laplace_tail_bound(int k, double sigma, double X) {
    if (!(X >= 10.0)) throw Error(ErrorCode::DomainError, "Laplace tail bound needs X >= 10");
    return laplace_tail(laplace_growth(k), sigma, X);
}

Estimate laplace_Lk(SampleCache& cache, int k, double sigma, double tol) {
    const auto growth = laplace_growth(k);
    if (!(sigma > 0.0)) throw Error(ErrorCode::DomainError, "L_k(sigma) requires sigma > 0");
    if (sigma < 1.0 / 2000.0) throw Error(ErrorCode::DeskScaleExceeded, "L_k(sigma) is limited to sigma >= 1/2000");
    const double X = laplace_cutoff(k, sigma, tol);
    auto r = integrate_cached(
        cache, 0.0, X, [k, sigma](double t, double z) { return std::pow(z, k) * std::exp(-sigma * t); },
        [k, sigma](double t, double z) { return k * std::pow(z, k - 1) * std::exp(-sigma * t); }, 0.5 * tol);
    return {r.value, r.err_estimate + laplace_tail(growth, sigma, X)};
}

double kober_main_term(double sigma) {
    return (constants().euler_gamma - std::log(4.0 * kPi * sigma)) / (2.0 * std::sin(sigma));
}

Estimate kober_check(SampleCache& cache, double sigma, double tol) {
    if (!(sigma > 0.0) || sigma > 0.05) throw Error(ErrorCode::DomainError, "Kober check needs 0 < sigma <= 0.05");
    const auto L = laplace_Lk(cache, 1, 2.0 * sigma, tol);
    return {L.value - kober_main_term(sigma), L.err};
}

AtkinsonCoefficients atkinson_coeffs() {
    const auto& c = constants();
    const double pi2 = kPi * kPi;
    return {1.0 / (2.0 * pi2),
            (2.0 * c.log_two_pi - 6.0 * c.euler_gamma + 24.0 * c.zeta_prime_at_2 / pi2) / pi2};
}

namespace {

// Pointwise bound for |zeta(1/2 + it)|: 0.63 |t|^{1/6} log |t| for |t| >= 3 (Hiary), and 2 below.
double zeta_abs_bound(double t) {
    const double a = std::abs(t);
    if (a < 3.0) return 2.0;
    return std::max(2.0, 0.63 * std::pow(a, 1.0 / 6.0) * std::log(a));
}

// (1/sqrt(pi) G) int_{|u| > W} bound(T + u)^4 e^{-(u/G)^2} du, summed over blocks of width G/2.
double smoothed_tail(double T, double G, double W) {
    double total = 0.0;
    const double block = 0.5 * G;
    for (int side = -1; side <= 1; side += 2) {
        for (int j = 0; j < 100000; ++j) {
            const double u0 = W + block * j;
            const double u1 = u0 + block;
            const double mass = 0.5 * (std::erfc(u0 / G) - std::erfc(u1 / G));
            const double b = std::max(zeta_abs_bound(T + side * u0), zeta_abs_bound(T + side * u1));
            const double term = mass * std::pow(b, 4);
            total += term;
            if (mass < 1e-300 || (j > 4 && term < 1e-18 * total)) break;
        }
    }
    return total;
}

}  // namespace

double smoothed_window(double T, double G, double tol) {
    if (!(G > 0.0) || !(tol > 0.0)) throw Error(ErrorCode::DomainError, "smoothing needs G > 0 and tol > 0");
    double W = G * std::sqrt(std::log(1.0 / std::min(tol, 0.5)) + 4.0);
    while (smoothed_tail(T, G, W) > 0.5 * tol) W += 0.25 * G;
    return W;
}

SmoothedMomentPoint smoothed_I(SampleCache& cache, double T, double G, double tol) {
    if (T > desk_ceiling(2)) throw Error(ErrorCode::DeskScaleExceeded, "I(T, G) is limited to T <= 2000");
    const double W = smoothed_window(T, G, tol);
    if (!(T - W > 0.0))
        throw Error(ErrorCode::DomainError, "Gaussian window of half-width " + std::to_string(W) +
                                                " reaches below t = 0; increase T or decrease G");
    const double norm = 1.0 / (std::sqrt(kPi) * G);
    auto weight = [=](double t) { return norm * std::exp(-((t - T) / G) * ((t - T) / G)); };
    auto r = integrate_cached(
        cache, T - W, T + W, [&](double t, double z) { return z * z * weight(t); },
        [&](double t, double z) { return 2.0 * z * weight(t); }, 0.5 * tol);
    return {T, G, std::max(r.value, 0.0), r.err_estimate + smoothed_tail(T, G, W)};
}

Theorem5Exponents theorem5_exponents(double rho, double r, bool linked) {
    if (!(rho >= 0.0) || !(r >= 0.0)) throw Error(ErrorCode::DomainError, "exponents need rho >= 0 and r >= 0");
    if (linked && r > rho) throw Error(ErrorCode::DomainError, "a linked pair must satisfy r <= rho");
    return {(2.0 * rho + 1.0) / (2.0 * rho + 2.0), (2.0 * r + 1.0) / (2.0 * r + 2.0), (4.0 * r + 1.0) / (2.0 * r + 1.0)};
}

}  // namespace zml
