#include "zml/mellin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zml/error.hpp"
#include "zml/rmt_constants.hpp"

namespace zml {

std::string_view to_string(MellinMethod m) noexcept {
    return m == MellinMethod::direct ? "direct" : "continued";
}

double convergence_abscissa(int k) {
    if (k < 1 || k > 6) throw Error(ErrorCode::DomainError, "Z_k is defined here for 1 <= k <= 6");
    return k <= 2 ? 1.0 : (k + 2.0) / 4.0;
}

MellinEngine::MellinEngine(SampleCache& cache, MellinOptions opts) : cache_(cache), opts_(opts) {}

namespace {

std::size_t grid_index(double x, double h, const char* what) {
    const double q = x / h;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9) throw Error(ErrorCode::DomainError, std::string(what) + " must lie on the cache panel grid");
    return static_cast<std::size_t>(r);
}

}  // namespace

TailPolicy MellinEngine::direct_tail_policy(int k) {
    const double X = desk_ceiling(k);
    TailPolicy policy;
    policy.cutoff = X;
    policy.safety = opts_.direct_safety;
    if (k <= 2) {
        policy.growth_exponent = 1.0;
        policy.log_power = k == 1 ? 1 : 4;
    } else {
        policy.growth_exponent = (k + 2.0) / 4.0;
        policy.log_power = k * k;
    }
    // scale: the largest I_k(T) / (T^g log^q T) seen on [X/2, X]
    const double h = cache_.grid_step();
    const std::size_t p_hi = grid_index(X, h, "desk ceiling");
    cache_.ensure(X);
    const auto& bounds = cache_.boundary_cumulative(k);
    double scale = 0.0;
    for (std::size_t p = p_hi / 2; p <= p_hi; ++p) {
        const double T = static_cast<double>(p) * h;
        scale = std::max(scale, bounds[p] / (std::pow(T, policy.growth_exponent) * std::pow(std::log(T), policy.log_power)));
    }
    policy.scale = scale;
    return policy;
}

const MellinEngine::Kernel& MellinEngine::direct_kernel(int k) {
    if (auto it = direct_.find(k); it != direct_.end()) return it->second;
    const double h = cache_.grid_step();
    const double X = desk_ceiling(k);
    const std::size_t p_lo = grid_index(1.0, h, "lower limit 1");
    const std::size_t p_hi = grid_index(X, h, "desk ceiling");
    cache_.ensure(X);
    const auto& rule = detail::panel_rule();
    const double half = 0.5 * h;
    Kernel kern;
    kern.X = X;
    for (std::size_t p = p_lo; p < p_hi; ++p) {
        const auto vals = cache_.panel_values(p);
        for (int j = 0; j < SampleCache::kNodes; ++j) {
            const double z = vals[j];
            const double zk = std::pow(z, k);
            kern.log_t.push_back(std::log(cache_.node_t(p, j)));
            kern.w_kronrod.push_back(half * rule.wk[j] * zk);
            kern.w_diff.push_back(half * (rule.wk[j] - rule.wg[j]) * zk);
            kern.w_sens.push_back(half * rule.wk[j] * k * std::pow(z, k - 1) * cache_.zeta_tol());
        }
    }
    return direct_.emplace(k, std::move(kern)).first->second;
}

const MellinEngine::Kernel& MellinEngine::continuation_kernel(const MomentPolynomial& poly, double X, double theta) {
    std::vector<double> key = poly.coeffs;
    key.push_back(X);
    key.push_back(static_cast<double>(poly.k));
    if (auto it = continued_.find(key); it != continued_.end()) return it->second;

    const double h = cache_.grid_step();
    const std::size_t p_lo = grid_index(1.0, h, "lower limit 1");
    const std::size_t p_hi = grid_index(X, h, "continuation limit");
    cache_.ensure(X);
    const auto& nodes = cache_.node_cumulative(poly.k);
    const auto& errs = cache_.boundary_cumulative_err(poly.k);
    const auto& rule = detail::panel_rule();
    const double half = 0.5 * h;
    Kernel kern;
    kern.X = X;
    double mean_square = 0.0;  // running int_1^T E^2
    for (std::size_t p = p_lo; p < p_hi; ++p) {
        double panel_sq = 0.0;
        for (int j = 0; j < SampleCache::kNodes; ++j) {
            const double t = cache_.node_t(p, j);
            const double E = nodes[p * SampleCache::kNodes + j] - t * poly(std::log(t));
            kern.log_t.push_back(std::log(t));
            kern.w_kronrod.push_back(half * rule.wk[j] * E);
            kern.w_diff.push_back(half * (rule.wk[j] - rule.wg[j]) * E);
            panel_sq += half * rule.wk[j] * E * E;
        }
        mean_square += panel_sq;
        const double T = static_cast<double>(p + 1) * h;
        if (T >= 0.25 * X) kern.constant = std::max(kern.constant, mean_square / std::pow(T, theta));
    }
    kern.moment_err = errs[p_hi];
    const auto I1 = cumulative_moment(cache_, poly.k, 1.0);
    kern.E_at_1 = {I1.value - poly(0.0), I1.err};
    return continued_.emplace(std::move(key), std::move(kern)).first->second;
}

MellinEngine::KernelSum MellinEngine::apply(const Kernel& kern, Complex exponent) const {
    KernelSum out;
    const double a = exponent.real();
    const double b = exponent.imag();
    const std::size_t n = kern.log_t.size();
    detail::CompensatedSum<double> re, im;
    for (std::size_t p = 0; p < n; p += SampleCache::kNodes) {
        double pre = 0.0, pim = 0.0, dre = 0.0, dim = 0.0;
        for (std::size_t i = p; i < p + SampleCache::kNodes; ++i) {
            const double lt = kern.log_t[i];
            const double mag = std::exp(-a * lt);
            const double c = std::cos(b * lt) * mag;
            const double s = -std::sin(b * lt) * mag;
            pre += kern.w_kronrod[i] * c;
            pim += kern.w_kronrod[i] * s;
            dre += kern.w_diff[i] * c;
            dim += kern.w_diff[i] * s;
            if (!kern.w_sens.empty()) out.sens += kern.w_sens[i] * mag;
        }
        re.add(pre);
        im.add(pim);
        out.panel_err += std::hypot(dre, dim);
    }
    out.value = Complex(re.value(), im.value());
    return out;
}

MellinPoint MellinEngine::Z_truncated(int k, Complex s) {
    if (k < 1 || k > 4) throw Error(ErrorCode::DeskScaleExceeded, "cached Mellin sums are limited to k <= 4");
    const auto& kern = direct_kernel(k);
    const auto sum = apply(kern, s);
    MellinPoint out;
    out.k = k;
    out.s = s;
    out.value = sum.value;
    out.err = sum.panel_err + sum.sens;
    out.method = MellinMethod::direct;
    return out;
}

MellinPoint MellinEngine::Z_direct(int k, Complex s, double tol) {
    if (k < 1 || k > 6) throw Error(ErrorCode::DomainError, "Z_k is defined here for 1 <= k <= 6");
    if (k > 4) throw Error(ErrorCode::DeskScaleExceeded, "Z_direct is limited to k <= 4");
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    const double abscissa = convergence_abscissa(k);
    if (!(s.real() >= abscissa + 0.25))
        throw Error(ErrorCode::NotAbsolutelyConvergent,
                    "Z_direct needs Re s >= " + std::to_string(abscissa + 0.25) + " for k = " + std::to_string(k));
    auto out = Z_truncated(k, s);
    out.err += tail_bound(direct_tail_policy(k), s.real());
    return out;
}

namespace {

// int_Y^inf y^j e^{-w y} dy, continued analytically in w
Complex upper_moment(int j, Complex w, double Y) {
    Complex sum = 0.0;
    double falling = 1.0;
    for (int i = 0; i <= j; ++i) {
        sum += falling * std::pow(Y, j - i) / std::pow(w, i + 1);
        falling *= static_cast<double>(j - i);
    }
    return std::exp(-w * Y) * sum;
}

}  // namespace

MellinPoint MellinEngine::continued(Complex s, const MomentPolynomial& poly, double X, double theta) {
    const auto& kern = continuation_kernel(poly, X, theta);
    const auto sum = apply(kern, s + 1.0);
    const Complex w = s - 1.0;
    const double sigma = s.real();

    // int_1^inf x^{-s} d(x P(log x)) = sum_i (a_i i! + a_{i+1} (i+1)!) w^{-i-1}
    Complex main = 0.0;
    const int d = poly.degree();
    double fact = 1.0;  // i!
    for (int i = 0; i <= d; ++i) {
        const double next = i + 1 <= d ? poly.coeffs[static_cast<std::size_t>(i + 1)] * fact * (i + 1) : 0.0;
        main += (poly.coeffs[static_cast<std::size_t>(i)] * fact + next) / std::pow(w, i + 1);
        fact *= i + 1;
    }

    MellinPoint out;
    out.k = poly.k;
    out.s = s;
    out.method = MellinMethod::continued;
    out.value = main - kern.E_at_1.value + s * sum.value;

    const double abs_s = std::abs(s);
    const double weight_mass = (1.0 - std::pow(X, -sigma)) / sigma;  // int_1^X x^{-sigma-1} dx
    double err = abs_s * (sum.panel_err + kern.moment_err * weight_mass) + kern.E_at_1.err;
    // dyadic Cauchy-Schwarz on int_X^inf E x^{-s-1} with int_1^T E^2 <= C T^theta
    const double beta = 0.5 * (theta - 1.0) - sigma;
    err += opts_.continuation_safety * abs_s * std::sqrt(kern.constant) * std::pow(2.0, 0.5 * theta) *
           std::pow(X, beta) / (1.0 - std::pow(2.0, beta));
    // fitted coefficients enter only through the truncation at X
    const double Y = std::log(X);
    for (std::size_t j = 0; j < poly.coeffs.size(); ++j) {
        if (j < poly.provenance.size() && poly.provenance[j] == Provenance::fitted) {
            out.model_relative = true;
            err += poly.std_errors[j] * abs_s * std::abs(upper_moment(static_cast<int>(j), w, Y));
        }
    }
    out.err = err;
    return out;
}

MellinPoint MellinEngine::Z1_continued(Complex s, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    if (s == Complex(1.0, 0.0)) throw Error(ErrorCode::PoleAt1, "Z_1 has a double pole at s = 1");
    if (!(s.real() >= 0.3))
        throw Error(ErrorCode::TooCloseToAbscissa, "Z1_continued needs Re s >= 0.3 (continuation reaches Re s > 1/4)");
    if (opts_.continuation_X1 > desk_ceiling(1)) throw Error(ErrorCode::DeskScaleExceeded, "continuation limit above desk ceiling");
    return continued(s, p1_polynomial(), opts_.continuation_X1, 1.5);
}

MellinPoint MellinEngine::Z2_continued(Complex s, const MomentPolynomial& poly, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "tolerance must be positive");
    if (poly.k != 2 || poly.coeffs.size() != 5) throw Error(ErrorCode::DomainError, "Z2_continued needs a k = 2 polynomial");
    if (s == Complex(1.0, 0.0)) throw Error(ErrorCode::PoleAt1, "Z_2 has a pole of order 5 at s = 1");
    if (!(s.real() >= 0.55))
        throw Error(ErrorCode::TooCloseToAbscissa, "Z2_continued needs Re s >= 0.55 (continuation reaches Re s > 1/2)");
    if (opts_.continuation_X2 > desk_ceiling(2)) throw Error(ErrorCode::DeskScaleExceeded, "continuation limit above desk ceiling");
    return continued(s, poly, opts_.continuation_X2, 2.0);
}

LaurentPrincipalPart laurent_extract(const std::function<Evaluated(Complex)>& f, int order, double radius, int nodes,
                                     double outer_radius) {
    if (order < 1 || order > 5) throw Error(ErrorCode::DomainError, "Laurent extraction supports orders 1..5");
    if (!(radius >= 0.05 && radius <= 0.5)) throw Error(ErrorCode::DomainError, "contour radius must lie in [0.05, 0.5]");
    if (nodes < 64) throw Error(ErrorCode::DomainError, "at least 64 contour nodes are required");
    if (outer_radius == 0.0) outer_radius = 1.5 * radius;
    if (!(outer_radius > radius)) throw Error(ErrorCode::DomainError, "outer radius must exceed the contour radius");
    const Complex centre(1.0, 0.0);
    std::vector<Complex> acc(static_cast<std::size_t>(order + 1), 0.0);
    double max_err = 0.0;
    double max_abs = 0.0;
    for (int n = 0; n < nodes; ++n) {
        const double theta = 2.0 * kPi * (n + 0.5) / nodes;  // offset keeps nodes off the real axis
        const Complex e = std::polar(1.0, theta);
        const Evaluated v = f(centre + radius * e);
        max_err = std::max(max_err, v.err);
        max_abs = std::max(max_abs, std::abs(v.value) + v.analytic_err);
        Complex rot = e;  // e^{i m theta}
        for (int m = 1; m <= order; ++m) {
            acc[static_cast<std::size_t>(m)] += v.value * rot;
            rot *= e;
        }
    }
    LaurentPrincipalPart out;
    out.center = centre;
    for (int m = 1; m <= order; ++m) {
        const double rm = std::pow(radius, m);
        out.coeffs[m] = acc[static_cast<std::size_t>(m)] * rm / static_cast<double>(nodes);
    }

    // The analytic remainder h = f - principal part has Taylor coefficients
    // below M / R^j; the N-point rule folds those with j = N - m, 2N - m, ...
    // onto c_{-m}.
    double outer_max = 0.0;
    for (int n = 0; n < 16; ++n) {
        const Complex w = outer_radius * std::polar(1.0, 2.0 * kPi * (n + 0.25) / 16.0);
        const Evaluated v = f(centre + w);
        Complex principal = 0.0;
        for (int m = 1; m <= order; ++m) principal += out.coeffs[m] / std::pow(w, m);
        outer_max = std::max(outer_max, std::abs(v.value - principal) + v.analytic_err + v.err);
    }
    const double q = std::pow(radius / outer_radius, nodes);
    for (int m = 1; m <= order; ++m) {
        const double rm = std::pow(radius, m);
        const double alias = 2.0 * outer_max * q * std::pow(outer_radius / radius, m) * rm / (1.0 - q);
        out.errors[m] = rm * (max_err + 4.0 * nodes * std::numeric_limits<double>::epsilon() * max_abs) + alias;
    }
    return out;
}

IdentityCheck verify_square_identity(MellinEngine& engine, Complex s, double X_max, double tol) {
    if (!(s.real() >= 2.5)) throw Error(ErrorCode::DeskScaleExceeded, "square identity check needs Re s >= 2.5");
    if (!(X_max > 1.0) || X_max > 1e4) throw Error(ErrorCode::DeskScaleExceeded, "square identity check needs 1 < X_max <= 10^4");
    auto& cache = engine.cache();
    cache.ensure(X_max + 1.0);

    IdentityCheck out;
    const auto z = engine.Z_direct(1, s, tol);
    out.lhs = z.value * z.value;
    out.lhs_err = 2.0 * std::abs(z.value) * z.err + z.err * z.err;

    auto f = [&](double t) { return cache.interpolate(t); };
    const auto body = square_identity_body(f, s, X_max, tol, 0.25);
    out.rhs = body.value;

    // pairs with uv > X lie in {u > sqrt X} or {v > sqrt X}: at most 2 Z(sigma) G(sqrt X)
    const double sigma = s.real();
    const auto z_sigma = engine.Z_direct(1, Complex(sigma, 0.0), tol);
    const double Y = std::sqrt(X_max);
    const double X1 = desk_ceiling(1);
    const auto g = integrate_cached(
        cache, Y, X1, [sigma](double t, double zz) { return zz * std::pow(t, -sigma); },
        [sigma](double t, double) { return std::pow(t, -sigma); }, 1e-3 * tol);
    const double G = g.value + g.err_estimate + tail_bound(engine.direct_tail_policy(1), sigma);
    out.rhs_err = body.err_estimate + 2.0 * (z_sigma.value.real() + z_sigma.err) * G;
    // interpolation error of the panel polynomial is far below the sample tolerance
    out.rhs_err += 2.0 * cache.zeta_tol() * 2.0 * (z_sigma.value.real() + z_sigma.err) * (1.0 / (sigma - 1.0));
    out.defect = std::abs(out.lhs - out.rhs);
    return out;
}

IdentityCheck gamma_smoothed_crosscheck(MellinEngine& engine, double T, double c, double t_span, double tol) {
    if (!(c >= 1.25)) throw Error(ErrorCode::DomainError, "contour abscissa must satisfy c >= 1.25");
    if (!(T > 0.0) || T > 500.0) throw Error(ErrorCode::DeskScaleExceeded, "gamma contour check is limited to T <= 500");
    auto& cache = engine.cache();
    IdentityCheck out;

    // Both sides are taken over [1, X]: the contour integral of the truncated
    // transform is exactly the truncated smoothed integral.
    const double X = desk_ceiling(1);
    const double sigma = 1.0 / T;
    const auto lhs = integrate_cached(
        cache, 1.0, X, [sigma](double t, double z) { return z * std::exp(-sigma * t); },
        [sigma](double t, double) { return std::exp(-sigma * t); }, 0.25 * tol);
    const double omitted = laplace_tail_bound(1, sigma, X);
    out.lhs = lhs.value;
    out.lhs_err = lhs.err_estimate + omitted;

    const auto z_c = engine.Z_truncated(1, Complex(c, 0.0));
    auto z = [&](Complex s) {
        const auto p = engine.Z_truncated(1, s);
        return Evaluated{p.value, p.err, 0.0};
    };
    const auto rhs = gamma_contour_integral(z, T, c, t_span, z_c.value.real() + z_c.err, tol);
    out.rhs = rhs.value;
    out.rhs_err = rhs.err_estimate + omitted;
    out.defect = std::abs(out.lhs - out.rhs);
    return out;
}

MeanSquareResult mean_square_Z(MellinEngine& engine, int k, double sigma, double T, int n_samples,
                               const MomentPolynomial* poly) {
    if (k != 1 && k != 2) throw Error(ErrorCode::DomainError, "mean square of Z_k is implemented for k = 1, 2");
    if (k == 1 && !(sigma > 0.25)) throw Error(ErrorCode::TooCloseToAbscissa, "k = 1 needs sigma > 1/4");
    if (k == 2 && !(sigma > 0.55)) throw Error(ErrorCode::TooCloseToAbscissa, "k = 2 needs sigma > 0.55");
    if (k == 2 && poly == nullptr) throw Error(ErrorCode::DomainError, "k = 2 needs a P_4 polynomial");
    if (!(T > 8.0) || T > 200.0) throw Error(ErrorCode::DeskScaleExceeded, "mean square is limited to 8 < T <= 200");
    if (n_samples < 200) throw Error(ErrorCode::DomainError, "mean square needs at least 200 samples");

    auto value = [&](double t) {
        const Complex s(sigma, t);
        const auto p = k == 1 ? engine.Z1_continued(s) : engine.Z2_continued(s, *poly);
        return std::norm(p.value);
    };
    const double step = (T - 1.0) / (n_samples - 1);
    std::vector<double> ts(static_cast<std::size_t>(n_samples));
    std::vector<double> cum(ts.size(), 0.0);
    double prev = value(1.0);
    ts[0] = 1.0;
    for (int i = 1; i < n_samples; ++i) {
        ts[static_cast<std::size_t>(i)] = 1.0 + step * i;
        const double v = value(ts[static_cast<std::size_t>(i)]);
        cum[static_cast<std::size_t>(i)] = cum[static_cast<std::size_t>(i - 1)] + 0.5 * step * (prev + v);
        prev = v;
    }
    MeanSquareResult out;
    out.integral = cum.back();
    // cumulative integral at T/8 .. T by linear interpolation between samples
    std::vector<double> lx, ly;
    for (double frac : {0.125, 0.25, 0.5, 1.0}) {
        const double Tj = T * frac;
        const double pos = (Tj - 1.0) / step;
        const auto i = std::min(static_cast<std::size_t>(pos), ts.size() - 2);
        const double w = pos - static_cast<double>(i);
        const double c = cum[i] * (1.0 - w) + cum[i + 1] * w;
        out.T_points.push_back(Tj);
        out.cumulative.push_back(c);
        lx.push_back(std::log(Tj));
        ly.push_back(std::log(c));
    }
    const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4.0;
    const double my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4.0;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 4; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    out.loglog_slope = sxy / sxx;
    return out;
}

PoleStructureReport pole_structure_crosscheck() {
    PoleStructureReport r;
    const double pi2 = kPi * kPi;
    r.A5 = 12.0 / pi2;
    r.four_factorial_a42 = 24.0 * p4_leading_coefficient();
    r.c2 = c_k(2, 100000).value;
    r.atkinson_A = atkinson_coeffs().A;
    const double values[] = {r.A5 / 24.0, r.four_factorial_a42 / 24.0, r.c2, r.atkinson_A};
    for (double a : values)
        for (double b : values) r.max_deviation = std::max(r.max_deviation, std::abs(a - b));
    r.max_deviation = std::max(r.max_deviation, std::abs(r.A5 - r.four_factorial_a42));
    return r;
}

}  // namespace zml
