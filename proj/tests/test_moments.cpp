#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"
#include "zml/error.hpp"
#include "zml/moments.hpp"

using namespace zml;
using zml::test::shared_cache;

namespace {

// 30-digit references (mpmath, unit-segment Gauss-Legendre)
constexpr double kI1_100 = 295.63509905471913;
constexpr double kI2_50 = 659.48038883168806;
constexpr double kL1_quarter = 3.458100143972011;
constexpr double kSmoothed_100_5 = 20.04393698156113;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("moment_Ik against references") {
    auto& cache = shared_cache(5000.0);
    const auto r = moment_Ik(cache, 1, 100.0, 1e-8);
    CHECK(std::abs(r.value - kI1_100) <= 1e-4);
    CHECK(std::abs(r.value - kI1_100) <= r.err + 1e-10);
    const auto r2 = moment_Ik(cache, 2, 50.0, 1e-8);
    CHECK(std::abs(r2.value - kI2_50) <= r2.err + 1e-10);

    // ragged T off the panel grid
    const auto c = cumulative_moment(cache, 1, 100.0);
    CHECK(std::abs(c.value - kI1_100) <= c.err + 1e-10);
    const auto a = moment_Ik(cache, 1, 123.4567, 1e-9);
    const auto b = cumulative_moment(cache, 1, 123.4567);
    CHECK(std::abs(a.value - b.value) <= a.err + b.err);

    CHECK(moment_Ik(cache, 1, 1e-9, 1e-8).value == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(moment_Ik(cache, 1, 0.0, 1e-8).value == 0.0);
}

TEST_CASE("moments are non-negative and non-decreasing") {
    auto& cache = shared_cache(5000.0);
    CHECK(moment_Ik(cache, 1, 200.0, 1e-8).value > moment_Ik(cache, 1, 100.0, 1e-8).value);
    for (int k = 1; k <= 4; ++k) {
        double prev = 0.0;
        for (double T = 5.0; T <= desk_ceiling(k); T *= 1.7) {
            const auto e = cumulative_moment(cache, k, T);
            CHECK(e.value >= prev);
            prev = e.value;
        }
    }
}

TEST_CASE("leading-order sanity I_1(T) / (T log T)") {
    auto& cache = shared_cache(5000.0);
    for (double T : {500.0, 1000.0, 2000.0, 5000.0}) {
        const double ratio = cumulative_moment(cache, 1, T).value / (T * std::log(T));
        CHECK(ratio > 0.5);
        CHECK(ratio < 1.5);
    }
}

TEST_CASE("desk-scale ceilings") {
    auto& cache = shared_cache();
    CHECK(code_of([&] { moment_Ik(cache, 1, 5001.0, 1e-6); }) == ErrorCode::DeskScaleExceeded);
    CHECK(code_of([&] { moment_Ik(cache, 2, 2001.0, 1e-6); }) == ErrorCode::DeskScaleExceeded);
    CHECK(code_of([&] { moment_Ik(cache, 3, 501.0, 1e-6); }) == ErrorCode::DeskScaleExceeded);
    CHECK(code_of([&] { moment_Ik(cache, 5, 10.0, 1e-6); }) == ErrorCode::DeskScaleExceeded);
    CHECK(code_of([&] { laplace_Lk(cache, 1, 1e-4, 1e-6); }) == ErrorCode::DeskScaleExceeded);
    CHECK(code_of([&] { smoothed_I(cache, 2500.0, 10.0, 1e-6); }) == ErrorCode::DeskScaleExceeded);
}

TEST_CASE("p1_polynomial") {
    const auto p = p1_polynomial();
    REQUIRE(p.coeffs.size() == 2);
    CHECK(p.k == 1);
    CHECK(p.coeffs[1] == 1.0);
    CHECK(std::abs(p.coeffs[0] - (-1.6834457366062798)) <= 1e-14);
    CHECK(std::abs(p(std::log(2.0 * kPi)) - 0.15443132980306572) <= 1e-14);
    for (auto prov : p.provenance) CHECK(prov == Provenance::closed_form);
}

TEST_CASE("p4_polynomial fit and stability") {
    auto& cache = shared_cache(5000.0);
    const auto p = p4_polynomial(cache, 100.0, 2000.0, 40);
    REQUIRE(p.coeffs.size() == 5);
    CHECK(p.coeffs[4] == p4_leading_coefficient());
    CHECK(std::abs(p.coeffs[4] - 0.050660591821168886) <= 1e-16);
    CHECK(p.provenance[4] == Provenance::closed_form);
    for (int j = 0; j < 4; ++j) CHECK(p.provenance[j] == Provenance::fitted);
    CHECK(p.residuals.size() == 40);
    CHECK(p.condition_number > 0.0);
    MESSAGE("P_4 fit: residual rms " << p.residual_rms << ", coefficients " << p.coeffs[0] << " " << p.coeffs[1]
                                     << " " << p.coeffs[2] << " " << p.coeffs[3]);

    // disjoint ranges, each compared against its own reported uncertainty
    const auto lo = p4_polynomial(cache, 100.0, 450.0, 30);
    const auto hi = p4_polynomial(cache, 450.0, 2000.0, 30);
    for (int j = 0; j < 4; ++j) {
        const double se = std::hypot(lo.std_errors[j], hi.std_errors[j]);
        MESSAGE("a_" << j << ": " << lo.coeffs[j] << " vs " << hi.coeffs[j] << " (combined se " << se << ")");
        CHECK(std::abs(lo.coeffs[j] - hi.coeffs[j]) < 3.0 * se);
    }

    CHECK(code_of([&] { p4_polynomial(cache, 20.0, 500.0, 30); }) == ErrorCode::DomainError);
    CHECK(code_of([&] { p4_polynomial(cache, 100.0, 500.0, 10); }) == ErrorCode::DomainError);
    FitOptions strict;
    strict.max_condition_number = 1.0;
    CHECK(code_of([&] { p4_polynomial(cache, 100.0, 500.0, 30, strict); }) == ErrorCode::IllConditionedFit);
}

TEST_CASE("fit_p4 recovers a synthetic quartic exactly") {
    const double q[5] = {0.7, -1.3, 0.25, 0.4, p4_leading_coefficient()};
    auto Q = [&](double y) { return (((q[4] * y + q[3]) * y + q[2]) * y + q[1]) * y + q[0]; };
    const auto p = fit_p4([&](double T) { return T * Q(std::log(T)); }, 60.0, 2000.0, 30);
    for (int j = 0; j < 5; ++j) CHECK(std::abs(p.coeffs[j] - q[j]) <= 1e-6);
    CHECK(p.residual_rms <= 1e-9);
}

TEST_CASE("error_E1") {
    auto& cache = shared_cache(5000.0);
    const auto p1 = p1_polynomial();
    const auto e = error_E1(cache, 100.0, 1e-8);
    CHECK(std::abs(e.value - (kI1_100 - 100.0 * p1(std::log(100.0)))) <= e.err + 1e-9);

    double worst = 0.0;
    int sign_changes = 0;
    double prev = 0.0;
    for (double T = 10.0; T <= 5000.0; T *= 1.02) {
        const double v = error_term(cache, p1, T).value;
        worst = std::max(worst, std::abs(v) / std::cbrt(T));
        if (T <= 1000.0 && prev != 0.0 && (v > 0.0) != (prev > 0.0)) ++sign_changes;
        prev = v;
    }
    MESSAGE("max |E_1(T)| / T^(1/3) on [10, 5000]: " << worst);
    CHECK(worst < 10.0);
    CHECK(sign_changes >= 1);

    for (double T : {100.0, 500.0, 2000.0, 5000.0}) {
        const auto ms = error_term_integral(cache, p1, 1.0, T, 2);
        const double normalized = ms.value / std::pow(T, 1.5);
        MESSAGE("T^(-3/2) int E_1^2 at T = " << T << ": " << normalized << " +- " << ms.err / std::pow(T, 1.5));
        CHECK(normalized < 50.0);
    }
    CHECK(code_of([&] { error_E1(cache, 1.0, 1e-8); }) == ErrorCode::DomainError);
}

// The mean of E_1 tends to pi (int_0^T E_1 = pi T + O(T^{3/4})), so a bound of
// 5 T^{-1/4} on the mean cannot hold; the literal check is kept and marked.
TEST_CASE("mean of E_1 decays like T^(-1/4)" * doctest::should_fail()) {
    auto& cache = shared_cache(5000.0);
    const auto p1 = p1_polynomial();
    for (double T : {100.0, 1000.0, 5000.0}) {
        const double mean = error_term_integral(cache, p1, 1.0, T, 1).value / T;
        CHECK(std::abs(mean) <= 5.0 * std::pow(T, -0.25));
    }
}

TEST_CASE("mean of E_1 settles near pi") {
    auto& cache = shared_cache(5000.0);
    const auto p1 = p1_polynomial();
    for (double T : {1000.0, 5000.0}) {
        const auto m = error_term_integral(cache, p1, 1.0, T, 1);
        MESSAGE("mean E_1 on [1, " << T << "]: " << m.value / T);
        CHECK(std::abs(m.value / T - kPi) <= 5.0 * std::pow(T, -0.25));
    }
}

TEST_CASE("error_E2 is model-relative") {
    auto& cache = shared_cache(5000.0);
    const auto p = p4_polynomial(cache, 100.0, 2000.0, 40);
    // at a fit node the error term is the fit residual
    const double T0 = 100.0;
    const auto e = error_E2(cache, T0, p, 1e-8);
    CHECK(std::abs(e.value - p.residuals.front()) <= 1e-6 * std::abs(e.value) + 2.0 * e.err);
    CHECK(code_of([&] { error_E2(cache, 50.0, p, 1e-8); }) == ErrorCode::DomainError);
    CHECK(code_of([&] { error_E2(cache, 500.0, p1_polynomial(), 1e-8); }) == ErrorCode::DomainError);

    // two-sided: of order T^2 from below, well inside T^2 log^22 T from above
    for (double T : {500.0, 1000.0, 2000.0}) {
        const auto ms = error_term_integral(cache, p, 100.0, T, 2);
        MESSAGE("T^-2 int E_2^2 at T = " << T << ": " << ms.value / (T * T));
        CHECK(ms.value / (T * T) > 1.0);
        CHECK(ms.value / (T * T * std::pow(std::log(T), 22)) < 1.0);
    }
}

TEST_CASE("error_E2 vanishes on exact quartic data") {
    const double q[5] = {1.5, -0.5, 2.0, -0.1, p4_leading_coefficient()};
    auto Q = [&](double y) { return (((q[4] * y + q[3]) * y + q[2]) * y + q[1]) * y + q[0]; };
    const auto p = fit_p4([&](double T) { return T * Q(std::log(T)); }, 60.0, 2000.0, 30);
    for (double T : {70.0, 333.0, 1999.0}) CHECK(std::abs(T * Q(std::log(T)) - T * p(std::log(T))) <= 1e-6 * T);
}

TEST_CASE("laplace_Lk") {
    auto& cache = shared_cache(5000.0);
    const auto L = laplace_Lk(cache, 1, 0.25, 1e-10);
    CHECK(std::abs(L.value - kL1_quarter) <= L.err + 1e-12);
    CHECK(L.err <= 1e-8);  // floor set by the cached sample accuracy

    double prev = INFINITY;
    for (double s : {0.01, 0.05, 0.2, 1.0, 3.0}) {
        const double v = laplace_Lk(cache, 1, s, 1e-8).value;
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }

    for (int k : {1, 2})
        for (double T : {50.0, 200.0}) {
            const auto I = cumulative_moment(cache, k, T);
            const auto Lk = laplace_Lk(cache, k, 1.0 / T, 1e-4);
            CHECK(I.value <= std::exp(1.0) * (Lk.value - Lk.err));
        }
}

TEST_CASE("trivial inequality at T = 1000 through a truncated lower bound") {
    // L_k(1/1000) needs samples far past the cache; the integral over [0, 5000]
    // of a positive integrand is already a lower bound for it
    auto& cache = shared_cache(5000.0);
    const double T = 1000.0;
    for (int k : {1, 2}) {
        const auto partial = integrate_cached(
            cache, 0.0, 5000.0, [&](double t, double z) { return std::pow(z, k) * std::exp(-t / T); },
            [&](double t, double z) { return k * std::pow(z, k - 1) * std::exp(-t / T); }, 1e-6);
        const auto I = cumulative_moment(cache, k, T);
        CHECK(I.value + I.err <= std::exp(1.0) * (partial.value - partial.err_estimate));
    }
}

TEST_CASE("laplace_Lk by parts against the moment") {
    auto& cache = shared_cache(5000.0);
    for (double T : {25.0, 50.0, 100.0}) {
        const double sigma = 1.0 / T;
        const auto L = laplace_Lk(cache, 1, sigma, 1e-8);
        const double X = laplace_cutoff(1, sigma, 1e-8);
        REQUIRE(X <= 5000.0);
        // (1/T) int_0^X I_1(t) e^{-t/T} dt on the cumulative grid, plus tails
        QuadOptions opts;
        opts.max_panel_width = 1.0;
        opts.max_panels = 100000;
        const auto by_parts = integrate_adaptive(
            [&](double t) { return cumulative_moment(cache, 1, t).value * std::exp(-t / T) / T; }, 0.0, X, 1e-9, opts);
        const double boundary = cumulative_moment(cache, 1, X).value * std::exp(-X / T);
        const double tail = laplace_tail_bound(1, sigma, X);
        const double rhs = by_parts.value + boundary;  // L(sigma) - tail <= ... within the omitted tail
        CHECK(std::abs(L.value - rhs) <= L.err + by_parts.err_estimate + tail + 1e-7 + 1e-9 * L.value);
    }
}

TEST_CASE("Kober asymptotics") {
    auto& cache = shared_cache(5000.0);
    CHECK(kober_main_term(0.01) > 0.0);
    const auto d1 = kober_check(cache, 0.01, 1e-6);
    const auto d2 = kober_check(cache, 0.005, 1e-6);
    MESSAGE("Kober defects: " << d1.value << " (sigma 0.01), " << d2.value << " (sigma 0.005)");
    CHECK(std::abs(d1.value - d2.value) <= 5.0 * 0.01 + d1.err + d2.err);

    double prev_gap = INFINITY;
    for (double s : {0.02, 0.01, 0.005}) {
        const double ratio = laplace_Lk(cache, 1, 2.0 * s, 1e-6).value * 2.0 * s / std::log(1.0 / s);
        MESSAGE("2 sigma L_1(2 sigma) / log(1/sigma) at sigma " << s << ": " << ratio);
        CHECK(std::abs(ratio - 1.0) < prev_gap);
        prev_gap = std::abs(ratio - 1.0);
    }
    CHECK(code_of([&] { kober_check(cache, 0.06); }) == ErrorCode::DomainError);
}

TEST_CASE("Atkinson coefficients") {
    const auto c = atkinson_coeffs();
    CHECK(std::abs(c.A - 0.050660591821168886) <= 1e-16);
    CHECK(std::abs(c.B - (-0.20946977659413073)) <= 1e-12);

    auto& cache = shared_cache(5000.0);
    // sigma L_2(sigma) / log^4(1/sigma) against A with the 1/log correction fitted out
    std::vector<double> r, inv;
    for (double s : {0.02, 0.01, 0.005}) {
        const double l = std::log(1.0 / s);
        r.push_back(s * laplace_Lk(cache, 2, s, 1e-4).value / std::pow(l, 4));
        inv.push_back(1.0 / l);
    }
    MESSAGE("sigma L_2 / log^4: " << r[0] << " " << r[1] << " " << r[2]);
    // the raw ratio approaches A monotonically
    CHECK(std::abs(r[1] - c.A) < std::abs(r[0] - c.A));
    CHECK(std::abs(r[2] - c.A) < std::abs(r[1] - c.A));
    const double slope = (r[2] - r[1]) / (inv[2] - inv[1]);
    const double extrapolated = r[2] - slope * inv[2];
    MESSAGE("linear-in-1/log extrapolation: " << extrapolated);
    CHECK(std::abs(extrapolated - c.A) < std::abs(r[2] - c.A));
}

TEST_CASE("smoothed fourth moment") {
    auto& cache = shared_cache(5000.0);
    const auto one = smoothed_average([](double) { return 1.0; }, 300.0, 7.0, 1e-12);
    CHECK(std::abs(one.value - 1.0) <= 1e-10);

    const auto p = smoothed_I(cache, 100.0, 5.0, 1e-9);
    CHECK(std::abs(p.value - kSmoothed_100_5) <= p.err + 1e-10);

    for (double T = 100.0; T <= 1000.0; T += 47.0) {
        const auto q = smoothed_I(cache, T, 10.0, 1e-6);
        CHECK(q.value >= 0.0);
        CHECK(q.err >= 0.0);
    }
    CHECK(code_of([&] { smoothed_I(cache, 10.0, 20.0, 1e-6); }) == ErrorCode::DomainError);
}

TEST_CASE("smoothed moment integrates back to the fourth moment") {
    auto& cache = shared_cache(5000.0);
    // int_T^{2T} I(t, G) dt approximates I_2(2T) - I_2(T) up to edge effects
    const double T = 500.0, G = 100.0;
    QuadOptions opts;
    opts.max_panel_width = 5.0;
    const auto lhs = integrate_adaptive([&](double t) { return smoothed_I(cache, t, G, 1e-5).value; }, T, 2.0 * T,
                                        1e-3 * T, opts);
    const double rhs = cumulative_moment(cache, 2, 2.0 * T).value - cumulative_moment(cache, 2, T).value;
    MESSAGE("int smoothed = " << lhs.value << ", increment of I_2 = " << rhs);
    CHECK(std::abs(lhs.value - rhs) <= 0.1 * rhs);
}

TEST_CASE("mean square of the smoothed moment at G = T^(2/3)") {
    auto& cache = shared_cache(5000.0);
    const double T = 500.0, G = std::pow(T, 2.0 / 3.0);
    QuadOptions opts;
    opts.max_panel_width = 10.0;
    const auto ms = integrate_adaptive(
        [&](double t) {
            const double v = smoothed_I(cache, t, G, 1e-5).value;
            return v * v;
        },
        T, 2.0 * T, 1e-2 * T, opts);
    MESSAGE("(1/T) int_T^2T I^2(t, T^(2/3)) dt = " << ms.value / T);
    CHECK(std::isfinite(ms.value));
    CHECK(ms.value > 0.0);
}

TEST_CASE("theorem5_exponents") {
    const auto e = theorem5_exponents(0.5, 0.5);
    CHECK(e.e2 == doctest::Approx(2.0 / 3.0));
    CHECK(e.e3 == doctest::Approx(1.5));
    CHECK(theorem5_exponents(1.0, 0.0).e3 == doctest::Approx(1.0));
    CHECK(theorem5_exponents(0.0, 0.0).e1 == doctest::Approx(0.5));
    CHECK(code_of([] { theorem5_exponents(-1.0, 0.0); }) == ErrorCode::DomainError);
    CHECK(code_of([] { theorem5_exponents(0.2, 0.5, true); }) == ErrorCode::DomainError);
    CHECK_NOTHROW(theorem5_exponents(0.2, 0.5, false));
}

TEST_CASE("provenance names") {
    CHECK(to_string(Provenance::closed_form) == "closed_form");
    CHECK(to_string(Provenance::fitted) == "fitted");
}
