#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "zml/error.hpp"
#include "zml/mellin.hpp"

using namespace zml;
using zml::test::shared_cache;

namespace {

MellinEngine& engine() {
    static MellinEngine e(shared_cache(5000.0));
    return e;
}

const MomentPolynomial& p4() {
    static const MomentPolynomial p = p4_polynomial(shared_cache(5000.0), 50.0, 2000.0, 40);
    return p;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;
}

}  // namespace

TEST_CASE("convergence abscissa") {
    CHECK(convergence_abscissa(1) == 1.0);
    CHECK(convergence_abscissa(2) == 1.0);
    CHECK(convergence_abscissa(3) == 1.25);
    CHECK(convergence_abscissa(6) == 2.0);
}

TEST_CASE("Z_direct at real s") {
    auto& e = engine();
    const auto z = e.Z_direct(1, 3.0);
    CHECK(z.method == MellinMethod::direct);
    CHECK(z.value.real() > 0.0);
    CHECK(std::abs(z.value.imag()) <= z.err);
    CHECK_FALSE(z.model_relative);
}

TEST_CASE("Z_direct(1, 2) against a fixed-grid oracle to 10^4") {
    auto& e = engine();
    const auto z = e.Z_direct(1, 2.0);
    // composite Simpson with fresh zeta values, then the same kind of tail bound from 10^4
    const int n = 400000;
    const double X = 1e4, h = (X - 1.0) / n;
    auto f = [](double x) { return zeta_sq_critical(x, 1e-9) / (x * x); };
    double acc = f(1.0) + f(X);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(1.0 + i * h);
    const double grid = acc * h / 3.0;
    TailPolicy tail;
    tail.growth_exponent = 1.0;
    tail.log_power = 1;
    tail.scale = 1.0;
    tail.safety = 2.0;
    tail.cutoff = X;
    const double grid_err = tail_bound(tail, 2.0) + 1e-6;
    MESSAGE("Z_1(2): direct " << z.value.real() << " +- " << z.err << ", grid " << grid << " +- " << grid_err);
    CHECK(std::abs(z.value - grid) <= z.err + grid_err);
}

TEST_CASE("conjugate symmetry") {
    auto& e = engine();
    for (Complex s : {Complex(2.0, 3.0), Complex(1.6, -7.0)}) {
        const auto a = e.Z_direct(1, s), b = e.Z_direct(1, std::conj(s));
        CHECK(std::abs(a.value - std::conj(b.value)) <= 1e-12 * std::abs(a.value));
        const auto c = e.Z1_continued(s), d = e.Z1_continued(std::conj(s));
        CHECK(std::abs(c.value - std::conj(d.value)) <= 1e-12 * std::abs(c.value));
        const auto f = e.Z2_continued(s, p4()), g = e.Z2_continued(std::conj(s), p4());
        CHECK(std::abs(f.value - std::conj(g.value)) <= 1e-12 * std::abs(f.value));
        const auto u = e.Z_direct(2, s), v = e.Z_direct(2, std::conj(s));
        CHECK(std::abs(u.value - std::conj(v.value)) <= 1e-12 * std::abs(u.value));
    }
}

TEST_CASE("Z_direct preconditions") {
    auto& e = engine();
    CHECK(code_of([&] { e.Z_direct(1, 1.1); }) == ErrorCode::NotAbsolutelyConvergent);
    CHECK(code_of([&] { e.Z_direct(3, 1.4); }) == ErrorCode::NotAbsolutelyConvergent);
    CHECK(code_of([&] { e.Z_direct(5, 3.0); }) == ErrorCode::DeskScaleExceeded);
    CHECK_NOTHROW(e.Z_direct(3, 1.6));
}

TEST_CASE("continuation agrees with the direct integral") {
    auto& e = engine();
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> re(1.5, 3.0), im(-20.0, 20.0);
    for (int i = 0; i < 10; ++i) {
        const Complex s(re(rng), im(rng));
        const auto d = e.Z_direct(1, s);
        const auto c = e.Z1_continued(s);
        CHECK(c.method == MellinMethod::continued);
        CHECK(std::abs(d.value - c.value) <= d.err + c.err);
    }
    const auto d2 = e.Z_direct(1, 2.0), c2 = e.Z1_continued(2.0);
    CHECK(std::abs(d2.value - c2.value) <= d2.err + c2.err);
}

TEST_CASE("Z1_continued inside the critical strip") {
    auto& e = engine();
    const Complex s(0.6, 5.0);
    const auto z = e.Z1_continued(s);
    CHECK(std::isfinite(z.value.real()));
    CHECK(std::isfinite(z.err));
    MESSAGE("Z_1(0.6 + 5i) = " << z.value << " +- " << z.err);

    // the same continuation truncated at half the range
    MellinOptions half;
    half.continuation_X1 = 2500.0;
    MellinEngine short_engine(e.cache(), half);
    const auto h = short_engine.Z1_continued(s);
    CHECK(std::abs(z.value - h.value) <= z.err + h.err);

    // regression lock from the first verified run; the reported err is the
    // mean-square tail bound and is far wider than the X = 2500 / 5000 spread
    CHECK(std::abs(z.value - Complex(-0.36715779319255626, 0.31922368978214632)) <= 1e-9);
    CHECK(std::abs(z.value - h.value) <= 0.1);
}

TEST_CASE("Z1_continued double pole at s = 1") {
    auto& e = engine();
    double f[3], err[3];
    const double h[3] = {0.1, 0.05, 0.025};
    for (int i = 0; i < 3; ++i) {
        const auto z = e.Z1_continued(1.0 + h[i]);
        f[i] = (h[i] * h[i] * z.value).real();
        err[i] = h[i] * h[i] * z.err;
    }
    // f(h) = 1 + c1 h + c2 h^2 + ...: two Richardson steps
    const double r1a = 2.0 * f[1] - f[0], r1b = 2.0 * f[2] - f[1];
    const double r2 = (4.0 * r1b - r1a) / 3.0;
    const double r2_err = (4.0 * (2.0 * err[2] + err[1]) + (2.0 * err[1] + err[0])) / 3.0;
    MESSAGE("Richardson estimate of the double-pole coefficient: " << r2 << " +- " << r2_err);
    CHECK(std::abs(r2 - 1.0) <= 1e-3 + r2_err);
}

TEST_CASE("Z1_continued preconditions") {
    auto& e = engine();
    CHECK(code_of([&] { e.Z1_continued(1.0); }) == ErrorCode::PoleAt1);
    CHECK(code_of([&] { e.Z1_continued(Complex(0.29, 3.0)); }) == ErrorCode::TooCloseToAbscissa);
    CHECK(code_of([&] { e.Z2_continued(Complex(0.54, 3.0), p4()); }) == ErrorCode::TooCloseToAbscissa);
    CHECK(code_of([&] { e.Z2_continued(1.0, p4()); }) == ErrorCode::PoleAt1);
    CHECK(code_of([&] { e.Z2_continued(2.0, p1_polynomial()); }) == ErrorCode::DomainError);
}

TEST_CASE("Z2_continued") {
    auto& e = engine();
    const auto c = e.Z2_continued(2.0, p4());
    const auto d = e.Z_direct(2, 2.0);
    CHECK(c.model_relative);
    MESSAGE("Z_2(2): continued " << c.value.real() << " +- " << c.err << ", direct " << d.value.real() << " +- "
                                 << d.err);
    CHECK(std::abs(c.value - d.value) <= c.err + d.err);

    // order-5 pole at s = 1 with leading coefficient 12/pi^2; loose by design
    const auto z = e.Z2_continued(1.2, p4());
    const double lead = std::pow(0.2, 5) * z.value.real();
    MESSAGE("(s-1)^5 Z_2(s) at s = 1.2: " << lead);
    CHECK(std::abs(lead - 12.0 / (kPi * kPi)) <= 0.5 * 12.0 / (kPi * kPi));
}

TEST_CASE("Laurent extraction on a synthetic function") {
    auto f = [](Complex s) { return Evaluated{1.0 / ((s - 1.0) * (s - 1.0)) + 3.0 / (s - 1.0), 0.0, 0.0}; };
    const auto lp = laurent_extract(f, 2, 0.25);
    CHECK(std::abs(lp.coeffs.at(2) - 1.0) <= 1e-10);
    CHECK(std::abs(lp.coeffs.at(1) - 3.0) <= 1e-10);

    // analytic part added: still exact
    auto g = [](Complex s) { return Evaluated{1.0 / ((s - 1.0) * (s - 1.0)) + 3.0 / (s - 1.0) + std::exp(s), 0.0, 0.0}; };
    const auto lg = laurent_extract(g, 3, 0.2);
    CHECK(std::abs(lg.coeffs.at(3)) <= lg.errors.at(3) + 1e-12);
    CHECK(std::abs(lg.coeffs.at(2) - 1.0) <= lg.errors.at(2) + 1e-12);
    CHECK(std::abs(lg.coeffs.at(1) - 3.0) <= lg.errors.at(1) + 1e-12);

    // no pole at all
    auto h = [](Complex s) { return Evaluated{std::sin(s) / (s + 2.0), 1e-9, 0.0}; };
    const auto lh = laurent_extract(h, 4, 0.3);
    for (int m = 1; m <= 4; ++m) CHECK(std::abs(lh.coeffs.at(m)) <= lh.errors.at(m));
    CHECK(lh.center == Complex(1.0, 0.0));

    CHECK_THROWS_AS(laurent_extract(f, 6, 0.25), Error);
    CHECK_THROWS_AS(laurent_extract(f, 2, 0.8), Error);
    CHECK_THROWS_AS(laurent_extract(f, 2, 0.25, 32), Error);
}

TEST_CASE("Laurent coefficients of Z_1 at s = 1") {
    auto& e = engine();
    auto f = [&](Complex s) { return as_evaluated(e.Z1_continued(s)); };
    const auto lp = laurent_extract(f, 2, 0.25);
    const double c1 = 2.0 * constants().euler_gamma - constants().log_two_pi;
    MESSAGE("c_-2 = " << lp.coeffs.at(2) << " +- " << lp.errors.at(2) << ", c_-1 = " << lp.coeffs.at(1) << " +- "
                      << lp.errors.at(1));
    CHECK(std::abs(lp.coeffs.at(2) - 1.0) <= 1e-3);
    CHECK(std::abs(lp.coeffs.at(1) - c1) <= 1e-3);
    CHECK(std::abs(lp.coeffs.at(2) - 1.0) <= lp.errors.at(2));
    CHECK(std::abs(lp.coeffs.at(1) - c1) <= lp.errors.at(1));

    const auto a = laurent_extract(f, 2, 0.15);
    const auto b = laurent_extract(f, 2, 0.3);
    for (int m : {1, 2}) CHECK(std::abs(a.coeffs.at(m) - b.coeffs.at(m)) <= a.errors.at(m) + b.errors.at(m));
}

TEST_CASE("convolution identity") {
    const auto one = verify_convolution_identity([](double) { return 1.0; }, 1.0, 2.0, 3.0, 1e-11);
    CHECK(std::abs(one.lhs - 0.140625) <= 1e-14);
    CHECK(one.defect <= 1e-9);
    CHECK(one.holds());

    const auto lg = verify_convolution_identity([](double x) { return std::log(x); }, 1.0, std::exp(1.0), 2.0, 1e-10);
    CHECK(lg.holds());

    const auto zero = verify_convolution_identity([](double) { return 0.0; }, 0.5, 3.0, Complex(1.0, 2.0), 1e-10);
    CHECK(zero.lhs == Complex(0.0));
    CHECK(zero.rhs == Complex(0.0));

    CHECK_THROWS_AS(verify_convolution_identity([](double) { return 1.0; }, 2.0, 1.0, 3.0, 1e-8), Error);
}

TEST_CASE("convolution identity on a randomized family") {
    std::mt19937_64 rng(314159);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
        const double a = 0.2 + 2.0 * u(rng), b = a + 0.3 + 3.0 * u(rng);
        const double c0 = u(rng) * 2.0 - 1.0, c1 = u(rng) * 2.0 - 1.0, c2 = u(rng) * 2.0 - 1.0;
        const int p = static_cast<int>(u(rng) * 3.0);
        auto f = [=](double x) { return (c0 + c1 * x + c2 * x * x) * std::pow(std::log(x + 1.0), p); };
        const Complex s(0.5 + 3.0 * u(rng), 10.0 * u(rng) - 5.0);
        const auto r = verify_convolution_identity(f, a, b, s, 1e-9);
        CHECK(r.holds());
    }
}

TEST_CASE("square identity") {
    auto& e = engine();
    const auto r = verify_square_identity(e, 3.0, 400.0, 1e-8);
    MESSAGE("square identity at s = 3: defect " << r.defect << ", combined " << r.combined_err());
    CHECK(r.holds());

    const auto p = verify_square_identity(e, Complex(2.5, 1.0), 200.0, 1e-8);
    const auto q = verify_square_identity(e, Complex(2.5, -1.0), 200.0, 1e-8);
    CHECK(std::abs(p.lhs - std::conj(q.lhs)) <= 1e-12 * std::abs(p.lhs));
    CHECK(std::abs(p.rhs - std::conj(q.rhs)) <= 1e-12 * std::abs(p.rhs));
    CHECK(std::abs(p.defect - q.defect) <= 1e-12 * std::abs(p.lhs));

    CHECK(code_of([&] { verify_square_identity(e, 2.0, 400.0, 1e-8); }) == ErrorCode::DeskScaleExceeded);
    CHECK(code_of([&] { verify_square_identity(e, 3.0, 2e4, 1e-8); }) == ErrorCode::DeskScaleExceeded);
}

TEST_CASE("square identity body with g(x) = 1/x") {
    // int_1^inf x^{-1} x^{-s} dx = 1/s, and the truncated body is int_1^X x^{-s-1} log x dx
    for (Complex s : {Complex(3.0, 0.0), Complex(2.5, 1.5)}) {
        const double X = 400.0;
        const auto body = square_identity_body([](double x) { return 1.0 / x; }, s, X, 1e-10, 1.0);
        const Complex lX = std::log(X);
        const Complex closed = (1.0 - std::exp(-s * lX) * (1.0 + s * lX)) / (s * s);
        CHECK(std::abs(body.value - closed) <= body.err_estimate + 1e-12);
        CHECK(std::abs(closed - 1.0 / (s * s)) <= 1e-5);
    }
}

TEST_CASE("gamma contour integral with the constant hook") {
    // |zeta|^2 -> 1: Z(s) = 1/(s - 1) and the smoothed integral is T e^{-1/T}
    const double T = 50.0, c = 1.5;
    auto z = [](Complex s) { return Evaluated{1.0 / (s - 1.0), 0.0, 0.0}; };
    const auto r = gamma_contour_integral(z, T, c, 40.0, 1.0 / (c - 1.0), 1e-10);
    CHECK(std::abs(r.value - T * std::exp(-1.0 / T)) <= r.err_estimate + 1e-10);
    CHECK(r.err_estimate <= 1e-6);
    CHECK(code_of([&] { gamma_contour_integral(z, T, c, 3.0, 2.0, 1e-10); }) == ErrorCode::TruncationNotClosed);
}

TEST_CASE("gamma-smoothed crosscheck") {
    auto& e = engine();
    const auto r = gamma_smoothed_crosscheck(e, 50.0, 1.5, 20.0, 1e-8);
    MESSAGE("gamma crosscheck: lhs " << r.lhs.real() << ", defect " << r.defect << ", combined " << r.combined_err());
    CHECK(r.holds());
    CHECK(code_of([&] { gamma_smoothed_crosscheck(e, 50.0, 1.1, 20.0, 1e-8); }) == ErrorCode::DomainError);
    CHECK(code_of([&] { gamma_smoothed_crosscheck(e, 600.0, 1.5, 20.0, 1e-8); }) == ErrorCode::DeskScaleExceeded);
}

TEST_CASE("mean square of Z_1 on vertical lines") {
    auto& e = engine();
    const auto a = mean_square_Z(e, 1, 0.75, 100.0, 400);
    MESSAGE("int_1^100 |Z_1(0.75+it)|^2 dt = " << a.integral << ", log-log slope " << a.loglog_slope
                                               << " (2 - 2 sigma = 0.5)");
    CHECK(a.integral > 0.0);
    CHECK(std::isfinite(a.loglog_slope));

    const auto c = mean_square_Z(e, 1, 1.5, 50.0, 200);
    CHECK(c.integral > 0.0);
    CHECK(std::isfinite(c.integral));
    const auto d = mean_square_Z(e, 1, 1.5, 50.0, 200);
    CHECK(c.integral == d.integral);
    CHECK(c.loglog_slope == d.loglog_slope);
    CHECK(c.cumulative == d.cumulative);

    CHECK(code_of([&] { mean_square_Z(e, 1, 0.2, 100.0, 400); }) == ErrorCode::TooCloseToAbscissa);
    CHECK(code_of([&] { mean_square_Z(e, 1, 0.75, 300.0, 400); }) == ErrorCode::DeskScaleExceeded);
    CHECK(code_of([&] { mean_square_Z(e, 1, 0.75, 100.0, 100); }) == ErrorCode::DomainError);
}

TEST_CASE("pole structure chain") {
    const auto r = pole_structure_crosscheck();
    CHECK(std::abs(r.A5 - 1.2158542037080532) <= 1e-15);
    CHECK(std::abs(r.four_factorial_a42 - r.A5) <= 1e-15);
    CHECK(r.max_deviation <= 1e-10);
    CHECK(std::abs(r.atkinson_A - 1.0 / (2.0 * kPi * kPi)) <= 1e-16);
}

TEST_CASE("method names") {
    CHECK(to_string(MellinMethod::direct) == "direct");
    CHECK(to_string(MellinMethod::continued) == "continued");
}
