#pragma once

#include <complex>
#include <cstdint>

namespace zml {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Requested and achieved absolute accuracy of an evaluation.
struct EvalAccuracy {
    double abs_tol = 0.0;
    double achieved_bound = 0.0;
};

struct ZetaEvaluation {
    Complex value;
    EvalAccuracy accuracy;
    int terms = 0;      // N, the number of directly summed terms plus one
    int order = 0;      // number of Bernoulli correction terms used
};

/// Largest |Im s| accepted by zeta().
inline constexpr double kZetaImagCeiling = 1.0e5;

/// Euler-Maclaurin evaluation of zeta(s) with a computed remainder bound.
/// Throws PoleAt1 at s = 1 and AccuracyUnreachable if tol cannot be met.
ZetaEvaluation zeta_eval(Complex s, double tol = 1e-12);

inline Complex zeta(Complex s, double tol = 1e-12) { return zeta_eval(s, tol).value; }

/// |zeta(1/2 + it)|^2 with absolute error at most tol.
double zeta_sq_critical(double t, double tol = 1e-10);

/// zeta(s) - 1 for real s >= 2, accurate to a few ulps relative to the result.
double zeta_minus_one(double s);

/// Gamma function for complex argument, about 14 significant digits.
Complex gamma(Complex s);

/// log Gamma(s) on the principal branch of the Lanczos representation, Re s >= 1/2.
Complex log_gamma(Complex s);

/// Number of ordered factorizations of n into k positive factors. Throws
/// Overflow if the value does not fit in 64 bits.
std::uint64_t divisor_dk(unsigned k, std::uint64_t n);

/// Binomial coefficient with overflow detection.
std::uint64_t binomial(std::uint64_t n, std::uint64_t r);

/// zeta'(2) = -sum_{n>=2} log(n)/n^2.
double zeta_prime_at_2();

struct Constants {
    double euler_gamma;
    double log_two_pi;
    double zeta_prime_at_2;
};

const Constants& constants();

}  // namespace zml
