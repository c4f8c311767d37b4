#include "zml/special_functions.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "zml/error.hpp"

namespace zml {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxOrder = 120;
constexpr int kMaxTerms = 200000;

// B_{2j}/(2j)! = (-1)^{j+1} 2 zeta(2j) / (2 pi)^{2j}, tabulated for j = 1..kMaxOrder+1.
const std::array<double, kMaxOrder + 2>& bernoulli_ratios() {
    static const std::array<double, kMaxOrder + 2> table = [] {
        std::array<double, kMaxOrder + 2> b{};
        const double two_pi = 2.0 * kPi;
        for (int j = 1; j <= kMaxOrder + 1; ++j) {
            double z = 0.0;
            const double pi2 = kPi * kPi;
            if (j == 1) {
                z = pi2 / 6.0;
            } else if (j == 2) {
                z = pi2 * pi2 / 90.0;
            } else if (j == 3) {
                z = pi2 * pi2 * pi2 / 945.0;
            } else if (j == 4) {
                z = pi2 * pi2 * pi2 * pi2 / 9450.0;
            } else {
                // zeta(2j) - 1 is below 2^{-2j+1}; a short sum is enough
                for (int n = 60; n >= 2; --n) z += std::pow(static_cast<double>(n), -2.0 * j);
                z += 1.0;
            }
            const double mag = 2.0 * z * std::exp(-2.0 * j * std::log(two_pi));
            b[j] = (j % 2 == 1) ? mag : -mag;
        }
        return b;
    }();
    return table;
}

constexpr double kSplitter = 134217729.0;  // 2^27 + 1

// log(n) as hi + lo doubles (hi further split for exact products), and n^{-1/2}.
class LogTable {
public:
    LogTable() {
        const std::size_t size = static_cast<std::size_t>(kMaxTerms) + 2;
        hi_.resize(size);
        hi_head_.resize(size);
        hi_tail_.resize(size);
        lo_.resize(size);
        inv_sqrt_.resize(size);
        for (std::size_t i = 1; i < size; ++i) {
            const long double ln = std::log(static_cast<long double>(i));
            hi_[i] = static_cast<double>(ln);
            lo_[i] = static_cast<double>(ln - static_cast<long double>(hi_[i]));
            const double c = kSplitter * hi_[i];
            hi_head_[i] = c - (c - hi_[i]);
            hi_tail_[i] = hi_[i] - hi_head_[i];
            inv_sqrt_[i] = 1.0 / std::sqrt(static_cast<double>(i));
        }
    }
    const double* hi() const { return hi_.data(); }
    const double* hi_head() const { return hi_head_.data(); }
    const double* hi_tail() const { return hi_tail_.data(); }
    const double* lo() const { return lo_.data(); }
    const double* inv_sqrt() const { return inv_sqrt_.data(); }

private:
    std::vector<double> hi_, hi_head_, hi_tail_, lo_, inv_sqrt_;
};

const LogTable& log_table() {
    static const LogTable table;
    return table;
}

// Cody-Waite split of 2 pi: the first two parts carry 30 bits each, so
// turns * part is exact for turns < 2^23.
constexpr double kTwoPi1 = 6.283185303211212;
constexpr double kTwoPi2 = 3.9683743166540886e-09;
constexpr double kTwoPi3 = 2.068073192717642e-18;
constexpr double kInvTwoPi = 0.15915494309189535;
constexpr double kRoundMagic = 6755399441055744.0;  // 1.5 * 2^52

/// Splits t for exact products against the tabulated log heads and tails.
struct PhaseMultiplier {
    explicit PhaseMultiplier(double t) : t(t) {
        const double c = kSplitter * t;
        head = c - (c - t);
        tail = t - head;
    }
    double t, head, tail;
};

// t log(n) reduced to about [-pi, pi], absolute error a few ulps of pi for |t| <= 1e5
inline double reduced_phase(const PhaseMultiplier& m, double log_hi, double log_head,
                            double log_tail, double log_lo) {
    const double p = m.t * log_hi;
    const double p_err = ((m.head * log_head - p) + m.head * log_tail + m.tail * log_head) +
                         m.tail * log_tail;
    const double turns = (p * kInvTwoPi + kRoundMagic) - kRoundMagic;
    const double r = (p - turns * kTwoPi1) - turns * kTwoPi2;
    return r + (p_err + m.t * log_lo - turns * kTwoPi3);
}

// sin and cos for |x| <= pi + 1e-9: Taylor polynomials on x/4 followed by two
// double-angle steps. Branch-free so the direct sum vectorizes.
inline void small_sincos(double x, double& sin_x, double& cos_x) {
    const double y = 0.25 * x;
    const double y2 = y * y;
    double sp = 1.0 / 355687428096000.0;  // 1/17!
    sp = sp * y2 - 1.0 / 1307674368000.0;
    sp = sp * y2 + 1.0 / 6227020800.0;
    sp = sp * y2 - 1.0 / 39916800.0;
    sp = sp * y2 + 1.0 / 362880.0;
    sp = sp * y2 - 1.0 / 5040.0;
    sp = sp * y2 + 1.0 / 120.0;
    sp = sp * y2 - 1.0 / 6.0;
    const double s1 = y + y * y2 * sp;
    double cp = 1.0 / 6402373705728000.0;  // 1/18!
    cp = cp * y2 - 1.0 / 20922789888000.0;
    cp = cp * y2 + 1.0 / 87178291200.0;
    cp = cp * y2 - 1.0 / 479001600.0;
    cp = cp * y2 + 1.0 / 3628800.0;
    cp = cp * y2 - 1.0 / 40320.0;
    cp = cp * y2 + 1.0 / 720.0;
    cp = cp * y2 - 1.0 / 24.0;
    cp = cp * y2 + 0.5;
    const double c1 = 1.0 - y2 * cp;
    // double angle twice
    const double s2 = 2.0 * s1 * c1;
    const double c2 = (c1 - s1) * (c1 + s1);
    sin_x = 2.0 * s2 * c2;
    cos_x = (c2 - s2) * (c2 + s2);
}

struct Attempt {
    bool ok = false;
    Complex value;
    double bound = 0.0;
    int order = 0;
};

Attempt zeta_attempt(Complex s, int n_terms, double tol) {
    const auto& bern = bernoulli_ratios();
    const double sigma = s.real();
    const double t = s.imag();

    // direct part: sum_{n < N} n^{-s}
    const LogTable& table = log_table();
    const double* log_hi = table.hi();
    const double* log_head = table.hi_head();
    const double* log_tail = table.hi_tail();
    const double* log_lo = table.lo();
    const double* inv_sqrt = table.inv_sqrt();
    const PhaseMultiplier mult(t);
    double re = 0.0;
    double im = 0.0;
    double abs_sum = 0.0;  // sum of |n^{-s}|, drives the rounding bound
    if (sigma == 0.5) {
        for (int n = 1; n < n_terms; ++n) {
            const double phase = reduced_phase(mult, log_hi[n], log_head[n], log_tail[n], log_lo[n]);
            double sin_p, cos_p;
            small_sincos(phase, sin_p, cos_p);
            re += inv_sqrt[n] * cos_p;
            im -= inv_sqrt[n] * sin_p;
            abs_sum += inv_sqrt[n];
        }
    } else {
        for (int n = 1; n < n_terms; ++n) {
            const double phase = reduced_phase(mult, log_hi[n], log_head[n], log_tail[n], log_lo[n]);
            const double mag = std::exp(-sigma * log_hi[n]);
            double sin_p, cos_p;
            small_sincos(phase, sin_p, cos_p);
            re += mag * cos_p;
            im -= mag * sin_p;
            abs_sum += mag;
        }
    }
    Complex sum(re, im);

    const double big_n = static_cast<double>(n_terms);
    const double log_n = std::log(big_n);
    const Complex n_pow = std::exp(-s * log_n);  // N^{-s}
    sum += big_n * n_pow / (s - 1.0) + 0.5 * n_pow;

    // Bernoulli corrections T_j = B_{2j}/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1}, advanced by
    // their ratio so that neither the Pochhammer symbol nor N^{-2j} leaves double range
    const double inv_n2 = 1.0 / (big_n * big_n);
    Complex term = bern[1] * s * n_pow / big_n;
    double prev_mag = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= kMaxOrder; ++j) {
        sum += term;
        // remainder after j terms, bounded by |T_{j+1}| |s+2j+1| / (sigma+2j+1)
        const Complex next = term * (bern[j + 1] / bern[j]) * (s + (2.0 * j - 1.0)) *
                             (s + 2.0 * j) * inv_n2;
        const double next_mag = std::abs(next);
        const double denom = sigma + 2.0 * j + 1.0;
        if (denom > 0.0) {
            const double remainder = next_mag * std::abs(s + (2.0 * j + 1.0)) / denom;
            if (remainder <= 0.5 * tol) {
                Attempt a;
                a.ok = true;
                a.value = sum;
                a.order = j;
                // per-term phase error is a few ulps of pi, summation adds one ulp per term
                const double rounding = 16.0 * kEps * (abs_sum + std::abs(sum) + 1.0);
                a.bound = remainder + rounding;
                return a;
            }
        }
        if (next_mag > prev_mag && j > 2) break;  // asymptotic series has turned
        prev_mag = next_mag;
        term = next;
    }
    return {};
}

}  // namespace

ZetaEvaluation zeta_eval(Complex s, double tol) {
    if (!(tol > 0.0)) throw Error(ErrorCode::DomainError, "zeta tolerance must be positive");
    if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw Error(ErrorCode::DomainError, "zeta argument must be finite");
    if (s == Complex(1.0, 0.0)) throw Error(ErrorCode::PoleAt1, "zeta has a simple pole at s = 1");
    if (std::abs(s.imag()) > kZetaImagCeiling)
        throw Error(ErrorCode::DomainError, "|Im s| exceeds the 1e5 evaluation ceiling");

    int n_terms = std::max(8, static_cast<int>(std::ceil(0.2 * std::abs(s))) + 8);
    // Re s far below zero needs more terms before the Bernoulli tail converges
    if (s.real() < 0.0) n_terms += static_cast<int>(std::ceil(-0.5 * s.real()));
    for (int attempt = 0; attempt < 12 && n_terms <= kMaxTerms; ++attempt) {
        const Attempt a = zeta_attempt(s, n_terms, tol);
        if (a.ok && a.bound <= tol) {
            ZetaEvaluation ev;
            ev.value = a.value;
            ev.accuracy = {tol, a.bound};
            ev.terms = n_terms;
            ev.order = a.order;
            return ev;
        }
        if (a.ok) break;  // truncation met but rounding did not; more terms cannot help
        n_terms = static_cast<int>(std::ceil(n_terms * 1.6));
    }
    throw Error(ErrorCode::AccuracyUnreachable,
                "zeta(" + std::to_string(s.real()) + " + " + std::to_string(s.imag()) +
                    "i) cannot reach tolerance " + std::to_string(tol));
}

double zeta_sq_critical(double t, double tol) {
    if (!(t >= 0.0)) throw Error(ErrorCode::DomainError, "zeta_sq_critical requires t >= 0");
    // |z|^2 error: |z|^2 - |w|^2 <= (2|w| + d) d with d the zeta error
    double ztol = 0.125 * tol;
    ZetaEvaluation ev = zeta_eval(Complex(0.5, t), ztol);
    for (int i = 0; i < 4; ++i) {
        const double mag = std::abs(ev.value);
        const double d = ev.accuracy.achieved_bound;
        if ((2.0 * mag + d) * d <= tol) break;
        ztol = tol / (2.0 * mag + 2.0);
        ev = zeta_eval(Complex(0.5, t), ztol);
    }
    return std::norm(ev.value);
}

double zeta_minus_one(double s) {
    if (!(s >= 2.0)) throw Error(ErrorCode::DomainError, "zeta_minus_one requires real s >= 2");
    const auto& bern = bernoulli_ratios();
    constexpr int n_terms = 16;
    double sum = 0.0;
    for (int n = n_terms - 1; n >= 2; --n) sum += std::pow(static_cast<double>(n), -s);
    const double big_n = n_terms;
    const double n_pow = std::pow(big_n, -s);
    double tail = big_n * n_pow / (s - 1.0) + 0.5 * n_pow;
    double poch = s;
    double n_factor = n_pow / big_n;
    for (int j = 1; j <= 30; ++j) {
        const double term = bern[j] * poch * n_factor;
        tail += term;
        if (std::abs(term) < 1e-18 * tail) break;
        poch *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        n_factor /= big_n * big_n;
    }
    return sum + tail;
}

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

bool is_non_positive_integer(Complex s) {
    return s.imag() == 0.0 && s.real() <= 0.0 && std::floor(s.real()) == s.real();
}

}  // namespace

Complex log_gamma(Complex s) {
    if (s.real() < 0.5) throw Error(ErrorCode::DomainError, "log_gamma requires Re s >= 1/2");
    const Complex z = s - 1.0;
    Complex acc = kLanczosCoeffs[0];
    for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i)
        acc += kLanczosCoeffs[i] / (z + static_cast<double>(i));
    const Complex base = z + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(base) - base + std::log(acc);
}

Complex gamma(Complex s) {
    if (is_non_positive_integer(s))
        throw Error(ErrorCode::PoleAtNonPositiveInteger, "gamma has a pole at s = " + std::to_string(s.real()));
    if (s.real() < 0.5) {
        // reflection: Gamma(s) Gamma(1-s) = pi / sin(pi s)
        return kPi / (std::sin(kPi * s) * std::exp(log_gamma(1.0 - s)));
    }
    return std::exp(log_gamma(s));
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 0; i < r; ++i) {
        acc = acc * (n - i);
        acc /= (i + 1);  // exact: acc is C(n, i+1) * (i+1)! / (i+1)! at every step
        if (acc > std::numeric_limits<std::uint64_t>::max())
            throw Error(ErrorCode::Overflow, "binomial(" + std::to_string(n) + ", " + std::to_string(r) + ")");
    }
    return static_cast<std::uint64_t>(acc);
}

std::uint64_t divisor_dk(unsigned k, std::uint64_t n) {
    if (k < 1 || n < 1) throw Error(ErrorCode::DomainError, "divisor_dk requires k >= 1 and n >= 1");
    std::uint64_t result = 1;
    auto fold = [&](unsigned exponent) {
        const std::uint64_t local = binomial(exponent + k - 1, k - 1);
        std::uint64_t next = 0;
        if (__builtin_mul_overflow(result, local, &next))
            throw Error(ErrorCode::Overflow, "d_" + std::to_string(k) + "(" + std::to_string(n) + ")");
        result = next;
    };
    std::uint64_t m = n;
    for (std::uint64_t p = 2; p * p <= m; p += (p == 2 ? 1 : 2)) {
        unsigned a = 0;
        while (m % p == 0) {
            m /= p;
            ++a;
        }
        if (a > 0) fold(a);
    }
    if (m > 1) fold(1);
    return result;
}

double zeta_prime_at_2() {
    // Termwise s-derivative of the Euler-Maclaurin formula at s = 2 with N = 1000.
    constexpr int n_terms = 1000;
    const auto& bern = bernoulli_ratios();
    double direct = 0.0;
    for (int n = n_terms - 1; n >= 2; --n) {
        const double ln = std::log(static_cast<double>(n));
        direct -= ln / (static_cast<double>(n) * n);
    }
    const double s = 2.0;
    const double big_n = n_terms;
    const double log_n = std::log(big_n);
    const double n_pow = std::pow(big_n, -s);
    double tail = -log_n * big_n * n_pow / (s - 1.0) - big_n * n_pow / ((s - 1.0) * (s - 1.0));
    tail += -0.5 * log_n * n_pow;
    double poch = s;
    double dlog_poch = 1.0 / s;
    double n_factor = n_pow / big_n;
    for (int j = 1; j <= 8; ++j) {
        const double term = bern[j] * poch * n_factor;
        tail += term * (dlog_poch - log_n);
        poch *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        dlog_poch += 1.0 / (s + 2.0 * j - 1.0) + 1.0 / (s + 2.0 * j);
        n_factor /= big_n * big_n;
    }
    return direct + tail;
}

const Constants& constants() {
    static const Constants c{0.57721566490153286060651209, 1.83787706640934548356065947,
                             zeta_prime_at_2()};
    return c;
}

}  // namespace zml
