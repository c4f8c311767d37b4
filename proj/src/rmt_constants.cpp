#include "zml/rmt_constants.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "zml/error.hpp"
#include "zml/special_functions.hpp"

namespace zml {

namespace {

void check_k(int k) {
    if (k < 1 || k > 6) throw Error(ErrorCode::DomainError, "moment constants are implemented for 1 <= k <= 6");
}

constexpr std::uint64_t kSieveLimit = 1000000;

}  // namespace

std::vector<std::uint32_t> primes_up_to(std::uint64_t n) {
    if (n > kSieveLimit) throw Error(ErrorCode::DomainError, "prime sieve is limited to 10^6");
    std::vector<bool> composite(n + 1, false);
    std::vector<std::uint32_t> primes;
    for (std::uint64_t i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        primes.push_back(static_cast<std::uint32_t>(i));
        for (std::uint64_t j = i * i; j <= n; j += i) composite[j] = true;
    }
    return primes;
}

namespace {

// sum_{j>=1} d_k(p^j)^2 x^j, truncated by the geometric tail bound
double inner_sum_minus_one(int k, double x) {
    double sum = 0.0;
    for (int j = 1; j < 10000; ++j) {
        const double d = static_cast<double>(binomial(static_cast<std::uint64_t>(j + k - 1),
                                                      static_cast<std::uint64_t>(k - 1)));
        const double term = d * d * std::pow(x, j);
        sum += term;
        // later terms shrink by at most ((j+1+k)/(j+2))^2 x each
        const double ratio = std::pow((j + 1.0 + k) / (j + 2.0), 2) * x;
        if (ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-17 * sum) break;
    }
    return sum;
}

}  // namespace

double local_factor(int k, double p) { return std::exp(log_local_factor(k, p)); }

double log_local_factor(int k, double p) {
    check_k(k);
    if (!(p >= 2.0)) throw Error(ErrorCode::DomainError, "local factor needs p >= 2");
    const double x = 1.0 / p;
    return static_cast<double>(k * k) * std::log1p(-x) + std::log1p(inner_sum_minus_one(k, x));
}

std::vector<double> log_local_factor_series(int k, int max_m) {
    check_k(k);
    // The local factor is (1-x)^{(k-1)^2} Q(x) with Q(x) = sum_j C(k-1, j)^2 x^j.
    std::vector<double> q(static_cast<std::size_t>(max_m + 1), 0.0);
    for (int j = 0; j <= k - 1 && j <= max_m; ++j) {
        const double c = static_cast<double>(binomial(static_cast<std::uint64_t>(k - 1), static_cast<std::uint64_t>(j)));
        q[static_cast<std::size_t>(j)] = c * c;
    }
    // log Q by the recurrence m l_m = m q_m - sum_{i<m} i l_i q_{m-i}
    std::vector<double> b(static_cast<std::size_t>(max_m + 1), 0.0);
    for (int m = 1; m <= max_m; ++m) {
        double acc = m * q[static_cast<std::size_t>(m)];
        for (int i = 1; i < m; ++i) acc -= i * b[static_cast<std::size_t>(i)] * q[static_cast<std::size_t>(m - i)];
        b[static_cast<std::size_t>(m)] = acc / m;
    }
    const double e = static_cast<double>((k - 1) * (k - 1));
    for (int m = 1; m <= max_m; ++m) b[static_cast<std::size_t>(m)] -= e / m;
    b[1] = 0.0;  // cancels exactly
    return b;
}

double prime_zeta(int m) {
    if (m < 2) throw Error(ErrorCode::DomainError, "prime zeta is implemented for integer m >= 2");
    // P(m) = sum_n mu(n)/n log zeta(n m)
    double sum = 0.0;
    for (int n = 1; n * m <= 80; ++n) {
        int mu = 1;
        int r = n;
        for (int q = 2; q * q <= r; ++q) {
            if (r % q != 0) continue;
            r /= q;
            if (r % q == 0) {
                mu = 0;
                break;
            }
            mu = -mu;
        }
        if (mu == 0) continue;
        if (r > 1) mu = -mu;
        sum += mu * std::log1p(zeta_minus_one(static_cast<double>(n * m))) / n;
    }
    return sum;
}

EulerProductResult a_k(int k, std::uint64_t prime_cutoff) {
    check_k(k);
    if (prime_cutoff < 100) throw Error(ErrorCode::DomainError, "prime cutoff must be at least 100");
    const auto primes = primes_up_to(prime_cutoff);
    constexpr double eps = std::numeric_limits<double>::epsilon();

    double log_sum = 0.0;
    double abs_sum = 0.0;
    // largest p first so the small terms are not swamped
    for (auto it = primes.rbegin(); it != primes.rend(); ++it) {
        const double l = log_local_factor(k, static_cast<double>(*it));
        log_sum += l;
        abs_sum += std::abs(l) + 2.0 * static_cast<double>(k * k) / *it;
    }

    // sum_{p > cutoff} log F(1/p) = sum_m b_m P_{>cutoff}(m); m = 2, 3 exactly, the rest bounded
    constexpr int kMaxM = 200;
    const auto b = log_local_factor_series(k, kMaxM);
    double correction = 0.0;
    double correction_err = 0.0;
    for (int m = 2; m <= 3; ++m) {
        double partial = 0.0;
        for (auto it = primes.rbegin(); it != primes.rend(); ++it) partial += std::pow(static_cast<double>(*it), -m);
        const double tail = prime_zeta(m) - partial;
        correction += b[static_cast<std::size_t>(m)] * tail;
        correction_err += std::abs(b[static_cast<std::size_t>(m)]) * 8.0 * eps * (prime_zeta(m) + partial);
    }
    const double P = static_cast<double>(prime_cutoff);
    double remainder = 0.0;
    bool converged = false;
    for (int m = 4; m <= kMaxM; ++m) {
        // sum_{n > P} n^{-m} <= P^{1-m}/(m-1)
        const double term = std::abs(b[static_cast<std::size_t>(m)]) * std::exp((1.0 - m) * std::log(P)) / (m - 1.0);
        if (!std::isfinite(term)) break;
        remainder += term;
        if (m > 8 && term <= 1e-20 * remainder) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(ErrorCode::AccuracyUnreachable, "log local factor series does not converge at this cutoff");

    const double raw = std::exp(log_sum);
    const double log_value = log_sum + correction;
    // abs_sum also covers the inner-sum truncation, 1e-17 relative per prime
    const double log_err = remainder + correction_err + 4.0 * eps * abs_sum;
    EulerProductResult r;
    r.k = k;
    r.prime_cutoff = prime_cutoff;
    r.raw_product = raw;
    r.value = std::exp(log_value);
    r.tail_bound = r.value * std::expm1(log_err) + 2.0 * eps * r.value;
    return r;
}

Rational g_k(int k) {
    check_k(k);
    const int n = k * k + k;
    // exponent of each prime in (k^2)! prod_j j! / (j+k)!
    auto legendre = [](int m, int q) {
        int e = 0;
        for (long long qq = q; qq <= m; qq *= q) e += static_cast<int>(m / qq);
        return e;
    };
    std::map<int, int> exps;
    for (int q = 2; q <= n; ++q) {
        bool prime = true;
        for (int d = 2; d * d <= q; ++d)
            if (q % d == 0) prime = false;
        if (!prime) continue;
        int e = legendre(k * k, q);
        for (int j = 0; j < k; ++j) e += legendre(j, q) - legendre(j + k, q);
        exps[q] = e;
    }
    Rational r{1, 1};
    for (const auto& [q, e] : exps) {
        std::uint64_t& target = e >= 0 ? r.num : r.den;
        for (int i = 0; i < std::abs(e); ++i)
            if (__builtin_mul_overflow(target, static_cast<std::uint64_t>(q), &target))
                throw Error(ErrorCode::Overflow, "g_" + std::to_string(k) + " does not fit in 64 bits");
    }
    return r;
}

EulerProductResult c_k(int k, std::uint64_t prime_cutoff) {
    auto r = a_k(k, prime_cutoff);
    const double scale = g_k(k).value() / std::tgamma(static_cast<double>(k * k) + 1.0);
    r.value *= scale;
    r.raw_product *= scale;
    r.tail_bound = r.tail_bound * scale + 4.0 * std::numeric_limits<double>::epsilon() * r.value;
    return r;
}

}  // namespace zml
