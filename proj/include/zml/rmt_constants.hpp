#pragma once

#include <cstdint>
#include <vector>

namespace zml {

/// Truncated Euler product for a_k. value already includes the analytic
/// correction for primes above the cutoff; raw_product is the bare product
/// over p <= prime_cutoff.
struct EulerProductResult {
    int k = 1;
    double value = 0.0;
    std::uint64_t prime_cutoff = 0;
    double tail_bound = 0.0;
    double raw_product = 0.0;
};

/// Primes up to n (sieve of Eratosthenes, n <= 10^6).
std::vector<std::uint32_t> primes_up_to(std::uint64_t n);

/// (1 - 1/p)^{k^2} sum_j d_k(p^j)^2 p^{-j}, inner sum truncated once its
/// geometric tail bound drops below 1e-17 of its value.
double local_factor(int k, double p);

/// log of local_factor, accurate for large p where the factor is 1 + O(p^-2).
double log_local_factor(int k, double p);

/// Coefficients b_m, m = 0..max_m, of log of the local factor as a power
/// series in x = 1/p. b_0 = b_1 = 0.
std::vector<double> log_local_factor_series(int k, int max_m);

/// Prime zeta function P(m) = sum_p p^{-m} for integer m >= 2.
double prime_zeta(int m);

EulerProductResult a_k(int k, std::uint64_t prime_cutoff);

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// g_k = (k^2)! prod_{j<k} j!/(j+k)!, exactly.
Rational g_k(int k);

/// c_k = a_k g_k / (k^2)!, with the Euler-product tail bound scaled alike.
EulerProductResult c_k(int k, std::uint64_t prime_cutoff);

}  // namespace zml
