#include "zml/quadrature.hpp"

#include <cmath>

namespace zml {

std::vector<std::pair<double, double>> gauss_legendre(int n) {
    if (n < 1) throw Error(ErrorCode::DomainError, "Gauss-Legendre order must be positive");
    std::vector<std::pair<double, double>> rule(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule[static_cast<std::size_t>(i)] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return rule;
}

double power_log_tail(double a, int q, double x) {
    if (!(a > 0.0) || q < 0 || !(x >= 1.0))
        throw Error(ErrorCode::DomainError, "power_log_tail requires a > 0, q >= 0, X >= 1");
    // u = log x: int_L^inf e^{-a u} u^q du = e^{-aL} sum_j q!/(q-j)! L^{q-j} / a^{j+1}
    const double log_x = std::log(x);
    double sum = 0.0;
    double falling = 1.0;  // q!/(q-j)!
    for (int j = 0; j <= q; ++j) {
        sum += falling * std::pow(log_x, q - j) / std::pow(a, j + 1);
        falling *= static_cast<double>(q - j);
    }
    return std::exp(-a * log_x) * sum;
}

double tail_bound(const TailPolicy& policy, double sigma) {
    if (!(sigma > policy.growth_exponent))
        throw Error(ErrorCode::NotAbsolutelyConvergent, "tail bound needs sigma above the growth exponent");
    const double c = policy.scale * policy.safety;
    return sigma * c * power_log_tail(sigma - policy.growth_exponent, policy.log_power, policy.cutoff);
}

}  // namespace zml
