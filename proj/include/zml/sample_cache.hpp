#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zml/quadrature.hpp"
#include "zml/special_functions.hpp"

namespace zml {

/// Persisted samples of |zeta(1/2 + it)|^2 on t >= 0.
///
/// The axis is cut into panels of width grid_step; each panel stores the
/// function at its 15 Gauss-Kronrod nodes, so any integral over whole panels
/// is a weighted sum of cached values with an embedded G7 error estimate.
/// Between nodes the function is represented by the degree-14 interpolant of
/// the panel's samples.
///
/// On disk the cache is CSV: a block of "# key=value" lines (k, grid_step,
/// tol, generator_version, in that order) followed by "t,value" rows with
/// strictly increasing t, printed with 17 significant digits.
class SampleCache {
public:
    static constexpr int kNodes = 15;
    static constexpr int kPower = 1;  // samples are |zeta|^{2k} with k = 1
    static constexpr const char* kGeneratorVersion = "zml-1.0";
    static constexpr double kDefaultGridStep = 0.125;
    static constexpr double kDefaultZetaTol = 1e-9;

    explicit SampleCache(double grid_step = kDefaultGridStep, double zeta_tol = kDefaultZetaTol);

    double grid_step() const { return grid_step_; }
    /// Absolute accuracy of every stored |zeta|^2 sample.
    double zeta_tol() const { return zeta_tol_; }
    std::size_t panel_count() const { return values_.size() / kNodes; }
    double covered_up_to() const { return static_cast<double>(panel_count()) * grid_step_; }

    /// Extends the cache with fresh evaluations so that it covers [0, t_max].
    void ensure(double t_max);

    double panel_start(std::size_t panel) const { return static_cast<double>(panel) * grid_step_; }
    double node_t(std::size_t panel, int j) const;
    std::span<const double> panel_values(std::size_t panel) const {
        return {values_.data() + panel * kNodes, static_cast<std::size_t>(kNodes)};
    }

    /// Number of zeta evaluations this object has performed itself.
    std::size_t fresh_evaluations() const { return fresh_evaluations_; }
    /// Panels added since construction or the last save/load.
    bool dirty() const { return dirty_; }

    /// Degree-14 interpolant of the panel containing t (extends coverage).
    double interpolate(double t);

    /// int_{panel start}^{t} of the panel interpolant of |zeta|^{2k}.
    double partial_panel_integral(std::size_t panel, double t, int k) const;

    /// Cumulative int_0^{t} |zeta|^{2k} at every node, plus at panel ends.
    /// Values for the same k are memoised until the cache grows.
    const std::vector<double>& node_cumulative(int k);
    const std::vector<double>& boundary_cumulative(int k);
    /// Sum of panel error estimates up to each boundary, matching boundary_cumulative.
    const std::vector<double>& boundary_cumulative_err(int k);

    void save(const std::filesystem::path& path);
    static SampleCache load(const std::filesystem::path& path);
    /// Loads path if it exists and matches the requested grid, otherwise starts empty.
    static SampleCache open(const std::optional<std::filesystem::path>& path,
                            double grid_step = kDefaultGridStep, double zeta_tol = kDefaultZetaTol);

    /// $ZML_CACHE when set (it overrides the flag), else the flag value.
    static std::optional<std::filesystem::path> resolve_path(const std::optional<std::string>& flag);

private:
    void build_cumulative(int k);

    double grid_step_;
    double zeta_tol_;
    std::vector<double> values_;
    std::size_t fresh_evaluations_ = 0;
    bool dirty_ = false;
    struct Cumulative {
        std::size_t panels = 0;
        std::vector<double> nodes, boundaries, boundary_err;
    };
    std::array<Cumulative, 5> cumulative_{};
};

namespace detail {

struct PanelRule {
    std::array<double, 15> x;   // ordered nodes on [-1, 1]
    std::array<double, 15> wk;  // Kronrod weights
    std::array<double, 15> wg;  // Gauss weights (zero at Kronrod-only nodes)
};

const PanelRule& panel_rule();

// Neumaier compensated sum over panel contributions
template <class Value>
struct CompensatedSum {
    Value sum{};
    Value comp{};
    static void step(double& s, double& c, double v) {
        const double t = s + v;
        c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    void add(double v) { step(sum, comp, v); }
    void add(const Complex& v) {
        double sr = sum.real(), si = sum.imag(), cr = comp.real(), ci = comp.imag();
        step(sr, cr, v.real());
        step(si, ci, v.imag());
        sum = {sr, si};
        comp = {cr, ci};
    }
    Value value() const { return sum + comp; }
};

}  // namespace detail

/// Integral over cached panels [p_lo, p_hi) of g(t, |zeta(1/2+it)|^2), with
/// error = sum |K15 - G7| + the propagated sample error via sensitivity(t, z),
/// an upper bound for |dg/dz|.
template <class G, class S>
auto integrate_cached_panels(SampleCache& cache, std::size_t p_lo, std::size_t p_hi, G&& g,
                             S&& sensitivity) -> QuadResult<std::decay_t<decltype(g(0.0, 0.0))>> {
    using Value = std::decay_t<decltype(g(0.0, 0.0))>;
    const auto& rule = detail::panel_rule();
    cache.ensure(static_cast<double>(p_hi) * cache.grid_step());
    const double half = 0.5 * cache.grid_step();
    detail::CompensatedSum<Value> total;
    double err = 0.0;
    double sample_err = 0.0;
    for (std::size_t p = p_lo; p < p_hi; ++p) {
        const auto vals = cache.panel_values(p);
        Value kron{};
        Value gauss{};
        for (int j = 0; j < SampleCache::kNodes; ++j) {
            const double t = cache.node_t(p, j);
            const Value v = g(t, vals[j]);
            kron += rule.wk[j] * v;
            gauss += rule.wg[j] * v;
            sample_err += rule.wk[j] * sensitivity(t, vals[j]);
        }
        total.add(half * kron);
        err += half * std::abs(kron - gauss);
    }
    QuadResult<Value> r;
    r.value = total.value();
    r.err_estimate = err + half * sample_err * cache.zeta_tol();
    r.evaluations = (p_hi - p_lo) * SampleCache::kNodes;
    return r;
}

/// int_a^b g(t, |zeta(1/2+it)|^2) dt: whole panels from the cache, the ragged
/// ends adaptively with fresh zeta evaluations.
template <class G, class S>
auto integrate_cached(SampleCache& cache, double a, double b, G&& g, S&& sensitivity, double tol)
    -> QuadResult<std::decay_t<decltype(g(0.0, 0.0))>> {
    using Value = std::decay_t<decltype(g(0.0, 0.0))>;
    if (!(a >= 0.0) || !(a < b)) throw Error(ErrorCode::DomainError, "cached integration requires 0 <= a < b");
    const double h = cache.grid_step();
    const auto p_lo = static_cast<std::size_t>(std::ceil(a / h));
    const auto p_hi = static_cast<std::size_t>(std::floor(b / h));
    const double ztol = cache.zeta_tol();
    double max_sens = 0.0;  // largest sensitivity seen by fresh evaluations
    auto direct = [&](double t) -> Value {
        const double z = zeta_sq_critical(t, ztol);
        max_sens = std::max(max_sens, static_cast<double>(sensitivity(t, z)));
        return g(t, z);
    };
    QuadOptions opts;
    opts.max_panel_width = h;

    QuadResult<Value> r;
    if (p_lo >= p_hi) {
        r = integrate_adaptive(direct, a, b, tol, opts);
        r.err_estimate += (b - a) * max_sens * ztol;
        return r;
    }
    r = integrate_cached_panels(cache, p_lo, p_hi, g, sensitivity);
    const double left_end = static_cast<double>(p_lo) * h;
    const double right_start = static_cast<double>(p_hi) * h;
    auto add_piece = [&](double lo, double hi) {
        if (!(hi > lo)) return;
        max_sens = 0.0;
        auto piece = integrate_adaptive(direct, lo, hi, 0.25 * tol, opts);
        r.value += piece.value;
        r.err_estimate += piece.err_estimate + (hi - lo) * max_sens * ztol;
        r.evaluations += piece.evaluations;
        r.budget_exhausted = r.budget_exhausted || piece.budget_exhausted;
    };
    add_piece(a, left_end);
    add_piece(right_start, b);
    return r;
}

}  // namespace zml
