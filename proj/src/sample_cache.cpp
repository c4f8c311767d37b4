#include "zml/sample_cache.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "zml/error.hpp"

namespace zml {

namespace detail {

namespace {

std::array<double, 15> barycentric_weights(const std::array<double, 15>& x) {
    std::array<double, 15> w{};
    for (int j = 0; j < 15; ++j) {
        double prod = 1.0;
        for (int i = 0; i < 15; ++i)
            if (i != j) prod *= (x[j] - x[i]);
        w[j] = 1.0 / prod;
    }
    return w;
}

}  // namespace

const PanelRule& panel_rule() {
    static const PanelRule rule{GaussKronrod15::ordered_nodes(), GaussKronrod15::ordered_kronrod_weights(),
                                GaussKronrod15::ordered_gauss_weights()};
    return rule;
}

struct Interpolation {
    std::array<double, 15> bary;
    // within[j][i] = int_{-1}^{x_j} l_i(x) dx
    std::array<std::array<double, 15>, 15> within;
    std::vector<std::pair<double, double>> gl8;
};

// Lagrange basis values l_i(y) for the ordered Kronrod nodes.
void lagrange_basis(const std::array<double, 15>& x, const std::array<double, 15>& bary, double y,
                    std::array<double, 15>& out) {
    double denom = 0.0;
    for (int i = 0; i < 15; ++i) {
        const double d = y - x[i];
        if (d == 0.0) {
            out.fill(0.0);
            out[i] = 1.0;
            return;
        }
        out[i] = bary[i] / d;
        denom += out[i];
    }
    for (double& v : out) v /= denom;
}

const Interpolation& interpolation() {
    static const Interpolation interp = [] {
        Interpolation it;
        const auto& rule = panel_rule();
        it.bary = barycentric_weights(rule.x);
        it.gl8 = gauss_legendre(8);
        std::array<double, 15> basis{};
        for (int j = 0; j < 15; ++j) {
            it.within[j].fill(0.0);
            const double half = 0.5 * (rule.x[j] + 1.0);
            for (const auto& [node, weight] : it.gl8) {
                const double y = -1.0 + half * (node + 1.0);
                lagrange_basis(rule.x, it.bary, y, basis);
                for (int i = 0; i < 15; ++i) it.within[j][i] += half * weight * basis[i];
            }
        }
        return it;
    }();
    return interp;
}

}  // namespace detail

SampleCache::SampleCache(double grid_step, double zeta_tol) : grid_step_(grid_step), zeta_tol_(zeta_tol) {
    if (!(grid_step > 0.0)) throw Error(ErrorCode::DomainError, "cache grid_step must be positive");
    if (!(zeta_tol > 0.0)) throw Error(ErrorCode::DomainError, "cache tolerance must be positive");
}

double SampleCache::node_t(std::size_t panel, int j) const {
    const auto& rule = detail::panel_rule();
    return (static_cast<double>(panel) + 0.5 * (1.0 + rule.x[j])) * grid_step_;
}

void SampleCache::ensure(double t_max) {
    const auto needed = static_cast<std::size_t>(std::ceil(t_max / grid_step_ - 1e-12));
    if (needed <= panel_count()) return;
    values_.reserve(needed * kNodes);
    for (std::size_t p = panel_count(); p < needed; ++p) {
        for (int j = 0; j < kNodes; ++j) values_.push_back(zeta_sq_critical(node_t(p, j), zeta_tol_));
        fresh_evaluations_ += kNodes;
    }
    dirty_ = true;
}

double SampleCache::interpolate(double t) {
    if (!(t >= 0.0)) throw Error(ErrorCode::DomainError, "interpolation requires t >= 0");
    auto panel = static_cast<std::size_t>(t / grid_step_);
    ensure(static_cast<double>(panel + 1) * grid_step_);
    const auto& rule = detail::panel_rule();
    const auto& interp = detail::interpolation();
    const double y = 2.0 * (t / grid_step_ - static_cast<double>(panel)) - 1.0;
    std::array<double, 15> basis{};
    detail::lagrange_basis(rule.x, interp.bary, y, basis);
    const auto vals = panel_values(panel);
    double v = 0.0;
    for (int i = 0; i < kNodes; ++i) v += basis[i] * vals[i];
    return v;
}

double SampleCache::partial_panel_integral(std::size_t panel, double t, int k) const {
    const auto& rule = detail::panel_rule();
    const auto& interp = detail::interpolation();
    const double tau = 2.0 * (t / grid_step_ - static_cast<double>(panel)) - 1.0;
    if (tau <= -1.0) return 0.0;
    const auto vals = panel_values(panel);
    std::array<double, 15> powered{};
    for (int i = 0; i < kNodes; ++i) powered[i] = std::pow(vals[i], k);
    const double half = 0.5 * (tau + 1.0);
    std::array<double, 15> basis{};
    double acc = 0.0;
    for (const auto& [node, weight] : interp.gl8) {
        const double y = -1.0 + half * (node + 1.0);
        detail::lagrange_basis(rule.x, interp.bary, y, basis);
        double v = 0.0;
        for (int i = 0; i < kNodes; ++i) v += basis[i] * powered[i];
        acc += weight * v;
    }
    return acc * half * 0.5 * grid_step_;
}

void SampleCache::build_cumulative(int k) {
    if (k < 1 || k > 4) throw Error(ErrorCode::DomainError, "cumulative moments are kept for k = 1..4");
    auto& c = cumulative_[k];
    if (c.panels == panel_count() && !c.boundaries.empty()) return;
    const auto& rule = detail::panel_rule();
    const auto& interp = detail::interpolation();
    const std::size_t panels = panel_count();
    const double half = 0.5 * grid_step_;
    c.nodes.assign(panels * kNodes, 0.0);
    c.boundaries.assign(panels + 1, 0.0);
    c.boundary_err.assign(panels + 1, 0.0);
    detail::CompensatedSum<double> running;
    double running_err = 0.0;
    std::array<double, 15> powered{};
    for (std::size_t p = 0; p < panels; ++p) {
        const auto vals = panel_values(p);
        double kron = 0.0;
        double gauss = 0.0;
        double sens = 0.0;
        for (int i = 0; i < kNodes; ++i) {
            powered[i] = std::pow(vals[i], k);
            kron += rule.wk[i] * powered[i];
            gauss += rule.wg[i] * powered[i];
            sens += rule.wk[i] * k * std::pow(vals[i], k - 1);
        }
        for (int j = 0; j < kNodes; ++j) {
            double within = 0.0;
            for (int i = 0; i < kNodes; ++i) within += interp.within[j][i] * powered[i];
            c.nodes[p * kNodes + j] = running.value() + half * within;
        }
        running.add(half * kron);
        running_err += half * (std::abs(kron - gauss) + sens * zeta_tol_);
        c.boundaries[p + 1] = running.value();
        c.boundary_err[p + 1] = running_err;
    }
    c.panels = panels;
}

const std::vector<double>& SampleCache::node_cumulative(int k) {
    build_cumulative(k);
    return cumulative_[k].nodes;
}

const std::vector<double>& SampleCache::boundary_cumulative(int k) {
    build_cumulative(k);
    return cumulative_[k].boundaries;
}

const std::vector<double>& SampleCache::boundary_cumulative_err(int k) {
    build_cumulative(k);
    return cumulative_[k].boundary_err;
}

void SampleCache::save(const std::filesystem::path& path) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::FILE* out = std::fopen(tmp.c_str(), "w");
        if (!out) throw Error(ErrorCode::Io, "cannot write cache file " + tmp.string());
        std::fprintf(out, "# k=%d\n# grid_step=%.17g\n# tol=%.17g\n# generator_version=%s\n", kPower,
                     grid_step_, zeta_tol_, kGeneratorVersion);
        for (std::size_t p = 0; p < panel_count(); ++p) {
            const auto vals = panel_values(p);
            for (int j = 0; j < kNodes; ++j) std::fprintf(out, "%.17g,%.17g\n", node_t(p, j), vals[j]);
        }
        if (std::fclose(out) != 0) throw Error(ErrorCode::Io, "failed to flush cache file " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot move cache into place at " + path.string() + ": " + ec.message());
    dirty_ = false;
}

namespace {

double parse_double(std::string_view text, const std::filesystem::path& path, std::size_t line_no) {
    double v = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": malformed number '" +
                                       std::string(text) + "'");
    return v;
}

}  // namespace

SampleCache SampleCache::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open cache file " + path.string());
    const char* keys[] = {"k", "grid_step", "tol", "generator_version"};
    std::string header_values[4];
    std::string line;
    std::size_t line_no = 0;
    for (int i = 0; i < 4; ++i) {
        if (!std::getline(in, line)) throw Error(ErrorCode::Io, path.string() + ": truncated header");
        ++line_no;
        const std::string prefix = std::string("# ") + keys[i] + "=";
        if (line.rfind(prefix, 0) != 0)
            throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected header key '" +
                                           keys[i] + "'");
        header_values[i] = line.substr(prefix.size());
    }
    if (header_values[0] != std::to_string(kPower))
        throw Error(ErrorCode::Io, path.string() + ": unsupported sample power k=" + header_values[0]);
    SampleCache cache(parse_double(header_values[1], path, 2), parse_double(header_values[2], path, 3));

    std::vector<double> row_values;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": expected 't,value'");
        const double t = parse_double(std::string_view(line).substr(0, comma), path, line_no);
        const double v = parse_double(std::string_view(line).substr(comma + 1), path, line_no);
        const std::size_t index = row_values.size();
        const double expected_t = cache.node_t(index / kNodes, static_cast<int>(index % kNodes));
        if (t != expected_t)
            throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) +
                                           ": t does not match the panel node grid");
        if (!(v >= 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": negative or non-finite value");
        row_values.push_back(v);
    }
    // a trailing partial panel (interrupted write) is dropped
    row_values.resize(row_values.size() / kNodes * kNodes);
    cache.values_ = std::move(row_values);
    cache.dirty_ = false;
    return cache;
}

SampleCache SampleCache::open(const std::optional<std::filesystem::path>& path, double grid_step,
                              double zeta_tol) {
    if (path && std::filesystem::exists(*path)) {
        SampleCache loaded = load(*path);
        if (loaded.grid_step() == grid_step && loaded.zeta_tol() <= zeta_tol) return loaded;
    }
    return SampleCache(grid_step, zeta_tol);
}

std::optional<std::filesystem::path> SampleCache::resolve_path(const std::optional<std::string>& flag) {
    if (const char* env = std::getenv("ZML_CACHE"); env && *env) return std::filesystem::path(env);
    if (flag && !flag->empty()) return std::filesystem::path(*flag);
    return std::nullopt;
}

}  // namespace zml
