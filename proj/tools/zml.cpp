// zml: command-line front end for the zeta moment library.
//
// Every result is one line (a JSON object, or a CSV row) carrying the value,
// its error estimate and a provenance flag. A stats line closes the output.
//
// Exit codes: 0 success, 1 verification failure, 2 usage, 3 desk ceiling, 4 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "zml/error.hpp"
#include "zml/mellin.hpp"
#include "zml/moments.hpp"
#include "zml/rmt_constants.hpp"
#include "zml/sample_cache.hpp"
#include "zml/special_functions.hpp"
#include "zml/tauberian.hpp"

using namespace zml;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kUsage = 2, kDesk = 3, kIo = 4 };

struct RunConfig {
    double tol = 1e-8;
    std::optional<std::string> cache_flag;
    std::string format = "json";
    std::uint64_t seed = 314159;
};

class Output {
public:
    explicit Output(std::string format) : format_(std::move(format)) {}

    void row(const json& r) {
        if (format_ == "json") {
            std::cout << r.dump() << '\n';
            return;
        }
        std::vector<std::string> keys;
        for (const auto& [k, _] : r.items()) keys.push_back(k);
        if (keys != header_) {
            header_ = keys;
            std::cout << join(keys) << '\n';
        }
        std::vector<std::string> cells;
        for (const auto& [_, v] : r.items()) cells.push_back(cell(v));
        std::cout << join(cells) << '\n';
    }

    void stats(const json& s) {
        if (format_ == "json") {
            std::cout << json{{"stats", s}}.dump() << '\n';
            return;
        }
        std::string line = "# stats:";
        for (const auto& [k, v] : s.items()) line += " " + k + "=" + cell(v);
        std::cout << line << '\n';
    }

private:
    static std::string cell(const json& v) {
        if (v.is_number_float()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
            return buf;
        }
        if (v.is_string()) return v.get<std::string>();
        if (v.is_null()) return "";
        return v.dump();
    }
    static std::string join(const std::vector<std::string>& xs) {
        std::string out;
        for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
        return out;
    }

    std::string format_;
    std::vector<std::string> header_;
};

Complex parse_complex(const std::string& text) {
    static const std::regex re(R"(\s*([+-]?[0-9.]+(?:[eE][+-]?[0-9]+)?)?\s*(?:([+-])\s*([0-9.]+(?:[eE][+-]?[0-9]+)?)?\s*[ij])?\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, re) || (!m[1].matched && !m[2].matched))
        throw CLI::ValidationError("--s", "expected a complex number such as 2, 0.6+5i or 1.5-2i, got '" + text + "'");
    const double re_part = m[1].matched ? std::stod(m[1].str()) : 0.0;
    double im_part = 0.0;
    if (m[2].matched) {
        im_part = m[3].matched ? std::stod(m[3].str()) : 1.0;
        if (m[2].str() == "-") im_part = -im_part;
    }
    return {re_part, im_part};
}

json complex_fields(const std::string& prefix, Complex z) {
    return {{prefix + "_re", z.real()}, {prefix + "_im", z.imag()}};
}

// |zeta|^2 at t from the panel interpolant. The error is the sample accuracy
// times the Lebesgue sum plus the gap to the interpolant on the 7 Gauss nodes.
struct Interpolated {
    double value;
    double err;
};

Interpolated interpolate_with_error(SampleCache& cache, double t) {
    const double value = cache.interpolate(t);
    const auto& rule = detail::panel_rule();
    const auto panel = static_cast<std::size_t>(t / cache.grid_step());
    const double y = 2.0 * (t / cache.grid_step() - static_cast<double>(panel)) - 1.0;
    const auto vals = cache.panel_values(panel);
    auto lagrange = [&](bool gauss_only, double& lebesgue) {
        double v = 0.0;
        lebesgue = 0.0;
        for (int i = 0; i < SampleCache::kNodes; ++i) {
            if (gauss_only && rule.wg[i] == 0.0) continue;
            double b = 1.0;
            for (int j = 0; j < SampleCache::kNodes; ++j) {
                if (j == i || (gauss_only && rule.wg[j] == 0.0)) continue;
                b *= (y - rule.x[j]) / (rule.x[i] - rule.x[j]);
            }
            v += b * vals[i];
            lebesgue += std::abs(b);
        }
        return v;
    };
    double leb15 = 0.0, leb7 = 0.0;
    const double v7 = lagrange(true, leb7);
    lagrange(false, leb15);
    return {value, leb15 * cache.zeta_tol() + std::abs(value - v7)};
}

struct Context {
    RunConfig cfg;
    std::optional<std::filesystem::path> cache_path;
    SampleCache cache;
    Output out;
    std::size_t direct_evaluations = 0;
    bool failed = false;
};

void cmd_zeta(Context& ctx, double lo, double hi, double step) {
    if (!(step > 0.0)) throw Error(ErrorCode::DomainError, "--step must be positive");
    if (!(lo >= 0.0)) throw Error(ErrorCode::DomainError, "--from must be non-negative");
    if (hi > kZetaImagCeiling)
        throw Error(ErrorCode::DeskScaleExceeded,
                    "zeta samples are limited to t <= " + std::to_string(static_cast<int>(kZetaImagCeiling)));
    if (hi < lo) return;  // empty range
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = lo + static_cast<double>(i) * step;
        // interpolate only where the grid resolves a quarter of the local oscillation scale
        const double scale = t > 2.0 * kPi * std::exp(1.0) ? 2.0 * kPi / std::log(t / (2.0 * kPi)) : INFINITY;
        json r = {{"t", t}};
        if (ctx.cache.grid_step() <= 0.25 * scale) {
            const auto v = interpolate_with_error(ctx.cache, t);
            r["value"] = v.value;
            r["err"] = v.err;
        } else {
            r["value"] = zeta_sq_critical(t, ctx.cfg.tol);
            r["err"] = ctx.cfg.tol;
            ++ctx.direct_evaluations;
        }
        r["provenance"] = to_string(Provenance::quadrature);
        ctx.out.row(r);
    }
}

void cmd_moment(Context& ctx, int k, double T) {
    const auto m = moment_Ik(ctx.cache, k, T, ctx.cfg.tol);
    ctx.out.row({{"quantity", "I_k"}, {"k", k}, {"T", T}, {"value", m.value}, {"err", m.err},
                 {"provenance", to_string(Provenance::quadrature)}});
}

void cmd_mellin(Context& ctx, int k, Complex s, const std::string& method) {
    MellinEngine engine(ctx.cache);
    std::optional<MomentPolynomial> p4;
    auto emit = [&](const MellinPoint& p) {
        json r = {{"quantity", "Z_k"}, {"k", k}};
        r.update(complex_fields("s", s));
        r["method"] = to_string(p.method);
        r.update(complex_fields("value", p.value));
        r["err"] = p.err;
        r["provenance"] = to_string(p.model_relative ? Provenance::fitted : Provenance::quadrature);
        ctx.out.row(r);
        return p;
    };
    auto continued = [&]() {
        if (k == 1) return engine.Z1_continued(s, ctx.cfg.tol);
        if (k == 2) {
            if (!p4) p4 = p4_polynomial(ctx.cache, 50.0, desk_ceiling(2), 40);
            return engine.Z2_continued(s, *p4, ctx.cfg.tol);
        }
        throw Error(ErrorCode::DomainError, "continued values exist for k = 1 and k = 2 only");
    };
    if (method == "direct") {
        emit(engine.Z_direct(k, s, ctx.cfg.tol));
    } else if (method == "continued") {
        emit(continued());
    } else {
        const auto d = emit(engine.Z_direct(k, s, ctx.cfg.tol));
        const auto c = emit(continued());
        const double diff = std::abs(d.value - c.value);
        const bool ok = diff <= d.err + c.err;
        ctx.out.row({{"quantity", "method_difference"}, {"k", k}, {"value", diff}, {"err", d.err + c.err},
                     {"provenance", to_string(c.model_relative ? Provenance::fitted : Provenance::quadrature)},
                     {"consistent", ok}});
        ctx.failed = ctx.failed || !ok;
    }
}

void cmd_laplace(Context& ctx, int k, double sigma) {
    const auto L = laplace_Lk(ctx.cache, k, sigma, ctx.cfg.tol);
    ctx.out.row({{"quantity", "L_k"}, {"k", k}, {"sigma", sigma}, {"value", L.value}, {"err", L.err},
                 {"provenance", to_string(Provenance::quadrature)},
                 {"cutoff_x", laplace_cutoff(k, sigma, ctx.cfg.tol)}});
}

void cmd_constants(Context& ctx, int k, std::uint64_t cutoff) {
    // a_1 = 1 and a_2 = 6/pi^2 are closed forms; higher a_k are truncated Euler products
    const auto prov = to_string(k <= 2 ? Provenance::closed_form : Provenance::quadrature);
    const auto a = a_k(k, cutoff);
    const auto g = g_k(k);
    const auto c = c_k(k, cutoff);
    ctx.out.row({{"quantity", "a_k"}, {"k", k}, {"prime_cutoff", cutoff}, {"value", a.value},
                 {"err", a.tail_bound}, {"provenance", prov}});
    ctx.out.row({{"quantity", "g_k"}, {"k", k}, {"prime_cutoff", cutoff}, {"value", g.value()}, {"err", 0.0},
                 {"provenance", to_string(Provenance::closed_form)}});
    ctx.out.row({{"quantity", "c_k"}, {"k", k}, {"prime_cutoff", cutoff}, {"value", c.value},
                 {"err", c.tail_bound}, {"provenance", prov}});
}

void cmd_tauberian(Context& ctx, int k, double lo, double hi, int points) {
    if (k != 1 && k != 2) throw Error(ErrorCode::DomainError, "--k must be 1 or 2");
    if (hi > desk_ceiling(k))
        throw Error(ErrorCode::DeskScaleExceeded, "I_" + std::to_string(k) + " is limited to x <= " +
                                                      std::to_string(static_cast<int>(desk_ceiling(k))));
    ctx.cache.ensure(hi);
    auto F = [&](double x) { return cumulative_moment(ctx.cache, k, x).value; };
    const auto e = estimate_leading({F, k * k, log_grid(lo, hi, points)});
    ctx.out.row({{"quantity", "leading_coefficient"}, {"k", k}, {"M", k * k}, {"value", e.gamma_M_over_Mfact},
                 {"err", e.convergence_diagnostic}, {"provenance", to_string(Provenance::fitted)},
                 {"window_lo", e.window_lo}, {"window_hi", e.window_hi}});
}

void emit_identity(Context& ctx, const std::string& name, const IdentityCheck& r, json extra = json::object()) {
    json row = {{"identity", name}};
    row.update(extra);
    row.update(complex_fields("lhs", r.lhs));
    row["lhs_err"] = r.lhs_err;
    row.update(complex_fields("rhs", r.rhs));
    row["rhs_err"] = r.rhs_err;
    row["value"] = r.defect;
    row["err"] = r.combined_err();
    row["provenance"] = to_string(Provenance::quadrature);
    row["holds"] = r.holds();
    ctx.out.row(row);
    ctx.failed = ctx.failed || !r.holds();
}

struct VerifyParams {
    std::string name;
    std::string s = "3";
    double X = 400.0;
    double T = 50.0;
    double c = 1.5;
    double span = 20.0;
    double radius = 0.25;
    int cases = 10;
};

void cmd_verify(Context& ctx, const VerifyParams& p) {
    const double tol = ctx.cfg.tol;
    if (p.name == "convolution-identity") {
        emit_identity(ctx, p.name, verify_convolution_identity([](double) { return 1.0; }, 1.0, 2.0, 3.0, 1e-11),
                      {{"case", "constant"}});
        std::mt19937_64 rng(ctx.cfg.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < p.cases; ++i) {
            const double a = 0.2 + 2.0 * u(rng), b = a + 0.3 + 3.0 * u(rng);
            const double c0 = 2.0 * u(rng) - 1.0, c1 = 2.0 * u(rng) - 1.0, c2 = 2.0 * u(rng) - 1.0;
            const int pw = static_cast<int>(u(rng) * 3.0);
            auto f = [=](double x) { return (c0 + c1 * x + c2 * x * x) * std::pow(std::log(x + 1.0), pw); };
            const Complex s(0.5 + 3.0 * u(rng), 10.0 * u(rng) - 5.0);
            emit_identity(ctx, p.name, verify_convolution_identity(f, a, b, s, 1e-9),
                          {{"case", "random-" + std::to_string(i)}});
        }
    } else if (p.name == "square-identity") {
        MellinEngine engine(ctx.cache);
        const Complex s = parse_complex(p.s);
        json extra = complex_fields("s", s);
        extra["X"] = p.X;
        emit_identity(ctx, p.name, verify_square_identity(engine, s, p.X, tol), extra);
    } else if (p.name == "gamma-contour") {
        MellinEngine engine(ctx.cache);
        emit_identity(ctx, p.name, gamma_smoothed_crosscheck(engine, p.T, p.c, p.span, tol),
                      {{"T", p.T}, {"c", p.c}, {"t_span", p.span}});
    } else if (p.name == "pole-structure") {
        const auto r = pole_structure_crosscheck();
        const auto c2 = c_k(2, 100000);
        const auto closed = to_string(Provenance::closed_form);
        ctx.out.row({{"quantity", "A5/4!"}, {"value", r.A5 / 24.0}, {"err", 0.0}, {"provenance", closed}});
        ctx.out.row({{"quantity", "a_42"}, {"value", r.four_factorial_a42 / 24.0}, {"err", 0.0},
                     {"provenance", closed}});
        ctx.out.row({{"quantity", "c_2"}, {"value", r.c2}, {"err", c2.tail_bound},
                     {"provenance", to_string(Provenance::quadrature)}});
        ctx.out.row({{"quantity", "atkinson_A"}, {"value", r.atkinson_A}, {"err", 0.0}, {"provenance", closed}});
        const bool ok = r.max_deviation <= 1e-10;
        ctx.out.row({{"quantity", "max_deviation"}, {"value", r.max_deviation}, {"err", c2.tail_bound},
                     {"provenance", to_string(Provenance::quadrature)}, {"threshold", 1e-10}, {"holds", ok}});
        ctx.failed = ctx.failed || !ok;
    } else if (p.name == "laurent") {
        MellinEngine engine(ctx.cache);
        auto f = [&](Complex s) { return as_evaluated(engine.Z1_continued(s, tol)); };
        const auto lp = laurent_extract(f, 2, p.radius);
        const double expected[] = {0.0, 2.0 * constants().euler_gamma - constants().log_two_pi, 1.0};
        for (int m : {2, 1}) {
            const double dev = std::abs(lp.coeffs.at(m) - expected[m]);
            const bool ok = dev <= lp.errors.at(m);
            json row = {{"quantity", "c_-" + std::to_string(m)}, {"radius", p.radius}};
            row.update(complex_fields("value", lp.coeffs.at(m)));
            row["err"] = lp.errors.at(m);
            row["provenance"] = to_string(Provenance::quadrature);
            row["expected"] = expected[m];
            row["holds"] = ok;
            ctx.out.row(row);
            ctx.failed = ctx.failed || !ok;
        }
    } else {
        throw CLI::ValidationError("verify", "unknown identity '" + p.name +
                                                 "'; choose convolution-identity, square-identity, "
                                                 "gamma-contour, pole-structure or laurent");
    }
}

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::DeskScaleExceeded: return kDesk;
        case ErrorCode::Io: return kIo;
        default: return kUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerics for moments of the Riemann zeta function"};
    app.require_subcommand(1);
    RunConfig cfg;
    app.add_option("--tol", cfg.tol, "absolute tolerance")->check(CLI::PositiveNumber);
    app.add_option("--cache", cfg.cache_flag, "sample cache CSV (ZML_CACHE overrides)");
    app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--seed", cfg.seed, "seed for randomized panels");
    app.fallthrough();

    double z_lo = 0.0, z_hi = 0.0, z_step = 0.1;
    auto* zeta_cmd = app.add_subcommand("zeta", "|zeta(1/2+it)|^2 on a grid of t");
    zeta_cmd->add_option("--from", z_lo)->required();
    zeta_cmd->add_option("--to", z_hi)->required();
    zeta_cmd->add_option("--step", z_step);

    int k = 1;
    double T = 0.0;
    auto* moment_cmd = app.add_subcommand("moment", "I_k(T)");
    moment_cmd->add_option("--k", k)->check(CLI::Range(1, 4));
    moment_cmd->add_option("--T", T)->required();

    std::string s_text = "2", method = "direct";
    auto* mellin_cmd = app.add_subcommand("mellin", "Z_k(s)");
    mellin_cmd->add_option("--k", k)->check(CLI::Range(1, 6));
    mellin_cmd->add_option("--s", s_text, "complex point, e.g. 2 or 0.6+5i");
    mellin_cmd->add_option("--method", method)->check(CLI::IsMember({"direct", "continued", "both"}));

    double sigma = 0.25;
    auto* laplace_cmd = app.add_subcommand("laplace", "L_k(sigma)");
    laplace_cmd->add_option("--k", k)->check(CLI::Range(1, 2));
    laplace_cmd->add_option("--sigma", sigma)->required();

    std::uint64_t cutoff = 100000;
    auto* constants_cmd = app.add_subcommand("constants", "a_k, g_k and c_k");
    constants_cmd->add_option("--k", k)->check(CLI::Range(1, 6));
    constants_cmd->add_option("--cutoff", cutoff);

    double x_lo = 5.0, x_hi = 5000.0;
    int points = 121;
    auto* tauberian_cmd = app.add_subcommand("tauberian", "leading coefficient of I_k from computed data");
    tauberian_cmd->add_option("--k", k)->check(CLI::Range(1, 2));
    tauberian_cmd->add_option("--from", x_lo);
    tauberian_cmd->add_option("--to", x_hi);
    tauberian_cmd->add_option("--points", points);

    VerifyParams vp;
    auto* verify_cmd = app.add_subcommand("verify", "check a named identity");
    verify_cmd->add_option("identity", vp.name)->required();
    verify_cmd->add_option("--s", vp.s);
    verify_cmd->add_option("--X", vp.X);
    verify_cmd->add_option("--T", vp.T);
    verify_cmd->add_option("--c", vp.c);
    verify_cmd->add_option("--span", vp.span);
    verify_cmd->add_option("--radius", vp.radius);
    verify_cmd->add_option("--cases", vp.cases);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    const auto start = std::chrono::steady_clock::now();
    std::optional<Context> ctx;
    try {
        const auto path = SampleCache::resolve_path(cfg.cache_flag);
        ctx.emplace(Context{cfg, path, SampleCache::open(path), Output(cfg.format)});
    } catch (const Error& e) {
        std::cerr << "zml: cannot open cache: " << e.what() << '\n';
        return exit_code(e.code());
    }

    int code = kOk;
    try {
        if (*zeta_cmd) cmd_zeta(*ctx, z_lo, z_hi, z_step);
        if (*moment_cmd) cmd_moment(*ctx, k, T);
        if (*mellin_cmd) cmd_mellin(*ctx, k, parse_complex(s_text), method);
        if (*laplace_cmd) cmd_laplace(*ctx, k, sigma);
        if (*constants_cmd) cmd_constants(*ctx, k, cutoff);
        if (*tauberian_cmd) cmd_tauberian(*ctx, k, x_lo, x_hi, points);
        if (*verify_cmd) cmd_verify(*ctx, vp);
        if (ctx->failed) code = kVerifyFailed;
    } catch (const Error& e) {
        std::cerr << "zml: " << e.what() << '\n';
        code = exit_code(e.code());
    } catch (const CLI::ValidationError& e) {
        std::cerr << "zml: " << e.what() << '\n';
        code = kUsage;
    }

    // keep whatever samples were computed, even after a failure
    try {
        if (ctx->cache_path && ctx->cache.dirty()) ctx->cache.save(*ctx->cache_path);
    } catch (const Error& e) {
        std::cerr << "zml: cannot write cache: " << e.what() << '\n';
        if (code == kOk) code = exit_code(e.code());
    }

    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ctx->out.stats({{"fresh_zeta_evaluations", ctx->cache.fresh_evaluations() + ctx->direct_evaluations},
                    {"cache_panels", ctx->cache.panel_count()},
                    {"cache", ctx->cache_path ? json(ctx->cache_path->string()) : json(nullptr)},
                    {"elapsed_seconds", elapsed},
                    {"exit_code", code}});
    return code;
}
