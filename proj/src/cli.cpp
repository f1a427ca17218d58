#include "conelab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "conelab/conformal.hpp"
#include "conelab/csv.hpp"
#include "conelab/errors.hpp"
#include "conelab/hypersurface.hpp"
#include "conelab/perron.hpp"
#include "conelab/separation.hpp"
#include "conelab/spectral.hpp"
#include "conelab/strip.hpp"

namespace fs = std::filesystem;

namespace conelab {

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> cmds{"catalog", "spectrum", "exponents", "perron", "strip",
                                               "conformal", "induce", "flatnorm", "report", "plotdata"};
    return cmds;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["cones"] = cones;
    j["lambda"] = lambdas;
    j["eps"] = eps;
    j["grid"] = {{"N", grid_n}, {"r_in", r_in}, {"r_out", r_out}};
    j["seed"] = seed;
    j["catalog"] = catalog_path;
    j["strip_a"] = strip_a;
    j["tau"] = taus;
    j["tolerances"] = tolerances;
    return j;
}

namespace {

template <class T>
T get_as(const nlohmann::json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

std::vector<double> number_list(const nlohmann::json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (v.is_number()) return {v.get<double>()};
    return get_as<std::vector<double>>(doc, key);
}

} // namespace

RunConfig config_from_json(const nlohmann::json& doc, RunConfig base) {
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    static const std::vector<std::string> keys{"command", "cones", "cone", "lambda", "eps", "grid", "seed",
                                               "out", "catalog", "strip_a", "tau", "tolerances"};
    for (const auto& [k, v] : doc.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            throw ConfigError("unknown config key '" + k + "'");
        }
    }
    RunConfig c = std::move(base);
    if (doc.contains("command")) c.command = get_as<std::string>(doc, "command");
    if (doc.contains("cones")) c.cones = get_as<std::vector<std::string>>(doc, "cones");
    if (doc.contains("cone")) c.cones = {get_as<std::string>(doc, "cone")};
    if (doc.contains("lambda")) c.lambdas = number_list(doc, "lambda");
    if (doc.contains("eps")) c.eps = number_list(doc, "eps");
    if (doc.contains("grid")) {
        const auto& g = doc.at("grid");
        if (!g.is_object()) throw ConfigError("config key 'grid' must be an object {N, r_in, r_out}");
        if (g.contains("N")) c.grid_n = get_as<int>(g, "N");
        if (g.contains("r_in")) c.r_in = get_as<double>(g, "r_in");
        if (g.contains("r_out")) c.r_out = get_as<double>(g, "r_out");
    }
    if (doc.contains("seed")) c.seed = get_as<std::uint64_t>(doc, "seed");
    if (doc.contains("out")) c.out_dir = get_as<std::string>(doc, "out");
    if (doc.contains("catalog")) c.catalog_path = get_as<std::string>(doc, "catalog");
    if (doc.contains("strip_a")) c.strip_a = number_list(doc, "strip_a");
    if (doc.contains("tau")) c.taus = number_list(doc, "tau");
    if (doc.contains("tolerances")) {
        const auto& t = doc.at("tolerances");
        if (!t.is_object()) throw ConfigError("config key 'tolerances' must be an object");
        for (const auto& [k, v] : t.items()) {
            if (!c.tolerances.contains(k)) throw ConfigError("unknown tolerance '" + k + "'");
            if (!v.is_number()) throw ConfigError("tolerance '" + k + "' must be a number");
            c.tolerances[k] = v.get<double>();
        }
    }
    return c;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // Byte offset → line / column (1-based).
        const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k < offset; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::ostringstream msg;
        msg << path << ":" << line << ":" << col << ": malformed JSON config";
        throw ConfigError(msg.str());
    }
    return config_from_json(doc, std::move(base));
}

void validate_config(const RunConfig& c) {
    const auto& cmds = known_commands();
    if (std::find(cmds.begin(), cmds.end(), c.command) == cmds.end()) {
        throw ConfigError("unknown command '" + c.command + "'");
    }
    if (c.grid_n < 3) throw ConfigError("grid N must be >= 3");
    if (!(c.r_in > 0.0 && c.r_out > c.r_in)) throw ConfigError("grid needs 0 < r_in < r_out");
    for (double l : c.lambdas) {
        if (!std::isfinite(l)) throw ConfigError("lambda values must be finite");
    }
    for (double e : c.eps) {
        if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError("eps values must be finite and >= 0");
    }
    for (double a : c.strip_a) {
        if (!(a > 1.0)) throw ConfigError("strip_a values must exceed 1");
    }
    for (double t : c.taus) {
        if (!(t > 1.0)) throw ConfigError("tau values must exceed 1");
    }
    for (const auto& [k, v] : c.tolerances) {
        if (!(v > 0.0)) throw ConfigError("tolerance '" + k + "' must be > 0");
    }
    if (c.out_dir.empty()) throw ConfigError("output directory must not be empty");
}

namespace {

struct Context {
    const RunConfig& config;
    std::vector<ConeSpec> catalog;
    std::string hash;
    fs::path out;

    std::ofstream open(const std::string& name) const {
        std::ofstream f(out / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (out / name).string());
        return f;
    }
};

std::vector<ConeSpec> load_catalog(const RunConfig& c) {
    std::vector<ConeSpec> cat = builtin_catalog();
    if (c.catalog_path.empty()) return cat;
    std::ifstream in(c.catalog_path);
    if (!in) throw ConfigError("cannot open catalog " + c.catalog_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("malformed catalog " + c.catalog_path + ": " + e.what());
    }
    std::vector<ConeSpec> extra;
    try {
        extra = catalog_from_json(doc);
    } catch (const std::exception& e) {
        throw ConfigError("invalid catalog entry: " + std::string(e.what()));
    }
    for (auto& cone : extra) {
        auto it = std::find_if(cat.begin(), cat.end(), [&](const ConeSpec& x) { return x.label == cone.label; });
        if (it != cat.end()) {
            *it = std::move(cone);
        } else {
            cat.push_back(std::move(cone));
        }
    }
    return cat;
}

std::vector<ConeSpec> selected(const Context& ctx, const std::vector<std::string>& fallback) {
    const auto& labels = ctx.config.cones.empty() ? fallback : ctx.config.cones;
    std::vector<ConeSpec> out;
    for (const auto& l : labels) out.push_back(find_cone(ctx.catalog, l));
    return out;
}

std::string fmt(double v) { return format_number(v); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }

bool is_circle(const ConeSpec& c) { return c.link.kind == LinkKind::CircleWithPotential; }

std::string kind_name(LinkKind k) {
    switch (k) {
        case LinkKind::ProductOfSpheres: return "product-of-spheres";
        case LinkKind::CircleWithPotential: return "circle-with-potential";
        case LinkKind::SingleModeConstant: return "single-mode-constant";
    }
    return "?";
}

std::pair<double, double> a_sq_range(const ConeSpec& c) {
    if (!is_circle(c)) {
        const double v = c.link.a_sq(0.0);
        return {v, v};
    }
    double lo = INFINITY, hi = -INFINITY;
    for (int k = 0; k < 4096; ++k) {
        const double v = c.link.a_sq(2.0 * std::numbers::pi * k / 4096.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

int cmd_catalog(const Context& ctx) {
    auto f = ctx.open("catalog.csv");
    CsvWriter w(f, {"label", "n", "kind", "p", "q", "minimizing", "a_sq_min", "a_sq_max", "c_n", "hardy",
                    "lambda_crit"},
                ctx.hash);
    const auto cones = ctx.config.cones.empty() ? ctx.catalog : selected(ctx, {});
    for (const auto& c : cones) {
        const auto [lo, hi] = a_sq_range(c);
        const DiscreteLink link = build_link_mesh(c.link, is_circle(c) ? 128 : 0);
        const bool prod = c.link.kind == LinkKind::ProductOfSpheres;
        w.row({c.label, std::to_string(c.n), kind_name(c.link.kind),
               prod ? std::to_string(c.link.factor_dims.at(0)) : "",
               prod ? std::to_string(c.link.factor_dims.at(1)) : "",
               c.minimizing == Minimality::KnownMinimizing ? "known" : "abstract", fmt(lo), fmt(hi),
               fmt(conformal_constant(c.n)), fmt(hardy_constant(c.n)), fmt(critical_lambda(link, c.n))});
    }
    return kExitOk;
}

int cmd_spectrum(const Context& ctx) {
    auto f = ctx.open("spectrum.csv");
    CsvWriter w(f, {"label", "n", "m", "eps", "lambda", "residual", "positive", "length", "kind"}, ctx.hash);
    int status = kExitOk;
    for (const auto& c : selected(ctx, {"C33"})) {
        ExhaustionPlan plan;
        plan.r_in = ctx.config.r_in;
        plan.r_out = ctx.config.r_out;
        plan.grid_size = ctx.config.grid_n;
        plan.eps_values = ctx.config.eps;
        plan.link_resolution = is_circle(c) ? 64 : 0;
        plan.eigen.tolerance = ctx.config.tolerances.at("eigen");
        const ExhaustionResult res = lambda_exhaustion(c, plan);
        for (const auto& l : res.levels) {
            w.row({c.label, std::to_string(c.n), fmt(l.m), fmt(l.eps), fmt(l.value), fmt(l.residual),
                   fmt_bool(l.positive), fmt(l.length), "level"});
        }
        for (std::size_t k = 0; k < res.eps_values.size(); ++k) {
            w.row({c.label, std::to_string(c.n), "", fmt(res.eps_values[k]), fmt(res.lambda_eps[k]), "", "", "",
                   "extrapolated"});
        }
        w.row({c.label, std::to_string(c.n), "", "0", fmt(res.lambda), "", fmt_bool(res.all_positive), "", "limit"});
        if (!res.monotone || !res.all_positive) {
            std::cerr << "spectrum: " << c.label << ": " << res.diagnostic << "\n";
            status = kExitNumerical;
        }
    }
    return status;
}

int cmd_exponents(const Context& ctx) {
    auto f = ctx.open("exponents.csv");
    CsvWriter w(f, {"label", "lambda", "mu", "alpha_plus", "alpha_minus", "residual", "n", "discriminant", "complex",
                    "imag", "lambda_crit"},
                ctx.hash);
    for (const auto& c : selected(ctx, {"C33"})) {
        const DiscreteLink link = build_link_mesh(c.link, is_circle(c) ? 128 : 0);
        const double crit = critical_lambda(link, c.n);
        for (double lam : ctx.config.lambdas) {
            const LinkSolution sol = link_mu(link, c.n, lam);
            const ExponentPair e = exponents(sol.mu, c.n);
            // Residual of the separated link equation at α₊ (undefined for complex roots).
            const std::string residual =
                e.complex ? "" : fmt(cw_residual(c, link, sol, e.alpha_plus, lam, AnnulusSpec{1.0, 2.0, 3}).link);
            w.row({c.label, fmt(lam), fmt(e.mu), fmt(e.alpha_plus), fmt(e.alpha_minus), residual,
                   std::to_string(c.n), fmt(e.discriminant), fmt_bool(e.complex), fmt(e.imag), fmt(crit)});
        }
    }
    auto g = ctx.open("theta.csv");
    CsvWriter t(g, {"n", "theta1", "theta2", "cones"}, ctx.hash);
    const auto cones = ctx.config.cones.empty() ? ctx.catalog : selected(ctx, {});
    for (const auto& b : theta_bounds(theta_scan(cones))) {
        t.row({std::to_string(b.n), fmt(b.theta1), fmt(b.theta2), std::to_string(b.cones)});
    }
    return kExitOk;
}

std::vector<double> unit_data(const ConeSpec& c, int link_res) {
    const DiscreteLink link = build_link_mesh(c.link, link_res);
    std::vector<double> f(link.size(), 0.0);
    if (is_circle(c)) {
        std::fill(f.begin(), f.end(), 1.0);
    } else {
        f[0] = 1.0;
    }
    return f;
}

int cmd_perron(const Context& ctx) {
    auto fc = ctx.open("criticality.csv");
    CsvWriter crit(fc, {"label", "lambda", "verdict", "discriminant", "shifted_eigenvalue"}, ctx.hash);
    auto fp = ctx.open("perron.csv");
    CsvWriter per(fp, {"label", "lambda", "eps", "alpha_hat", "fit_width", "coefA", "coefB"}, ctx.hash);
    std::vector<double> ladder;
    for (double e : ctx.config.eps) {
        if (e > 0.0) ladder.push_back(e);
    }
    if (ladder.empty()) ladder = {1e-1, 1e-2, 1e-3};
    std::sort(ladder.begin(), ladder.end(), std::greater<>());
    int status = kExitOk;
    for (const auto& c : selected(ctx, {"C33"})) {
        const int res = is_circle(c) ? 32 : 0;
        for (double lam : ctx.config.lambdas) {
            const std::vector<double> lengths = is_circle(c) ? std::vector<double>{2, 4, 8, 16}
                                                             : std::vector<double>{2, 4, 8, 16, 32, 64};
            const CriticalityReport rep = supercritical_check(c, lam, is_circle(c) ? 32 : 0, lengths);
            crit.row({c.label, fmt(lam), to_string(rep.verdict), fmt(rep.exponents.discriminant),
                      fmt(rep.eigenvalues.back())});
            if (rep.exponents.complex) {
                std::cerr << "perron: " << c.label << " at lambda " << lam
                          << ": supercritical, complex exponents; no positive solution\n";
                status = kExitNumerical;
                continue;
            }
            PerronOptions opt;
            opt.link_resolution = res;
            if (is_circle(c)) opt.max_step = 0.02;
            const PerronRun run = perron_exhaust(c, lam, unit_data(c, res), ladder, opt);
            for (const auto& l : run.levels) {
                per.row({c.label, fmt(lam), fmt(l.eps), fmt(l.alpha_hat), fmt(l.fit_width), fmt(l.coef_a),
                         fmt(l.coef_b)});
            }
            nlohmann::json j = perron_run_to_json(run);
            j["config_hash"] = ctx.hash;
            auto fj = ctx.open("perron_" + c.label + "_" + fmt(lam) + ".json");
            fj << j.dump(2) << '\n';
        }
    }
    return status;
}

int cmd_strip(const Context& ctx) {
    auto f = ctx.open("strip.csv");
    CsvWriter w(f, {"label", "lambda", "a", "C_abs", "gamma", "refinement"}, ctx.hash);
    for (const auto& c : selected(ctx, {"C33"})) {
        for (double lam : ctx.config.lambdas) {
            for (double a : ctx.config.strip_a) {
                for (int radial : {257, 513}) {
                    StripOptions opt;
                    opt.radial = radial;
                    const StripResult s = strip_modes(c, a, lam, opt);
                    w.row({c.label, fmt(lam), fmt(a), fmt(s.C_abs), fmt(s.gamma), std::to_string(s.refinement)});
                }
            }
        }
    }
    return kExitOk;
}

int cmd_conformal(const Context& ctx) {
    auto f = ctx.open("conformal.csv");
    CsvWriter w(f, {"label", "lambda", "alpha", "diameter", "iota", "closed_form_ratio_min", "closed_form_ratio_max"},
                ctx.hash);
    auto g = ctx.open("conformal_discrepancy.csv");
    CsvWriter d(g, {"label", "lambda", "quantity", "computed", "printed", "ratio"}, ctx.hash);
    const std::vector<double> radii{0.25, 0.5, 1.0, 2.0, 4.0};
    for (const auto& c : selected(ctx, {"C33"})) {
        const DiscreteLink link = build_link_mesh(c.link, is_circle(c) ? 128 : 0);
        for (double lam : ctx.config.lambdas) {
            const LinkSolution sol = link_mu(link, c.n, lam);
            const ExponentPair e = exponents(sol.mu, c.n);
            if (e.complex) {
                throw DomainError("conformal: complex exponents at lambda " + fmt(lam) + " on " + c.label);
            }
            const Vector cvec = sol.c / sol.c.maxCoeff();
            const ConformalCone cc = transform_cone(c, link, cvec, e.alpha_plus);
            ScalOptions so;
            so.cw_tolerance = ctx.config.tolerances.at("cw");
            const ScalReport rep = scal_transformed(cc, lam, radii, so);
            const DiameterIota di = diameter_and_iota(cc, lam, 1.0);
            if (!di.warning.empty()) std::cerr << "conformal: " << c.label << ": " << di.warning << "\n";
            w.row({c.label, fmt(lam), fmt(e.alpha_plus), fmt(di.diameter), fmt(di.iota), fmt(rep.ratio_min),
                   fmt(rep.ratio_max)});
            const double kmax = *std::max_element(cc.K.begin(), cc.K.end());
            d.row({c.label, fmt(lam), "distance_constant", fmt(kmax), fmt(cc.printed_constant),
                   fmt(cc.printed_constant / kmax)});
            d.row({c.label, fmt(lam), "scal_prefactor_ratio_min", "1", fmt(rep.ratio_min), fmt(rep.ratio_min)});
            d.row({c.label, fmt(lam), "scal_prefactor_ratio_max", "1", fmt(rep.ratio_max), fmt(rep.ratio_max)});
        }
    }
    return kExitOk;
}

std::pair<int, int> lawson_indices(const ConeSpec& c) {
    if (c.link.kind != LinkKind::ProductOfSpheres || c.link.factor_dims.size() != 2) {
        throw ConfigError("cone " + c.label + " is not a product-of-spheres cone");
    }
    return {c.link.factor_dims[0], c.link.factor_dims[1]};
}

int cmd_induce(const Context& ctx) {
    auto f = ctx.open("induce.csv");
    CsvWriter w(f, {"label", "lambda", "tau", "alpha_hat", "fit_width", "alpha_plus"}, ctx.hash);
    const double tmax = *std::max_element(ctx.config.taus.begin(), ctx.config.taus.end());
    for (const auto& c : selected(ctx, {"C33"})) {
        const auto [p, q] = lawson_indices(c);
        const ProfileCurve leaf = hardt_simon_profile(p, q, LeafSide::Below, 8.0 * tmax);
        {
            auto fp = ctx.open("profile_" + c.label + ".csv");
            write_profile_csv(fp, leaf, ctx.hash);
        }
        for (double lam : ctx.config.lambdas) {
            const InducedRun run = induced_solution_experiment(leaf, c, lam, ctx.config.taus);
            for (const auto& s : run.steps) {
                w.row({c.label, fmt(lam), fmt(s.tau), fmt(s.alpha_hat), fmt(s.fit_width), fmt(run.alpha_plus)});
            }
            auto fj = ctx.open("induce_" + c.label + "_" + fmt(lam) + ".json");
            fj << induced_run_to_json(run).dump(2) << '\n';
        }
    }
    return kExitOk;
}

int cmd_flatnorm(const Context& ctx) {
    auto f = ctx.open("flatnorm.csv");
    CsvWriter w(f, {"label", "kind", "scale", "r_in", "r_out", "value", "error"}, ctx.hash);
    const double tmax = *std::max_element(ctx.config.taus.begin(), ctx.config.taus.end());
    for (const auto& c : selected(ctx, {"C33"})) {
        const auto [p, q] = lawson_indices(c);
        const ProfileCurve cone = cone_profile(p, q, 0.1, 10.0);
        const ProfileCurve plane = ray_profile(p, q, 0.0, 0.1, 10.0);
        const AnnulusDistance dp = flat_norm_annulus(cone, plane, 0.5, 1.0);
        w.row({c.label, "plane", "1", fmt(dp.r_in), fmt(dp.r_out), fmt(dp.value), fmt(dp.error)});
        const ProfileCurve leaf = hardt_simon_profile(p, q, LeafSide::Below, 4.0 * tmax);
        for (double sigma : ctx.config.taus) {
            const AnnulusDistance d = flat_norm_annulus(scale_profile(leaf, 1.0 / sigma), cone, 0.5, 1.0);
            w.row({c.label, "freezing", fmt(1.0 / sigma), fmt(d.r_in), fmt(d.r_out), fmt(d.value), fmt(d.error)});
        }
    }
    return kExitOk;
}

// Known output tables and their headers (config_hash column included).
const std::vector<std::pair<std::string, std::vector<std::string>>>& table_schemas() {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> t{
        {"catalog", {"label", "n", "kind", "p", "q", "minimizing", "a_sq_min", "a_sq_max", "c_n", "hardy", "lambda_crit", "config_hash"}},
        {"spectrum", {"label", "n", "m", "eps", "lambda", "residual", "positive", "length", "kind", "config_hash"}},
        {"exponents", {"label", "lambda", "mu", "alpha_plus", "alpha_minus", "residual", "n", "discriminant", "complex", "imag", "lambda_crit", "config_hash"}},
        {"theta", {"n", "theta1", "theta2", "cones", "config_hash"}},
        {"criticality", {"label", "lambda", "verdict", "discriminant", "shifted_eigenvalue", "config_hash"}},
        {"perron", {"label", "lambda", "eps", "alpha_hat", "fit_width", "coefA", "coefB", "config_hash"}},
        {"strip", {"label", "lambda", "a", "C_abs", "gamma", "refinement", "config_hash"}},
        {"conformal", {"label", "lambda", "alpha", "diameter", "iota", "closed_form_ratio_min", "closed_form_ratio_max", "config_hash"}},
        {"conformal_discrepancy", {"label", "lambda", "quantity", "computed", "printed", "ratio", "config_hash"}},
        {"induce", {"label", "lambda", "tau", "alpha_hat", "fit_width", "alpha_plus", "config_hash"}},
        {"flatnorm", {"label", "kind", "scale", "r_in", "r_out", "value", "error", "config_hash"}},
    };
    return t;
}

int cmd_report(const Context& ctx) {
    nlohmann::json report;
    report["tables"] = nlohmann::json::object();
    std::map<std::string, CsvTable> tables;
    for (const auto& [name, header] : table_schemas()) {
        CsvTable t;
        t.header = header;
        const fs::path path = ctx.out / (name + ".csv");
        if (fs::exists(path)) {
            std::ifstream in(path);
            t = read_csv(in);
            if (t.header != header) {
                throw NumericalError("report: " + path.string() + " has an unexpected header");
            }
        }
        report["tables"][name] = {{"header", t.header}, {"rows", t.rows}};
        tables[name] = std::move(t);
    }
    // Discrepancy ledger: printed constants and closed forms against computed values.
    auto f = ctx.open("discrepancy_ledger.csv");
    const std::vector<std::string> lh{"source", "label", "lambda", "quantity", "computed", "reference", "ratio"};
    CsvWriter w(f, lh, ctx.hash);
    nlohmann::json ledger = nlohmann::json::array();
    auto add = [&](const std::vector<std::string>& cells) {
        w.row(cells);
        ledger.push_back(cells);
    };
    for (const auto& r : tables["conformal_discrepancy"].rows) {
        add({"conformal", r.at(0), r.at(1), r.at(2), r.at(3), r.at(4), r.at(5)});
    }
    for (const auto& r : tables["spectrum"].rows) {
        if (r.at(8) != "limit") continue;
        auto it = std::find_if(ctx.catalog.begin(), ctx.catalog.end(), [&](const ConeSpec& c) { return c.label == r.at(0); });
        if (it == ctx.catalog.end() || is_circle(*it)) continue;
        const double a2 = it->link.a_sq(0.0);
        const double closed = hardy_constant(it->n) / a2 - conformal_constant(it->n);
        const double v = std::stod(r.at(4));
        add({"spectrum", r.at(0), "", "lambda_limit", r.at(4), fmt(closed), fmt(v / closed)});
    }
    report["discrepancies"] = {{"header", lh}, {"rows", ledger}};
    report["config_hash"] = ctx.hash;
    auto fj = ctx.open("report.json");
    fj << report.dump(2) << '\n';
    return kExitOk;
}

int cmd_plotdata(const Context& ctx) {
    for (const auto& [name, header] : table_schemas()) {
        const fs::path path = ctx.out / (name + ".csv");
        if (!fs::exists(path)) continue;
        std::ifstream in(path);
        const CsvTable t = read_csv(in);
        auto f = ctx.open(name + ".dat");
        f << '#';
        for (const auto& h : t.header) f << ' ' << h;
        f << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                f << (k ? " " : "") << (row[k].empty() ? "NaN" : row[k]);
            }
            f << '\n';
        }
    }
    return kExitOk;
}

} // namespace

int run(const RunConfig& config) {
    try {
        validate_config(config);
        Context ctx{config, load_catalog(config), config_hash(config.to_json()), fs::path(config.out_dir)};
        for (const auto& l : config.cones) {
            const bool known = std::any_of(ctx.catalog.begin(), ctx.catalog.end(),
                                           [&](const ConeSpec& c) { return c.label == l; });
            if (!known) throw ConfigError("unknown cone label '" + l + "'");
        }
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (ec) throw ConfigError("cannot create output directory " + config.out_dir + ": " + ec.message());

        const std::string& cmd = config.command;
        if (cmd == "catalog") return cmd_catalog(ctx);
        if (cmd == "spectrum") return cmd_spectrum(ctx);
        if (cmd == "exponents") return cmd_exponents(ctx);
        if (cmd == "perron") return cmd_perron(ctx);
        if (cmd == "strip") return cmd_strip(ctx);
        if (cmd == "conformal") return cmd_conformal(ctx);
        if (cmd == "induce") return cmd_induce(ctx);
        if (cmd == "flatnorm") return cmd_flatnorm(ctx);
        if (cmd == "report") return cmd_report(ctx);
        if (cmd == "plotdata") return cmd_plotdata(ctx);
        throw ConfigError("unknown command '" + cmd + "'");
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace conelab
