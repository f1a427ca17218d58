// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"

#include "conelab/cli.hpp"
#include "conelab/conformal.hpp"
#include "conelab/csv.hpp"
#include "conelab/errors.hpp"
#include "conelab/hypersurface.hpp"
#include "conelab/perron.hpp"
#include "conelab/separation.hpp"
#include "conelab/spectral.hpp"
#include "conelab/strip.hpp"

using namespace conelab;

namespace {

const double kAp = -2.5 + std::sqrt(2.0);
const double kAm = -2.5 - std::sqrt(2.0);

// Collects failed sub-checks of one criterion with their numbers.
struct Check {
    std::ostringstream detail;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
    template <class T>
    void note(const std::string& key, T value) {
        detail << ' ' << key << '=' << value;
    }
};

int failures = 0;

void criterion(int id, const std::function<void(Check&)>& body) {
    Check c;
    c.detail.precision(10);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!c.ok) ++failures;
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << id << ":" << c.detail.str() << " (" << secs
              << " s)" << std::endl;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::vector<ConeSpec> product_cones(int lo, int hi) {
    std::vector<ConeSpec> out;
    for (const auto& c : builtin_catalog()) {
        if (c.link.kind != LinkKind::ProductOfSpheres) continue;
        const int total = c.link.factor_dims[0] + c.link.factor_dims[1];
        if (total >= lo && total <= hi) out.push_back(c);
    }
    return out;
}

Vector smooth_data(const StripResult& s, double amp, double phase) {
    Vector d = Vector::Zero(static_cast<Eigen::Index>(s.size()));
    const double r0 = s.grid.r(0), r1 = s.grid.r(s.grid.size() - 1);
    for (std::size_t node = 0; node < s.size(); ++node) {
        if (!s.active[node]) continue;
        const double x = (s.r_of(node) - r0) / (r1 - r0);
        d[static_cast<Eigen::Index>(node)] = std::sin(std::numbers::pi * x) * (1.0 + amp * std::cos(3.0 * x + phase));
    }
    return d;
}

} // namespace

int main() {
    std::cout.precision(10);

    criterion(1, [](Check& c) {
        ExhaustionPlan plan;   // N = 4096, r_in = 1e-4, m up to 1e5
        const ExhaustionResult res = lambda_exhaustion(simons_cone(), plan);
        c.expect(res.monotone, "monotone");
        c.expect(res.all_positive, "positive eigenvectors");
        bool down = true, above = true;
        for (std::size_t k = 0; k < res.levels.size(); ++k) {
            if (k > 0 && res.levels[k].value > res.levels[k - 1].value) down = false;
            if (res.levels[k].value < 5.0 / 6.0) above = false;
        }
        c.expect(down, "nonincreasing in m");
        c.expect(above, "levels above 5/6");
        c.note("largest_domain", res.levels.back().value);
        c.note("lambda", res.lambda);
        c.expect(close(res.lambda, 5.0 / 6.0, 1e-2), "|lambda - 5/6| <= 1e-2");
        c.expect(close(res.levels.back().value, 5.0 / 6.0, 1e-2), "largest domain within 1e-2");
    });

    criterion(2, [](Check& c) {
        ExhaustionPlan plan;
        plan.m_values = {10, 100, 1000};
        plan.eps_values = {0.5, 1.0, 2.0};
        const ExhaustionResult res = lambda_exhaustion(simons_cone(), plan);
        for (std::size_t k = 0; k < res.eps_values.size(); ++k) {
            const double e = res.eps_values[k];
            const double expect = 5.0 / (6.0 + e * e);
            c.note("eps" + format_number(e), res.lambda_eps[k]);
            c.expect(close(res.lambda_eps[k], expect, 1e-3), "eps=" + format_number(e));
        }
    });

    criterion(3, [](Check& c) {
        double worst = INFINITY;
        int count = 0;
        for (const auto& cone : product_cones(6, 12)) {
            ExhaustionPlan plan;
            plan.grid_size = 1024;
            plan.m_values = {10, 100, 1000};
            plan.link_resolution = 0;
            const ExhaustionResult res = lambda_exhaustion(cone, plan);
            const double a2 = cone.n - 1.0;
            const double closed = hardy_constant(cone.n) / a2 - conformal_constant(cone.n);
            c.expect(res.lambda > 0.1, cone.label + " lambda > 1/10");
            c.expect(close(res.lambda, closed, 1e-3), cone.label + " closed form");
            c.expect(res.monotone && res.all_positive, cone.label + " monotone/positive");
            worst = std::min(worst, res.lambda);
            ++count;
        }
        c.note("cones", count);
        c.note("min_lambda", worst);
        c.expect(count > 0, "nonempty catalog slice");
    });

    criterion(4, [](Check& c) {
        const DiscreteLink link = build_link_mesh(lawson_link(3, 3), 0);
        const ExponentPair e = exponents(link_mu(link, 7, 0.5).mu, 7);
        c.expect(close(e.alpha_plus, kAp, 1e-9) && close(e.alpha_minus, kAm, 1e-9), "exponents");
        const PerronRun run = perron_exhaust(simons_cone(), 0.5, {1.0}, {1e-1, 1e-2, 1e-3});
        const double ah = run.levels.back().alpha_hat;
        c.note("alpha_hat", ah);
        c.note("decay", run.decay_exponent);
        c.expect(close(ah, -1.085786, 1e-2), "alpha_hat");
        c.expect(std::abs(run.decay_exponent - 2.0 * std::sqrt(2.0)) <= 0.1 * 2.0 * std::sqrt(2.0), "decay");
    });

    criterion(5, [](Check& c) {
        const auto rows = theta_scan(product_cones(0, 1000), 0.05, 0);
        for (const auto& r : rows) {
            const double k = 0.5 * (r.n - 2.0);
            c.expect(r.inside && r.exponents.alpha_plus > -k && r.exponents.alpha_plus < 0.0, r.label);
        }
        const auto bounds = theta_bounds(rows);
        c.note("cones", rows.size());
        for (const auto& b : bounds) {
            c.detail << " n" << b.n << ":(" << b.theta1 << "," << b.theta2 << ")";
        }
        c.expect(!bounds.empty(), "theta table");
    });

    criterion(6, [](Check& c) {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto data = [&] {
            std::vector<double> f(10);
            double rest = 0.0;
            for (std::size_t m = 1; m < f.size(); ++m) {
                f[m] = 0.2 * (unit(rng) - 0.5);
                rest += std::abs(f[m]);
            }
            f[0] = rest + 0.5 + unit(rng);
            return f;
        };
        UniquenessOptions opt;
        opt.link_resolution = 3;
        const UniquenessProbe p = uniqueness_probe(simons_cone(), 0.5, data(), data(), opt);
        for (double d : p.distances) c.detail << " d=" << d;
        c.expect(p.distances.size() == 3, "three radii");
        c.expect(p.distances.size() == 3 && p.distances[1] < p.distances[0] && p.distances[2] < p.distances[1],
                 "strictly decreasing");
        c.expect(!p.distances.empty() && p.distances.back() < 1e-3, "final < 1e-3");
        c.expect(p.positive, "positive");
    });

    criterion(7, [](Check& c) {
        const CriticalityReport r = supercritical_check(simons_cone(), 1.0);
        c.note("verdict", to_string(r.verdict));
        c.note("largest_annulus_eig", r.eigenvalues.back());
        c.expect(r.verdict == Criticality::Supercritical, "supercritical");
        c.expect(r.exponents.complex, "complex exponents");
        c.expect(r.eigenvalues.back() < 0.0, "negative eigenvalue");
    });

    criterion(8, [](Check& c) {
        const ConeSpec cone = simons_cone();
        double prev = INFINITY;
        for (double a : {2.0, 4.0, 8.0}) {
            const double g = strip_modes(cone, a, 0.5, StripOptions{257, 0}).gamma;
            const double gf = strip_modes(cone, a, 0.5, StripOptions{513, 0}).gamma;
            c.note("gamma" + format_number(a), gf);
            c.expect(g < prev, "decreasing at a=" + format_number(a));
            c.expect(std::abs(g - gf) <= 1e-3 * gf, "refinement a=" + format_number(a));
            prev = g;
        }
        const StripResult s = strip_modes(cone, 2.0, 0.5);
        std::vector<double> t;
        for (int k = 0; k <= 40; ++k) t.push_back(-1.0 + 0.05 * k);
        const Eigen::MatrixXd u = 2.0 * strip_generator(s, t, +1) + 3.0 * strip_generator(s, t, -1);
        const StripDecomposition d = decompose_strip_solution(t, u, s);
        c.note("coef_plus", d.coef_plus);
        c.note("coef_minus", d.coef_minus);
        c.expect(close(d.coef_plus, 2.0, 1e-6) && close(d.coef_minus, 3.0, 1e-6), "planted (2,3)");

        // Random positive boundary data decomposes with nonnegative coefficients.
        const StripField probe = strip_solve(s, 5.0 / s.gamma, 201, smooth_data(s, 0.3, 1.0), smooth_data(s, 0.2, 2.0));
        DecomposeOptions opt;
        opt.gamma = probe.gamma_discrete;
        opt.t_lo = -2.5 / s.gamma;
        opt.t_hi = 2.5 / s.gamma;
        const StripDecomposition rd = decompose_strip_solution(probe.t, probe.u, s, opt);
        c.expect(rd.coef_plus >= -1e-6 && rd.coef_minus >= -1e-6, "random data in the positive span");
    });

    criterion(9, [](Check& c) {
        const ConeSpec cone = simons_cone();
        const DiscreteLink link = build_link_mesh(cone.link, 0);
        const ConformalCone cc = transform_cone(cone, link, Vector::Ones(1), kAp);
        const DiameterIota di = diameter_and_iota(cc, 0.5, 1.0);
        c.note("diameter", di.diameter);
        c.expect(close(di.diameter, 5.0 / (2.0 * std::sqrt(2.0)), 1e-6), "diameter");
        bool threw = false;
        try {
            transform_cone(cone, link, Vector::Ones(1), -2.5 - 0.1);
        } catch (const DomainError& e) {
            threw = std::string(e.what()).find("infinite diameter") != std::string::npos;
        }
        c.expect(threw, "infinite diameter error");
    });

    criterion(10, [](Check& c) {
        const ConeSpec cone = simons_cone();
        const DiscreteLink link = build_link_mesh(cone.link, 0);
        const ConformalCone cc = transform_cone(cone, link, Vector::Ones(1), kAp);
        const ScalReport rep = scal_transformed(cc, 0.5, {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0});
        double worst = 0.0, worst_num = 0.0;
        for (const auto& s : rep.samples) {
            const double rho = cc.rho(s.r, 0);
            worst = std::max(worst, std::abs(s.scal_rho2 - 45.0) / 45.0);
            worst_num = std::max(worst_num, std::abs(s.scal_numeric * rho * rho - 45.0) / 45.0);
        }
        c.note("closed_rel", worst);
        c.note("numeric_rel", worst_num);
        c.expect(worst <= 1e-6, "closed form 45");
        c.expect(worst_num <= 1e-3, "numeric law 45");
        c.expect(rep.nonnegative, "scal >= 0");

        // Ledger of printed prefactors: emitted through the conformal + report stages.
        const auto dir = std::filesystem::temp_directory_path() / "conelab_acceptance_ledger";
        std::filesystem::remove_all(dir);
        RunConfig cfg;
        cfg.out_dir = dir.string();
        cfg.cones = {"C33"};
        cfg.command = "conformal";
        c.expect(run(cfg) == kExitOk, "conformal stage");
        cfg.command = "report";
        cfg.cones.clear();
        c.expect(run(cfg) == kExitOk, "report stage");
        std::ifstream in(dir / "discrepancy_ledger.csv");
        const CsvTable t = read_csv(in);
        std::size_t conformal_rows = 0;
        for (const auto& r : t.rows) {
            if (!r.empty() && r[0] == "conformal") ++conformal_rows;
        }
        c.note("ledger_rows", conformal_rows);
        c.expect(conformal_rows > 0, "ledger emitted");
        std::filesystem::remove_all(dir);
    });

    criterion(11, [](Check& c) {
        double prev = INFINITY;
        double last = 0.0;
        for (double decades : {4.0, 8.0, 12.0}) {
            StabilityOptions opt;
            opt.r_in = std::pow(10.0, -decades);
            opt.r_out = std::pow(10.0, decades);
            opt.grid_size = 4096;
            const StabilityReport r = stability_check(simons_cone(), opt);
            c.note("inf_1e" + format_number(decades), r.infimum);
            c.expect(r.infimum > 25.0 / 24.0, "above 25/24");
            c.expect(r.infimum < prev, "decreasing");
            c.expect(r.margin >= r.infimum - 1e-9, "batch margin");
            prev = r.infimum;
            last = r.infimum;
        }
        c.expect(close(last, 25.0 / 24.0, 1e-3), "within 1e-3");
    });

    criterion(12, [](Check& c) {
        const ProfileCurve leaf = hardt_simon_profile(3, 3, LeafSide::Below, 8000.0);
        const InducedRun run = induced_solution_experiment(leaf, simons_cone(), 0.5, {10.0, 100.0, 1000.0});
        double prev = INFINITY;
        for (const auto& s : run.steps) {
            const double err = std::abs(s.alpha_hat - kAp);
            c.detail << " tau" << s.tau << "=" << s.alpha_hat;
            c.expect(err <= prev, "nonincreasing at tau=" + format_number(s.tau));
            prev = err;
        }
        c.expect(std::abs(run.steps.back().alpha_hat - kAp) <= 0.05 * std::abs(kAp), "5% at tau=1000");
        const auto curv = profile_curvatures(leaf);
        c.note("r2A2_outer", curv.back().r2A2);
        c.expect(close(curv.back().r2A2, 6.0, 1e-2), "r^2|A|^2 -> 6");
    });

    criterion(13, [](Check& c) {
        int instances = 0;
        double worst = 0.0;
        auto compare = [&](const OperatorPair& op, double shift) {
            const auto idx = active_indices(op.free_nodes());
            if (idx.empty() || idx.size() > 64) return;
            const SparseMatrix A = submatrix(op.shifted(shift), idx, idx);
            for (const SparseMatrix& M : {submatrix(op.P, idx, idx), submatrix(op.W, idx, idx)}) {
                const double dense = oracle::dense_min_generalized(Eigen::MatrixXd(A), Eigen::MatrixXd(M));
                const double sparse = principal_eigenpair(A, M).value;
                worst = std::max(worst, std::abs(sparse - dense) / std::max(1.0, std::abs(dense)));
                ++instances;
            }
        };
        const ConeSpec simons = simons_cone();
        const ConeSpec circ =
            make_cone(circle_link([](double w) { return 1.0 + std::cos(w) * std::cos(w); }, 6), "circ");
        for (double lam : {0.0, 0.5, 1.0}) {
            const DiscreteLink single = build_link_mesh(simons.link, 0);
            for (int N = 3; N <= 66; ++N) compare(assemble_operator(simons, single, radial_grid(0.1, 10.0, N), lam), lam);
            for (int deg : {1, 2, 3}) {
                const DiscreteLink modes = build_link_mesh(simons.link, deg);
                for (int N = 3; N <= 66; ++N) {
                    compare(assemble_operator(simons, modes, radial_grid(0.1, 10.0, N), lam), lam);
                }
            }
            for (int L : {3, 4, 6, 8, 12, 16}) {
                const DiscreteLink link = build_link_mesh(circ.link, L);
                for (int N = 3; N <= 66; ++N) compare(assemble_operator(circ, link, radial_grid(0.5, 4.0, N), lam), lam);
            }
        }
        c.note("instances", instances);
        c.note("max_rel_err", worst);
        c.expect(worst <= 1e-8, "sparse == dense to 1e-8");
    });

    return failures == 0 ? 0 : 1;
}
