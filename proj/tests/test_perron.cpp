#include <cmath>
#include <random>

#include "doctest.h"

#include "conelab/errors.hpp"
#include "conelab/perron.hpp"

using namespace conelab;
using doctest::Approx;

namespace {

const double kAp = -2.5 + std::sqrt(2.0);
const double kAm = -2.5 - std::sqrt(2.0);

// Supersolution on an annulus of the Simons cone at λ = 1/2: M (r^{α₋} + r^{-5/2})
// in Liouville variables; r^β with α₋ < β < α₊ is a strict supersolution.
Vector simons_supersolution(const DirichletProblem& p, double M) {
    Vector v(static_cast<Eigen::Index>(p.grid.size()));
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
        const double s = p.grid.s[i];
        v[static_cast<Eigen::Index>(i)] = M * (std::exp((kAm + 2.5) * s) + 1.0);
    }
    return v;
}

ConeSpec cos2_cone() {
    return make_cone(circle_link([](double w) { return 1.0 + std::cos(w) * std::cos(w); }, 6), "circ");
}

} // namespace

TEST_CASE("perron_exhaust on the Simons cone") {
    const PerronRun run = perron_exhaust(simons_cone(), 0.5, {1.0}, {1e-1, 1e-2, 1e-3});
    CHECK(run.verdict == "subcritical-positive");
    REQUIRE(run.levels.size() == 3);
    CHECK(run.levels.back().alpha_hat == Approx(-1.085786).epsilon(1e-2));
    CHECK(std::abs(run.decay_exponent - 2.0 * std::sqrt(2.0)) <= 0.1 * 2.0 * std::sqrt(2.0));
    for (const auto& l : run.levels) {
        CHECK(l.positive);
        // Outer boundary row carries the data exactly.
        CHECK(l.u(l.u.rows() - 1, 0) == Approx(1.0).epsilon(1e-14));
        CHECK(l.u(0, 0) == 0.0);
        // Two-exponent algebra: B = -A eps^{α₊-α₋}.
        CHECK(l.coef_b / l.coef_a == Approx(-std::pow(l.eps, kAp - kAm)).epsilon(0.1));
    }
    // Fitted exponents approach α₊.
    CHECK(std::abs(run.levels[2].alpha_hat - kAp) < std::abs(run.levels[0].alpha_hat - kAp));

    const nlohmann::json j = perron_run_to_json(run);
    CHECK(j["levels"].size() == 3);
    CHECK(j["levels"][0].contains("coefA"));
    CHECK(j["verdict"] == "subcritical-positive");
}

TEST_CASE("perron_exhaust: linearity and input errors") {
    const PerronRun one = perron_exhaust(simons_cone(), 0.5, {1.0}, {1e-1, 1e-2});
    const PerronRun five = perron_exhaust(simons_cone(), 0.5, {5.0}, {1e-1, 1e-2});
    for (std::size_t k = 0; k < one.levels.size(); ++k) {
        const Eigen::MatrixXd diff = five.levels[k].u - 5.0 * one.levels[k].u;
        CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12 * five.levels[k].u.cwiseAbs().maxCoeff());
        CHECK(five.levels[k].alpha_hat == Approx(one.levels[k].alpha_hat).epsilon(1e-12));
    }
    CHECK_THROWS_WITH_AS(perron_exhaust(simons_cone(), 1.0, {1.0}, {1e-1}), doctest::Contains("supercritical"),
                         DomainError);
    CHECK_THROWS_AS(perron_exhaust(simons_cone(), 0.5, {-1.0}, {1e-1}), DomainError);
    CHECK_THROWS_AS(perron_exhaust(simons_cone(), 0.5, {0.0}, {1e-1}), DomainError);
    CHECK_THROWS_AS(perron_exhaust(simons_cone(), 0.5, {1.0}, {2.0}), DomainError);
}

TEST_CASE("perron_exhaust on a circle link stays positive") {
    PerronOptions opt;
    opt.link_resolution = 16;
    opt.max_step = 0.02;
    const ConeSpec c = cos2_cone();
    const PerronRun run = perron_exhaust(c, 0.3, std::vector<double>(16, 1.0), {1e-1, 1e-2}, opt);
    CHECK(run.verdict == "subcritical-positive");
    CHECK(run.levels.back().alpha_hat == Approx(run.exponents.alpha_plus).epsilon(2e-2));
}

TEST_CASE("lift iteration converges to the direct solve") {
    const ConeSpec cone = simons_cone();
    const DiscreteLink link = build_link_mesh(cone.link, 0);
    const DirichletProblem p = annulus_problem(cone, link, 0.5, 0.1, 1.0, 0.02, {1.0});
    const Vector direct = solve_direct(p);
    const Vector u0 = simons_supersolution(p, 50.0);
    REQUIRE_FALSE(supersolution_violation(p, u0).has_value());
    const LiftResult lift = perron_lift_iterate(p, u0);
    CHECK(lift.monotone);
    CHECK(lift.positive);
    CHECK((lift.w - direct).cwiseAbs().maxCoeff() <= 1e-6 * direct.cwiseAbs().maxCoeff());
    // The exact two-exponent combination with zero inner data and unit outer data.
    const double A = 1.0 / (1.0 - std::pow(0.1, kAp - kAm));
    const double B = -A * std::pow(0.1, kAp - kAm);
    for (std::size_t i = 0; i < p.grid.size(); i += 10) {
        const double r = p.grid.r(i);
        CHECK(p.to_u(lift.w, i, 0) == Approx(A * std::pow(r, kAp) + B * std::pow(r, kAm)).epsilon(1e-3).scale(1.0));
    }
    // Minimality against random supersolutions; min of pairs stays a supersolution.
    const MinimalityReport rep = check_minimality(p, lift.w, 20, 3);
    CHECK(rep.max_violation <= 1e-6 * direct.cwiseAbs().maxCoeff());
    CHECK(rep.min_pair_is_supersolution);
}

TEST_CASE("lift iteration: idempotence, rejection, min of supersolutions") {
    const ConeSpec cone = simons_cone();
    const DiscreteLink link = build_link_mesh(cone.link, 0);
    const DirichletProblem p = annulus_problem(cone, link, 0.5, 0.2, 1.0, 0.05, {1.0});
    const Vector direct = solve_direct(p);
    const LiftResult same = perron_lift_iterate(p, direct);
    CHECK(same.sweeps == 1);
    CHECK((same.w - direct).cwiseAbs().maxCoeff() <= 1e-13 * direct.cwiseAbs().maxCoeff());

    // Below the data on the boundary / subsolution inside: rejected with the patch index.
    Vector bad = simons_supersolution(p, 50.0);
    bad[static_cast<Eigen::Index>(p.grid.size() / 2)] *= 0.5;
    CHECK_THROWS_WITH_AS(perron_lift_iterate(p, bad), doctest::Contains("patch"), DomainError);

    const Vector s1 = simons_supersolution(p, 50.0);
    Vector s2 = simons_supersolution(p, 20.0);
    // Second supersolution: the solve with raised data.
    Vector data = p.data * 3.0;
    s2 = solve_dirichlet(p.A, p.active, data);
    REQUIRE_FALSE(supersolution_violation(p, s2).has_value());
    CHECK_FALSE(supersolution_violation(p, s1.cwiseMin(s2)).has_value());
}

TEST_CASE("exhaustion limit equals the lift fixed point") {
    const ConeSpec cone = simons_cone();
    const DiscreteLink link = build_link_mesh(cone.link, 0);
    const PerronRun run = perron_exhaust(cone, 0.5, {1.0}, {0.1}, PerronOptions{1.0, 0.02, 0, {}});
    const DirichletProblem p = annulus_problem(cone, link, 0.5, 0.1, 1.0, 0.02, {1.0});
    const LiftResult lift = perron_lift_iterate(p, simons_supersolution(p, 50.0));
    const Eigen::MatrixXd u = p.u_matrix(lift.w);
    REQUIRE(u.rows() == run.levels[0].u.rows());
    CHECK((u - run.levels[0].u).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("uniqueness probe on the Simons cone") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    // Ten coefficients for modes of total degree <= 3; constant mode dominant.
    auto random_data = [&] {
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
    const auto f1 = random_data();
    const auto f2 = random_data();
    const UniquenessProbe probe = uniqueness_probe(simons_cone(), 0.5, f1, f2, opt);
    CHECK(probe.verdict == "converging");
    REQUIRE(probe.distances.size() == 3);
    CHECK(probe.distances[1] < probe.distances[0]);
    CHECK(probe.distances[2] < probe.distances[1]);
    CHECK(probe.distances[2] < 1e-3);

    const UniquenessProbe same = uniqueness_probe(simons_cone(), 0.5, f1, f1, opt);
    for (double d : same.distances) CHECK(d == 0.0);
    std::vector<double> f3 = f1;
    for (double& v : f3) v *= 3.0;
    const UniquenessProbe scaled = uniqueness_probe(simons_cone(), 0.5, f1, f3, opt);
    for (double d : scaled.distances) CHECK(d <= 1e-12);

    std::vector<double> neg = f1;
    neg[0] = -1.0;
    CHECK_THROWS_AS(uniqueness_probe(simons_cone(), 0.5, f1, neg, opt), DomainError);
}

TEST_CASE("uniqueness probe at a supercritical lambda reports failure") {
    UniquenessOptions opt;
    opt.link_resolution = 0;
    opt.r_start = 200.0;
    const UniquenessProbe probe = uniqueness_probe(simons_cone(), 1.0, {1.0}, {1.0}, opt);
    // Identical data but the solution oscillates in sign at λ = 1.
    CHECK_FALSE(probe.positive);
    CHECK(probe.verdict.find("failure") != std::string::npos);
}

TEST_CASE("supercritical_check") {
    const CriticalityReport sup = supercritical_check(simons_cone(), 1.0, 0);
    CHECK(sup.verdict == Criticality::Supercritical);
    CHECK(sup.exponents.complex);
    CHECK(sup.exponents.mu == Approx(7.25));
    CHECK(sup.eigenvalues.back() < 0.0);
    CHECK(sup.eigenvalues.front() > sup.eigenvalues.back());

    const CriticalityReport crit = supercritical_check(simons_cone(), 5.0 / 6.0, 0);
    CHECK(crit.verdict == Criticality::Critical);
    CHECK(crit.exponents.alpha_plus == Approx(-2.5));

    const CriticalityReport sub = supercritical_check(simons_cone(), 0.5, 0);
    CHECK(sub.verdict == Criticality::Subcritical);
    for (double v : sub.eigenvalues) CHECK(v > 0.0);
    CHECK(to_string(sub.verdict) == "subcritical");
}

TEST_CASE("Perron recovery of the alpha_plus profile") {
    const double A = 1.0, B = 0.3;
    auto u = [&](double r) { return A * std::pow(r, kAp) + B * std::pow(r, kAm); };
    const std::vector<double> gammas{1.0, 2.0, 4.0, 8.0, 16.0};
    const auto steps = perron_recovery(u, kAp, kAm, gammas);
    for (std::size_t k = 0; k < steps.size(); ++k) {
        const double expected = (B / A) * std::pow(gammas[k], kAm - kAp);
        CHECK(steps[k].ratio == Approx(expected).epsilon(0.1));
        if (k > 0) CHECK(steps[k].profile_gap < steps[k - 1].profile_gap);
    }
    CHECK(steps.back().profile_gap < 1e-3);
    CHECK_THROWS_AS(perron_recovery(u, kAp, kAm, gammas, 2.0, 1.0), DomainError);
}
