#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "conelab/errors.hpp"
#include "conelab/spectral.hpp"

using namespace conelab;
using doctest::Approx;

namespace {

ConeSpec cos2_cone() {
    return make_cone(circle_link([](double w) { return 1.0 + std::cos(w) * std::cos(w); }, 6), "circ");
}

struct Restricted {
    SparseMatrix A, P, W;
};

Restricted restrict_free(const OperatorPair& op, double shift) {
    const auto idx = active_indices(op.free_nodes());
    return {submatrix(op.shifted(shift), idx, idx), submatrix(op.P, idx, idx), submatrix(op.W, idx, idx)};
}

// Closed-form λ of a constant-weight cone on a log-annulus of length L.
double closed_lambda(int n, double a2, double L) {
    return oracle::sturm_liouville(n, L, conformal_constant(n) * a2) / a2;
}

} // namespace

TEST_CASE("principal_eigenpair: Sturm-Liouville with constant potential") {
    const ConeSpec cone = simons_cone();
    const DiscreteLink link = build_link_mesh(cone.link, 0);
    const double L = 2.0;
    for (double c : {0.0, 0.3, 1.0}) {
        const OperatorPair op = assemble_operator(cone, link, radial_grid(1.0, std::exp(L), 65), 0.0);
        const auto idx = active_indices(op.free_nodes());
        const SparseMatrix A = submatrix(SparseMatrix(op.A0 - c * op.P), idx, idx);
        const SpectralResult r = principal_eigenpair(A, submatrix(op.W, idx, idx));
        CHECK(r.value == Approx(oracle::sturm_liouville_discrete(7, L, 6.0 * c, 63)).epsilon(1e-10));
        CHECK(r.value == Approx(oracle::sturm_liouville(7, L, 6.0 * c)).epsilon(1e-3));
        CHECK(r.residual <= 1e-9);
        CHECK(r.positive);
    }
}

TEST_CASE("principal_eigenpair: identity mass against the dense solver") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int N = 8 + 6 * trial;   // up to 62 unknowns
        // Random symmetric M-matrix-like operator: tridiagonal plus a few couplings.
        SparseMatrix A(N, N);
        std::vector<Eigen::Triplet<double>> t;
        for (int i = 0; i < N; ++i) {
            t.emplace_back(i, i, 3.0 + u(rng));
            if (i + 1 < N) {
                const double off = -0.5 - 0.4 * std::abs(u(rng));
                t.emplace_back(i, i + 1, off);
                t.emplace_back(i + 1, i, off);
            }
        }
        A.setFromTriplets(t.begin(), t.end());
        SparseMatrix I(N, N);
        I.setIdentity();
        const SpectralResult r = principal_eigenpair(A, I);
        CHECK(r.value == Approx(oracle::dense_min(Eigen::MatrixXd(A))).epsilon(1e-8).scale(1.0));
        // Localized ground states can dip below the certification threshold;
        // the sign structure must still be strict.
        CHECK(r.vector.minCoeff() > 0.0);
    }
}

TEST_CASE("principal_eigenpair: sparse vs dense on small discretized instances") {
    const ConeSpec circ = cos2_cone();
    const ConeSpec simons = simons_cone();
    int instances = 0;
    for (double lam : {0.0, 0.5, 1.2}) {
        // circle link, 8 vertices x 8 interior radial nodes
        {
            const DiscreteLink link = build_link_mesh(circ.link, 8);
            const OperatorPair op = assemble_operator(circ, link, radial_grid(0.5, 4.0, 10), lam);
            const auto m = restrict_free(op, lam);
            for (const SparseMatrix* M : {&m.P, &m.W}) {
                REQUIRE(m.A.rows() <= 64);
                const double dense = oracle::dense_min_generalized(Eigen::MatrixXd(m.A), Eigen::MatrixXd(*M));
                CHECK(principal_eigenpair(m.A, *M).value == Approx(dense).epsilon(1e-8));
                ++instances;
            }
        }
        // product modes up to degree 2 (6 modes) x 10 radial nodes
        {
            const DiscreteLink link = build_link_mesh(simons.link, 2);
            const OperatorPair op = assemble_operator(simons, link, radial_grid(0.1, 10.0, 12), lam);
            const auto m = restrict_free(op, lam);
            REQUIRE(m.A.rows() <= 64);
            const double dense = oracle::dense_min_generalized(Eigen::MatrixXd(m.A), Eigen::MatrixXd(m.P));
            CHECK(principal_eigenpair(m.A, m.P).value == Approx(dense).epsilon(1e-8));
            ++instances;
        }
    }
    CHECK(instances == 9);
}

TEST_CASE("principal_eigenpair: O(h^2) under doubling and contract errors") {
    const ConeSpec cone = simons_cone();
    const DiscreteLink link = build_link_mesh(cone.link, 0);
    std::vector<double> values;
    for (int N : {41, 81, 161}) {
        const auto m = restrict_free(assemble_operator(cone, link, radial_grid(1.0, std::exp(4.0), N), 0.0), 0.0);
        values.push_back(principal_eigenpair(m.A, m.P).value);
    }
    const double ratio = (values[0] - values[1]) / (values[1] - values[2]);
    CHECK(ratio == Approx(4.0).epsilon(0.05));

    SparseMatrix A(2, 2), M(2, 2);
    A.setIdentity();
    M.insert(0, 0) = 1.0;
    M.insert(0, 1) = 0.5;
    M.insert(1, 0) = 0.5;
    M.insert(1, 1) = 1.0;
    CHECK_THROWS_AS(principal_eigenpair(A, M), DomainError);
    SparseMatrix Z(2, 2);
    Z.insert(0, 0) = 1.0;
    CHECK_THROWS_AS(principal_eigenpair(A, Z), DomainError);

    // Iteration cap reached: reported with the residual.
    const auto m = restrict_free(assemble_operator(cone, link, radial_grid(1.0, 100.0, 200), 0.0), 0.0);
    EigenOptions tight;
    tight.tolerance = 1e-14;
    tight.max_iterations = 1;
    CHECK_THROWS_WITH_AS(principal_eigenpair(m.A, m.P, tight), doctest::Contains("residual"), NumericalError);
}

TEST_CASE("eps weights") {
    const ConeSpec cone = simons_cone();
    const DiscreteLink link = build_link_mesh(cone.link, 0);
    const OperatorPair op = assemble_operator(cone, link, radial_grid(1.0, 10.0, 16), 0.0);
    const EpsWeight w0 = eps_weight(op, link, 0.0);
    const EpsWeight w1 = eps_weight(op, link, 1.5);
    for (Eigen::Index k = 0; k < w0.samples.size(); ++k) {
        CHECK(w0.samples[k] == Approx(6.0));
        CHECK(w1.samples[k] >= w0.samples[k]);
    }
    CHECK((Eigen::MatrixXd(eps_mass(op, 0.0)) - Eigen::MatrixXd(op.P)).norm() == 0.0);
    CHECK_THROWS_AS(eps_mass(op, -1.0), DomainError);
}

TEST_CASE("lambda_exhaustion on the Simons cone") {
    ExhaustionPlan plan;
    plan.grid_size = 2048;
    plan.m_values = {10, 100, 1000};
    plan.eps_values = {0.0, 1.0};
    const ExhaustionResult res = lambda_exhaustion(simons_cone(), plan);
    CHECK(res.monotone);
    CHECK(res.all_positive);
    REQUIRE(res.levels.size() == 6);
    for (const auto& l : res.levels) {
        // Each level equals the closed form of its own log-annulus.
        const double a2 = 6.0 + l.eps * l.eps;
        const double k = 2.5, cn = conformal_constant(7);
        const double expected = (k * k + std::pow(std::numbers::pi / l.length, 2) - cn * 6.0) / a2;
        CHECK(l.value == Approx(expected).epsilon(1e-4));
    }
    for (std::size_t k = 1; k < 3; ++k) CHECK(res.levels[k].value <= res.levels[k - 1].value);
    CHECK(res.lambda_eps[0] == Approx(5.0 / 6.0).epsilon(1e-3));
    CHECK(res.lambda_eps[1] == Approx(5.0 / 7.0).epsilon(1e-3));
    CHECK(res.lambda == Approx(5.0 / 6.0).epsilon(1e-3));
    CHECK(closed_lambda(7, 6.0, 1e9) == Approx(5.0 / 6.0));
}

TEST_CASE("lambda_exhaustion: eps -> 0 by Richardson and input checks") {
    ExhaustionPlan plan;
    plan.grid_size = 1024;
    plan.m_values = {100, 1000};
    plan.eps_values = {0.2, 0.1};
    const ExhaustionResult res = lambda_exhaustion(simons_cone(), plan);
    CHECK(res.lambda == Approx(5.0 / 6.0).epsilon(2e-3));
    CHECK(std::abs(res.lambda - 5.0 / 6.0) < std::abs(res.lambda_eps[1] - 5.0 / 6.0));

    ExhaustionPlan bad = plan;
    bad.m_values = {100, 10};
    CHECK_THROWS_AS(lambda_exhaustion(simons_cone(), bad), DomainError);
    bad = plan;
    bad.eps_values = {-1.0};
    CHECK_THROWS_AS(lambda_exhaustion(simons_cone(), bad), DomainError);
}

TEST_CASE("lambda_exhaustion on a circle link is monotone and positive") {
    ExhaustionPlan plan;
    plan.grid_size = 256;
    plan.r_in = 1e-2;
    plan.r_out = 1e2;
    plan.m_values = {10, 30, 100};
    plan.outer_scale = 1.0;
    plan.link_resolution = 16;
    const ExhaustionResult res = lambda_exhaustion(cos2_cone(), plan);
    CHECK(res.monotone);
    CHECK(res.all_positive);
    for (const auto& l : res.levels) CHECK(l.residual <= 1e-9);
}

TEST_CASE("stability_check on the Simons cone") {
    StabilityOptions opt;
    opt.r_in = 1e-12;
    opt.r_out = 1e12;
    opt.grid_size = 4096;
    const StabilityReport rep = stability_check(simons_cone(), opt);
    CHECK(rep.infimum == Approx(25.0 / 24.0).epsilon(1e-3));
    CHECK(rep.infimum > 25.0 / 24.0);
    CHECK(rep.margin >= rep.infimum - 1e-9);
    CHECK(rep.margin >= 1.0);
    CHECK(rep.batch == 32);

    // Scaled domain, same log-length and resolution: same numbers.
    StabilityOptions scaled = opt;
    scaled.r_in *= 1e3;
    scaled.r_out *= 1e3;
    const StabilityReport rs = stability_check(simons_cone(), scaled);
    CHECK(rs.infimum == Approx(rep.infimum).epsilon(1e-10));
    CHECK(rs.margin == Approx(rep.margin).epsilon(1e-8));

    CHECK_THROWS_WITH_AS(stability_check(make_cone(single_mode_link(6, 0.0), "zero")),
                         doctest::Contains("degenerate weight"), DomainError);
}
