#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "conelab/conformal.hpp"
#include "conelab/errors.hpp"
#include "conelab/separation.hpp"

using namespace conelab;
using doctest::Approx;

namespace {

struct Simons {
    ConeSpec cone = simons_cone();
    DiscreteLink link = build_link_mesh(cone.link, 0);
    double alpha = exponents(link_mu(link, 7, 0.5).mu, 7).alpha_plus;
    Vector one = Vector::Ones(1);
};

} // namespace

TEST_CASE("transform_cone: exponent, constant, quadrature oracle") {
    const Simons s;
    const ConformalCone cc = transform_cone(s.cone, s.link, s.one, s.alpha);
    CHECK(cc.exponent == Approx(0.565685).epsilon(1e-6));
    CHECK(cc.exponent == Approx(1.0 + 2.0 * s.alpha / 5.0).epsilon(1e-15));
    CHECK(cc.K[0] == Approx(5.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-12));
    for (double r : {0.1, 1.0, 3.0}) {
        CHECK(cc.rho(r, 0) == Approx(oracle::conformal_distance(7, 1.0, s.alpha, r)).epsilon(1e-10));
    }
    // Another c and α, still against the quadrature.
    const Vector c2 = Vector::Constant(1, 2.5);
    const ConformalCone c2c = transform_cone(s.cone, s.link, c2, -0.7);
    CHECK(c2c.rho(2.0, 0) == Approx(oracle::conformal_distance(7, 2.5, -0.7, 2.0)).epsilon(1e-10));

    // α = 0: ρ = c^{2/5} r.
    const ConformalCone flat = transform_cone(s.cone, s.link, c2, 0.0);
    CHECK(flat.rho(3.0, 0) == Approx(std::pow(2.5, 0.4) * 3.0).epsilon(1e-14));

    // Homogeneity of the ρ-map.
    for (double tau : {0.2, 5.0}) {
        CHECK(cc.rho(tau * 0.7, 0) == Approx(std::pow(tau, cc.exponent) * cc.rho(0.7, 0)).epsilon(1e-13));
    }
    // Strictly increasing.
    CHECK(cc.rho(0.5, 0) < cc.rho(0.6, 0));
    CHECK(cc.printed_constant == Approx(5.0 / (2.0 * std::abs(s.alpha))));
}

TEST_CASE("transform_cone: infinite diameter threshold") {
    const Simons s;
    CHECK_THROWS_WITH_AS(transform_cone(s.cone, s.link, s.one, -2.5 - 1e-3), doctest::Contains("infinite diameter"),
                         DomainError);
    CHECK_THROWS_WITH_AS(transform_cone(s.cone, s.link, s.one, -2.5), doctest::Contains("infinite diameter"),
                         DomainError);
    CHECK_NOTHROW(transform_cone(s.cone, s.link, s.one, -2.5 + 1e-3));
    CHECK_THROWS_AS(transform_cone(s.cone, s.link, Vector::Constant(1, -1.0), s.alpha), DomainError);
}

TEST_CASE("scal_transformed on the Simons cone: 45 along every ray") {
    const Simons s;
    const ConformalCone cc = transform_cone(s.cone, s.link, s.one, s.alpha);
    const ScalReport rep = scal_transformed(cc, 0.5, {0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0});
    for (const auto& smp : rep.samples) {
        CHECK(smp.scal_rho2 == Approx(45.0).epsilon(1e-9));
        CHECK(smp.scal_numeric * cc.rho(smp.r, 0) * cc.rho(smp.r, 0) == Approx(45.0).epsilon(1e-3));
        CHECK(smp.scal >= 0.0);
    }
    CHECK(rep.ray_variation <= 1e-9);
    CHECK(rep.law_mismatch <= 1e-3);
    CHECK(rep.nonnegative);
    CHECK(rep.zero_flags == 0);
    // Printed prefactor is reported, not asserted; it differs from the law here.
    CHECK(rep.ratio_min > 0.0);
    CHECK(rep.ratio_min == Approx(rep.ratio_max));

    const DiameterIota di = diameter_and_iota(cc, 0.5, 1.0);
    CHECK(di.diameter == Approx(5.0 / (2.0 * std::sqrt(2.0))).epsilon(1e-9));
    CHECK(di.iota == Approx(45.0).epsilon(1e-12));
    CHECK(di.warning.empty());
}

TEST_CASE("scal_transformed refuses data that fail the separated equation") {
    const Simons s;
    const ConformalCone off = transform_cone(s.cone, s.link, s.one, s.alpha + 0.05);
    CHECK_THROWS_WITH_AS(scal_transformed(off, 0.5, {1.0}), doctest::Contains("separated equation"), DomainError);
}

TEST_CASE("circle link with a zero of a(omega)") {
    const ConeSpec cone = make_cone(circle_link([](double w) { return std::abs(std::sin(w)); }, 6), "circ-zero");
    const DiscreteLink link = build_link_mesh(cone.link, 64);
    const LinkSolution sol = link_mu(link, 7, 0.5);
    const ExponentPair e = exponents(sol.mu, 7);
    REQUIRE_FALSE(e.complex);
    const ConformalCone cc = transform_cone(cone, link, sol.c, e.alpha_plus);
    const ScalReport rep = scal_transformed(cc, 0.5, {0.5, 1.0, 2.0});
    CHECK(rep.zero_flags == 2 * 3);   // ω = 0 and ω = π on each radius
    for (const auto& smp : rep.samples) {
        CHECK(smp.scal >= 0.0);
        if (smp.zero_curvature) CHECK(smp.scal == 0.0);
    }
    CHECK(rep.law_mismatch <= 1e-3);
    CHECK(rep.ray_variation <= 1e-9);
    const DiameterIota di = diameter_and_iota(cc, 0.5, 1.0);
    CHECK(di.iota == 0.0);
    CHECK(di.warning.find("redistribution") != std::string::npos);
    CHECK(di.diameter > 0.0);
}
