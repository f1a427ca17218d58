#pragma once

#include <string>
#include <vector>

#include "conelab/mesh.hpp"

namespace conelab {

/// Cone after the conformal change g̃ = ℘^{4/(n-2)} g with ℘ = c(ω) r^α.
/// c lives on the vertices of `link`.
struct ConformalCone {
    ConeSpec base;
    DiscreteLink link;
    Vector c;
    double alpha = 0.0;
    double exponent = 0.0;            // 1 + 2α/(n-2)
    std::vector<double> K;            // per vertex: c^{2/(n-2)} (n-2)/(n-2+2α)
    double printed_constant = 0.0;    // (n-2)/(2|α|), logged for comparison only

    /// Distance from the tip to (r, vertex j) along the ray.
    double rho(double r, std::size_t j) const;
};

/// Throws DomainError("infinite diameter") for α <= -(n-2)/2 and for c <= 0.
ConformalCone transform_cone(const ConeSpec& cone, const DiscreteLink& link, const Vector& c, double alpha);

struct ScalSample {
    double r = 0.0;
    std::size_t vertex = 0;
    double scal = 0.0;            // eigenvalue-substituted law
    double scal_rho2 = 0.0;
    double scal_numeric = 0.0;    // conformal law with a finite-difference Laplacian
    double printed = 0.0;         // printed closed form for comparison
    double ratio = 0.0;           // printed / scal
    bool zero_curvature = false;  // a(ω) = 0 at this vertex
};

struct ScalReport {
    std::vector<ScalSample> samples;
    double cw_residual = 0.0;         // relative link residual of (c, α, λ)
    double ray_variation = 0.0;       // max relative spread of scal·ρ² along a ray
    double law_mismatch = 0.0;        // max relative gap numeric vs substituted
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    bool nonnegative = true;
    int zero_flags = 0;
};

struct ScalOptions {
    double cw_tolerance = 1e-6;
    double fd_step = 1e-4;            // relative radial step for the numeric Laplacian
};

/// Refuses (DomainError) if (c, α, λ) fail the separated link equation.
ScalReport scal_transformed(const ConformalCone& cc, double lambda, const std::vector<double>& radii,
                            const ScalOptions& options = {});

struct DiameterIota {
    double diameter = 0.0;
    double iota = 0.0;
    std::string warning;
};

DiameterIota diameter_and_iota(const ConformalCone& cc, double lambda, double r_max);

} // namespace conelab
