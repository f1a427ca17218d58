#include "conelab/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "conelab/errors.hpp"
#include "conelab/separation.hpp"

namespace conelab {

double ConformalCone::rho(double r, std::size_t j) const {
    if (!(r >= 0.0)) {
        throw DomainError("ConformalCone::rho: r must be nonnegative");
    }
    return K.at(j) * std::pow(r, exponent);
}

ConformalCone transform_cone(const ConeSpec& cone, const DiscreteLink& link, const Vector& c, double alpha) {
    const double nm2 = cone.n - 2.0;
    if (!(alpha > -0.5 * nm2)) {
        std::ostringstream msg;
        msg << "infinite diameter: alpha = " << alpha << " <= -(n-2)/2 = " << -0.5 * nm2;
        throw DomainError(msg.str());
    }
    if (c.size() != static_cast<Eigen::Index>(link.size())) {
        throw DomainError("transform_cone: c does not match the link mesh");
    }
    if (!(c.minCoeff() > 0.0)) {
        throw DomainError("transform_cone: c must be positive");
    }
    ConformalCone cc;
    cc.base = cone;
    cc.link = link;
    cc.c = c;
    cc.alpha = alpha;
    cc.exponent = 1.0 + 2.0 * alpha / nm2;
    cc.K.resize(link.size());
    for (std::size_t j = 0; j < link.size(); ++j) {
        cc.K[j] = std::pow(c[static_cast<Eigen::Index>(j)], 2.0 / nm2) * nm2 / (nm2 + 2.0 * alpha);
    }
    cc.printed_constant = alpha != 0.0 ? nm2 / (2.0 * std::abs(alpha)) : INFINITY;
    return cc;
}

ScalReport scal_transformed(const ConformalCone& cc, double lambda, const std::vector<double>& radii,
                            const ScalOptions& options) {
    const int n = cc.base.n;
    const double nm2 = n - 2.0;
    const DiscreteLink& link = cc.link;

    LinkSolution sol;
    sol.c = cc.c;
    sol.lambda = lambda;
    sol.n = n;
    const CwResidual cw = cw_residual(cc.base, link, sol, cc.alpha, lambda, AnnulusSpec{1.0, 2.0, 3});
    double cnorm = 0.0;
    for (std::size_t j = 0; j < link.size(); ++j) cnorm += link.volume[j] * cc.c[static_cast<Eigen::Index>(j)] * cc.c[static_cast<Eigen::Index>(j)];
    ScalReport rep;
    rep.cw_residual = cw.link / std::sqrt(cnorm);
    if (!(rep.cw_residual <= options.cw_tolerance)) {
        std::ostringstream msg;
        msg << "scal_transformed: (c, alpha, lambda) fail the separated equation, relative residual "
            << rep.cw_residual;
        throw DomainError(msg.str());
    }

    const double law = 4.0 * (n - 1.0) / nm2;
    const double cn = conformal_constant(n);
    const Vector lap_c = link.laplacian(cc.c);
    const double printed_prefactor = cc.alpha != 0.0 ? 4.0 * (n - 1.0) / (2.0 * std::abs(cc.alpha)) : INFINITY;
    rep.ratio_min = INFINITY;
    rep.ratio_max = -INFINITY;
    // Zeros of a(ω) sampled in floating point come out at roundoff size.
    const double a2_floor = 1e-14 * *std::max_element(link.a_sq.begin(), link.a_sq.end());

    for (std::size_t j = 0; j < link.size(); ++j) {
        const double cj = cc.c[static_cast<Eigen::Index>(j)];
        const double a2 = link.a_sq[j];
        double lo = INFINITY, hi = -INFINITY;
        for (double r : radii) {
            if (!(r > 0.0)) {
                throw DomainError("scal_transformed: sample radii must be positive");
            }
            ScalSample s;
            s.r = r;
            s.vertex = j;
            const double wp = cj * std::pow(r, cc.alpha);
            const bool zero = a2 <= a2_floor;
            const double A2 = zero ? 0.0 : a2 / (r * r);
            s.scal = law * lambda * A2 * std::pow(wp, -4.0 / nm2);
            const double rho = cc.rho(r, j);
            s.scal_rho2 = s.scal * rho * rho;

            // Conformal law: ℘^{-(n+2)/(n-2)} (4(n-1)/(n-2)) (-Δ℘ + c_n scal ℘).
            const double h = options.fd_step * r;
            auto f = [&](double t) { return cj * std::pow(t, cc.alpha); };
            const double frr = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
            const double fr = (f(r + h) - f(r - h)) / (2.0 * h);
            const double lap = frr + (n - 1.0) / r * fr + lap_c[static_cast<Eigen::Index>(j)] * std::pow(r, cc.alpha - 2.0);
            const double scal_base = -A2;
            s.scal_numeric = std::pow(wp, -(n + 2.0) / nm2) * law * (-lap + cn * scal_base * wp);

            s.printed = printed_prefactor * lambda * std::pow(cj, 4.0 * (n - 3.0) / nm2) * a2 / (rho * rho);
            s.zero_curvature = zero;
            if (s.zero_curvature) {
                ++rep.zero_flags;
            } else {
                s.ratio = s.printed / s.scal;
                rep.ratio_min = std::min(rep.ratio_min, s.ratio);
                rep.ratio_max = std::max(rep.ratio_max, s.ratio);
            }
            if (s.scal < 0.0) rep.nonnegative = false;
            lo = std::min(lo, s.scal_rho2);
            hi = std::max(hi, s.scal_rho2);
            rep.samples.push_back(s);
        }
        if (!radii.empty() && hi > 0.0) rep.ray_variation = std::max(rep.ray_variation, (hi - lo) / hi);
    }
    // Numeric law vs substituted form, relative to the largest |scal| on the same sphere.
    std::map<double, double> sphere_max;
    for (const auto& s : rep.samples) sphere_max[s.r] = std::max(sphere_max[s.r], std::abs(s.scal));
    for (const auto& s : rep.samples) {
        const double scale = std::max(sphere_max[s.r], 1e-300);
        rep.law_mismatch = std::max(rep.law_mismatch, std::abs(s.scal_numeric - s.scal) / scale);
    }
    if (rep.ratio_min > rep.ratio_max) rep.ratio_min = rep.ratio_max = 0.0;
    return rep;
}

DiameterIota diameter_and_iota(const ConformalCone& cc, double lambda, double r_max) {
    if (!(r_max > 0.0)) {
        throw DomainError("diameter_and_iota: r_max must be positive");
    }
    const int n = cc.base.n;
    const double nm2 = n - 2.0;
    DiameterIota out;
    out.iota = INFINITY;
    const double a2_floor = 1e-14 * *std::max_element(cc.link.a_sq.begin(), cc.link.a_sq.end());
    for (std::size_t j = 0; j < cc.link.size(); ++j) {
        out.diameter = std::max(out.diameter, cc.rho(r_max, j));
        // scal·ρ² is independent of r on each ray.
        const double cj = cc.c[static_cast<Eigen::Index>(j)];
        const double a2 = cc.link.a_sq[j] <= a2_floor ? 0.0 : cc.link.a_sq[j];
        const double v = 4.0 * (n - 1.0) / nm2 * lambda * a2 * std::pow(cj, -4.0 / nm2) * cc.K[j] * cc.K[j];
        out.iota = std::min(out.iota, v);
    }
    if (out.iota <= 0.0) {
        out.iota = 0.0;
        out.warning = "iota = 0: a(omega) vanishes on the link; a positive lower bound would need a "
                      "curvature redistribution deformation, which is not implemented";
    }
    return out;
}

} // namespace conelab
