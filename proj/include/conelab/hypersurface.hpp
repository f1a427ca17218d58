#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conelab/separation.hpp"

namespace conelab {

enum class LeafSide { Below, Above, Cone };

/// Profile curve of a hypersurface invariant under O(p+1) × O(q+1) in the
/// quadrant x, y > 0, parametrized by arc length: (x', y') = (cos θ, sin θ).
/// The hypersurface is {(ξ, η) : |ξ| = x, |η| = y}.
struct ProfileCurve {
    int p = 0;
    int q = 0;
    LeafSide side = LeafSide::Cone;
    std::vector<double> s, x, y, theta;
    double slope = 0.0;   // y/x at the last sample

    std::size_t size() const { return s.size(); }
    double r(std::size_t i) const;
};

/// Slope y/x of the cone ray over S^p × S^q.
double cone_slope(int p, int q);

struct ProfileOptions {
    int samples = 4000;       // geometric in s
    double s_start = 1e-3;    // series start, relative to the axis distance
    double tolerance = 1e-12;
};

/// Stationary curve of ∫ x^p y^q ds leaving an axis perpendicularly:
/// Below starts at (x0, 0), Above at (0, x0). Throws NumericalError on blow-up.
ProfileCurve hardt_simon_profile(int p, int q, LeafSide side, double s_max, double x0 = 1.0,
                                 const ProfileOptions& options = {});

/// Straight ray at polar angle `angle`, sampled geometrically in r.
ProfileCurve ray_profile(int p, int q, double angle, double r_min, double r_max, int samples = 4000);
ProfileCurve cone_profile(int p, int q, double r_min, double r_max, int samples = 4000);

ProfileCurve scale_profile(const ProfileCurve& curve, double tau);

struct CurvatureSample {
    double s = 0.0;
    double r = 0.0;
    double kappa = 0.0;     // curve curvature θ'
    double A2 = 0.0;        // |A|² of the hypersurface
    double r2A2 = 0.0;
    double residual = 0.0;  // r · |κ - ∂_ν log(x^p y^q)|, the normalized first variation
};

/// Principal curvatures κ, p × sin θ / x, q × (-cos θ / y); κ by fourth-order
/// differences in the sample index. Throws DomainError on repeated samples.
std::vector<CurvatureSample> profile_curvatures(const ProfileCurve& curve);

/// Max normalized first variation over interior samples.
double stationarity(const ProfileCurve& curve);

void write_profile_csv(std::ostream& out, const ProfileCurve& curve, const std::string& config_hash);

struct InducedOptions {
    double s_inner = 1.0;          // arc length of the zero-data inner boundary
    double band_lo = 1.0;          // reference band in rescaled r
    double band_hi = 4.0;
    double outer_value = 1.0;      // u at the outer end
};

struct InducedStep {
    double tau = 0.0;
    double alpha_hat = 0.0;
    double fit_width = 0.0;
    double norm = 0.0;             // L² norm of u(τ·) on the band before normalization
};

struct InducedRun {
    std::vector<InducedStep> steps;
    double alpha_plus = 0.0;
    bool positive = false;
    std::vector<double> r;         // node radii of the reduced problem
    std::vector<double> u;
};

/// Rotationally reduced Eq. on the truncated hypersurface:
/// -(φ u')' - (c_n + λ)|A|² φ u = 0 with φ = x^p y^q, zero data at s_inner
/// and `outer_value` at the last sample; then zoom x → τ x and fit.
InducedRun induced_solution_experiment(const ProfileCurve& H, const ConeSpec& cone, double lambda,
                                       const std::vector<double>& taus, const InducedOptions& options = {});

nlohmann::json induced_run_to_json(const InducedRun& run);

struct AnnulusDistance {
    double r_in = 0.0;
    double r_out = 0.0;
    double value = 0.0;
    double error = 0.0;   // quadrature error estimate
};

/// ∫∫ x^p y^q between the two curves over r_in <= r <= r_out (polar form).
/// Both curves must be graphs over r covering the annulus.
AnnulusDistance flat_norm_annulus(const ProfileCurve& a, const ProfileCurve& b, double r_in, double r_out,
                                  double tolerance = 1e-10);

} // namespace conelab
