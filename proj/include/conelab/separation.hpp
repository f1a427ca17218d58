#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "conelab/mesh.hpp"

namespace conelab {

/// Roots of α² + (n-2)α + μ = 0. For a negative discriminant the pair holds
/// the common real part and `imag` the imaginary part.
struct ExponentPair {
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    double mu = 0.0;
    int n = 0;
    double discriminant = 0.0;   // ((n-2)/2)² - μ
    bool complex = false;
    double imag = 0.0;
};

ExponentPair exponents(double mu, int n);

struct LinkSolution {
    Vector c;                    // vertex values, ‖c‖_volume = 1, zero outside the domain
    double mu = 0.0;
    double lambda = 0.0;
    int n = 0;
    std::vector<char> domain;    // empty for the closed link
};

/// μ = principal eigenvalue of Δ_S + (c_n + λ) a² with a positive
/// eigenfunction, i.e. (Δ_S + (c_n + λ)a²) c = μ c. A non-empty `dirichlet`
/// mask restricts to the subdomain D with c = 0 outside.
LinkSolution link_mu(const DiscreteLink& link, int n, double lambda,
                     const std::vector<char>& dirichlet = {});

struct AnnulusSpec {
    double r_in = 1.0;
    double r_out = 2.718281828459045;
    int grid_size = 129;
};

struct CwResidual {
    double link = 0.0;      // ‖(α² + (n-2)α) c + (Δ_S + pot) c‖, volume-weighted
    double annulus = 0.0;   // relative residual of c(ω) r^α in the 2D operator
};

CwResidual cw_residual(const ConeSpec& cone, const DiscreteLink& link,
                       const LinkSolution& solution, double alpha, double lambda,
                       const AnnulusSpec& annulus = {});

/// Window in fractions of the log-radial extent of the samples.
struct FitWindow {
    double lo = 0.7;
    double hi = 1.0;
};

struct ExponentFit {
    double alpha = 0.0;
    double width = 0.0;   // standard error of the slope
    int samples = 0;
};

ExponentFit fit_radial_exponent(std::span<const double> r, std::span<const double> u,
                                FitWindow window = {});
/// `u` has one row per radius and one column per link vertex; log u is
/// averaged over the link with the given volumes before the fit.
ExponentFit fit_radial_exponent(std::span<const double> r, const Eigen::MatrixXd& u,
                                std::span<const double> link_volume, FitWindow window = {});

/// λ at which μ(λ) reaches ((n-2)/2)², the last λ with real exponents.
double critical_lambda(const DiscreteLink& link, int n, const std::vector<char>& dirichlet = {});

struct ThetaRow {
    std::string label;
    int n = 0;
    double lambda_crit = 0.0;
    double lambda = 0.0;
    ExponentPair exponents;
    bool inside = false;   // -(n-2)/2 < α₊ < 0
};

struct ThetaBounds {
    int n = 0;
    double theta1 = 0.0;   // smallest α₊ seen for this n
    double theta2 = 0.0;   // largest α₊ seen for this n
    int cones = 0;
};

std::vector<ThetaRow> theta_scan(const std::vector<ConeSpec>& cones, double offset = 0.05,
                                 int link_resolution = 128);
std::vector<ThetaBounds> theta_bounds(const std::vector<ThetaRow>& rows);

struct ComplementMember {
    double half_width = 0.0;
    ExponentPair exponents;
};

/// Dirichlet arcs {|ω - center| < w} of a circle link for each w; both
/// exponent branches are reported.
std::vector<ComplementMember> complement_family(const DiscreteLink& link, int n, double lambda,
                                                double center, const std::vector<double>& half_widths);

} // namespace conelab
