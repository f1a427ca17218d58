#pragma once

#include <limits>
#include <string>
#include <vector>

#include "conelab/mesh.hpp"

namespace conelab {

struct StripOptions {
    int radial = 257;            // radial nodes across the cross-section
    int link_resolution = 0;     // circle links: vertex count (0 → 128)
};

/// Cross-section G_a \ G_1 of the product strip (G_a \ G_1) × ℝ and its
/// principal Dirichlet mode for the unweighted mass.
struct StripResult {
    std::string label;
    double a = 0.0;
    double lambda = 0.0;
    double C_abs = 0.0;
    double gamma = 0.0;
    int refinement = 0;
    int n = 0;

    RadialGrid grid;
    DiscreteLink link;
    std::vector<char> active;    // interior cross-section nodes
    Vector psi;                  // u-values on all nodes, zero off the domain, unit mass
    Vector mass;                 // lumped L² mass for u-values (r^n · weight)
    SparseMatrix A;              // Liouville operator on active nodes
    Vector R2;                   // Liouville mass r² · weight on active nodes
    double residual = 0.0;

    std::size_t size() const { return grid.size() * link.size(); }
    double r_of(std::size_t node) const { return grid.r(node / link.size()); }
};

/// Throws DomainError for a <= 1 and for a non-positive cross-section value
/// ("no exponential dichotomy").
StripResult strip_modes(const ConeSpec& cone, double a, double lambda, const StripOptions& options = {});

/// Samples of a strip solution: rows are t values, columns cross-section nodes
/// (u-values, including the zero boundary nodes).
struct StripField {
    std::vector<double> t;
    Eigen::MatrixXd u;
    double gamma_discrete = 0.0;   // growth rate of the separated mode on this t grid
};

/// Direct solve on (G_a \ G_1) × [-T, T] with u = data_minus / data_plus
/// (u-values per cross-section node) at t = -T / +T.
StripField strip_solve(const StripResult& strip, double T, int nt, const Vector& data_minus,
                       const Vector& data_plus);

/// Samples e^{γt}ψ (sign +1) or e^{-γt}ψ (sign -1) on the given times.
Eigen::MatrixXd strip_generator(const StripResult& strip, const std::vector<double>& t, int sign,
                                double gamma = 0.0);

struct DecomposeOptions {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    double tolerance = 1e-6;
    double gamma = 0.0;          // 0 → strip.gamma
};

struct StripDecomposition {
    double coef_plus = 0.0;
    double coef_minus = 0.0;
    double residual = 0.0;       // relative, on the window
    bool in_span = true;
    std::string diagnostic;
};

StripDecomposition decompose_strip_solution(const std::vector<double>& t, const Eigen::MatrixXd& u,
                                            const StripResult& strip, const DecomposeOptions& options = {});

/// Structured 2D field with a designated face at x = x.front(). A single y
/// value gives the 1D case.
struct GridField {
    std::vector<double> x;
    std::vector<double> y;
    Eigen::MatrixXd u;   // u(i, j) at (x[i], y[j])
};

struct HarnackProbe {
    double constant = 0.0;
    int probes = 0;
};

/// max over the batch and face points p of sup_{B_ρ(p)} u / sup_{B_{ρ²}(x_p)} u,
/// with x_p the point at distance ρ from p along the inward normal.
HarnackProbe boundary_harnack_probe(const std::vector<GridField>& batch, double rho);

/// Field on (r - r_min, t) for a single-vertex strip solution.
GridField strip_field_grid(const StripResult& strip, const StripField& field);

} // namespace conelab
