#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conelab/mesh.hpp"

namespace conelab {

struct SpectralResult {
    double value = 0.0;
    Vector vector;            // principal eigenvector on the unknowns, positive
    double residual = 0.0;    // ‖Au - κMu‖ / (‖Au‖ + |κ|‖Mu‖)
    bool positive = false;    // min > 1e-12 · max over all unknowns
    std::string domain;
    double eps = 0.0;
    double m = 0.0;           // exhaustion index
    double length = 0.0;      // log-radial extent of the domain
    int iterations = 0;
};

struct EigenOptions {
    double tolerance = 1e-10;
    int max_iterations = 500;
};

/// Smallest κ with A u = κ M u for symmetric A and a positive diagonal
/// (lumped) mass M. Shifted inverse iteration: the shift starts at a
/// Gershgorin lower bound and then tracks ρ - 2‖r‖ from below, so every
/// factorization stays positive definite.
SpectralResult principal_eigenpair(const SparseMatrix& A, const SparseMatrix& M,
                                   const EigenOptions& options = {});

inline constexpr double kPositivityThreshold = 1e-12;
bool certify_positive(const Vector& v);

/// £²_ε = ε²/r² + |A|²; stored per node in the same units as the a_sq mass,
/// i.e. the returned mass is P + ε² W.
struct EpsWeight {
    double eps = 0.0;
    Vector samples;   // (a_sq + ε²) per node; the weight itself is samples / r²
};

EpsWeight eps_weight(const OperatorPair& op, const DiscreteLink& link, double eps);
SparseMatrix eps_mass(const OperatorPair& op, double eps);

struct ExhaustionPlan {
    double r_in = 1e-4;
    double r_out = 1e4;
    int grid_size = 4096;
    std::vector<double> m_values{10, 100, 1000, 10000, 100000};
    double outer_scale = 0.1;           // R(m) = outer_scale · m
    std::vector<double> eps_values{0.0};
    int link_resolution = 64;          // circle links only; products use the constant mode
    double monotonicity_tolerance = 1e-10;
    EigenOptions eigen;
};

struct ExhaustionResult {
    std::vector<SpectralResult> levels;   // ordered by (eps as given, m ascending)
    std::vector<double> eps_values;
    std::vector<double> lambda_eps;       // extrapolated in m for each ε
    std::vector<double> lambda_eps_raw;   // largest-domain value for each ε
    double lambda = 0.0;                  // ε → 0 limit
    bool monotone = true;
    bool all_positive = true;
    std::string diagnostic;
};

/// λ_{m,ε} on the nested domains K_m = G_m ∩ {r <= R(m)} cut out of one
/// global log-radial grid, so the discrete spaces are nested exactly.
ExhaustionResult lambda_exhaustion(const ConeSpec& cone, const ExhaustionPlan& plan);

struct StabilityOptions {
    double r_in = 1e-4;
    double r_out = 1e4;
    int grid_size = 2048;
    int link_resolution = 64;          // circle links only; products use the constant mode
    int batch = 32;
    std::uint64_t seed = 1;
};

struct StabilityReport {
    double margin = 0.0;     // min over the batch of ∫|∇f|² / ∫|A|² f²
    double infimum = 0.0;    // principal value of the same quotient
    double infimum_residual = 0.0;
    int batch = 0;
};

StabilityReport stability_check(const ConeSpec& cone, const StabilityOptions& options = {});

} // namespace conelab
