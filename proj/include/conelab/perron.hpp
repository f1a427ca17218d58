#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conelab/mesh.hpp"
#include "conelab/separation.hpp"

namespace conelab {

/// Dirichlet problem A v = 0 on `active` nodes of a tensor grid with v fixed
/// to `data` elsewhere (Liouville variables v = r^{(n-2)/2} u).
struct DirichletProblem {
    SparseMatrix A;
    std::vector<char> active;
    Vector data;
    RadialGrid grid;
    DiscreteLink link;
    int n = 0;
    double lambda = 0.0;

    /// u = r^{-(n-2)/2} v at node (i, j).
    double to_u(const Vector& v, std::size_t i, std::size_t j) const;
    Eigen::MatrixXd u_matrix(const Vector& v) const;   // rows radial, cols link
};

/// Annulus [r_in, r_out] with zero inner data and outer data f(vertex) on u.
DirichletProblem annulus_problem(const ConeSpec& cone, const DiscreteLink& link, double lambda,
                                 double r_in, double r_out, double max_step,
                                 const std::vector<double>& outer_data);

Vector solve_direct(const DirichletProblem& problem);

struct PerronLevel {
    double eps = 0.0;
    double alpha_hat = 0.0;
    double fit_width = 0.0;
    double coef_a = 0.0;   // coefficient of r^{α₊}
    double coef_b = 0.0;   // coefficient of r^{α₋}
    bool positive = false;
    std::vector<double> r;
    Eigen::MatrixXd u;     // rows radial, cols link
};

struct PerronOptions {
    double r_out = 1.0;
    double max_step = 0.005;
    int link_resolution = 0;
    FitWindow window{};
};

struct PerronRun {
    std::string label;
    double lambda = 0.0;
    ExponentPair exponents;
    std::vector<PerronLevel> levels;
    double decay_exponent = 0.0;   // slope of log|B/A| against log ε
    std::string verdict;
};

/// Dirichlet solutions on the annuli [ε_k, R] with zero inner data: the
/// exhaustion route to the Perron solution.
PerronRun perron_exhaust(const ConeSpec& cone, double lambda, const std::vector<double>& outer_data,
                         const std::vector<double>& eps_ladder, const PerronOptions& options = {});

nlohmann::json perron_run_to_json(const PerronRun& run);

/// Index of a patch whose local solve would increase `u` (or a boundary node
/// below the data), if any.
std::optional<std::size_t> supersolution_violation(const DirichletProblem& problem, const Vector& u);

struct LiftOptions {
    double tolerance = 1e-13;
    long max_sweeps = 2000000;
};

struct LiftResult {
    Vector w;
    long sweeps = 0;
    bool monotone = true;     // no iterate increased anywhere
    double max_increase = 0.0;
    bool positive = false;
};

/// Repeated lifts on single-node patches (3-node in 1D, 3×3 in 2D): each
/// node is replaced by the exact local solution with its neighbours frozen.
/// Starting from a supersolution the sweeps decrease monotonically to the
/// Perron solution of the problem.
LiftResult perron_lift_iterate(const DirichletProblem& problem, const Vector& u0,
                               const LiftOptions& options = {});

struct MinimalityReport {
    double max_violation = 0.0;    // max over the family of (w - s)
    int family = 0;
    bool min_pair_is_supersolution = true;
};

/// Random supersolutions s (solves with nonnegative sources and raised
/// boundary data) compared against w.
MinimalityReport check_minimality(const DirichletProblem& problem, const Vector& w, int family,
                                  std::uint64_t seed);

struct UniquenessOptions {
    double level = 2.449489742783178;   // a, inner boundary at r = a(ω)/a
    double r_start = 64.0;
    int doublings = 3;
    double ref_lo = 1.5;
    double ref_hi = 3.0;
    double max_step = 0.01;
    int link_resolution = 2;
};

struct UniquenessProbe {
    std::vector<double> radii;
    std::vector<double> distances;
    bool positive = true;
    bool decreasing = true;
    std::string verdict;
};

/// Normalized (unit mean on the reference annulus) solutions for two outer
/// data sets on G_a ∩ B_R, compared as R doubles. For product links the data
/// are coefficients of sup-normalized harmonics, one per mode.
UniquenessProbe uniqueness_probe(const ConeSpec& cone, double lambda,
                                 const std::vector<double>& f1, const std::vector<double>& f2,
                                 const UniquenessOptions& options = {});

enum class Criticality { Subcritical, Critical, Supercritical };

struct CriticalityReport {
    Criticality verdict = Criticality::Subcritical;
    ExponentPair exponents;
    std::vector<double> lengths;       // log-radial annulus lengths
    std::vector<double> eigenvalues;   // principal value of the shifted pair
};

CriticalityReport supercritical_check(const ConeSpec& cone, double lambda, int link_resolution = 128,
                                      std::vector<double> lengths = {2, 4, 8, 16, 32, 64});

std::string to_string(Criticality c);

struct RecoveryStep {
    double gamma = 0.0;
    double coef_a = 0.0;
    double coef_b = 0.0;
    double ratio = 0.0;          // B / A in the zoomed picture
    double profile_gap = 0.0;    // sup distance to the pure α₊ profile after normalization
};

/// Zooms u(x) → u(γx) over a fixed band [band_lo, band_hi] and splits the
/// result into r^{α₊} and r^{α₋} parts.
std::vector<RecoveryStep> perron_recovery(const std::function<double(double)>& u, double alpha_plus,
                                          double alpha_minus, const std::vector<double>& gammas,
                                          double band_lo = 1.0, double band_hi = 2.0);

} // namespace conelab
