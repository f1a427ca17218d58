#include "conelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "conelab/errors.hpp"

namespace conelab {

namespace {

struct ShiftSolver {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    double shift = 0.0;

    void factor(const SparseMatrix& A, const SparseMatrix& M, double sigma) {
        shift = sigma;
        SparseMatrix k = A - sigma * M;
        ldlt.compute(k);
        if (ldlt.info() != Eigen::Success) {
            throw NumericalError("principal_eigenpair: shifted factorization failed");
        }
    }
};

double relative_residual(const SparseMatrix& A, const Vector& d, const Vector& x, double kappa) {
    const Vector ax = A * x;
    const Vector mx = d.cwiseProduct(x);
    const double denom = ax.norm() + std::abs(kappa) * mx.norm();
    if (denom == 0.0) return 0.0;
    return (ax - kappa * mx).norm() / denom;
}

} // namespace

bool certify_positive(const Vector& v) {
    if (v.size() == 0) return false;
    const double hi = v.maxCoeff();
    const double lo = v.minCoeff();
    return hi > 0.0 && lo > kPositivityThreshold * hi;
}

SpectralResult principal_eigenpair(const SparseMatrix& A, const SparseMatrix& M,
                                   const EigenOptions& options) {
    const Eigen::Index n = A.rows();
    if (n == 0 || A.cols() != n || M.rows() != n || M.cols() != n) {
        throw DomainError("principal_eigenpair: incompatible matrices");
    }
    if (!is_diagonal(M)) {
        throw DomainError("principal_eigenpair: mass matrix must be lumped (diagonal)");
    }
    const Vector d = M.diagonal();
    if (d.minCoeff() <= 0.0) {
        throw DomainError("principal_eigenpair: mass must be positive definite");
    }

    SpectralResult out;
    if (n == 1) {
        out.value = A.coeff(0, 0) / d[0];
        out.vector = Vector::Ones(1);
        out.residual = 0.0;
        out.positive = true;
        return out;
    }

    // Gershgorin bounds for M^{-1/2} A M^{-1/2}.
    double lower = std::numeric_limits<double>::infinity();
    double upper = -lower;
    {
        Vector diag = Vector::Zero(n);
        Vector off = Vector::Zero(n);
        for (int c = 0; c < A.outerSize(); ++c) {
            for (SparseMatrix::InnerIterator it(A, c); it; ++it) {
                if (it.row() == it.col()) {
                    diag[it.row()] += it.value();
                } else {
                    off[it.row()] += std::abs(it.value()) / std::sqrt(d[it.row()] * d[it.col()]);
                }
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            lower = std::min(lower, diag[i] / d[i] - off[i]);
            upper = std::max(upper, diag[i] / d[i] + off[i]);
        }
    }
    const double spread = std::max(upper - lower, 1e-300);
    double sigma = lower - 1e-2 * std::max({1.0, std::abs(lower), 1e-6 * spread});

    ShiftSolver solver;
    solver.factor(A, M, sigma);

    Vector x = Vector::Ones(n);
    x /= std::sqrt(x.dot(d.cwiseProduct(x)));
    double rho = 0.0;
    double rel = 1.0;
    double last_refactor_residual = std::numeric_limits<double>::infinity();
    double best_rel = std::numeric_limits<double>::infinity();
    int stagnant = 0;

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        Vector y = solver.ldlt.solve(d.cwiseProduct(x));
        if (!y.allFinite()) {
            throw NumericalError("principal_eigenpair: non-finite iterate");
        }
        x = y / std::sqrt(y.dot(d.cwiseProduct(y)));
        const Vector ax = A * x;
        rho = x.dot(ax);   // x is M-normalized
        const Vector res = ax - rho * d.cwiseProduct(x);
        const double res_m = std::sqrt(res.dot(res.cwiseQuotient(d)));
        rel = relative_residual(A, d, x, rho);
        out.iterations = iter;
        if (rel <= options.tolerance) break;

        if (rel < 0.5 * best_rel) {
            best_rel = rel;
            stagnant = 0;
        } else if (++stagnant > 20) {
            break;
        }
        // Move the shift up to a certified lower bound once the iterate is good.
        if (res_m < 1e-2 * last_refactor_residual) {
            const double candidate = rho - 2.0 * res_m;
            if (candidate > solver.shift) {
                solver.factor(A, M, candidate);
                last_refactor_residual = res_m;
            }
        }
    }
    if (x.sum() < 0.0) x = -x;
    out.value = rho;
    out.vector = x;
    out.residual = rel;
    out.positive = certify_positive(x);
    if (!(rel <= std::max(options.tolerance, 1e-9))) {
        std::ostringstream msg;
        msg << "principal_eigenpair: no convergence after " << out.iterations
            << " iterations, relative residual " << rel;
        throw NumericalError(msg.str());
    }
    return out;
}

EpsWeight eps_weight(const OperatorPair& op, const DiscreteLink& link, double eps) {
    if (!(eps >= 0.0)) {
        throw DomainError("eps_weight: eps must be >= 0");
    }
    EpsWeight w;
    w.eps = eps;
    w.samples.resize(static_cast<Eigen::Index>(op.size()));
    for (std::size_t i = 0; i < op.radial_size; ++i) {
        for (std::size_t j = 0; j < op.link_size; ++j) {
            w.samples[static_cast<Eigen::Index>(op.index(i, j))] = link.a_sq[j] + eps * eps;
        }
    }
    return w;
}

SparseMatrix eps_mass(const OperatorPair& op, double eps) {
    if (!(eps >= 0.0)) {
        throw DomainError("eps_mass: eps must be >= 0");
    }
    SparseMatrix m = op.P + (eps * eps) * op.W;
    return m;
}

namespace {

struct Domain {
    std::vector<char> active;
    double length = 0.0;
};

// K_m: interior grid nodes with r_min(ω; m) <= r <= R(m).
Domain exhaustion_domain(const ConeSpec& cone, const DiscreteLink& link, const RadialGrid& grid,
                         double m, double outer_scale) {
    const RegionG g = region_G(cone, m);
    const double log_outer = std::log(outer_scale * m);
    Domain dom;
    const std::size_t nr = grid.size();
    const std::size_t nl = link.size();
    dom.active.assign(nr * nl, 0);
    std::size_t widest = 0;
    for (std::size_t j = 0; j < nl; ++j) {
        const double omega = link.angle.empty() ? 0.0 : link.angle[j];
        const double rmin = g.r_min(omega);
        const double log_inner = rmin > 0.0 ? std::log(rmin) : -INFINITY;
        std::size_t count = 0;
        for (std::size_t i = 1; i + 1 < nr; ++i) {
            const double s = grid.s[i];
            if (s >= log_inner - 1e-12 && s <= log_outer + 1e-12) {
                dom.active[i * nl + j] = 1;
                ++count;
            }
        }
        widest = std::max(widest, count);
    }
    dom.length = grid.h * static_cast<double>(widest + 1);
    return dom;
}

double extrapolate_inverse_square(double l1, double v1, double l2, double v2) {
    const double a = l1 * l1;
    const double b = l2 * l2;
    if (b == a) return v2;
    return (b * v2 - a * v1) / (b - a);
}

} // namespace

namespace {

// Product links with constant a² decouple mode by mode and the principal
// mode is the constant one, so the resolution only matters for circles.
DiscreteLink spectral_link(const ConeSpec& cone, int resolution) {
    if (cone.link.kind == LinkKind::ProductOfSpheres) return build_link_mesh(cone.link, 0);
    return build_link_mesh(cone.link, resolution);
}

} // namespace

ExhaustionResult lambda_exhaustion(const ConeSpec& cone, const ExhaustionPlan& plan) {
    if (plan.m_values.empty() || plan.eps_values.empty()) {
        throw DomainError("lambda_exhaustion: empty m or eps ladder");
    }
    for (std::size_t k = 1; k < plan.m_values.size(); ++k) {
        if (!(plan.m_values[k] > plan.m_values[k - 1])) {
            throw DomainError("lambda_exhaustion: m ladder must increase");
        }
    }
    for (double e : plan.eps_values) {
        if (!(e >= 0.0)) throw DomainError("lambda_exhaustion: eps must be >= 0");
    }
    const DiscreteLink link = spectral_link(cone, plan.link_resolution);
    const RadialGrid grid = radial_grid(plan.r_in, plan.r_out, plan.grid_size);
    const OperatorPair op = assemble_operator(cone, link, grid, 0.0);
    const SparseMatrix A = op.shifted(0.0);

    ExhaustionResult out;
    out.eps_values = plan.eps_values;
    std::vector<Domain> domains;
    for (double m : plan.m_values) {
        domains.push_back(exhaustion_domain(cone, link, grid, m, plan.outer_scale));
    }

    for (double eps : plan.eps_values) {
        const SparseMatrix M = eps_mass(op, eps);
        std::vector<SpectralResult> run;
        for (std::size_t k = 0; k < plan.m_values.size(); ++k) {
            const auto idx = active_indices(domains[k].active);
            if (idx.empty()) {
                throw DomainError("lambda_exhaustion: K_m contains no grid nodes");
            }
            SpectralResult res = principal_eigenpair(submatrix(A, idx, idx), submatrix(M, idx, idx),
                                                     plan.eigen);
            res.eps = eps;
            res.m = plan.m_values[k];
            res.length = domains[k].length;
            std::ostringstream name;
            name << cone.label << ":K_m(m=" << res.m << ")";
            res.domain = name.str();
            if (!res.positive) out.all_positive = false;
            if (!run.empty() && res.value > run.back().value + plan.monotonicity_tolerance) {
                out.monotone = false;
                std::ostringstream msg;
                msg << "discretization failure: lambda increased from m=" << run.back().m
                    << " to m=" << res.m << " at eps=" << eps;
                out.diagnostic = msg.str();
            }
            run.push_back(std::move(res));
        }
        double limit = run.back().value;
        if (run.size() >= 2) {
            const auto& a = run[run.size() - 2];
            const auto& b = run.back();
            if (b.length > a.length) {
                limit = extrapolate_inverse_square(a.length, a.value, b.length, b.value);
            }
        }
        out.lambda_eps.push_back(limit);
        out.lambda_eps_raw.push_back(run.back().value);
        for (auto& r : run) out.levels.push_back(std::move(r));
    }

    // ε → 0: use ε = 0 directly when present, otherwise Richardson in ε².
    std::vector<std::size_t> order(plan.eps_values.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return plan.eps_values[a] < plan.eps_values[b]; });
    const double e1 = plan.eps_values[order[0]];
    if (e1 == 0.0 || order.size() == 1) {
        out.lambda = out.lambda_eps[order[0]];
    } else {
        const double e2 = plan.eps_values[order[1]];
        const double v1 = out.lambda_eps[order[0]];
        const double v2 = out.lambda_eps[order[1]];
        out.lambda = (e2 * e2 * v1 - e1 * e1 * v2) / (e2 * e2 - e1 * e1);
    }
    if (!out.all_positive && out.diagnostic.empty()) {
        out.diagnostic = "positivity certificate failed on some level";
    }
    return out;
}

StabilityReport stability_check(const ConeSpec& cone, const StabilityOptions& options) {
    const DiscreteLink link = spectral_link(cone, options.link_resolution);
    const RadialGrid grid = radial_grid(options.r_in, options.r_out, options.grid_size);
    const OperatorPair op = assemble_operator(cone, link, grid, 0.0);
    const auto idx = active_indices(op.free_nodes());
    const SparseMatrix A = submatrix(op.A0, idx, idx);
    const SparseMatrix P = submatrix(op.P, idx, idx);

    StabilityReport report;
    const SpectralResult principal = principal_eigenpair(A, P);
    report.infimum = principal.value;
    report.infimum_residual = principal.residual;

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double s0 = grid.s.front();
    const double length = grid.length();
    const std::size_t nl = link.size();
    double margin = std::numeric_limits<double>::infinity();
    for (int b = 0; b < options.batch; ++b) {
        // Random smooth compactly supported test function: a few Gaussian
        // bumps in s times a smooth link profile, cut off at the grid ends.
        const int bumps = 1 + static_cast<int>(unit(rng) * 3.0);
        std::vector<double> centers, widths, amps;
        for (int k = 0; k < bumps; ++k) {
            centers.push_back(s0 + length * (0.2 + 0.6 * unit(rng)));
            widths.push_back(length * (0.05 + 0.3 * unit(rng)));
            amps.push_back(0.5 + unit(rng));
        }
        std::vector<double> link_profile(nl);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        const double ripple = 0.5 * unit(rng);
        for (std::size_t j = 0; j < nl; ++j) {
            const double omega = link.angle.empty() ? 0.0 : link.angle[j];
            link_profile[j] = link.angle.empty()
                                  ? (j == 0 ? 1.0 : ripple * (unit(rng) - 0.5))
                                  : 1.0 + ripple * std::cos(omega + phase);
        }
        Vector f(static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) {
            const std::size_t node = static_cast<std::size_t>(idx[k]);
            const std::size_t i = node / nl;
            const std::size_t j = node % nl;
            const double s = grid.s[i];
            double radial = 0.0;
            for (int q = 0; q < bumps; ++q) {
                const double z = (s - centers[q]) / widths[q];
                radial += amps[q] * std::exp(-z * z);
            }
            radial *= std::sin(std::numbers::pi * (s - s0) / length);
            f[static_cast<Eigen::Index>(k)] = radial * link_profile[j];
        }
        const double num = f.dot(A * f);
        const double den = f.dot(P * f);
        margin = std::min(margin, num / den);
    }
    report.margin = margin;
    report.batch = options.batch;
    return report;
}

} // namespace conelab
