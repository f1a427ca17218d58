#include "conelab/perron.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/QR>

#include "conelab/errors.hpp"
#include "conelab/spectral.hpp"

namespace conelab {

double DirichletProblem::to_u(const Vector& v, std::size_t i, std::size_t j) const {
    const double k = 0.5 * (n - 2.0);
    return std::exp(-k * grid.s[i]) * v[static_cast<Eigen::Index>(i * link.size() + j)];
}

Eigen::MatrixXd DirichletProblem::u_matrix(const Vector& v) const {
    Eigen::MatrixXd u(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(link.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < link.size(); ++j) {
            u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = to_u(v, i, j);
        }
    }
    return u;
}

DirichletProblem annulus_problem(const ConeSpec& cone, const DiscreteLink& link, double lambda,
                                 double r_in, double r_out, double max_step,
                                 const std::vector<double>& outer_data) {
    if (outer_data.size() != link.size()) {
        throw DomainError("annulus_problem: outer data must have one value per link vertex");
    }
    DirichletProblem prob;
    prob.grid = radial_grid_with_step(r_in, r_out, max_step);
    prob.link = link;
    prob.n = cone.n;
    prob.lambda = lambda;
    const OperatorPair op = assemble_operator(cone, link, prob.grid, lambda);
    prob.A = op.shifted(lambda);
    prob.active = op.free_nodes();
    prob.data = Vector::Zero(static_cast<Eigen::Index>(op.size()));
    const double k = 0.5 * (cone.n - 2.0);
    const std::size_t last = prob.grid.size() - 1;
    const double scale = std::exp(k * prob.grid.s[last]);
    for (std::size_t j = 0; j < link.size(); ++j) {
        prob.data[static_cast<Eigen::Index>(op.index(last, j))] = scale * outer_data[j];
    }
    return prob;
}

Vector solve_direct(const DirichletProblem& problem) {
    return solve_dirichlet(problem.A, problem.active, problem.data);
}

namespace {

bool positive_data(const DiscreteLink& link, const std::vector<double>& f) {
    if (link.kind == LinkKind::ProductOfSpheres || link.kind == LinkKind::SingleModeConstant) {
        // Coefficients of sup-normalized harmonics: positive if the constant
        // mode dominates the rest.
        double rest = 0.0;
        for (std::size_t m = 1; m < f.size(); ++m) rest += std::abs(f[m]);
        return f.at(0) > rest;
    }
    return std::all_of(f.begin(), f.end(), [](double v) { return v > 0.0; });
}

// Projection of each radial row of u onto the link eigenfunction c.
std::vector<double> project_rows(const Eigen::MatrixXd& u, const DiscreteLink& link, const Vector& c) {
    std::vector<double> out(static_cast<std::size_t>(u.rows()));
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
            acc += link.volume[static_cast<std::size_t>(j)] * c[j] * u(i, j);
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

// Least squares u ≈ A r^{α₊} + B r^{α₋} with column scaling.
std::pair<double, double> split_two_exponents(const std::vector<double>& r, const std::vector<double>& u,
                                              double ap, double am) {
    const auto m = static_cast<Eigen::Index>(r.size());
    Eigen::MatrixXd design(m, 2);
    Eigen::VectorXd rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        design(i, 0) = std::pow(r[static_cast<std::size_t>(i)], ap);
        design(i, 1) = std::pow(r[static_cast<std::size_t>(i)], am);
        rhs[i] = u[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector2d scale(design.col(0).cwiseAbs().maxCoeff(), design.col(1).cwiseAbs().maxCoeff());
    design.col(0) /= scale[0];
    design.col(1) /= scale[1];
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
    return {coef[0] / scale[0], coef[1] / scale[1]};
}

} // namespace

PerronRun perron_exhaust(const ConeSpec& cone, double lambda, const std::vector<double>& outer_data,
                         const std::vector<double>& eps_ladder, const PerronOptions& options) {
    const DiscreteLink link = build_link_mesh(cone.link, options.link_resolution);
    if (!positive_data(link, outer_data)) {
        throw DomainError("perron_exhaust: outer data must be positive");
    }
    const LinkSolution principal = link_mu(link, cone.n, lambda);
    PerronRun run;
    run.label = cone.label;
    run.lambda = lambda;
    run.exponents = exponents(principal.mu, cone.n);
    if (run.exponents.complex) {
        throw DomainError("supercritical: complex exponents at lambda = " + std::to_string(lambda));
    }
    for (double eps : eps_ladder) {
        if (!(eps > 0.0 && eps < options.r_out)) {
            throw DomainError("perron_exhaust: need 0 < eps < R");
        }
        const DirichletProblem prob =
            annulus_problem(cone, link, lambda, eps, options.r_out, options.max_step, outer_data);
        const Vector v = solve_direct(prob);
        PerronLevel level;
        level.eps = eps;
        level.u = prob.u_matrix(v);
        level.r.resize(prob.grid.size());
        for (std::size_t i = 0; i < prob.grid.size(); ++i) level.r[i] = prob.grid.r(i);

        const std::vector<double> profile = project_rows(level.u, link, principal.c);
        // Interior positivity (the inner boundary row is zero by construction).
        const Eigen::MatrixXd interior = level.u.middleRows(1, level.u.rows() - 1);
        level.positive = link.kind == LinkKind::CircleWithPotential
                             ? interior.minCoeff() > 0.0
                             : std::all_of(profile.begin() + 1, profile.end(), [](double x) { return x > 0.0; });
        const ExponentFit fit = fit_radial_exponent(level.r, profile, options.window);
        level.alpha_hat = fit.alpha;
        level.fit_width = fit.width;
        std::tie(level.coef_a, level.coef_b) =
            split_two_exponents(level.r, profile, run.exponents.alpha_plus, run.exponents.alpha_minus);
        run.levels.push_back(std::move(level));
    }
    if (run.levels.size() >= 2) {
        std::vector<double> x, y;
        for (const auto& l : run.levels) {
            if (l.coef_a != 0.0 && l.coef_b != 0.0) {
                x.push_back(std::log(l.eps));
                y.push_back(std::log(std::abs(l.coef_b / l.coef_a)));
            }
        }
        if (x.size() >= 2) {
            double mx = 0, my = 0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                mx += x[k];
                my += y[k];
            }
            mx /= static_cast<double>(x.size());
            my /= static_cast<double>(x.size());
            double sxx = 0, sxy = 0;
            for (std::size_t k = 0; k < x.size(); ++k) {
                sxx += (x[k] - mx) * (x[k] - mx);
                sxy += (x[k] - mx) * (y[k] - my);
            }
            run.decay_exponent = sxy / sxx;
        }
    }
    const bool all_positive =
        std::all_of(run.levels.begin(), run.levels.end(), [](const PerronLevel& l) { return l.positive; });
    run.verdict = all_positive ? "subcritical-positive" : "positivity-failed";
    return run;
}

nlohmann::json perron_run_to_json(const PerronRun& run) {
    nlohmann::json j;
    j["label"] = run.label;
    j["lambda"] = run.lambda;
    j["alpha_plus"] = run.exponents.alpha_plus;
    j["alpha_minus"] = run.exponents.alpha_minus;
    j["decay_exponent"] = run.decay_exponent;
    j["verdict"] = run.verdict;
    j["levels"] = nlohmann::json::array();
    for (const auto& l : run.levels) {
        j["levels"].push_back({{"eps", l.eps},
                               {"alpha_hat", l.alpha_hat},
                               {"fit_width", l.fit_width},
                               {"coefA", l.coef_a},
                               {"coefB", l.coef_b}});
    }
    return j;
}

namespace {

void require_m_matrix(const SparseMatrix& a, const std::vector<char>& active) {
    for (int c = 0; c < a.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
            if (!active[static_cast<std::size_t>(it.row())]) continue;
            if (it.row() == it.col() ? it.value() <= 0.0 : it.value() > 0.0) {
                throw DomainError("perron_lift_iterate: operator is not an M-matrix on the domain "
                                  "(refine the grid)");
            }
        }
    }
}

} // namespace

std::optional<std::size_t> supersolution_violation(const DirichletProblem& problem, const Vector& u) {
    const SparseMatrix& a = problem.A;
    if (u.size() != a.rows()) {
        throw DomainError("supersolution_violation: size mismatch");
    }
    // Row-major walk through the symmetric matrix: column c gives row c.
    for (int c = 0; c < a.outerSize(); ++c) {
        const auto node = static_cast<std::size_t>(c);
        if (!problem.active[node]) {
            const double scale = std::max(1.0, std::abs(problem.data[c]));
            if (u[c] < problem.data[c] - 1e-12 * scale) return node;
            continue;
        }
        double value = 0.0, magnitude = 0.0;
        for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
            value += it.value() * u[it.row()];
            magnitude += std::abs(it.value() * u[it.row()]);
        }
        if (value < -1e-12 * magnitude) return node;
    }
    return std::nullopt;
}

LiftResult perron_lift_iterate(const DirichletProblem& problem, const Vector& u0,
                               const LiftOptions& options) {
    if (auto bad = supersolution_violation(problem, u0)) {
        throw DomainError("perron_lift_iterate: initial function is not a supersolution at patch " +
                          std::to_string(*bad));
    }
    require_m_matrix(problem.A, problem.active);
    const SparseMatrix& a = problem.A;   // symmetric: column c holds row c
    LiftResult out;
    out.w = u0;
    // Boundary nodes carry the data exactly.
    for (Eigen::Index k = 0; k < u0.size(); ++k) {
        if (!problem.active[static_cast<std::size_t>(k)]) out.w[k] = problem.data[k];
    }
    const auto idx = active_indices(problem.active);
    for (long sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        double change = 0.0, peak = 0.0;
        for (int node : idx) {
            double diag = 0.0, off = 0.0;
            for (SparseMatrix::InnerIterator it(a, node); it; ++it) {
                if (it.row() == node) {
                    diag = it.value();
                } else {
                    off += it.value() * out.w[it.row()];
                }
            }
            const double lifted = -off / diag;
            const double old = out.w[node];
            if (lifted > old) {
                const double inc = lifted - old;
                out.max_increase = std::max(out.max_increase, inc / std::max(std::abs(old), 1e-300));
                if (inc > 1e-13 * std::abs(old)) out.monotone = false;
            }
            change = std::max(change, std::abs(lifted - old));
            peak = std::max(peak, std::abs(lifted));
            out.w[node] = lifted;
        }
        out.sweeps = sweep;
        if (change <= options.tolerance * peak) break;
        if (sweep == options.max_sweeps) {
            throw NumericalError("perron_lift_iterate: no convergence within the sweep cap");
        }
    }
    double lo = INFINITY;
    for (int node : idx) lo = std::min(lo, out.w[node]);
    out.positive = !idx.empty() && lo > 0.0;
    return out;
}

MinimalityReport check_minimality(const DirichletProblem& problem, const Vector& w, int family,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MinimalityReport rep;
    rep.family = family;
    const auto n = problem.A.rows();
    const auto idx = active_indices(problem.active);
    Vector previous;
    for (int f = 0; f < family; ++f) {
        // s solves A s = ρ >= 0 with data raised by a nonnegative amount.
        Vector data = problem.data;
        const double raise = unit(rng);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (!problem.active[static_cast<std::size_t>(k)]) data[k] += raise * unit(rng) * (1.0 + std::abs(data[k]));
        }
        const Vector base = solve_dirichlet(problem.A, problem.active, data);
        Vector source = Vector::Zero(n);
        const double amp = unit(rng);
        for (int node : idx) source[node] = amp * unit(rng) * std::abs(problem.A.coeff(node, node)) *
                                            (1e-3 + std::abs(w[node]));
        // Particular solution with homogeneous data.
        Vector s = base;
        {
            const SparseMatrix aa = submatrix(problem.A, idx, idx);
            Eigen::SimplicialLDLT<SparseMatrix> ldlt(aa);
            Vector rhs(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t k = 0; k < idx.size(); ++k) rhs[static_cast<Eigen::Index>(k)] = source[idx[k]];
            const Vector x = ldlt.solve(rhs);
            for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] += x[static_cast<Eigen::Index>(k)];
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            rep.max_violation = std::max(rep.max_violation, w[k] - s[k]);
        }
        if (previous.size() == n) {
            const Vector both = previous.cwiseMin(s);
            if (supersolution_violation(problem, both)) rep.min_pair_is_supersolution = false;
        }
        previous = s;
    }
    return rep;
}

namespace {

// Mean of u over the reference annulus, using the constant-mode coefficient
// for product links and volume-weighted averages on circle links.
double reference_mean(const DirichletProblem& prob, const Eigen::MatrixXd& u, const std::vector<std::size_t>& rows) {
    double acc = 0.0, vol = 0.0;
    for (std::size_t i : rows) {
        if (prob.link.kind == LinkKind::CircleWithPotential) {
            for (std::size_t j = 0; j < prob.link.size(); ++j) {
                acc += prob.link.volume[j] * u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                vol += prob.link.volume[j];
            }
        } else {
            acc += u(static_cast<Eigen::Index>(i), 0);
            vol += 1.0;
        }
    }
    return acc / vol;
}

} // namespace

UniquenessProbe uniqueness_probe(const ConeSpec& cone, double lambda,
                                 const std::vector<double>& f1, const std::vector<double>& f2,
                                 const UniquenessOptions& options) {
    const DiscreteLink link = build_link_mesh(cone.link, options.link_resolution);
    if (!positive_data(link, f1) || !positive_data(link, f2)) {
        throw DomainError("uniqueness_probe: outer data must be positive");
    }
    const RegionG g = region_G(cone, options.level);
    if (!(options.ref_lo > g.r_min_hi && options.ref_hi > options.ref_lo && options.r_start > options.ref_hi)) {
        throw DomainError("uniqueness_probe: need r_min < ref_lo < ref_hi < R");
    }
    UniquenessProbe out;
    for (int d = 0; d < options.doublings; ++d) {
        const double radius = options.r_start * std::pow(2.0, d);
        // Fixed log spacing so the grids of successive radii share nodes.
        const double inner = g.r_min_hi;
        const int count = static_cast<int>(std::ceil(std::log(radius / inner) / options.max_step)) + 1;
        DirichletProblem p1 = annulus_problem(cone, link, lambda, inner, radius,
                                              std::log(radius / inner) / (count - 1), f1);
        if (link.kind == LinkKind::CircleWithPotential) {
            // Zero data on ∂G_a: nodes with r < a(ω)/a are fixed to zero too.
            for (std::size_t i = 0; i < p1.grid.size(); ++i) {
                for (std::size_t j = 0; j < link.size(); ++j) {
                    if (p1.grid.r(i) < g.r_min(link.angle[j])) p1.active[i * link.size() + j] = 0;
                }
            }
        }
        DirichletProblem p2 = p1;
        const std::size_t last = p1.grid.size() - 1;
        const double scale = std::exp(0.5 * (cone.n - 2.0) * p1.grid.s[last]);
        for (std::size_t j = 0; j < link.size(); ++j) {
            p2.data[static_cast<Eigen::Index>(last * link.size() + j)] = scale * f2[j];
        }
        const Eigen::MatrixXd u1 = p1.u_matrix(solve_direct(p1));
        const Eigen::MatrixXd u2 = p2.u_matrix(solve_direct(p2));

        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < p1.grid.size(); ++i) {
            const double r = p1.grid.r(i);
            if (r >= options.ref_lo && r <= options.ref_hi) rows.push_back(i);
        }
        if (rows.empty()) {
            throw DomainError("uniqueness_probe: reference annulus holds no grid nodes");
        }
        const double m1 = reference_mean(p1, u1, rows);
        const double m2 = reference_mean(p2, u2, rows);
        if (!(m1 > 0.0 && m2 > 0.0)) out.positive = false;
        double dist = 0.0;
        for (std::size_t i : rows) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (link.kind == LinkKind::CircleWithPotential) {
                for (Eigen::Index j = 0; j < u1.cols(); ++j) {
                    dist = std::max(dist, std::abs(u1(ii, j) / m1 - u2(ii, j) / m2));
                    if (!(u1(ii, j) > 0.0 && u2(ii, j) > 0.0)) out.positive = false;
                }
            } else {
                double sum = 0.0;
                for (Eigen::Index j = 0; j < u1.cols(); ++j) sum += std::abs(u1(ii, j) / m1 - u2(ii, j) / m2);
                dist = std::max(dist, sum);
                if (!(u1(ii, 0) > 0.0 && u2(ii, 0) > 0.0)) out.positive = false;
            }
        }
        out.radii.push_back(radius);
        out.distances.push_back(dist);
    }
    for (std::size_t k = 1; k < out.distances.size(); ++k) {
        if (!(out.distances[k] < out.distances[k - 1])) out.decreasing = false;
    }
    if (!out.positive) {
        out.verdict = "failure: solutions lost positivity (oscillation)";
    } else {
        out.verdict = out.decreasing ? "converging" : "not-decreasing";
    }
    return out;
}

std::string to_string(Criticality c) {
    switch (c) {
        case Criticality::Subcritical: return "subcritical";
        case Criticality::Critical: return "critical";
        case Criticality::Supercritical: return "supercritical";
    }
    return "?";
}

CriticalityReport supercritical_check(const ConeSpec& cone, double lambda, int link_resolution,
                                      std::vector<double> lengths) {
    // Only the principal (constant) mode matters on a product link.
    const bool product = cone.link.kind == LinkKind::ProductOfSpheres;
    const DiscreteLink link = build_link_mesh(cone.link, product ? 0 : link_resolution);
    const LinkSolution sol = link_mu(link, cone.n, lambda);
    CriticalityReport rep;
    rep.exponents = exponents(sol.mu, cone.n);
    const double tol = 1e-9 * std::max(1.0, hardy_constant(cone.n));
    if (rep.exponents.discriminant > tol) {
        rep.verdict = Criticality::Subcritical;
    } else if (rep.exponents.discriminant >= -tol) {
        rep.verdict = Criticality::Critical;
    } else {
        rep.verdict = Criticality::Supercritical;
    }
    for (double len : lengths) {
        const RadialGrid grid = radial_grid_with_step(1.0, std::exp(len), 0.02);
        const OperatorPair op = assemble_operator(cone, link, grid, lambda);
        const auto idx = active_indices(op.free_nodes());
        const SpectralResult r =
            principal_eigenpair(submatrix(op.shifted(lambda), idx, idx), submatrix(op.P, idx, idx));
        rep.lengths.push_back(len);
        rep.eigenvalues.push_back(r.value);
    }
    return rep;
}

std::vector<RecoveryStep> perron_recovery(const std::function<double(double)>& u, double alpha_plus,
                                          double alpha_minus, const std::vector<double>& gammas,
                                          double band_lo, double band_hi) {
    if (!(band_lo > 0.0 && band_hi > band_lo)) {
        throw DomainError("perron_recovery: invalid band");
    }
    constexpr int samples = 65;
    std::vector<double> r(samples);
    for (int k = 0; k < samples; ++k) {
        r[k] = band_lo * std::pow(band_hi / band_lo, static_cast<double>(k) / (samples - 1));
    }
    std::vector<RecoveryStep> out;
    for (double gamma : gammas) {
        std::vector<double> vals(samples);
        for (int k = 0; k < samples; ++k) vals[k] = u(gamma * r[k]);
        RecoveryStep step;
        step.gamma = gamma;
        std::tie(step.coef_a, step.coef_b) = split_two_exponents(r, vals, alpha_plus, alpha_minus);
        step.ratio = step.coef_b / step.coef_a;
        // L²-normalize both profiles on the band and compare pointwise.
        double nu = 0.0, np = 0.0;
        for (int k = 0; k < samples; ++k) {
            nu += vals[k] * vals[k];
            const double p = std::pow(r[k], alpha_plus);
            np += p * p;
        }
        nu = std::sqrt(nu);
        np = std::sqrt(np);
        double gap = 0.0;
        for (int k = 0; k < samples; ++k) {
            gap = std::max(gap, std::abs(vals[k] / nu - std::pow(r[k], alpha_plus) / np));
        }
        step.profile_gap = gap;
        out.push_back(step);
    }
    return out;
}

} // namespace conelab
