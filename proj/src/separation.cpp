#include "conelab/separation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "conelab/errors.hpp"
#include "conelab/spectral.hpp"

namespace conelab {

ExponentPair exponents(double mu, int n) {
    if (n < 3) {
        throw DomainError("exponents: n must be >= 3");
    }
    ExponentPair e;
    e.mu = mu;
    e.n = n;
    const double k = 0.5 * (n - 2.0);
    e.discriminant = k * k - mu;
    if (e.discriminant < 0.0) {
        e.complex = true;
        e.imag = std::sqrt(-e.discriminant);
        e.alpha_plus = e.alpha_minus = -k;
        return e;
    }
    const double root = std::sqrt(e.discriminant);
    e.alpha_minus = -k - root;
    // Vieta keeps α₊ accurate when μ is small.
    e.alpha_plus = e.alpha_minus != 0.0 ? mu / e.alpha_minus : -k + root;
    return e;
}

LinkSolution link_mu(const DiscreteLink& link, int n, double lambda,
                     const std::vector<char>& dirichlet) {
    if (!std::isfinite(lambda)) {
        throw DomainError("link_mu: lambda must be finite");
    }
    const auto nl = static_cast<int>(link.size());
    std::vector<char> active(nl, 1);
    if (!dirichlet.empty()) {
        if (static_cast<int>(dirichlet.size()) != nl) {
            throw DomainError("link_mu: Dirichlet mask size mismatch");
        }
        active = dirichlet;
    }
    const auto idx = active_indices(active);
    if (idx.empty()) {
        throw DomainError("link_mu: empty Dirichlet domain");
    }
    const double pot = conformal_constant(n) + lambda;
    std::vector<Eigen::Triplet<double>> mt;
    std::vector<Eigen::Triplet<double>> wt;
    for (int j = 0; j < nl; ++j) {
        mt.emplace_back(j, j, -pot * link.a_sq[j] * link.volume[j]);
        wt.emplace_back(j, j, link.volume[j]);
    }
    SparseMatrix potential(nl, nl), mass(nl, nl);
    potential.setFromTriplets(mt.begin(), mt.end());
    mass.setFromTriplets(wt.begin(), wt.end());
    // -(Δ_S + pot) in weak form.
    const SparseMatrix op = link.stiffness + potential;
    const SpectralResult r = principal_eigenpair(submatrix(op, idx, idx), submatrix(mass, idx, idx));

    LinkSolution sol;
    sol.mu = -r.value;
    sol.lambda = lambda;
    sol.n = n;
    sol.domain = dirichlet;
    sol.c = Vector::Zero(nl);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        sol.c[idx[k]] = r.vector[static_cast<Eigen::Index>(k)];
        norm2 += link.volume[idx[k]] * sol.c[idx[k]] * sol.c[idx[k]];
    }
    sol.c /= std::sqrt(norm2);
    return sol;
}

CwResidual cw_residual(const ConeSpec& cone, const DiscreteLink& link,
                       const LinkSolution& solution, double alpha, double lambda,
                       const AnnulusSpec& annulus) {
    const int n = cone.n;
    const auto nl = static_cast<Eigen::Index>(link.size());
    if (solution.c.size() != nl) {
        throw DomainError("cw_residual: link solution does not match mesh");
    }
    std::vector<char> active(static_cast<std::size_t>(nl), 1);
    if (!solution.domain.empty()) active = solution.domain;

    const double pot = conformal_constant(n) + lambda;
    const double quad = alpha * alpha + (n - 2.0) * alpha;
    // Outside a Dirichlet domain c is zero, so the full stiffness applies.
    const Vector lap = link.laplacian(solution.c);
    CwResidual out;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < nl; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        const double res = quad * solution.c[j] + lap[j] + pot * link.a_sq[j] * solution.c[j];
        acc += link.volume[j] * res * res;
    }
    out.link = std::sqrt(acc);

    // c(ω) r^α in Liouville form v = r^{(n-2)/2} u = c(ω) e^{(α + (n-2)/2) s}.
    const RadialGrid grid = radial_grid(annulus.r_in, annulus.r_out, annulus.grid_size);
    const OperatorPair op = assemble_operator(cone, link, grid, lambda);
    const SparseMatrix a = op.shifted(lambda);
    const double beta = alpha + 0.5 * (n - 2.0);
    Vector v(static_cast<Eigen::Index>(op.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (Eigen::Index j = 0; j < nl; ++j) {
            v[static_cast<Eigen::Index>(op.index(i, j))] = solution.c[j] * std::exp(beta * grid.s[i]);
        }
    }
    const Vector av = a * v;
    const Vector wdiag = op.W.diagonal();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        for (Eigen::Index j = 0; j < nl; ++j) {
            if (!active[static_cast<std::size_t>(j)]) continue;
            const auto node = static_cast<Eigen::Index>(op.index(i, j));
            num += av[node] * av[node] / wdiag[node];
            den += wdiag[node] * v[node] * v[node];
        }
    }
    out.annulus = den > 0.0 ? std::sqrt(num / den) : 0.0;
    return out;
}

namespace {

ExponentFit least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const auto count = static_cast<double>(x.size());
    if (x.size() < 2) {
        throw DomainError("fit_radial_exponent: fit window holds fewer than 2 samples");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (sxx == 0.0) {
        throw DomainError("fit_radial_exponent: degenerate fit window");
    }
    ExponentFit fit;
    fit.alpha = sxy / sxx;
    fit.samples = static_cast<int>(x.size());
    if (x.size() > 2) {
        const double intercept = my - fit.alpha * mx;
        double ssr = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double e = y[k] - intercept - fit.alpha * x[k];
            ssr += e * e;
        }
        fit.width = std::sqrt(ssr / (count - 2.0) / sxx);
    }
    return fit;
}

std::pair<double, double> window_bounds(std::span<const double> r, FitWindow window) {
    if (r.empty()) {
        throw DomainError("fit_radial_exponent: no samples");
    }
    if (!(window.lo >= 0.0 && window.hi <= 1.0 && window.lo < window.hi)) {
        throw DomainError("fit_radial_exponent: invalid window");
    }
    const auto [lo_it, hi_it] = std::minmax_element(r.begin(), r.end());
    if (!(*lo_it > 0.0)) {
        throw DomainError("fit_radial_exponent: radii must be positive");
    }
    const double s0 = std::log(*lo_it);
    const double s1 = std::log(*hi_it);
    return {s0 + window.lo * (s1 - s0) - 1e-12, s0 + window.hi * (s1 - s0) + 1e-12};
}

} // namespace

ExponentFit fit_radial_exponent(std::span<const double> r, std::span<const double> u,
                                FitWindow window) {
    if (r.size() != u.size()) {
        throw DomainError("fit_radial_exponent: size mismatch");
    }
    const auto [lo, hi] = window_bounds(r, window);
    std::vector<double> x, y;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double s = std::log(r[k]);
        if (s < lo || s > hi) continue;
        if (!(u[k] > 0.0)) {
            throw DomainError("fit_radial_exponent: nonpositive sample in fit window");
        }
        x.push_back(s);
        y.push_back(std::log(u[k]));
    }
    return least_squares_slope(x, y);
}

ExponentFit fit_radial_exponent(std::span<const double> r, const Eigen::MatrixXd& u,
                                std::span<const double> link_volume, FitWindow window) {
    if (static_cast<std::size_t>(u.rows()) != r.size() ||
        static_cast<std::size_t>(u.cols()) != link_volume.size()) {
        throw DomainError("fit_radial_exponent: size mismatch");
    }
    const auto [lo, hi] = window_bounds(r, window);
    double total = 0.0;
    for (double w : link_volume) total += w;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double s = std::log(r[k]);
        if (s < lo || s > hi) continue;
        double mean_log = 0.0;
        for (Eigen::Index j = 0; j < u.cols(); ++j) {
            const double v = u(static_cast<Eigen::Index>(k), j);
            if (!(v > 0.0)) {
                throw DomainError("fit_radial_exponent: nonpositive sample in fit window");
            }
            mean_log += link_volume[static_cast<std::size_t>(j)] * std::log(v);
        }
        x.push_back(s);
        y.push_back(mean_log / total);
    }
    return least_squares_slope(x, y);
}

double critical_lambda(const DiscreteLink& link, int n, const std::vector<char>& dirichlet) {
    const double target = hardy_constant(n);
    const double cn = conformal_constant(n);
    double mean_a = 0.0, vol = 0.0;
    for (std::size_t j = 0; j < link.size(); ++j) {
        mean_a += link.a_sq[j] * link.volume[j];
        vol += link.volume[j];
    }
    mean_a /= vol;
    if (!(mean_a > 0.0)) {
        throw DomainError("critical_lambda: degenerate weight");
    }
    // μ(λ) is increasing with derivative ∫a²c² / ∫c² (Hellmann-Feynman).
    double lam = target / mean_a - cn;
    for (int iter = 0; iter < 100; ++iter) {
        const LinkSolution sol = link_mu(link, n, lam, dirichlet);
        double slope = 0.0, norm = 0.0;
        for (std::size_t j = 0; j < link.size(); ++j) {
            const double c = sol.c[static_cast<Eigen::Index>(j)];
            slope += link.a_sq[j] * link.volume[j] * c * c;
            norm += link.volume[j] * c * c;
        }
        slope /= norm;
        const double step = (target - sol.mu) / slope;
        lam += step;
        if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(lam))) break;
    }
    return lam;
}

std::vector<ThetaRow> theta_scan(const std::vector<ConeSpec>& cones, double offset,
                                 int link_resolution) {
    std::vector<ThetaRow> rows;
    for (const auto& cone : cones) {
        const DiscreteLink link = build_link_mesh(cone.link, link_resolution);
        ThetaRow row;
        row.label = cone.label;
        row.n = cone.n;
        row.lambda_crit = critical_lambda(link, cone.n);
        row.lambda = row.lambda_crit - offset;
        const LinkSolution sol = link_mu(link, cone.n, row.lambda);
        row.exponents = exponents(sol.mu, cone.n);
        const double k = 0.5 * (cone.n - 2.0);
        row.inside = !row.exponents.complex && row.exponents.alpha_plus > -k &&
                     row.exponents.alpha_plus < 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ThetaBounds> theta_bounds(const std::vector<ThetaRow>& rows) {
    std::map<int, ThetaBounds> by_n;
    for (const auto& row : rows) {
        auto [it, fresh] = by_n.try_emplace(row.n);
        ThetaBounds& b = it->second;
        const double a = row.exponents.alpha_plus;
        if (fresh) {
            b.n = row.n;
            b.theta1 = b.theta2 = a;
        } else {
            b.theta1 = std::min(b.theta1, a);
            b.theta2 = std::max(b.theta2, a);
        }
        ++b.cones;
    }
    std::vector<ThetaBounds> out;
    for (auto& [n, b] : by_n) out.push_back(b);
    return out;
}

std::vector<ComplementMember> complement_family(const DiscreteLink& link, int n, double lambda,
                                                double center, const std::vector<double>& half_widths) {
    if (link.angle.empty()) {
        throw DomainError("complement_family: needs a circle link");
    }
    std::vector<ComplementMember> out;
    for (double w : half_widths) {
        std::vector<char> mask(link.size(), 0);
        for (std::size_t j = 0; j < link.size(); ++j) {
            double d = std::remainder(link.angle[j] - center, 2.0 * std::numbers::pi);
            if (std::abs(d) < w) mask[j] = 1;
        }
        const LinkSolution sol = link_mu(link, n, lambda, mask);
        out.push_back({w, exponents(sol.mu, n)});
    }
    return out;
}

} // namespace conelab
