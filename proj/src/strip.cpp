#include "conelab/strip.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "conelab/errors.hpp"
#include "conelab/spectral.hpp"

namespace conelab {

StripResult strip_modes(const ConeSpec& cone, double a, double lambda, const StripOptions& options) {
    if (!(a > 1.0)) {
        throw DomainError("strip_modes: need a > 1 for the cross-section G_a \\ G_1");
    }
    if (options.radial < 3) {
        throw DomainError("strip_modes: need at least 3 radial nodes");
    }
    StripResult out;
    out.label = cone.label;
    out.a = a;
    out.lambda = lambda;
    out.n = cone.n;
    out.refinement = options.radial;
    const int link_res = cone.link.kind == LinkKind::CircleWithPotential
                             ? (options.link_resolution > 0 ? options.link_resolution : 128)
                             : 0;
    out.link = build_link_mesh(cone.link, link_res);

    double amin = INFINITY, amax = 0.0;
    for (double s : out.link.a_sq) {
        amin = std::min(amin, std::sqrt(s));
        amax = std::max(amax, std::sqrt(s));
    }
    if (!(amin > 0.0)) {
        throw DomainError("strip_modes: a(omega) vanishes on the link, G_1 reaches the tip");
    }
    out.grid = radial_grid(amin / a, amax, options.radial);
    const OperatorPair op = assemble_operator(cone, out.link, out.grid, lambda);
    out.active = op.free_nodes();
    const std::size_t L = out.link.size();
    for (std::size_t i = 0; i < out.grid.size(); ++i) {
        const double r = out.grid.r(i);
        for (std::size_t j = 0; j < L; ++j) {
            const double aj = std::sqrt(out.link.a_sq[j]);
            if (!(r > aj / a * (1.0 + 1e-12) && r < aj * (1.0 - 1e-12))) out.active[i * L + j] = 0;
        }
    }
    const auto idx = active_indices(out.active);
    if (idx.empty()) {
        throw DomainError("strip_modes: cross-section holds no interior nodes");
    }
    out.A = submatrix(op.shifted(lambda), idx, idx);
    out.R2.resize(static_cast<Eigen::Index>(idx.size()));
    SparseMatrix R2(out.R2.size(), out.R2.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double r = out.r_of(static_cast<std::size_t>(idx[k]));
        out.R2[static_cast<Eigen::Index>(k)] = op.W.coeff(idx[k], idx[k]) * r * r;
        R2.insert(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = out.R2[static_cast<Eigen::Index>(k)];
    }
    const SpectralResult eig = principal_eigenpair(out.A, R2);
    if (!(eig.value > 0.0)) {
        std::ostringstream msg;
        msg << "no exponential dichotomy: cross-section value " << eig.value << " <= 0 at a = " << a
            << ", lambda = " << lambda;
        throw DomainError(msg.str());
    }
    out.C_abs = eig.value;
    out.gamma = std::sqrt(eig.value);
    out.residual = eig.residual;

    const double k = 0.5 * (cone.n - 2.0);
    out.psi = Vector::Zero(static_cast<Eigen::Index>(out.size()));
    out.mass = Vector::Zero(static_cast<Eigen::Index>(out.size()));
    for (std::size_t node = 0; node < out.size(); ++node) {
        const double r = out.r_of(node);
        out.mass[static_cast<Eigen::Index>(node)] = op.W.coeff(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(node)) * std::pow(r, cone.n);
    }
    for (std::size_t q = 0; q < idx.size(); ++q) {
        const double r = out.r_of(static_cast<std::size_t>(idx[q]));
        out.psi[idx[q]] = std::pow(r, -k) * eig.vector[static_cast<Eigen::Index>(q)];
    }
    const double norm = std::sqrt(out.psi.cwiseProduct(out.psi).dot(out.mass));
    out.psi /= norm;
    return out;
}

StripField strip_solve(const StripResult& strip, double T, int nt, const Vector& data_minus,
                       const Vector& data_plus) {
    if (!(T > 0.0) || nt < 3) {
        throw DomainError("strip_solve: need T > 0 and at least 3 time nodes");
    }
    const auto nodes = static_cast<Eigen::Index>(strip.size());
    if (data_minus.size() != nodes || data_plus.size() != nodes) {
        throw DomainError("strip_solve: boundary data must have one value per cross-section node");
    }
    const auto idx = active_indices(strip.active);
    const auto m = static_cast<Eigen::Index>(idx.size());
    const double dt = 2.0 * T / (nt - 1);
    const double k = 0.5 * (strip.n - 2.0);
    const int inner = nt - 2;

    auto liouville = [&](const Vector& u) {
        Vector v(m);
        for (Eigen::Index q = 0; q < m; ++q) v[q] = std::pow(strip.r_of(static_cast<std::size_t>(idx[q])), k) * u[idx[q]];
        return v;
    };
    const Vector vm = liouville(data_minus);
    const Vector vp = liouville(data_plus);

    // (A ⊗ I + diag(R²) ⊗ T_t) V = 0 with T_t the Dirichlet second difference.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(inner) * (strip.A.nonZeros() + 3 * m));
    const double inv = 1.0 / (dt * dt);
    for (int s = 0; s < inner; ++s) {
        const Eigen::Index off = s * m;
        for (int c = 0; c < strip.A.outerSize(); ++c) {
            for (SparseMatrix::InnerIterator it(strip.A, c); it; ++it) {
                trip.emplace_back(off + it.row(), off + it.col(), it.value());
            }
        }
        for (Eigen::Index q = 0; q < m; ++q) {
            trip.emplace_back(off + q, off + q, 2.0 * inv * strip.R2[q]);
            if (s > 0) trip.emplace_back(off + q, off - m + q, -inv * strip.R2[q]);
            if (s + 1 < inner) trip.emplace_back(off + q, off + m + q, -inv * strip.R2[q]);
        }
    }
    SparseMatrix K(inner * m, inner * m);
    K.setFromTriplets(trip.begin(), trip.end());
    Vector rhs = Vector::Zero(inner * m);
    for (Eigen::Index q = 0; q < m; ++q) {
        rhs[q] += inv * strip.R2[q] * vm[q];
        rhs[(inner - 1) * m + q] += inv * strip.R2[q] * vp[q];
    }
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(K);
    if (ldlt.info() != Eigen::Success) {
        throw NumericalError("strip_solve: factorization failed");
    }
    const Vector V = ldlt.solve(rhs);

    StripField out;
    out.t.resize(static_cast<std::size_t>(nt));
    out.u = Eigen::MatrixXd::Zero(nt, nodes);
    for (int s = 0; s < nt; ++s) {
        out.t[static_cast<std::size_t>(s)] = -T + dt * s;
        for (Eigen::Index q = 0; q < m; ++q) {
            double v;
            if (s == 0) {
                v = vm[q];
            } else if (s == nt - 1) {
                v = vp[q];
            } else {
                v = V[(s - 1) * m + q];
            }
            out.u(s, idx[q]) = std::pow(strip.r_of(static_cast<std::size_t>(idx[q])), -k) * v;
        }
    }
    out.gamma_discrete = std::acosh(1.0 + 0.5 * strip.C_abs * dt * dt) / dt;
    return out;
}

Eigen::MatrixXd strip_generator(const StripResult& strip, const std::vector<double>& t, int sign,
                                double gamma) {
    const double g = gamma > 0.0 ? gamma : strip.gamma;
    Eigen::MatrixXd u(static_cast<Eigen::Index>(t.size()), strip.psi.size());
    for (std::size_t s = 0; s < t.size(); ++s) {
        u.row(static_cast<Eigen::Index>(s)) = std::exp(sign * g * t[s]) * strip.psi.transpose();
    }
    return u;
}

StripDecomposition decompose_strip_solution(const std::vector<double>& t, const Eigen::MatrixXd& u,
                                            const StripResult& strip, const DecomposeOptions& options) {
    if (u.rows() != static_cast<Eigen::Index>(t.size()) || u.cols() != strip.psi.size()) {
        throw DomainError("decompose_strip_solution: samples do not match the strip grid");
    }
    const double g = options.gamma > 0.0 ? options.gamma : strip.gamma;
    std::vector<Eigen::Index> rows;
    for (std::size_t s = 0; s < t.size(); ++s) {
        if (t[s] >= options.t_lo && t[s] <= options.t_hi) rows.push_back(static_cast<Eigen::Index>(s));
    }
    if (rows.size() < 2) {
        throw DomainError("decompose_strip_solution: fewer than two samples in the window");
    }
    const Vector mpsi = strip.mass.cwiseProduct(strip.psi);
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd design(m, 2);
    Vector proj(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double tk = t[static_cast<std::size_t>(rows[static_cast<std::size_t>(k)])];
        design(k, 0) = std::exp(g * tk);
        design(k, 1) = std::exp(-g * tk);
        proj[k] = u.row(rows[static_cast<std::size_t>(k)]).dot(mpsi);
    }
    const Eigen::Vector2d scale(design.col(0).cwiseAbs().maxCoeff(), design.col(1).cwiseAbs().maxCoeff());
    design.col(0) /= scale[0];
    design.col(1) /= scale[1];
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(proj);

    StripDecomposition out;
    out.coef_plus = coef[0] / scale[0];
    out.coef_minus = coef[1] / scale[1];
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        const double tk = t[static_cast<std::size_t>(rows[static_cast<std::size_t>(k)])];
        const Vector row = u.row(rows[static_cast<std::size_t>(k)]).transpose();
        const Vector fit = (out.coef_plus * std::exp(g * tk) + out.coef_minus * std::exp(-g * tk)) * strip.psi;
        num += (row - fit).cwiseProduct(row - fit).dot(strip.mass);
        den += row.cwiseProduct(row).dot(strip.mass);
    }
    out.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    if (out.residual > options.tolerance) {
        out.in_span = false;
        std::ostringstream msg;
        msg << "not in the positive cone span: relative residual " << out.residual << " > "
            << options.tolerance;
        out.diagnostic = msg.str();
    }
    return out;
}

namespace {

double interpolate_column(const GridField& f, std::size_t j, double x) {
    const auto it = std::upper_bound(f.x.begin(), f.x.end(), x);
    if (it == f.x.begin()) return f.u(0, static_cast<Eigen::Index>(j));
    if (it == f.x.end()) return f.u(static_cast<Eigen::Index>(f.x.size() - 1), static_cast<Eigen::Index>(j));
    const auto i1 = static_cast<std::size_t>(it - f.x.begin());
    const std::size_t i0 = i1 - 1;
    const double w = (x - f.x[i0]) / (f.x[i1] - f.x[i0]);
    return (1.0 - w) * f.u(static_cast<Eigen::Index>(i0), static_cast<Eigen::Index>(j)) +
           w * f.u(static_cast<Eigen::Index>(i1), static_cast<Eigen::Index>(j));
}

// Bilinear interpolation on the rectilinear grid (a single column is 1D).
double interpolate(const GridField& f, double x, double y) {
    auto bracket = [](const std::vector<double>& g, double v, std::size_t& i0, double& w) {
        if (g.size() == 1) {
            i0 = 0;
            w = 0.0;
            return;
        }
        auto it = std::upper_bound(g.begin(), g.end(), v);
        std::size_t i1 = std::clamp<std::size_t>(static_cast<std::size_t>(it - g.begin()), 1, g.size() - 1);
        i0 = i1 - 1;
        w = std::clamp((v - g[i0]) / (g[i1] - g[i0]), 0.0, 1.0);
    };
    std::size_t i, j;
    double wx, wy;
    bracket(f.x, x, i, wx);
    bracket(f.y, y, j, wy);
    const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
    const Eigen::Index I1 = f.x.size() > 1 ? I + 1 : I, J1 = f.y.size() > 1 ? J + 1 : J;
    return (1.0 - wx) * ((1.0 - wy) * f.u(I, J) + wy * f.u(I, J1)) + wx * ((1.0 - wy) * f.u(I1, J) + wy * f.u(I1, J1));
}

// Sup of u over the closed ball, sampled on a fixed lattice so the value
// does not depend on where the grid nodes fall.
double ball_max(const GridField& f, double cx, double cy, double radius) {
    constexpr int kLattice = 64;
    double best = -INFINITY;
    for (int a = 0; a <= kLattice; ++a) {
        const double dx = radius * (2.0 * a / kLattice - 1.0);
        const double x = cx + dx;
        if (x < f.x.front() || x > f.x.back()) continue;
        for (int b = 0; b <= kLattice; ++b) {
            const double dy = f.y.size() > 1 ? radius * (2.0 * b / kLattice - 1.0) : 0.0;
            if (dx * dx + dy * dy > radius * radius * (1.0 + 1e-12)) continue;
            const double y = cy + dy;
            if (y < f.y.front() || y > f.y.back()) continue;
            best = std::max(best, interpolate(f, x, y));
            if (f.y.size() == 1) break;
        }
    }
    return best;
}

} // namespace

HarnackProbe boundary_harnack_probe(const std::vector<GridField>& batch, double rho) {
    if (!(rho > 0.0)) {
        throw DomainError("boundary_harnack_probe: need rho > 0");
    }
    HarnackProbe out;
    for (const GridField& f : batch) {
        if (f.x.size() < 2 || f.y.empty() || f.u.rows() != static_cast<Eigen::Index>(f.x.size()) ||
            f.u.cols() != static_cast<Eigen::Index>(f.y.size())) {
            throw DomainError("boundary_harnack_probe: malformed field");
        }
        const double peak = f.u.cwiseAbs().maxCoeff();
        if (!(peak > 0.0)) {
            throw DomainError("boundary_harnack_probe: zero field");
        }
        if (f.u.row(0).cwiseAbs().maxCoeff() > 1e-12 * peak) {
            throw DomainError("boundary_harnack_probe: solution does not vanish on the face");
        }
        if (f.u.minCoeff() < -1e-12 * peak) {
            throw DomainError("boundary_harnack_probe: solution is not positive");
        }
        const double x0 = f.x.front();
        if (x0 + rho + rho * rho > f.x.back()) {
            throw DomainError("boundary_harnack_probe: rho too large for the field");
        }
        for (std::size_t j = 0; j < f.y.size(); ++j) {
            const double yj = f.y[j];
            if (f.y.size() > 1 && (yj - rho < f.y.front() || yj + rho > f.y.back())) continue;
            const double num = ball_max(f, x0, yj, rho);
            const double den = std::max(interpolate_column(f, j, x0 + rho), ball_max(f, x0 + rho, yj, rho * rho));
            if (!(den > 0.0)) {
                throw DomainError("boundary_harnack_probe: solution vanishes at the interior probe point");
            }
            out.constant = std::max(out.constant, num / den);
            ++out.probes;
        }
    }
    if (out.probes == 0) {
        throw DomainError("boundary_harnack_probe: no face point admits the probe balls");
    }
    return out;
}

GridField strip_field_grid(const StripResult& strip, const StripField& field) {
    if (strip.link.size() != 1) {
        throw DomainError("strip_field_grid: needs a single-vertex link");
    }
    GridField g;
    const double r0 = strip.grid.r(0);
    for (std::size_t i = 0; i < strip.grid.size(); ++i) g.x.push_back(strip.grid.r(i) - r0);
    g.y = field.t;
    g.u = field.u.transpose();
    return g;
}

} // namespace conelab
