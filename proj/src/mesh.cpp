#include "conelab/mesh.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "conelab/errors.hpp"

namespace conelab {

Vector DiscreteLink::laplacian(const Vector& c) const {
    Vector out = -(stiffness * c);
    for (Eigen::Index j = 0; j < out.size(); ++j) out[j] /= volume[j];
    return out;
}

namespace {

DiscreteLink single_vertex(const LinkSpec& link) {
    DiscreteLink mesh;
    mesh.kind = link.kind;
    mesh.dim = link.dim;
    mesh.volume = {1.0};
    mesh.a_sq = {link.a_sq(0.0)};
    mesh.stiffness.resize(1, 1);
    mesh.modes = {LinkMode{0, 0, 0.0}};
    return mesh;
}

DiscreteLink circle_mesh(const LinkSpec& link, int count) {
    if (count < 3) {
        throw DomainError("build_link_mesh: circle links need resolution >= 3");
    }
    DiscreteLink mesh;
    mesh.kind = link.kind;
    mesh.dim = link.dim;
    const double h = 2.0 * std::numbers::pi / count;
    mesh.volume.assign(count, h);
    mesh.angle.resize(count);
    mesh.a_sq.resize(count);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * count);
    for (int j = 0; j < count; ++j) {
        mesh.angle[j] = j * h;
        mesh.a_sq[j] = link.a_sq(mesh.angle[j]);
        const int next = (j + 1) % count;
        // Edge energy (c_next - c_j)^2 / h.
        trip.emplace_back(j, j, 1.0 / h);
        trip.emplace_back(next, next, 1.0 / h);
        trip.emplace_back(j, next, -1.0 / h);
        trip.emplace_back(next, j, -1.0 / h);
    }
    mesh.stiffness.resize(count, count);
    mesh.stiffness.setFromTriplets(trip.begin(), trip.end());
    return mesh;
}

DiscreteLink sphere_product_modes(const LinkSpec& link, int max_degree) {
    if (max_degree < 0) {
        throw DomainError("build_link_mesh: mode degree must be >= 0");
    }
    const int p = link.factor_dims.at(0);
    const int q = link.factor_dims.at(1);
    const double rp = link.radii.at(0) * link.radii.at(0);
    const double rq = link.radii.at(1) * link.radii.at(1);
    DiscreteLink mesh;
    mesh.kind = link.kind;
    mesh.dim = link.dim;
    for (int total = 0; total <= max_degree; ++total) {
        for (int k = total; k >= 0; --k) {
            const int l = total - k;
            // S^d(ρ) has eigenvalues k(k + d - 1) / ρ².
            const double ev = k * (k + p - 1.0) / rp + l * (l + q - 1.0) / rq;
            mesh.modes.push_back({k, l, ev});
        }
    }
    const auto count = static_cast<int>(mesh.modes.size());
    mesh.volume.assign(count, 1.0);
    mesh.a_sq.assign(count, link.a_sq(0.0));
    std::vector<Eigen::Triplet<double>> trip;
    for (int m = 0; m < count; ++m) {
        if (mesh.modes[m].eigenvalue != 0.0) trip.emplace_back(m, m, mesh.modes[m].eigenvalue);
    }
    mesh.stiffness.resize(count, count);
    mesh.stiffness.setFromTriplets(trip.begin(), trip.end());
    return mesh;
}

} // namespace

DiscreteLink build_link_mesh(const LinkSpec& link, int resolution) {
    if (!link.a_sq) {
        throw DomainError("build_link_mesh: link has no weight");
    }
    switch (link.kind) {
        case LinkKind::SingleModeConstant:
            return single_vertex(link);
        case LinkKind::CircleWithPotential:
            return circle_mesh(link, resolution);
        case LinkKind::ProductOfSpheres:
            if (resolution <= 0) return single_vertex(link);
            return sphere_product_modes(link, resolution);
    }
    throw DomainError("build_link_mesh: unsupported link kind");
}

double RadialGrid::r(std::size_t i) const {
    if (i == 0) return r_in;
    if (i + 1 == s.size()) return r_out;
    return std::exp(s[i]);
}

RadialGrid radial_grid(double r_in, double r_out, int count) {
    if (!(r_in > 0.0) || !(r_out > r_in)) {
        throw DomainError("radial_grid: need 0 < r_in < r_out");
    }
    if (count < 3) {
        throw DomainError("radial_grid: need at least 3 samples");
    }
    RadialGrid g;
    g.r_in = r_in;
    g.r_out = r_out;
    // Ratio first: the spacing is then invariant under common scaling of the radii.
    const double length = std::log(r_out / r_in);
    g.h = length / (count - 1);
    const double s0 = std::log(r_in);
    g.s.resize(count);
    for (int i = 0; i < count; ++i) g.s[i] = s0 + i * g.h;
    g.s.back() = std::log(r_out);
    return g;
}

RadialGrid radial_grid_with_step(double r_in, double r_out, double max_step) {
    if (!(max_step > 0.0)) {
        throw DomainError("radial_grid_with_step: step must be > 0");
    }
    if (!(r_in > 0.0) || !(r_out > r_in)) {
        throw DomainError("radial_grid: need 0 < r_in < r_out");
    }
    const int count = std::max(3, static_cast<int>(std::ceil(std::log(r_out / r_in) / max_step)) + 1);
    return radial_grid(r_in, r_out, count);
}

SparseMatrix OperatorPair::shifted(double lam) const {
    SparseMatrix out = A0 - (c_n() + lam) * P;
    out.prune(0.0);
    return out;
}

std::vector<char> OperatorPair::free_nodes() const {
    std::vector<char> active(fixed.size());
    for (std::size_t k = 0; k < fixed.size(); ++k) active[k] = fixed[k] ? 0 : 1;
    return active;
}

OperatorPair assemble_operator(const ConeSpec& cone, const DiscreteLink& link,
                               const RadialGrid& grid, double lambda,
                               BoundaryConditions bc) {
    if (link.dim != cone.link.dim) {
        throw DomainError("assemble_operator: link mesh does not match cone");
    }
    if (grid.size() < 3) {
        throw DomainError("assemble_operator: radial grid too small");
    }
    double weight_total = 0.0;
    for (double a : link.a_sq) weight_total += std::abs(a);
    if (weight_total == 0.0) {
        throw DomainError("degenerate weight: a_sq vanishes identically");
    }

    OperatorPair op;
    op.n = cone.n;
    op.lambda = lambda;
    op.bc = bc;
    op.radial_size = grid.size();
    op.link_size = link.size();
    const std::size_t nr = op.radial_size;
    const std::size_t nl = op.link_size;
    const double h = grid.h;
    const double k = 0.5 * (cone.n - 2.0);
    const double k2 = k * k;

    std::vector<double> radial_weight(nr, h);
    radial_weight.front() = radial_weight.back() = 0.5 * h;

    std::vector<Eigen::Triplet<double>> a_trip;
    std::vector<Eigen::Triplet<double>> p_trip;
    std::vector<Eigen::Triplet<double>> w_trip;
    a_trip.reserve(nr * nl * 6);

    for (std::size_t i = 0; i < nr; ++i) {
        const double rho = radial_weight[i];
        for (std::size_t j = 0; j < nl; ++j) {
            const auto node = static_cast<int>(op.index(i, j));
            const double vol = link.volume[j];
            a_trip.emplace_back(node, node, rho * k2 * vol);
            p_trip.emplace_back(node, node, rho * link.a_sq[j] * vol);
            w_trip.emplace_back(node, node, rho * vol);
            if (i + 1 < nr) {
                const auto next = static_cast<int>(op.index(i + 1, j));
                const double c = vol / h;
                a_trip.emplace_back(node, node, c);
                a_trip.emplace_back(next, next, c);
                a_trip.emplace_back(node, next, -c);
                a_trip.emplace_back(next, node, -c);
            }
        }
        for (int col = 0; col < link.stiffness.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(link.stiffness, col); it; ++it) {
                a_trip.emplace_back(static_cast<int>(op.index(i, it.row())),
                                    static_cast<int>(op.index(i, it.col())), rho * it.value());
            }
        }
    }
    // Free ends keep the boundary term of ∫(v' - k v)^2 ds = ∫ v'^2 + k^2 v^2 - k[v^2].
    for (std::size_t j = 0; j < nl; ++j) {
        if (bc.inner == BoundaryKind::Free) {
            const auto node = static_cast<int>(op.index(0, j));
            a_trip.emplace_back(node, node, k * link.volume[j]);
        }
        if (bc.outer == BoundaryKind::Free) {
            const auto node = static_cast<int>(op.index(nr - 1, j));
            a_trip.emplace_back(node, node, -k * link.volume[j]);
        }
    }

    const auto total = static_cast<int>(nr * nl);
    op.A0.resize(total, total);
    op.A0.setFromTriplets(a_trip.begin(), a_trip.end());
    op.P.resize(total, total);
    op.P.setFromTriplets(p_trip.begin(), p_trip.end());
    op.W.resize(total, total);
    op.W.setFromTriplets(w_trip.begin(), w_trip.end());

    op.fixed.assign(nr * nl, 0);
    for (std::size_t j = 0; j < nl; ++j) {
        if (bc.inner == BoundaryKind::Dirichlet) op.fixed[op.index(0, j)] = 1;
        if (bc.outer == BoundaryKind::Dirichlet) op.fixed[op.index(nr - 1, j)] = 1;
    }
    return op;
}

std::vector<int> active_indices(const std::vector<char>& mask) {
    std::vector<int> idx;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) idx.push_back(static_cast<int>(k));
    }
    return idx;
}

SparseMatrix submatrix(const SparseMatrix& m, const std::vector<int>& rows,
                       const std::vector<int>& cols) {
    std::vector<int> row_pos(m.rows(), -1);
    std::vector<int> col_pos(m.cols(), -1);
    for (std::size_t k = 0; k < rows.size(); ++k) row_pos[rows[k]] = static_cast<int>(k);
    for (std::size_t k = 0; k < cols.size(); ++k) col_pos[cols[k]] = static_cast<int>(k);
    std::vector<Eigen::Triplet<double>> trip;
    for (int c = 0; c < m.outerSize(); ++c) {
        if (col_pos[c] < 0) continue;
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            const int r = row_pos[it.row()];
            if (r >= 0) trip.emplace_back(r, col_pos[c], it.value());
        }
    }
    SparseMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Vector solve_dirichlet(const SparseMatrix& m, const std::vector<char>& active,
                       const Vector& values) {
    if (static_cast<Eigen::Index>(active.size()) != m.rows() || values.size() != m.rows()) {
        throw DomainError("solve_dirichlet: size mismatch");
    }
    std::vector<char> inactive(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) inactive[k] = active[k] ? 0 : 1;
    const auto a_idx = active_indices(active);
    const auto b_idx = active_indices(inactive);
    Vector out = values;
    if (a_idx.empty()) return out;
    const SparseMatrix aa = submatrix(m, a_idx, a_idx);
    const SparseMatrix ab = submatrix(m, a_idx, b_idx);
    Vector boundary(static_cast<Eigen::Index>(b_idx.size()));
    for (std::size_t k = 0; k < b_idx.size(); ++k) boundary[k] = values[b_idx[k]];
    const Vector rhs = -(ab * boundary);

    Vector x;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(aa);
    if (ldlt.info() == Eigen::Success) {
        x = ldlt.solve(rhs);
    }
    if (ldlt.info() != Eigen::Success || !x.allFinite()) {
        Eigen::SparseLU<SparseMatrix> lu;
        lu.analyzePattern(aa);
        lu.factorize(aa);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("solve_dirichlet: singular system");
        }
        x = lu.solve(rhs);
    }
    for (std::size_t k = 0; k < a_idx.size(); ++k) out[a_idx[k]] = x[k];
    return out;
}

bool is_diagonal(const SparseMatrix& m) {
    for (int c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (it.row() != it.col() && it.value() != 0.0) return false;
        }
    }
    return true;
}

void write_coordinate_format(std::ostream& out, const SparseMatrix& m) {
    const auto old_precision = out.precision();
    out << std::setprecision(17);
    for (int c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
        }
    }
    out.precision(old_precision);
}

} // namespace conelab
