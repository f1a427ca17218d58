#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "conelab/geometry.hpp"

namespace conelab {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// One spectral mode of a product-of-spheres link: spherical-harmonic degrees
/// (k, l) on the two factors and the Laplace-Beltrami eigenvalue.
struct LinkMode {
    int k = 0;
    int l = 0;
    double eigenvalue = 0.0;
};

/// Discretized link. Vertices are either grid points (circle links) or
/// spectral modes (products of spheres); constant links reduce to one vertex.
/// `stiffness` discretizes -Δ_S against the lumped `volume` mass.
struct DiscreteLink {
    LinkKind kind = LinkKind::SingleModeConstant;
    int dim = 1;
    std::vector<double> volume;
    SparseMatrix stiffness;
    std::vector<double> a_sq;
    std::vector<double> angle;     // circle vertices
    std::vector<LinkMode> modes;   // product-of-spheres modes

    std::size_t size() const { return volume.size(); }
    /// Laplacian applied to vertex values: Δ_S c = -volume⁻¹ · stiffness · c.
    Vector laplacian(const Vector& c) const;
};

/// `resolution` is the vertex count for circle links and the maximal total
/// harmonic degree k + l for products of spheres (0 keeps the constant mode).
DiscreteLink build_link_mesh(const LinkSpec& link, int resolution);

enum class BoundaryKind { Dirichlet, Free };

struct BoundaryConditions {
    BoundaryKind inner = BoundaryKind::Dirichlet;
    BoundaryKind outer = BoundaryKind::Dirichlet;
};

/// Uniform grid in s = log r.
struct RadialGrid {
    std::vector<double> s;
    double h = 0.0;
    double r_in = 0.0;
    double r_out = 0.0;

    std::size_t size() const { return s.size(); }
    double r(std::size_t i) const;
    double length() const { return s.back() - s.front(); }
};

RadialGrid radial_grid(double r_in, double r_out, int count);
/// Grid whose spacing does not exceed `max_step` in s.
RadialGrid radial_grid_with_step(double r_in, double r_out, double max_step);

/// Symmetric operator pair of the weighted eigenproblem in Liouville form
/// u = r^{-(n-2)/2} v(s), assembled on the full tensor grid (radial-major:
/// node (i, j) has index i * link_size + j).
///
///   A0 = radial stiffness + ((n-2)/2)^2 mass + link stiffness
///   P  = a_sq-weighted lumped mass
///   W  = plain lumped mass
///
/// The equation -Δu + c_n scal u = λ |A|² u reads A0 v - c_n P v = λ P v on
/// the nodes not fixed by boundary conditions.
struct OperatorPair {
    SparseMatrix A0;
    SparseMatrix P;
    SparseMatrix W;
    int n = 0;
    double lambda = 0.0;
    std::size_t radial_size = 0;
    std::size_t link_size = 0;
    BoundaryConditions bc;
    std::vector<char> fixed;   // nodes eliminated by Dirichlet conditions

    double c_n() const { return conformal_constant(n); }
    std::size_t index(std::size_t i, std::size_t j) const { return i * link_size + j; }
    std::size_t size() const { return radial_size * link_size; }
    /// A0 - (c_n + λ) P: the operator of Δu + (c_n + λ)|A|² u = 0, sign flipped.
    SparseMatrix shifted(double lam) const;
    std::vector<char> free_nodes() const;
};

OperatorPair assemble_operator(const ConeSpec& cone, const DiscreteLink& link,
                               const RadialGrid& grid, double lambda,
                               BoundaryConditions bc = {});

// Sparse plumbing shared by the solvers.
std::vector<int> active_indices(const std::vector<char>& mask);
SparseMatrix submatrix(const SparseMatrix& m, const std::vector<int>& rows,
                       const std::vector<int>& cols);
/// Solves m x = 0 on the `active` nodes with x = values on all other nodes.
Vector solve_dirichlet(const SparseMatrix& m, const std::vector<char>& active,
                       const Vector& values);
bool is_diagonal(const SparseMatrix& m);

/// Coordinate text dump "row col value", one entry per line, 0-based.
void write_coordinate_format(std::ostream& out, const SparseMatrix& m);

} // namespace conelab
