#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace conelab {

enum class LinkKind { ProductOfSpheres, CircleWithPotential, SingleModeConstant };

enum class Minimality { KnownMinimizing, Abstract };

/// Cross-section of a cone, i.e. the intersection with the unit sphere.
///
/// `a_sq(ω)` is the squared second-fundamental-form density on the link, so
/// that |A|(r, ω) = sqrt(a_sq(ω)) / r on the cone. For circle links ω is the
/// angle in [0, 2π); for the other kinds a_sq is constant and ω is ignored.
///
/// Circle links are used as model links for abstract cones: `dim` is the
/// nominal link dimension (it fixes n = dim + 1), while the Laplacian acts
/// along the circle coordinate only.
struct LinkSpec {
    LinkKind kind = LinkKind::SingleModeConstant;
    int dim = 1;
    std::function<double(double)> a_sq;
    std::vector<int> factor_dims;   // (p, q) for products of spheres
    std::vector<double> radii;      // sphere radii for products, {1} for circles
    std::vector<double> a_sq_samples;   // set when built from samples

    double a_sq_at(double omega) const { return a_sq(omega); }
    bool constant_weight() const { return kind != LinkKind::CircleWithPotential; }
};

struct ConeSpec {
    LinkSpec link;
    int n = 0;   // dimension of the cone itself
    std::string label;
    Minimality minimizing = Minimality::Abstract;
    int line_factors = 0;   // number of Euclidean line factors in C × ℝ^k

    double a_sq_at(double omega) const { return link.a_sq(omega); }
};

/// The conformal-Laplacian constant (n-2) / (4(n-1)).
inline double conformal_constant(int n) { return (n - 2.0) / (4.0 * (n - 1.0)); }

/// ((n-2)/2)^2, the sharp Hardy constant in dimension n.
inline double hardy_constant(int n) { return 0.25 * (n - 2.0) * (n - 2.0); }

LinkSpec lawson_link(int p, int q);
LinkSpec single_mode_link(int dim, double a_sq);
LinkSpec circle_link(std::function<double(double)> a_of_omega, int nominal_dim = 1);
/// Periodic linear interpolation of `a_sq` samples taken at ω_j = 2πj/N.
LinkSpec circle_link_from_samples(std::vector<double> a_sq_samples, int nominal_dim = 1);

ConeSpec make_cone(LinkSpec link, std::string label,
                   Minimality minimizing = Minimality::Abstract);
ConeSpec lawson_cone(int p, int q);
inline ConeSpec simons_cone() { return lawson_cone(3, 3); }
ConeSpec product_with_line(const ConeSpec& cone);

std::string lawson_label(int p, int q);

struct PointGeometry {
    double A;      // |A|
    double scal;   // scalar curvature, = -|A|^2 in flat ambient space
};

PointGeometry eval_geometry(const ConeSpec& cone, double r, double omega = 0.0);

/// Sublevel set G_a = {|A| <= a}; on a cone this is {r >= sqrt(a_sq(ω)) / a}.
struct RegionG {
    double level = 0.0;
    int line_factors = 0;
    double r_min_lo = 0.0;   // inf over ω of the radial bound
    double r_min_hi = 0.0;   // sup over ω of the radial bound
    std::function<double(double)> r_min;

    bool contains(double r, double omega = 0.0) const { return r >= r_min(omega); }
};

RegionG region_G(const ConeSpec& cone, double a);

/// Rejects links whose weight vanishes on a set of positive measure or is negative.
void validate_link(const LinkSpec& link, int samples = 4096);

// Catalog JSON: [{label, p, q} | {label, samples, n} | {label, n, a_sq}].
nlohmann::json cone_to_json(const ConeSpec& cone);
ConeSpec cone_from_json(const nlohmann::json& entry);
std::vector<ConeSpec> catalog_from_json(const nlohmann::json& doc);
nlohmann::json catalog_to_json(const std::vector<ConeSpec>& cones);

/// Built-in catalog: C_{p,q} with p <= q, 2 <= p+q <= 12, plus model circle links.
std::vector<ConeSpec> builtin_catalog();
ConeSpec find_cone(const std::vector<ConeSpec>& catalog, const std::string& label);

} // namespace conelab
