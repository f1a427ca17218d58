#include "conelab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conelab/errors.hpp"

namespace conelab {

LinkSpec lawson_link(int p, int q) {
    if (p < 1 || q < 1) {
        throw DomainError("lawson_link: p and q must be >= 1");
    }
    const double total = p + q;
    LinkSpec link;
    link.kind = LinkKind::ProductOfSpheres;
    link.dim = p + q;
    link.factor_dims = {p, q};
    link.radii = {std::sqrt(p / total), std::sqrt(q / total)};
    // Principal curvatures sqrt(q/p) (p times) and -sqrt(p/q) (q times).
    link.a_sq = [total](double) { return total; };
    return link;
}

LinkSpec single_mode_link(int dim, double a_sq) {
    if (dim < 1) {
        throw DomainError("single_mode_link: dim must be >= 1");
    }
    if (!(a_sq >= 0.0)) {
        throw DomainError("single_mode_link: a_sq must be >= 0");
    }
    LinkSpec link;
    link.kind = LinkKind::SingleModeConstant;
    link.dim = dim;
    link.a_sq = [a_sq](double) { return a_sq; };
    return link;
}

LinkSpec circle_link(std::function<double(double)> a_of_omega, int nominal_dim) {
    if (nominal_dim < 1) {
        throw DomainError("circle_link: nominal dimension must be >= 1");
    }
    LinkSpec link;
    link.kind = LinkKind::CircleWithPotential;
    link.dim = nominal_dim;
    link.radii = {1.0};
    link.a_sq = [a = std::move(a_of_omega)](double omega) {
        const double v = a(omega);
        return v * v;
    };
    return link;
}

LinkSpec circle_link_from_samples(std::vector<double> a_sq_samples, int nominal_dim) {
    if (a_sq_samples.size() < 3) {
        throw DomainError("circle_link_from_samples: need at least 3 samples");
    }
    if (nominal_dim < 1) {
        throw DomainError("circle_link_from_samples: nominal dimension must be >= 1");
    }
    LinkSpec link;
    link.kind = LinkKind::CircleWithPotential;
    link.dim = nominal_dim;
    link.radii = {1.0};
    link.a_sq_samples = a_sq_samples;
    link.a_sq = [s = std::move(a_sq_samples)](double omega) {
        const double two_pi = 2.0 * std::numbers::pi;
        const auto count = static_cast<double>(s.size());
        double t = std::fmod(omega, two_pi);
        if (t < 0) t += two_pi;
        const double x = t / two_pi * count;
        const auto i = static_cast<std::size_t>(std::floor(x)) % s.size();
        const double frac = x - std::floor(x);
        return (1.0 - frac) * s[i] + frac * s[(i + 1) % s.size()];
    };
    return link;
}

ConeSpec make_cone(LinkSpec link, std::string label, Minimality minimizing) {
    if (!link.a_sq) {
        throw DomainError("make_cone: link has no weight function");
    }
    ConeSpec cone;
    cone.n = link.dim + 1;
    if (cone.n < 2) {
        throw DomainError("make_cone: cone dimension must be >= 2");
    }
    cone.link = std::move(link);
    cone.label = std::move(label);
    cone.minimizing = minimizing;
    return cone;
}

std::string lawson_label(int p, int q) {
    if (p < 10 && q < 10) {
        return "C" + std::to_string(p) + std::to_string(q);
    }
    return "C" + std::to_string(p) + "_" + std::to_string(q);
}

ConeSpec lawson_cone(int p, int q) {
    // Minimizing for p + q >= 7 and for p + q = 6 except (1, 5).
    const bool minimizing = (p + q >= 7) || (p + q == 6 && p != 1 && q != 1);
    return make_cone(lawson_link(p, q), lawson_label(p, q),
                     minimizing ? Minimality::KnownMinimizing : Minimality::Abstract);
}

ConeSpec product_with_line(const ConeSpec& cone) {
    ConeSpec out = cone;
    out.line_factors += 1;
    out.label = cone.label + "xR";
    return out;
}

PointGeometry eval_geometry(const ConeSpec& cone, double r, double omega) {
    if (!(r > 0.0)) {
        throw DomainError("eval_geometry: r must be > 0");
    }
    const double a_sq = cone.a_sq_at(omega);
    return {std::sqrt(a_sq) / r, -a_sq / (r * r)};
}

RegionG region_G(const ConeSpec& cone, double a) {
    if (!(a > 0.0)) {
        throw DomainError("region_G: level must be > 0");
    }
    RegionG g;
    g.level = a;
    g.line_factors = cone.line_factors;
    auto weight = cone.link.a_sq;
    g.r_min = [weight, a](double omega) { return std::sqrt(weight(omega)) / a; };
    if (cone.link.constant_weight()) {
        g.r_min_lo = g.r_min_hi = g.r_min(0.0);
    } else {
        constexpr int samples = 4096;
        double lo = INFINITY, hi = 0.0;
        for (int j = 0; j < samples; ++j) {
            const double v = g.r_min(2.0 * std::numbers::pi * j / samples);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        g.r_min_lo = lo;
        g.r_min_hi = hi;
    }
    return g;
}

void validate_link(const LinkSpec& link, int samples) {
    if (!link.a_sq) {
        throw DomainError("validate_link: missing weight");
    }
    if (link.constant_weight()) {
        const double v = link.a_sq(0.0);
        if (!(v > 0.0)) {
            throw DomainError("validate_link: constant weight must be > 0");
        }
        return;
    }
    int zeros = 0;
    double peak = 0.0;
    std::vector<double> values(samples);
    for (int j = 0; j < samples; ++j) {
        values[j] = link.a_sq(2.0 * std::numbers::pi * j / samples);
        if (!(values[j] >= 0.0)) {
            throw DomainError("validate_link: negative or non-finite weight sample");
        }
        peak = std::max(peak, values[j]);
    }
    for (double v : values) {
        if (v <= 1e-14 * std::max(peak, 1.0)) ++zeros;
    }
    // Isolated zeros are admitted; a vanishing arc is not.
    if (zeros > std::max(2, samples / 200)) {
        throw DomainError("validate_link: weight vanishes on a set of positive measure");
    }
}

namespace {

const char* kind_name(LinkKind kind) {
    switch (kind) {
        case LinkKind::ProductOfSpheres: return "product-of-spheres";
        case LinkKind::CircleWithPotential: return "circle-with-potential";
        case LinkKind::SingleModeConstant: return "single-mode-constant";
    }
    return "?";
}

} // namespace

nlohmann::json cone_to_json(const ConeSpec& cone) {
    nlohmann::json j;
    j["label"] = cone.label;
    j["n"] = cone.n;
    j["kind"] = kind_name(cone.link.kind);
    switch (cone.link.kind) {
        case LinkKind::ProductOfSpheres:
            j["p"] = cone.link.factor_dims.at(0);
            j["q"] = cone.link.factor_dims.at(1);
            j["a_sq"] = cone.link.a_sq(0.0);
            break;
        case LinkKind::SingleModeConstant:
            j["a_sq"] = cone.link.a_sq(0.0);
            break;
        case LinkKind::CircleWithPotential: {
            std::vector<double> samples = cone.link.a_sq_samples;
            if (samples.empty()) {
                constexpr int count = 256;
                samples.resize(count);
                for (int k = 0; k < count; ++k) {
                    samples[k] = cone.link.a_sq(2.0 * std::numbers::pi * k / count);
                }
            }
            j["samples"] = samples;
            break;
        }
    }
    return j;
}

ConeSpec cone_from_json(const nlohmann::json& entry) {
    if (!entry.is_object()) {
        throw DomainError("catalog entry must be an object");
    }
    const std::string label = entry.value("label", std::string{});
    if (label.empty()) {
        throw DomainError("catalog entry without label");
    }
    if (entry.contains("p") || entry.contains("q")) {
        const int p = entry.at("p").get<int>();
        const int q = entry.at("q").get<int>();
        ConeSpec cone = lawson_cone(p, q);
        cone.label = label;
        if (entry.contains("n") && entry.at("n").get<int>() != cone.n) {
            throw DomainError("catalog entry " + label + ": n must equal p + q + 1");
        }
        return cone;
    }
    if (entry.contains("samples")) {
        auto samples = entry.at("samples").get<std::vector<double>>();
        const int n = entry.value("n", 2);
        LinkSpec link = circle_link_from_samples(std::move(samples), n - 1);
        validate_link(link);
        return make_cone(std::move(link), label);
    }
    if (entry.contains("a_sq")) {
        const int n = entry.at("n").get<int>();
        LinkSpec link = single_mode_link(n - 1, entry.at("a_sq").get<double>());
        validate_link(link);
        return make_cone(std::move(link), label);
    }
    throw DomainError("catalog entry " + label + ": need (p, q), samples, or a_sq");
}

std::vector<ConeSpec> catalog_from_json(const nlohmann::json& doc) {
    if (doc.is_object() && !doc.contains("cones")) {
        throw DomainError("catalog object must hold a 'cones' array");
    }
    const nlohmann::json& list = doc.is_object() ? doc.at("cones") : doc;
    if (!list.is_array()) {
        throw DomainError("catalog must be an array of cones");
    }
    std::vector<ConeSpec> cones;
    for (const auto& entry : list) {
        cones.push_back(cone_from_json(entry));
    }
    return cones;
}

nlohmann::json catalog_to_json(const std::vector<ConeSpec>& cones) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : cones) list.push_back(cone_to_json(c));
    return list;
}

std::vector<ConeSpec> builtin_catalog() {
    std::vector<ConeSpec> cones;
    for (int total = 2; total <= 12; ++total) {
        for (int p = 1; p <= total / 2; ++p) {
            cones.push_back(lawson_cone(p, total - p));
        }
    }
    // Model links for abstract cones with non-constant weight.
    cones.push_back(make_cone(
        circle_link([](double w) { return 1.0 + std::cos(w) * std::cos(w); }, 6), "circ-cos2"));
    cones.push_back(make_cone(
        circle_link([](double w) { return 2.0 + std::sin(2.0 * w); }, 6), "circ-sin2w"));
    return cones;
}

ConeSpec find_cone(const std::vector<ConeSpec>& catalog, const std::string& label) {
    auto it = std::find_if(catalog.begin(), catalog.end(),
                           [&](const ConeSpec& c) { return c.label == label; });
    if (it == catalog.end()) {
        throw DomainError("unknown cone label: " + label);
    }
    return *it;
}

} // namespace conelab
