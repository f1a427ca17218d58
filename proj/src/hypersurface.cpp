#include "conelab/hypersurface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "conelab/csv.hpp"
#include "conelab/errors.hpp"

namespace conelab {

double ProfileCurve::r(std::size_t i) const { return std::hypot(x[i], y[i]); }

double cone_slope(int p, int q) {
    if (p < 1 || q < 1) {
        throw DomainError("cone_slope: need p, q >= 1");
    }
    return std::sqrt(static_cast<double>(q) / p);
}

namespace {

using State = std::array<double, 3>;   // x, y, θ

std::vector<double> geometric(double lo, double hi, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        out[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

} // namespace

ProfileCurve hardt_simon_profile(int p, int q, LeafSide side, double s_max, double x0,
                                 const ProfileOptions& options) {
    if (p < 1 || q < 1) {
        throw DomainError("hardt_simon_profile: need p, q >= 1");
    }
    if (side == LeafSide::Cone) {
        throw DomainError("hardt_simon_profile: side must be Below or Above");
    }
    if (!(x0 > 0.0) || !(s_max > options.s_start * x0) || options.samples < 8) {
        throw DomainError("hardt_simon_profile: need x0 > 0, s_max beyond the series start, >= 8 samples");
    }
    // Geodesic curvature of the weighted length: θ' = q cos θ / y - p sin θ / x.
    auto rhs = [p, q](const State& st, State& d, double) {
        d[0] = std::cos(st[2]);
        d[1] = std::sin(st[2]);
        d[2] = q * std::cos(st[2]) / st[1] - p * std::sin(st[2]) / st[0];
    };
    // Series start off the axis.
    const double s0 = options.s_start * x0;
    State st;
    if (side == LeafSide::Below) {
        const double b = -p / (x0 * (q + 1.0));
        st = {x0 - 0.5 * b * s0 * s0, s0 - b * b * s0 * s0 * s0 / 6.0, 0.5 * std::numbers::pi + b * s0};
    } else {
        const double b = q / (x0 * (p + 1.0));
        st = {s0 - b * b * s0 * s0 * s0 / 6.0, x0 + 0.5 * b * s0 * s0, b * s0};
    }
    const std::vector<double> times = geometric(s0, s_max, options.samples);

    ProfileCurve c;
    c.p = p;
    c.q = q;
    c.side = side;
    auto observer = [&c](const State& y, double s) {
        if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || !std::isfinite(y[2]) || y[0] <= 0.0 || y[1] <= 0.0) {
            std::ostringstream msg;
            msg << "hardt_simon_profile: integration blow-up (step-size failure) at s = " << s;
            throw NumericalError(msg.str());
        }
        c.s.push_back(s);
        c.x.push_back(y[0]);
        c.y.push_back(y[1]);
        c.theta.push_back(y[2]);
    };
    namespace odeint = boost::numeric::odeint;
    try {
        auto stepper = odeint::make_dense_output(options.tolerance, options.tolerance,
                                                 odeint::runge_kutta_dopri5<State>());
        odeint::integrate_times(stepper, rhs, st, times.begin(), times.end(), s0 * 1e-2, observer);
    } catch (const NumericalError&) {
        throw;
    } catch (const std::exception& e) {
        throw NumericalError(std::string("hardt_simon_profile: step-size failure: ") + e.what());
    }
    if (c.s.size() != times.size()) {
        throw NumericalError("hardt_simon_profile: integration stopped early");
    }
    c.slope = c.y.back() / c.x.back();
    return c;
}

ProfileCurve ray_profile(int p, int q, double angle, double r_min, double r_max, int samples) {
    if (!(r_min > 0.0 && r_max > r_min) || samples < 8) {
        throw DomainError("ray_profile: need 0 < r_min < r_max and >= 8 samples");
    }
    if (!(angle >= 0.0 && angle <= 0.5 * std::numbers::pi)) {
        throw DomainError("ray_profile: angle outside the quadrant");
    }
    ProfileCurve c;
    c.p = p;
    c.q = q;
    c.side = LeafSide::Cone;
    c.s = geometric(r_min, r_max, samples);
    for (double s : c.s) {
        c.x.push_back(s * std::cos(angle));
        c.y.push_back(s * std::sin(angle));
        c.theta.push_back(angle);
    }
    c.slope = std::tan(angle);
    return c;
}

ProfileCurve cone_profile(int p, int q, double r_min, double r_max, int samples) {
    return ray_profile(p, q, std::atan(cone_slope(p, q)), r_min, r_max, samples);
}

ProfileCurve scale_profile(const ProfileCurve& curve, double tau) {
    if (!(tau > 0.0)) {
        throw DomainError("scale_profile: tau must be positive");
    }
    ProfileCurve c = curve;
    for (std::size_t i = 0; i < c.size(); ++i) {
        c.s[i] *= tau;
        c.x[i] *= tau;
        c.y[i] *= tau;
    }
    return c;
}

namespace {

// d f / d(index), fourth order inside, second order at the two ends.
std::vector<double> index_derivative(const std::vector<double>& f) {
    const std::size_t n = f.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i >= 2 && i + 2 < n) {
            d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / 12.0;
        } else if (i == 0) {
            d[i] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / 2.0;
        } else if (i + 1 == n) {
            d[i] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / 2.0;
        } else {
            d[i] = (f[i + 1] - f[i - 1]) / 2.0;
        }
    }
    return d;
}

} // namespace

std::vector<CurvatureSample> profile_curvatures(const ProfileCurve& curve) {
    const std::size_t n = curve.size();
    if (n < 5) {
        throw DomainError("profile_curvatures: need at least 5 samples");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(curve.s[i] > curve.s[i - 1])) {
            throw DomainError("profile_curvatures: degenerate spacing at sample " + std::to_string(i));
        }
    }
    const std::vector<double> ds = index_derivative(curve.s);
    const std::vector<double> dth = index_derivative(curve.theta);
    const int p = curve.p, q = curve.q;
    std::vector<CurvatureSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        CurvatureSample& c = out[i];
        const double x = curve.x[i], y = curve.y[i], th = curve.theta[i];
        c.s = curve.s[i];
        c.r = curve.r(i);
        c.kappa = dth[i] / ds[i];
        const double kx = std::sin(th) / x;    // p copies
        const double ky = -std::cos(th) / y;   // q copies
        c.A2 = c.kappa * c.kappa + p * kx * kx + q * ky * ky;
        c.r2A2 = c.r * c.r * c.A2;
        c.residual = c.r * std::abs(c.kappa + p * kx + q * ky);
    }
    return out;
}

double stationarity(const ProfileCurve& curve) {
    const auto samples = profile_curvatures(curve);
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < samples.size(); ++i) worst = std::max(worst, samples[i].residual);
    return worst;
}

void write_profile_csv(std::ostream& out, const ProfileCurve& curve, const std::string& hash) {
    const auto curv = profile_curvatures(curve);
    CsvWriter w(out, {"s", "x", "y", "theta", "A2"}, hash);
    for (std::size_t i = 0; i < curve.size(); ++i) {
        w.row({format_number(curve.s[i]), format_number(curve.x[i]), format_number(curve.y[i]),
               format_number(curve.theta[i]), format_number(curv[i].A2)});
    }
}

InducedRun induced_solution_experiment(const ProfileCurve& H, const ConeSpec& cone, double lambda,
                                       const std::vector<double>& taus, const InducedOptions& options) {
    if (cone.n != H.p + H.q + 1) {
        throw DomainError("induced_solution_experiment: cone dimension does not match the profile");
    }
    if (cone.link.kind == LinkKind::ProductOfSpheres) {
        const auto& d = cone.link.factor_dims;
        const bool same = (d[0] == H.p && d[1] == H.q) || (d[0] == H.q && d[1] == H.p);
        if (!same) {
            throw DomainError("induced_solution_experiment: the profile is not asymptotic to this product cone");
        }
    }
    const DiscreteLink link = build_link_mesh(cone.link, 0);
    const ExponentPair ex = exponents(link_mu(link, cone.n, lambda).mu, cone.n);
    if (ex.complex) {
        throw DomainError("induced_solution_experiment: lambda is supercritical for the cone");
    }
    const auto curv = profile_curvatures(H);
    std::size_t i0 = 0;
    while (i0 < H.size() && H.s[i0] < options.s_inner) ++i0;
    if (H.size() - i0 < 8) {
        throw DomainError("induced_solution_experiment: inner boundary leaves too few samples");
    }
    const std::size_t m = H.size() - i0;
    std::vector<double> s(m), phi(m), A2(m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = i0 + k;
        s[k] = H.s[i];
        phi[k] = std::pow(H.x[i], H.p) * std::pow(H.y[i], H.q);
        A2[k] = curv[i].A2;
    }
    // Conservative differences: -(φ u')' - (c_n + λ)|A|² φ u = 0.
    const double pot = conformal_constant(cone.n) + lambda;
    std::vector<Eigen::Triplet<double>> trip;
    const auto mm = static_cast<Eigen::Index>(m);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double flux = 0.5 * (phi[k] + phi[k + 1]) / (s[k + 1] - s[k]);
        const auto a = static_cast<Eigen::Index>(k), b = a + 1;
        trip.emplace_back(a, a, flux);
        trip.emplace_back(b, b, flux);
        trip.emplace_back(a, b, -flux);
        trip.emplace_back(b, a, -flux);
    }
    for (std::size_t k = 1; k + 1 < m; ++k) {
        const double w = 0.5 * (s[k + 1] - s[k - 1]);
        trip.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), -pot * A2[k] * phi[k] * w);
    }
    SparseMatrix K(mm, mm);
    K.setFromTriplets(trip.begin(), trip.end());
    std::vector<char> active(m, 1);
    active.front() = 0;
    active.back() = 0;
    Vector data = Vector::Zero(mm);
    data[mm - 1] = options.outer_value;
    const Vector u = solve_dirichlet(K, active, data);

    InducedRun run;
    run.alpha_plus = ex.alpha_plus;
    run.positive = true;
    for (std::size_t k = 1; k < m; ++k) {
        if (!(u[static_cast<Eigen::Index>(k)] > 0.0)) run.positive = false;
    }
    for (std::size_t k = 0; k < m; ++k) {
        run.r.push_back(H.r(i0 + k));
        run.u.push_back(u[static_cast<Eigen::Index>(k)]);
    }
    const int n = cone.n;
    for (double tau : taus) {
        const double lo = tau * options.band_lo, hi = tau * options.band_hi;
        if (!(tau > 0.0) || lo < run.r.front() || hi > run.r.back()) {
            std::ostringstream msg;
            msg << "induced_solution_experiment: scale " << tau << " exceeds the grid support ["
                << run.r.front() << ", " << run.r.back() << "]";
            throw DomainError(msg.str());
        }
        std::vector<double> rho, val;
        for (std::size_t k = 0; k < m; ++k) {
            if (run.r[k] >= lo && run.r[k] <= hi) {
                if (!rho.empty() && !(run.r[k] / tau > rho.back())) {
                    throw DomainError("induced_solution_experiment: profile is not a graph over r on the band");
                }
                rho.push_back(run.r[k] / tau);
                val.push_back(run.u[k]);
            }
        }
        if (rho.size() < 8) {
            throw DomainError("induced_solution_experiment: band holds too few samples");
        }
        double norm2 = 0.0;
        for (std::size_t k = 0; k + 1 < rho.size(); ++k) {
            const double f0 = val[k] * val[k] * std::pow(rho[k], n - 1);
            const double f1 = val[k + 1] * val[k + 1] * std::pow(rho[k + 1], n - 1);
            norm2 += 0.5 * (f0 + f1) * (rho[k + 1] - rho[k]);
        }
        InducedStep step;
        step.tau = tau;
        step.norm = std::sqrt(norm2);
        for (double& v : val) v /= step.norm;
        const ExponentFit fit = fit_radial_exponent(rho, val, FitWindow{0.0, 1.0});
        step.alpha_hat = fit.alpha;
        step.fit_width = fit.width;
        run.steps.push_back(step);
    }
    return run;
}

nlohmann::json induced_run_to_json(const InducedRun& run) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& s : run.steps) {
        j.push_back({{"tau", s.tau}, {"alpha_hat", s.alpha_hat}, {"fit_width", s.fit_width}});
    }
    return j;
}

namespace {

// Polar angle of the curve as a function of r on [r_in, r_out].
struct PolarGraph {
    std::vector<double> r, phi;

    PolarGraph(const ProfileCurve& c, double r_in, double r_out) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            r.push_back(c.r(i));
            phi.push_back(std::atan2(c.y[i], c.x[i]));
        }
        if (r.empty() || r.front() > r_in * (1.0 + 1e-12) || r.back() < r_out * (1.0 - 1e-12)) {
            throw DomainError("flat_norm_annulus: profile does not cover the annulus");
        }
        auto first = std::upper_bound(r.begin(), r.end(), r_in) - r.begin();
        first = std::max<std::ptrdiff_t>(first - 1, 0);
        for (std::size_t i = static_cast<std::size_t>(first) + 1; i < r.size(); ++i) {
            if (!(r[i] > r[i - 1])) {
                if (r[i - 1] > r_out) break;
                throw DomainError("flat_norm_annulus: profile is not a graph over r on the annulus");
            }
        }
    }

    double operator()(double x) const {
        auto it = std::lower_bound(r.begin(), r.end(), x);
        if (it == r.begin()) return phi.front();
        if (it == r.end()) return phi.back();
        const auto i = static_cast<std::size_t>(it - r.begin());
        const double w = (x - r[i - 1]) / (r[i] - r[i - 1]);
        return (1.0 - w) * phi[i - 1] + w * phi[i];
    }
};

} // namespace

AnnulusDistance flat_norm_annulus(const ProfileCurve& a, const ProfileCurve& b, double r_in, double r_out,
                                  double tolerance) {
    if (!(r_in > 0.0 && r_out > r_in)) {
        throw DomainError("flat_norm_annulus: need 0 < r_in < r_out");
    }
    if (a.p != b.p || a.q != b.q) {
        throw DomainError("flat_norm_annulus: profiles belong to different symmetry types");
    }
    const PolarGraph ga(a, r_in, r_out), gb(b, r_in, r_out);
    const int p = a.p, q = a.q;
    using boost::math::quadrature::gauss_kronrod;
    auto angular = [p, q](double lo, double hi) {
        if (lo == hi) return 0.0;
        auto f = [p, q](double t) { return std::pow(std::cos(t), p) * std::pow(std::sin(t), q); };
        return gauss_kronrod<double, 31>::integrate(f, std::min(lo, hi), std::max(lo, hi), 0);
    };
    auto radial = [&](double r) { return std::pow(r, p + q + 1) * angular(ga(r), gb(r)); };
    // The angle is piecewise linear in r: integrate segment by segment.
    std::vector<double> cuts{r_in, r_out};
    for (const auto* g : {&ga, &gb}) {
        for (double r : g->r) {
            if (r > r_in && r < r_out) cuts.push_back(r);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    AnnulusDistance out;
    out.r_in = r_in;
    out.r_out = r_out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        double err = 0.0;
        out.value += gauss_kronrod<double, 15>::integrate(radial, cuts[k], cuts[k + 1], 2, tolerance, &err);
        out.error += err;
    }
    return out;
}

} // namespace conelab
