#pragma once

// Named verifications. Each check turns a scenario into a list of residual
// samples; "upper" checks pass when the largest |sample| is at most the
// tolerance, "lower" checks when the smallest |sample| is at least it.

#include "cangle/cli/scenario.hpp"
#include "cangle/transport.hpp"

#include <chrono>
#include <functional>

namespace cangle::cli {

enum class Bound { upper, lower };

struct CheckSpec {
    std::string name;
    std::string anchor;
    double tolerance = 0.0;
    Bound bound = Bound::upper;
    std::string applies_to;
    std::function<std::vector<double>(const Scenario&, const Config&)> samples;
};

struct CheckResult {
    std::string name;
    std::string anchor;
    Bound bound = Bound::upper;
    double statistic = kNaN;  // sup (upper) or min (lower) of |sample|
    double mean = kNaN;
    double tolerance = 0.0;
    std::size_t count = 0;
    bool pass = false;
    double seconds = 0.0;
    std::string error;
};

namespace detail {

inline const CurveObject& need_curve(const Scenario& sc, const std::string& check) {
    if (!sc.curve) config_error("check '" + check + "' needs a curve (object.kind = helix)");
    return *sc.curve;
}

inline const CurveObject& need_helix(const Scenario& sc, const std::string& check, std::optional<HelixKind> kind) {
    const auto& c = need_curve(sc, check);
    if (!c.is_helix || (kind && c.kind != *kind)) {
        config_error("check '" + check + "' needs helix.kind = " +
                     std::string(kind ? to_string(*kind) : std::string_view("generalized or slant")));
    }
    return c;
}

inline const RuledPatch& need_patch(const Scenario& sc, const std::string& check, std::optional<ObjectKind> kind = {}) {
    if (!sc.patch || (kind && sc.kind != *kind)) {
        config_error("check '" + check + "' needs object.kind = " +
                     std::string(kind ? to_string(*kind) : std::string_view("cylinder, rectifying or product-surface")));
    }
    return *sc.patch;
}

inline const SurfaceAxisField& need_axis(const Scenario& sc, const std::string& check) {
    need_patch(sc, check);
    if (!sc.axis) config_error("check '" + check + "': " + sc.axis_note);
    return *sc.axis;
}

template <class F>
std::vector<double> over_grid(const RuledPatch& p, F&& f) {
    std::vector<double> out;
    out.reserve(p.nu() * p.nv());
    for (std::size_t i = 0; i < p.nu(); ++i)
        for (std::size_t j = 0; j < p.nv(); ++j) out.push_back(f(i, j));
    return out;
}

inline std::vector<double> grid_values(const Grid<double>& g) { return g.data; }

inline std::vector<double> transported_axis(const Scenario& sc, const CurveObject& c, bool angle) {
    const Manifold3& m = sc.manifold;
    const std::size_t i0 = c.path.size() / 2;
    const auto moved = parallel_transport<3>(m, c.path, c.axis.V[i0], {}, i0);
    std::vector<double> out(c.path.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (angle) {
            const Vec3& e = c.kind == HelixKind::generalized ? c.frenet.T[i] : c.frenet.N[i];
            out[i] = inner(m, c.path.p[i], e, moved[i]) - std::cos(c.theta);
        } else {
            out[i] = norm(m, c.path.p[i], Vec3(moved[i] - c.axis.V[i]));
        }
    }
    return out;
}

}  // namespace detail

inline const std::vector<CheckSpec>& check_registry() {
    using namespace detail;
    static const std::vector<CheckSpec> registry{
        {"lancret", "Lancret: constant tau/kappa gives a constant angle between T and a parallel axis", 1e-5,
         Bound::upper, "helix (generalized)",
         [](const Scenario& sc, const Config&) {
             return transported_axis(sc, need_helix(sc, "lancret", HelixKind::generalized), true);
         }},
        {"slant-angle", "slant helix: constant angle between N and a parallel axis", 1e-5, Bound::upper,
         "helix (slant)",
         [](const Scenario& sc, const Config&) {
             return transported_axis(sc, need_helix(sc, "slant-angle", HelixKind::slant), true);
         }},
        {"axis-transport", "frame-formula axis of a helix equals its parallel transport", 1e-5, Bound::upper,
         "helix (generalized, slant)",
         [](const Scenario& sc, const Config&) {
             return transported_axis(sc, need_helix(sc, "axis-transport", std::nullopt), false);
         }},
        {"slant-sigma", "slant helix: sigma is constant, equal to +-cot(theta)", 1e-4, Bound::upper, "helix (slant)",
         [](const Scenario& sc, const Config&) {
             const auto& c = need_helix(sc, "slant-sigma", HelixKind::slant);
             const double target = c.sign / std::tan(c.theta);
             std::vector<double> out;
             for (double s : c.frenet.sigma) out.push_back(s - target);
             return out;
         }},
        {"classify", "classification recovers the helix type and angle", 1e-4, Bound::upper,
         "helix (generalized, slant)",
         [](const Scenario& sc, const Config&) {
             const auto& c = need_helix(sc, "classify", std::nullopt);
             const auto cls = classify_curve(c.frenet);
             const CurveClass want =
                 c.kind == HelixKind::generalized ? CurveClass::generalized_helix : CurveClass::slant_helix;
             if (cls.kind != want) return std::vector<double>{kNaN};
             const double theta = c.kind == HelixKind::slant && c.sign < 0 ? pi - c.theta : c.theta;
             return std::vector<double>{cls.theta - theta};
         }},
        {"indicatrix", "normal indicatrix has geodesic curvature sigma, tangent indicatrix tau/kappa", 1e-4,
         Bound::upper, "helix",
         [](const Scenario& sc, const Config&) {
             const auto& c = need_curve(sc, "indicatrix");
             const auto& fd = c.frenet;
             const auto n = indicatrix(sc.manifold, fd, IndicatrixKind::normal, fd.size() / 2);
             const auto t = indicatrix(sc.manifold, fd, IndicatrixKind::tangent, fd.size() / 2);
             std::vector<double> out;
             for (std::size_t i = 0; i < fd.size(); ++i) {
                 out.push_back(n.kappa_g[i] - fd.sigma[i]);
                 out.push_back(t.kappa_g[i] - fd.tau[i] / fd.kappa[i]);
             }
             return out;
         }},
        {"cylinder-flatness", "cylinder over a parallel ruling field is intrinsically and extrinsically flat", 1e-3,
         Bound::upper, "cylinder",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "cylinder-flatness", ObjectKind::cylinder);
             return over_grid(p, [&](std::size_t i, std::size_t j) {
                 return std::max(std::abs(p.K_ext(i, j)), std::abs(p.K_int(i, j)));
             });
         }},
        {"cylinder-transport", "ruling field of a flat cylinder is parallel on the surface", 1e-4, Bound::upper,
         "cylinder",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "cylinder-transport", ObjectKind::cylinder);
             return grid_values(axis_transport_residual(sc.manifold, p, *sc.axis));
         }},
        {"transport-nonzero", "ruling field of a non-flat cylinder is not parallel (sup over the patch)", 1e-2,
         Bound::lower, "cylinder",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "transport-nonzero", ObjectKind::cylinder);
             const auto r = axis_transport_residual(sc.manifold, p, *sc.axis);
             return std::vector<double>{*std::max_element(r.data.begin(), r.data.end())};
         }},
        {"ruling-geodesic", "rulings are unit-speed ambient geodesics", 1e-6, Bound::upper, "patches",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "ruling-geodesic");
             auto out = over_grid(p, [&](std::size_t i, std::size_t j) { return p.g22(i, j) - 1.0; });
             out.push_back(ruling_geodesic_residual(sc.manifold, p));
             return out;
         }},
        {"rectifying-geodesic", "the directrix is a geodesic of its rectifying surface, which is flat along it",
         1e-5, Bound::upper, "rectifying",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "rectifying-geodesic", ObjectKind::rectifying);
             auto out = u_line_geodesic_curvature(sc.manifold, p, p.j0);
             for (std::size_t i = 0; i < p.nu(); ++i) out.push_back(p.K_ext(i, p.j0));
             return out;
         }},
        {"defect", "constant-angle defect <X_u, nabla_u V> vanishes (flat ambient, product surfaces)", 1e-4,
         Bound::upper, "rectifying, product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& ax = need_axis(sc, "defect");
             return grid_values(parallel_angle_defect(sc.manifold, *sc.patch, ax).direct);
         }},
        {"defect-equivalence", "direct-transport defect equals g11,v sin(theta)/2 + h11 cos(theta) where K_ext is small",
         1e-4, Bound::upper, "rectifying, product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& ax = need_axis(sc, "defect-equivalence");
             const auto& p = *sc.patch;
             const auto d = parallel_angle_defect(sc.manifold, p, ax);
             std::vector<double> out;
             for (std::size_t k = 0; k < d.direct.data.size(); ++k)
                 if (std::abs(p.K_ext.data[k]) < 1e-5) out.push_back(d.direct.data[k] - d.closed.data[k]);
             return out;
         }},
        {"defect-on-directrix", "the defect vanishes along the directrix", 1e-6, Bound::upper,
         "rectifying, product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& ax = need_axis(sc, "defect-on-directrix");
             const auto& p = *sc.patch;
             const auto d = parallel_angle_defect(sc.manifold, p, ax);
             std::vector<double> out;
             for (std::size_t i = 0; i < p.nu(); ++i) {
                 out.push_back(d.direct(i, p.j0));
                 out.push_back(d.closed(i, p.j0));
             }
             return out;
         }},
        {"defect-nonzero-off-directrix", "no constant-angle rectifying surface in curved space forms: |defect| "
                                         "stays away from 0 for |v| >= defect.v_min",
         1e-2, Bound::lower, "rectifying",
         [](const Scenario& sc, const Config& cfg) {
             const auto& ax = need_axis(sc, "defect-nonzero-off-directrix");
             const auto& p = *sc.patch;
             const double vmin = cfg.number("defect.v_min", 0.2);
             const auto d = parallel_angle_defect(sc.manifold, p, ax);
             std::vector<double> out;
             for (std::size_t i = 0; i < p.nu(); ++i)
                 for (std::size_t j = 0; j < p.nv(); ++j)
                     if (std::abs(p.v[j]) >= vmin - 1e-12) out.push_back(d.direct(i, j));
             if (out.empty()) cfg.bad("defect.v_min", "a value reached by the v range");
             return out;
         }},
        {"defect-oracle", "defect against the tan-squared closed form on S3(r), relative error off the directrix",
         1e-3, Bound::upper, "rectifying on sphere",
         [](const Scenario& sc, const Config&) {
             const auto& ax = need_axis(sc, "defect-oracle");
             if (sc.manifold.kind() != MetricKind::sphere) config_error("check 'defect-oracle' needs manifold.kind = sphere");
             const auto& p = *sc.patch;
             const auto& fd = sc.curve->frenet;
             const auto d = parallel_angle_defect(sc.manifold, p, ax);
             const double sigma = 1.0 / std::tan(sc.curve->theta);
             std::vector<double> out;
             for (std::size_t i = 0; i < p.nu(); ++i)
                 for (std::size_t j = 0; j < p.nv(); ++j) {
                     if (j == p.j0) continue;
                     const double o = sphere_defect_oracle(fd.kappa[i], fd.tau[i], sigma, sc.curve->theta,
                                                           sc.manifold.radius(), p.v[j]);
                     out.push_back(d.direct(i, j) / o - 1.0);
                 }
             return out;
         }},
        {"normal-angle", "product constant-angle surface: <nu, d/dt> = cos(theta)", 1e-5, Bound::upper,
         "product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "normal-angle", ObjectKind::product_surface);
             const double c = std::cos(sc.axis->theta);
             return over_grid(p, [&](std::size_t i, std::size_t j) { return p.normal(i, j)[2] - c; });
         }},
        {"extrinsic-flatness", "K_ext vanishes", 1e-4, Bound::upper, "patches",
         [](const Scenario& sc, const Config&) { return grid_values(need_patch(sc, "extrinsic-flatness").K_ext); }},
        {"product-curvature", "product constant-angle surface: K_int = K^M cos^2(theta)", 1e-3, Bound::upper,
         "product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "product-curvature", ObjectKind::product_surface);
             const auto KM = factor_curvature(sc.manifold);
             const double c2 = std::pow(std::cos(sc.axis->theta), 2);
             return over_grid(p, [&](std::size_t i, std::size_t j) { return p.K_int(i, j) - KM(p.X(i, j)) * c2; });
         }},
        {"riccati", "lambda solves lambda_1 + lambda^2 cot(theta) + K^M sin(2 theta)/2 = 0", 1e-3, Bound::upper,
         "product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "riccati", ObjectKind::product_surface);
             return grid_values(riccati_residual(sc.manifold, p, *sc.axis, factor_curvature(sc.manifold)).residual);
         }},
        {"riccati-curvature", "K_int = -(lambda_1 + lambda^2 cot(theta)) cot(theta)", 1e-3, Bound::upper,
         "product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& p = need_patch(sc, "riccati-curvature", ObjectKind::product_surface);
             const auto r = riccati_residual(sc.manifold, p, *sc.axis, factor_curvature(sc.manifold));
             return over_grid(p, [&](std::size_t i, std::size_t j) { return r.K_cor(i, j) - p.K_int(i, j); });
         }},
        {"ruledness", "R(e2, e1, e1, nu) vanishes on flat ruled surfaces", 1e-5, Bound::upper, "patches",
         [](const Scenario& sc, const Config&) {
             return grid_values(ruledness_criterion(sc.manifold, need_patch(sc, "ruledness")));
         }},
        {"gauss-equation", "K_int - K_ext - K_sec(X_u, X_v) = 0", 1e-3, Bound::upper, "patches",
         [](const Scenario& sc, const Config&) {
             return grid_values(gauss_residual(sc.manifold, need_patch(sc, "gauss-equation")));
         }},
        {"curvature-operator", "R(X_u, X_v)V vanishes", 1e-6, Bound::upper, "rectifying, product-surface",
         [](const Scenario& sc, const Config&) {
             const auto& ax = need_axis(sc, "curvature-operator");
             const auto op = curvature_operator_on_axis(sc.manifold, *sc.patch, ax);
             return over_grid(*sc.patch, [&](std::size_t i, std::size_t j) { return op.RV(i, j).norm(); });
         }},
        {"curvature-scalar-nonzero", "sin(theta) R_uvvu - cos(theta) R_uvnu stays away from 0 in curved space forms",
         1e-2, Bound::lower, "rectifying",
         [](const Scenario& sc, const Config&) {
             const auto& ax = need_axis(sc, "curvature-scalar-nonzero");
             return grid_values(curvature_operator_on_axis(sc.manifold, *sc.patch, ax).scalar);
         }},
    };
    return registry;
}

inline const CheckSpec* find_check(const std::string& name) {
    for (const auto& c : check_registry())
        if (c.name == name) return &c;
    return nullptr;
}

inline const CheckSpec& require_check(const std::string& name, const std::string& where) {
    const CheckSpec* c = find_check(name);
    if (!c) config_error(where + ": unknown check '" + name + "' (see list-checks)");
    return *c;
}

/// Runs one check. ConfigError propagates; numerical failures are recorded
/// in the result and count as a failed check.
inline CheckResult run_check(const CheckSpec& spec, const Scenario& sc, const Config& cfg, double tolerance) {
    CheckResult r;
    r.name = spec.name;
    r.anchor = spec.anchor;
    r.bound = spec.bound;
    r.tolerance = tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const auto xs = spec.samples(sc, cfg);
        r.count = xs.size();
        bool nan = xs.empty();
        double sum = 0.0, sup = 0.0, inf = std::numeric_limits<double>::infinity();
        for (double x : xs) {
            if (std::isnan(x)) nan = true;
            sum += std::abs(x);
            sup = std::max(sup, std::abs(x));
            inf = std::min(inf, std::abs(x));
        }
        r.statistic = nan ? kNaN : spec.bound == Bound::upper ? sup : inf;
        r.mean = nan ? kNaN : sum / static_cast<double>(xs.size());
        r.pass = !nan && (spec.bound == Bound::upper ? r.statistic <= tolerance : r.statistic >= tolerance);
        if (nan) r.error = xs.empty() ? "no samples" : "undefined samples";
    } catch (const GeometryError& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace cangle::cli
