#pragma once

// Scenario construction from a Config: ambient manifold plus one object
// (a curve or a ruled patch) and, for patches, the extended axis.

#include "cangle/cli/config.hpp"
#include "cangle/helix.hpp"
#include "cangle/metrics.hpp"
#include "cangle/surface.hpp"

#include <optional>
#include <set>

namespace cangle::cli {

enum class ObjectKind { helix, cylinder, rectifying, product_surface };

inline std::string_view to_string(ObjectKind k) {
    switch (k) {
        case ObjectKind::helix: return "helix";
        case ObjectKind::cylinder: return "cylinder";
        case ObjectKind::rectifying: return "rectifying";
        case ObjectKind::product_surface: return "product-surface";
    }
    return "unknown";
}

/// Keys accepted outside the `tol.` namespace.
inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "scenario.name",   "manifold.kind",    "manifold.radius",  "manifold.factor",  "manifold.metric",
        "object.kind",     "helix.kind",       "helix.theta",      "helix.kappa",      "helix.tau",
        "helix.c0",        "helix.sign",       "helix.p0",         "helix.tangent",    "helix.normal",
        "grid.u_min",      "grid.u_max",       "grid.u_spacing",   "grid.v_min",       "grid.v_max",
        "grid.v_spacing",  "cylinder.base",    "cylinder.axis",    "cylinder.latitude", "cylinder.p0",
        "cylinder.direction", "product.curve", "product.theta",    "product.latitude", "product.p0",
        "product.direction", "checks",         "defect.v_min",     "output.csv",       "output.obj",
        "sweep.parameter", "sweep.values",
    };
    return keys;
}

/// `name(c0, c1, ...)` or a bare number (constant profile).
inline Profile parse_profile(const Config& cfg, const std::string& key) {
    const std::string text = cfg.str(key);
    KappaProfile prof;
    double x = 0.0;
    if (parse_double(text, x)) {
        prof.kind = "constant";
        prof.coeffs = {x};
    } else {
        const auto open = text.find('('), close = text.rfind(')');
        if (open == std::string::npos || close != text.size() - 1) cfg.bad(key, "a number or name(c0, c1, ...)");
        prof.kind = trim(text.substr(0, open));
        prof.coeffs.clear();
        for (const auto& item : split(text.substr(open + 1, close - open - 1), ',')) {
            if (!parse_double(item, x)) cfg.bad(key, "numeric profile coefficients");
            prof.coeffs.push_back(x);
        }
    }
    try {
        return prof.function();
    } catch (const GeometryError& e) {
        cfg.bad(key, std::string("a valid profile (") + e.what() + ")");
    }
}

inline std::string one_of(const Config& cfg, const std::string& key, const std::vector<std::string>& allowed,
                          const std::string& fallback = {}) {
    if (!cfg.has(key) && !fallback.empty()) return fallback;
    const std::string v = cfg.str(key);
    for (const auto& a : allowed)
        if (v == a) return v;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : " | ") + a;
    cfg.bad(key, "one of " + list);
}

inline Manifold2 make_factor(const Config& cfg, const std::string& key, double r) {
    const std::string f = one_of(cfg, key, {"sphere", "hyperbolic", "euclidean"});
    if (f == "sphere") return Manifold2::sphere(r);
    if (f == "hyperbolic") return Manifold2::hyperbolic(r);
    return Manifold2::euclidean();
}

inline Manifold3 make_manifold(const Config& cfg) {
    const std::string kind = one_of(cfg, "manifold.kind", {"euclidean", "sphere", "hyperbolic", "product", "custom"});
    const double r = cfg.number("manifold.radius", 1.0);
    if (!(r > 0.0)) cfg.bad("manifold.radius", "a positive number");
    if (kind == "euclidean") return Manifold3::euclidean();
    if (kind == "sphere") return Manifold3::sphere(r);
    if (kind == "hyperbolic") return Manifold3::hyperbolic(r);
    if (kind == "product") return Manifold3::product(make_factor(cfg, "manifold.factor", r));
    const std::string name = one_of(cfg, "manifold.metric", custom_metric_names());
    return custom_metric(name);
}

struct CurveObject {
    HelixKind kind = HelixKind::generalized;
    bool is_helix = true;
    double theta = 0.0;
    int sign = 1;
    CurvePath<3> path;
    FrenetData frenet;
    AxisField axis;
};

struct Scenario {
    std::string name;
    Manifold3 manifold;
    ObjectKind kind = ObjectKind::helix;
    std::optional<CurveObject> curve;
    std::optional<RuledPatch> patch;
    std::optional<SurfaceAxisField> axis;
    /// Why no axis exists for this patch, when it does not.
    std::string axis_note;
};

struct UGrid {
    double lo, hi, spacing;
};

inline UGrid u_grid(const Config& cfg) {
    UGrid g{cfg.number("grid.u_min", 0.0), cfg.number("grid.u_max", 1.0), cfg.number("grid.u_spacing", 0.01)};
    if (!(g.spacing > 0.0)) cfg.bad("grid.u_spacing", "a positive number");
    if (!(g.hi > g.lo)) cfg.bad("grid.u_max", "a value above grid.u_min");
    if ((g.hi - g.lo) / g.spacing + 1.0 < 8.0 - 1e-9) cfg.bad("grid.u_spacing", "at least 8 samples over the u range");
    return g;
}

inline VRange v_range(const Config& cfg) {
    VRange vr{cfg.number("grid.v_min", -0.3), cfg.number("grid.v_max", 0.3), cfg.number("grid.v_spacing", 0.01)};
    if (!(vr.spacing > 0.0)) cfg.bad("grid.v_spacing", "a positive number");
    if (!(vr.lo <= 0.0 && vr.hi >= 0.0)) cfg.bad("grid.v_min", "a range [v_min, v_max] containing 0");
    if (vr.nodes().size() < 8) cfg.bad("grid.v_spacing", "at least 8 nodes over the v range");
    return vr;
}

inline CurveObject make_curve(const Manifold3& m, const Config& cfg) {
    const UGrid g = u_grid(cfg);
    const std::string kind = one_of(cfg, "helix.kind", {"generalized", "slant", "free"});
    const Vec3 p0 = cfg.vec<3>("helix.p0", Vec3::Zero());
    const Frame frame = make_frame(m, p0, cfg.vec<3>("helix.tangent", Vec3(1, 0.2, 0)),
                                   cfg.vec<3>("helix.normal", Vec3(0, 1, 0.3)));
    const Profile kappa = parse_profile(cfg, "helix.kappa");
    const double start = std::clamp(0.0, g.lo, g.hi);
    CurveObject c;
    if (kind == "generalized") {
        c.theta = cfg.number("helix.theta");
        auto h = make_generalized_helix(m, p0, frame, kappa, c.theta, {g.lo, g.hi}, {}, g.spacing, start);
        c.path = std::move(h.path);
        c.frenet = std::move(h.frenet);
        c.axis = std::move(h.axis);
    } else if (kind == "slant") {
        SlantHelixSpec spec;
        spec.kappa_bar = kappa;
        spec.theta = c.theta = cfg.number("helix.theta");
        spec.c0 = cfg.number("helix.c0", 0.0);
        spec.sign = c.sign = cfg.integer("helix.sign", 1);
        spec.p0 = p0;
        spec.frame0 = frame;
        spec.u0 = start;
        spec.u_range = {g.lo, g.hi};
        spec.spacing = g.spacing;
        auto h = make_slant_helix(m, spec);
        c.kind = HelixKind::slant;
        c.path = std::move(h.path);
        c.frenet = std::move(h.frenet);
        c.axis = std::move(h.axis);
    } else {
        c.is_helix = false;
        auto syn = synthesize_curve(m, p0, frame, kappa, parse_profile(cfg, "helix.tau"), {g.lo, g.hi}, {}, g.spacing,
                                    start);
        c.path = std::move(syn.path);
        c.frenet = std::move(syn.frenet);
    }
    return c;
}

inline CurvePath<3> cylinder_base(const Scenario& sc, const Config& cfg) {
    const Manifold3& m = sc.manifold;
    const UGrid g = u_grid(cfg);
    const std::string base = one_of(cfg, "cylinder.base", {"helix", "geodesic", "latitude"});
    if (base == "helix") return sc.curve->path;
    if (base == "geodesic") {
        const Vec3 p0 = cfg.vec<3>("cylinder.p0", Vec3::Zero());
        const Vec3 d = cfg.vec<3>("cylinder.direction", Vec3(1, 0, 0));
        const double len = norm(m, p0, d);
        if (!(len > 0.0)) cfg.bad("cylinder.direction", "a nonzero vector");
        return integrate_geodesic(m, p0, Vec3(d / len), g.hi - g.lo, {}, g.spacing);
    }
    if (m.kind() != MetricKind::product || m.product_factor().kind != MetricKind::sphere) {
        cfg.bad("cylinder.base", "'latitude' only on manifold.kind = product with manifold.factor = sphere");
    }
    const double lat = cfg.number("cylinder.latitude", 0.4);
    const double rho = m.radius() * std::cos(lat);
    CurvePath<3> c;
    for (double s : uniform_grid(0.0, g.hi - g.lo, g.spacing)) {
        c.s.push_back(s);
        c.p.emplace_back(lat, s / rho, 0.0);
        c.T.emplace_back(0.0, 1.0 / rho, 0.0);
        c.dT.emplace_back(0.0, 0.0, 0.0);
    }
    return c;
}

inline CurvePath<2> product_curve(const Manifold3& m, const Config& cfg) {
    const Manifold2 f = m.factor();
    const UGrid g = u_grid(cfg);
    const std::string kind = one_of(cfg, "product.curve", {"latitude", "geodesic"});
    if (kind == "latitude") {
        if (f.kind() != MetricKind::sphere) cfg.bad("product.curve", "'geodesic' unless the factor is a sphere");
        auto c = latitude_circle(f, cfg.number("product.latitude", 0.5), g.spacing);
        const auto n = static_cast<std::size_t>(std::lround((g.hi - g.lo) / g.spacing)) + 1;
        if (n > c.size()) cfg.bad("grid.u_max", "a u range no longer than the latitude circle");
        return c.slice(0, n - 1);
    }
    const Vec2 p0 = cfg.vec<2>("product.p0", Vec2(0.1, 0.0));
    const Vec2 d = cfg.vec<2>("product.direction", Vec2(0.3, 1.0));
    const double len = std::sqrt(d.dot(f.metric(p0) * d));
    if (!(len > 0.0)) cfg.bad("product.direction", "a nonzero vector");
    return integrate_geodesic<2>(f, p0, Vec2(d / len), g.hi - g.lo, {}, g.spacing);
}

/// Builds everything the config asks for. Library exceptions propagate.
inline Scenario build_scenario(const Config& cfg) {
    Scenario sc{cfg.str("scenario.name", "scenario"), make_manifold(cfg)};
    const std::string kind = one_of(cfg, "object.kind", {"helix", "cylinder", "rectifying", "product-surface"});
    const Manifold3& m = sc.manifold;
    if (kind == "helix") {
        sc.kind = ObjectKind::helix;
        sc.curve = make_curve(m, cfg);
        return sc;
    }
    const VRange vr = v_range(cfg);
    if (kind == "cylinder") {
        sc.kind = ObjectKind::cylinder;
        if (one_of(cfg, "cylinder.base", {"helix", "geodesic", "latitude"}) == "helix") sc.curve = make_curve(m, cfg);
        const CurvePath<3> base = cylinder_base(sc, cfg);
        const Vec3 a = cfg.vec<3>("cylinder.axis", Vec3(0, 0, 1));
        const double len = norm(m, base.p.front(), a);
        if (!(len > 0.0)) cfg.bad("cylinder.axis", "a nonzero vector");
        sc.patch = build_cylinder(m, base, Vec3(a / len), vr, cfg.number("grid.u_spacing", 0.01));
        sc.axis = extend_axis(m, *sc.patch, sc.patch->W, pi / 2);
    } else if (kind == "rectifying") {
        sc.kind = ObjectKind::rectifying;
        sc.curve = make_curve(m, cfg);
        sc.patch = build_rectifying_surface(m, sc.curve->frenet, vr);
        if (sc.curve->is_helix && sc.curve->kind == HelixKind::slant && sc.curve->sign > 0) {
            sc.axis = extend_axis(m, *sc.patch, rectifying_axis(sc.curve->frenet, sc.curve->theta), sc.curve->theta);
        } else {
            sc.axis_note = "the axis cos θ N + sin θ D needs helix.kind = slant with helix.sign = 1";
        }
    } else {
        sc.kind = ObjectKind::product_surface;
        if (m.kind() != MetricKind::product) cfg.bad("object.kind", "'product-surface' only on manifold.kind = product");
        const double theta = cfg.number("product.theta");
        sc.patch = build_product_surface(m, product_curve(m, cfg), theta, vr);
        sc.axis = extend_axis(m, *sc.patch, std::vector<Vec3>(sc.patch->nu(), Vec3(0, 0, 1)), theta);
    }
    return sc;
}

}  // namespace cangle::cli
