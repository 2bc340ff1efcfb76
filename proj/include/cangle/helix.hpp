#pragma once

// Curve synthesis from prescribed curvature and torsion, parallel
// generalized and slant helices with their axes, and curve classification.

#include "cangle/frenet.hpp"

#include <algorithm>
#include <functional>

namespace cangle {

using Profile = std::function<double(double)>;
/// Torsion as a function of the parameter and of K(s) = ∫κ.
using TorsionLaw = std::function<double(double, double)>;

struct Frame {
    Vec3 T, N, B;
};

/// Orthonormal, positively oriented frame from two guesses by Gram–Schmidt.
inline Frame make_frame(const Manifold3& m, const Vec3& p, const Vec3& t_guess, const Vec3& n_guess) {
    const Mat3 g = m.metric(p);
    Vec3 t = t_guess / std::sqrt(t_guess.dot(g * t_guess));
    Vec3 n = n_guess - n_guess.dot(g * t) * t;
    const double nn = std::sqrt(n.dot(g * n));
    if (!(nn > 1e-10)) fail(ErrorCode::BadParams, "frame guesses are linearly dependent");
    n /= nn;
    return {t, n, cross(g, t, n)};
}

namespace detail {

inline void require_frame(const Manifold3& m, const Vec3& p, const Frame& f) {
    const Mat3 g = m.metric(p);
    const Vec3 e[3] = {f.T, f.N, f.B};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (std::abs(e[a].dot(g * e[b]) - (a == b ? 1.0 : 0.0)) > 1e-8) {
                fail(ErrorCode::BadParams, "initial frame is not orthonormal");
            }
    if (volume(g, f.T, f.N, f.B) < 0.0) fail(ErrorCode::BadParams, "initial frame is negatively oriented");
}

/// Orthonormal positively oriented (a, b, c) with a = axis/|axis|.
inline std::array<Vec3, 3> completion(const Manifold3& m, const Vec3& p, const Vec3& axis, const Vec3& hint) {
    const Mat3 g = m.metric(p);
    const Vec3 a = axis / std::sqrt(axis.dot(g * axis));
    Vec3 b = hint - hint.dot(g * a) * a;
    if (std::sqrt(b.dot(g * b)) < 1e-6) {
        b = Vec3::Unit(0);
        for (int i = 0; i < 3; ++i) {
            Vec3 cand = Vec3::Unit(i) - Vec3::Unit(i).dot(g * a) * a;
            if (std::sqrt(cand.dot(g * cand)) > 0.5) {
                b = cand;
                break;
            }
        }
    }
    b /= std::sqrt(b.dot(g * b));
    return {a, b, cross(g, a, b)};
}

using FrenetState = Eigen::Matrix<double, 13, 1>;

struct FrenetIntegration {
    CurvePath<3> path;
    FrenetData frenet;
};

/// Integrates p' = T, ∇_T T = κN, ∇_T N = −κT + τB, ∇_T B = −τN and K' = κ
/// from (s0, p0, frame0) to every grid abscissa (grid sorted, s0 inside).
inline FrenetIntegration integrate_frenet(const Manifold3& m, const Vec3& p0, const Frame& frame0, double s0,
                                          const Profile& kappa, const TorsionLaw& torsion,
                                          const std::vector<double>& grid, const IntegratorSettings& settings) {
    auto rhs = [&](double s, const FrenetState& y) {
        const Vec3 x = y.segment<3>(0), t = y.segment<3>(3), n = y.segment<3>(6), b = y.segment<3>(9);
        const double k = kappa(s);
        const double tau = torsion(s, y[12]);
        const auto gamma = m.christoffel(x);
        FrenetState dy;
        dy.segment<3>(0) = t;
        dy.segment<3>(3) = k * n - gamma.contract(t, t);
        dy.segment<3>(6) = -k * t + tau * b - gamma.contract(t, n);
        dy.segment<3>(9) = -tau * n - gamma.contract(t, b);
        dy[12] = k;
        return dy;
    };
    FrenetState y0;
    y0 << p0, frame0.T, frame0.N, frame0.B, 0.0;
    OdeHooks<13> hooks;
    hooks.guard = [&m](const FrenetState& y) { return m.contains(Vec3(y.segment<3>(0))); };

    std::vector<double> fwd, bwd;
    for (double s : grid) {
        if (s >= s0) fwd.push_back(s);
    }
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        if (*it < s0) bwd.push_back(*it);
    }
    auto forward = integrate<13>(rhs, s0, y0, fwd, settings, hooks);
    auto backward = integrate<13>(rhs, s0, y0, bwd, settings, hooks);
    if (forward.stop == OdeStop::Guard || backward.stop == OdeStop::Guard) {
        fail(ErrorCode::LeftChart, "synthesized curve leaves the chart of " + m.name());
    }

    std::vector<double> t;
    std::vector<FrenetState> y, dy;
    for (std::size_t i = backward.t.size(); i-- > 0;) {
        t.push_back(backward.t[i]);
        y.push_back(backward.y[i]);
        dy.push_back(backward.dy[i]);
    }
    for (std::size_t i = 0; i < forward.t.size(); ++i) {
        t.push_back(forward.t[i]);
        y.push_back(forward.y[i]);
        dy.push_back(forward.dy[i]);
    }

    FrenetIntegration out;
    out.path.accepted_steps = forward.accepted + backward.accepted;
    out.path.rejected_steps = forward.rejected + backward.rejected;
    FrenetData& fd = out.frenet;
    fd.h = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Vec3 x = y[i].segment<3>(0);
        out.path.s.push_back(t[i]);
        out.path.p.push_back(x);
        out.path.T.push_back(y[i].segment<3>(3));
        out.path.dT.push_back(dy[i].segment<3>(3));
        fd.s.push_back(t[i]);
        fd.p.push_back(x);
        fd.T.push_back(y[i].segment<3>(3));
        fd.N.push_back(y[i].segment<3>(6));
        fd.B.push_back(y[i].segment<3>(9));
        fd.kappa.push_back(kappa(t[i]));
        fd.tau.push_back(torsion(t[i], y[i][12]));
    }
    out.path.fields["N"] = fd.N;
    out.path.fields["B"] = fd.B;
    complete_frenet(fd);
    return out;
}

inline void require_positive(const Profile& kappa, const std::vector<double>& grid) {
    for (double s : grid) {
        if (!(kappa(s) > kKappaMin)) {
            throw GeometryError(ErrorCode::KappaVanishes, "prescribed curvature is not positive", {s, s});
        }
    }
}

}  // namespace detail

/// Curve with prescribed κ(s), τ(s) and the given frame at `start`
/// (default s_range.first). The returned Frenet data echoes the integrated
/// frames.
inline detail::FrenetIntegration synthesize_curve(const Manifold3& m, const Vec3& p0, const Frame& frame0,
                                                  const Profile& kappa, const Profile& tau,
                                                  std::pair<double, double> s_range,
                                                  const IntegratorSettings& settings = {},
                                                  double spacing = kDefaultSampleSpacing,
                                                  std::optional<double> start = std::nullopt) {
    m.require_in_chart(p0);
    detail::require_frame(m, p0, frame0);
    if (!(s_range.second > s_range.first)) fail(ErrorCode::BadParams, "empty arc-length range");
    const double s0 = start.value_or(s_range.first);
    if (!(s0 >= s_range.first && s0 <= s_range.second)) fail(ErrorCode::BadParams, "start outside the arc-length range");
    const auto grid = uniform_grid(s_range.first, s_range.second, spacing);
    detail::require_positive(kappa, grid);
    return detail::integrate_frenet(m, p0, frame0, s0, kappa, [tau](double s, double) { return tau(s); }, grid,
                                    settings);
}

enum class HelixKind { generalized, slant };

inline std::string_view to_string(HelixKind k) { return k == HelixKind::generalized ? "generalized" : "slant"; }

struct AxisField {
    HelixKind kind = HelixKind::generalized;
    double theta = 0.0;
    std::vector<Vec3> V;
    /// |∇_T V| per sample, by finite differences along the curve.
    std::vector<double> residual;
};

/// Frame-formula axis: V = cos θ T + sin θ B (generalized) or
/// V = cos θ N + sin θ D (slant).
inline AxisField axis_field(const Manifold3& m, HelixKind kind, const FrenetData& fd, double theta) {
    detail::check_kappa(fd.s, fd.kappa, kKappaMin);
    AxisField ax;
    ax.kind = kind;
    ax.theta = theta;
    const std::size_t n = fd.size();
    ax.V.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ax.V[i] = kind == HelixKind::generalized ? std::cos(theta) * fd.T[i] + std::sin(theta) * fd.B[i]
                                                 : std::cos(theta) * fd.N[i] + std::sin(theta) * fd.D[i];
    }
    const auto dV = detail::differentiate(ax.V, fd.h);
    ax.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 cov = dV[i] + m.christoffel(fd.p[i]).contract(fd.T[i], ax.V[i]);
        ax.residual[i] = std::sqrt(cov.dot(m.metric(fd.p[i]) * cov));
    }
    return ax;
}

struct Helix {
    CurvePath<3> path;
    FrenetData frenet;
    AxisField axis;
};

/// Generalized helix: τ = cot θ κ with axis V = cos θ T + sin θ B.
inline Helix make_generalized_helix(const Manifold3& m, const Vec3& p0, const Frame& frame0, const Profile& kappa,
                                    double theta, std::pair<double, double> s_range,
                                    const IntegratorSettings& settings = {}, double spacing = kDefaultSampleSpacing,
                                    std::optional<double> start = std::nullopt) {
    if (!(theta > 0.0 && theta < pi)) fail(ErrorCode::BadParams, "helix angle must lie in (0, π)");
    const double c = std::cos(theta) / std::sin(theta);
    auto syn = synthesize_curve(m, p0, frame0, kappa, [kappa, c](double s) { return c * kappa(s); }, s_range,
                                settings, spacing, start);
    Helix h{std::move(syn.path), std::move(syn.frenet), {}};
    h.axis = axis_field(m, HelixKind::generalized, h.frenet, theta);
    h.path.fields["V"] = h.axis.V;
    return h;
}

inline constexpr double kSlantStopMargin = 1e-3;

struct SlantHelixSpec {
    Profile kappa_bar;
    double theta = pi / 4;
    double c0 = 0.0;
    int sign = 1;
    Vec3 p0 = Vec3::Zero();
    Frame frame0{Vec3::Unit(0), Vec3::Unit(1), Vec3::Unit(2)};
    double u0 = 0.0;
    std::pair<double, double> u_range{-1.0, 1.0};
    double spacing = kDefaultSampleSpacing;
};

struct SlantHelix {
    CurvePath<3> path;
    FrenetData frenet;
    AxisField axis;
    /// Achieved parameter interval (u_m, u_M).
    std::pair<double, double> domain;
    /// True where the interval end was set by the stop margin rather than by
    /// the requested range.
    bool stopped_below = false;
    bool stopped_above = false;
};

/// Torsion law of a slant helix with curvature κ̄:
/// τ = ±κ̄ x/√(1 − x²), x = cot θ K − c₀.
inline TorsionLaw slant_torsion(Profile kappa_bar, double theta, double c0, int sign) {
    const double sig = std::cos(theta) / std::sin(theta);
    return [kappa_bar = std::move(kappa_bar), sig, c0, sign](double u, double K) {
        const double x = sig * K - c0;
        if (!(std::abs(x) < 1.0)) fail(ErrorCode::OutOfChart, "slant torsion evaluated beyond its domain");
        return sign * kappa_bar(u) * x / std::sqrt(1.0 - x * x);
    };
}

/// Slant helix with curvature κ̄ and torsion from slant_torsion. The curve is
/// integrated from u0 in both directions up to the requested range or until
/// |σK − c₀| reaches 1 − 1e-3, whichever comes first. The axis is
/// V = cos θ N ± sin θ D for the two torsion branches, so ⟨N, V⟩ = cos θ.
inline SlantHelix make_slant_helix(const Manifold3& m, const SlantHelixSpec& spec,
                                   const IntegratorSettings& settings = {}) {
    if (!(spec.theta > 0.0 && spec.theta < pi / 2)) fail(ErrorCode::BadParams, "slant angle must lie in (0, π/2)");
    if (!(std::abs(spec.c0) < 1.0)) fail(ErrorCode::BadParams, "|c0| must be below 1");
    if (spec.sign != 1 && spec.sign != -1) fail(ErrorCode::BadParams, "sign must be ±1");
    if (!(spec.u_range.first <= spec.u0 && spec.u0 <= spec.u_range.second)) {
        fail(ErrorCode::BadParams, "u0 must lie in the requested range");
    }
    m.require_in_chart(spec.p0);
    detail::require_frame(m, spec.p0, spec.frame0);
    const double limit = 1.0 - kSlantStopMargin;
    if (std::abs(spec.c0) >= limit) {
        throw GeometryError(ErrorCode::DomainExhausted, "|c0| lies inside the stop margin", {spec.u0, spec.u0});
    }
    const double sig = std::cos(spec.theta) / std::sin(spec.theta);
    const TorsionLaw torsion = slant_torsion(spec.kappa_bar, spec.theta, spec.c0, spec.sign);

    // First pass: locate the achieved interval.
    using detail::FrenetState;
    auto rhs = [&](double s, const FrenetState& y) {
        const Vec3 x = y.segment<3>(0), t = y.segment<3>(3), n = y.segment<3>(6), b = y.segment<3>(9);
        const double k = spec.kappa_bar(s);
        const double tau = torsion(s, y[12]);
        const auto gamma = m.christoffel(x);
        FrenetState dy;
        dy << t, k * n - gamma.contract(t, t), -k * t + tau * b - gamma.contract(t, n), -tau * n - gamma.contract(t, b), k;
        return dy;
    };
    FrenetState y0;
    y0 << spec.p0, spec.frame0.T, spec.frame0.N, spec.frame0.B, 0.0;
    OdeHooks<13> hooks;
    hooks.guard = [&m](const FrenetState& y) { return m.contains(Vec3(y.segment<3>(0))); };
    hooks.event = [sig, c0 = spec.c0, limit](double, const FrenetState& y) { return std::abs(sig * y[12] - c0) - limit; };
    IntegratorSettings first = settings;
    first.max_step = std::min(settings.max_step, spec.spacing);
    SlantHelix out;
    out.domain = spec.u_range;
    for (int dir : {1, -1}) {
        const double end = dir > 0 ? spec.u_range.second : spec.u_range.first;
        if (end == spec.u0) continue;
        auto traj = integrate<13>(rhs, spec.u0, y0, {end}, first, hooks);
        if (traj.stop == OdeStop::Guard) fail(ErrorCode::LeftChart, "slant helix leaves the chart of " + m.name());
        if (traj.stop == OdeStop::Event) {
            (dir > 0 ? out.domain.second : out.domain.first) = traj.t.back();
            (dir > 0 ? out.stopped_above : out.stopped_below) = true;
        }
    }
    if (out.domain.second - out.domain.first < 5.0 * spec.spacing) {
        throw GeometryError(ErrorCode::DomainExhausted, "achieved parameter interval is degenerate", out.domain);
    }

    // Second pass on the uniform grid of the achieved interval.
    const auto grid = uniform_grid(out.domain.first, out.domain.second, spec.spacing);
    detail::require_positive(spec.kappa_bar, grid);
    auto syn = detail::integrate_frenet(m, spec.p0, spec.frame0, spec.u0, spec.kappa_bar, torsion, grid, settings);
    out.path = std::move(syn.path);
    out.frenet = std::move(syn.frenet);
    out.axis = axis_field(m, HelixKind::slant, out.frenet, spec.sign > 0 ? spec.theta : pi - spec.theta);
    // For the negative branch cos(π − θ)N + sin(π − θ)D is the parallel field;
    // its negative has angle θ with N.
    if (spec.sign < 0) {
        for (auto& v : out.axis.V) v = -v;
        out.axis.theta = spec.theta;
    }
    out.path.fields["V"] = out.axis.V;
    return out;
}

/// Frame at p for which the generalized-helix axis cos θ T + sin θ B equals
/// the given unit vector.
inline Frame frame_for_generalized_axis(const Manifold3& m, const Vec3& p, const Vec3& axis, double theta,
                                        const Vec3& hint = Vec3::Unit(0)) {
    const auto [a, b, c] = detail::completion(m, p, axis, hint);
    const Vec3 t = std::cos(theta) * a + std::sin(theta) * b;
    const Vec3 bn = std::sin(theta) * a - std::cos(theta) * b;
    return {t, cross(m.metric(p), bn, t), bn};
}

/// Frame at p for which the slant-helix axis of make_slant_helix equals the
/// given unit vector (torsion branch `sign`, initial x = −c₀).
inline Frame frame_for_slant_axis(const Manifold3& m, const Vec3& p, const Vec3& axis, double theta, double c0,
                                  int sign, const Vec3& hint = Vec3::Unit(0)) {
    const Mat3 g = m.metric(p);
    const auto [a, b, c] = detail::completion(m, p, axis, hint);
    (void)c;
    const Vec3 n = std::cos(theta) * a + std::sin(theta) * b;
    // sign·D must equal mv = sin θ a − cos θ b, with D = (τT + κB)/ω.
    const Vec3 mv = std::sin(theta) * a - std::cos(theta) * b;
    const Vec3 q = cross(g, n, mv);
    const double x = -c0;
    const double y = std::sqrt(1.0 - x * x);
    for (double eps : {1.0, -1.0}) {
        const Vec3 t = x * mv + eps * y * q;
        const Vec3 bn = cross(g, t, n);
        if (std::abs(bn.dot(g * mv) - sign * y) < 1e-9) return {t, n, bn};
    }
    fail(ErrorCode::BadParams, "no frame realizes the requested slant axis");
}

enum class CurveClass { geodesic, generalized_helix, slant_helix, generic };

inline std::string_view to_string(CurveClass c) {
    switch (c) {
        case CurveClass::geodesic: return "geodesic";
        case CurveClass::generalized_helix: return "generalized_helix";
        case CurveClass::slant_helix: return "slant_helix";
        case CurveClass::generic: return "generic";
    }
    return "unknown";
}

struct Classification {
    CurveClass kind = CurveClass::generic;
    double theta = std::numeric_limits<double>::quiet_NaN();
    double kappa_sup = 0.0;
    double ratio_median = 0.0;
    double ratio_residual = 0.0;
    double sigma_median = 0.0;
    double sigma_residual = 0.0;
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
    return m;
}

inline double sup_deviation(const std::vector<double>& v, double centre) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::abs(x - centre));
    return worst;
}

}  // namespace detail

/// Geodesic, generalized helix (τ/κ constant), slant helix (σ constant) or
/// generic, tested in this order with sup-norm residuals about the median.
/// θ is reported as arccot(median) in (0, π).
inline Classification classify_curve(const FrenetData& fd, double tol = 1e-3) {
    Classification c;
    for (double k : fd.kappa) c.kappa_sup = std::max(c.kappa_sup, k);
    std::vector<double> ratio(fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) ratio[i] = fd.tau[i] / fd.kappa[i];
    c.ratio_median = detail::median(ratio);
    c.ratio_residual = detail::sup_deviation(ratio, c.ratio_median);
    c.sigma_median = detail::median(fd.sigma);
    c.sigma_residual = detail::sup_deviation(fd.sigma, c.sigma_median);
    if (c.kappa_sup < tol) {
        c.kind = CurveClass::geodesic;
    } else if (c.ratio_residual < tol) {
        c.kind = CurveClass::generalized_helix;
        c.theta = std::atan2(1.0, c.ratio_median);
    } else if (c.sigma_residual < tol) {
        c.kind = CurveClass::slant_helix;
        c.theta = std::atan2(1.0, c.sigma_median);
    }
    return c;
}

/// Classification of a path; paths with vanishing curvature are geodesics.
inline Classification classify_path(const Manifold3& m, const CurvePath<3>& path, double tol = 1e-3,
                                    const FrenetOptions& opt = {}) {
    try {
        return classify_curve(frenet_apparatus(m, path, opt), tol);
    } catch (const GeometryError& e) {
        if (e.code() != ErrorCode::KappaVanishes) throw;
        Classification c;
        for (double k : curvature_profile(m, path, opt.spacing)) c.kappa_sup = std::max(c.kappa_sup, k);
        if (c.kappa_sup < tol) c.kind = CurveClass::geodesic;
        return c;
    }
}

/// Curvature profiles accepted by the configuration layer.
struct KappaProfile {
    std::string kind = "constant";  // constant | sinusoidal | polynomial
    std::vector<double> coeffs{1.0};

    /// constant: c0; sinusoidal: c0 + c1 sin(c2 s + c3); polynomial: Σ cᵢ sⁱ.
    Profile function() const {
        const auto c = coeffs;
        if (kind == "constant") {
            if (c.size() != 1) fail(ErrorCode::BadParams, "constant profile takes one coefficient");
            return [v = c[0]](double) { return v; };
        }
        if (kind == "sinusoidal") {
            if (c.size() < 3 || c.size() > 4) fail(ErrorCode::BadParams, "sinusoidal profile takes 3 or 4 coefficients");
            const double phase = c.size() == 4 ? c[3] : 0.0;
            return [c, phase](double s) { return c[0] + c[1] * std::sin(c[2] * s + phase); };
        }
        if (kind == "polynomial") {
            if (c.empty()) fail(ErrorCode::BadParams, "polynomial profile needs coefficients");
            return [c](double s) {
                double v = 0.0;
                for (std::size_t i = c.size(); i-- > 0;) v = v * s + c[i];
                return v;
            };
        }
        fail(ErrorCode::BadParams, "unknown curvature profile '" + kind + "'");
    }
};

}  // namespace cangle
