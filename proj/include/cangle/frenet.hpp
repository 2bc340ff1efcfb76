#pragma once

// Frenet apparatus of curves in 3-manifolds, σ, the Darboux field and the
// spherical indicatrices.
//
// Orientation: B = T × N in the metric cross product, so (T, N, B) is
// positively oriented with respect to the chart volume form.

#include "cangle/curve_path.hpp"
#include "cangle/manifold.hpp"
#include "cangle/transport.hpp"

#include <optional>
#include <vector>

namespace cangle {

inline constexpr double kKappaMin = 1e-6;
/// Samples per finite-difference window along curves (sixth order).
inline constexpr std::size_t kCurveStencil = 7;

struct FrenetOptions {
    /// Spacing of the uniform grid on which derivatives are taken.
    double spacing = kDefaultSampleSpacing;
    double kappa_min = kKappaMin;
    /// Largest tolerated deviation of |T| from 1.
    double unit_speed_tol = 1e-6;
};

/// Per-sample Frenet data on a uniform arc-length grid.
struct FrenetData {
    double h = 0.0;
    std::vector<double> s;
    std::vector<Vec3> p, T, N, B, D;
    std::vector<double> kappa, tau, omega, sigma;
    /// (κ/ω)' + τσ and (τ/ω)' − κσ, both zero for every curve.
    std::vector<double> kappa_omega_residual, tau_omega_residual;

    std::size_t size() const { return s.size(); }
};

namespace detail {

inline void require_grid(std::size_t n) {
    if (n < kCurveStencil) fail(ErrorCode::BadParams, "too few grid samples for differentiation");
}

template <class T>
std::vector<T> differentiate(const std::vector<T>& f, double h, int order = 1) {
    const std::size_t n = f.size();
    require_grid(n);
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = derivative_at<T>(n, i, h, order, kCurveStencil, [&](std::size_t j) { return f[j]; });
    }
    return out;
}

inline void check_kappa(const std::vector<double>& s, const std::vector<double>& kappa, double kappa_min) {
    std::optional<std::pair<double, double>> bad;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(kappa[i] > kappa_min)) {
            if (!bad) bad = std::pair{s[i], s[i]};
            bad->second = s[i];
        }
    }
    if (bad) {
        throw GeometryError(ErrorCode::KappaVanishes,
                            "curvature below κ_min on [" + std::to_string(bad->first) + ", " +
                                std::to_string(bad->second) + "]",
                            *bad);
    }
}

/// Fills ω, D, σ and the derivative-identity residuals from T, N, B, κ, τ.
inline void complete_frenet(FrenetData& fd) {
    const std::size_t n = fd.size();
    fd.omega.resize(n);
    fd.D.resize(n);
    std::vector<double> ratio(n), k_over_w(n), t_over_w(n);
    for (std::size_t i = 0; i < n; ++i) {
        fd.omega[i] = std::hypot(fd.kappa[i], fd.tau[i]);
        fd.D[i] = (fd.tau[i] * fd.T[i] + fd.kappa[i] * fd.B[i]) / fd.omega[i];
        ratio[i] = fd.tau[i] / fd.kappa[i];
        k_over_w[i] = fd.kappa[i] / fd.omega[i];
        t_over_w[i] = fd.tau[i] / fd.omega[i];
    }
    const auto d_ratio = differentiate(ratio, fd.h);
    const auto d_kw = differentiate(k_over_w, fd.h);
    const auto d_tw = differentiate(t_over_w, fd.h);
    fd.sigma.resize(n);
    fd.kappa_omega_residual.resize(n);
    fd.tau_omega_residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double k = fd.kappa[i];
        fd.sigma[i] = k * k / std::pow(fd.omega[i], 3) * d_ratio[i];
        fd.kappa_omega_residual[i] = d_kw[i] + fd.tau[i] * fd.sigma[i];
        fd.tau_omega_residual[i] = d_tw[i] - k * fd.sigma[i];
    }
}

/// Uniform resampling of a path; keeps the samples when already uniform.
inline CurvePath<3> resample_uniform(const CurvePath<3>& path, double spacing) {
    const std::size_t n = path.size();
    if (n < 2) fail(ErrorCode::BadParams, "path needs at least two samples");
    const double h0 = path.s[1] - path.s[0];
    bool uniform = h0 <= spacing * (1.0 + 1e-9);
    for (std::size_t i = 1; uniform && i < n; ++i) {
        uniform = std::abs((path.s[i] - path.s[i - 1]) - h0) <= 1e-9 * h0;
    }
    if (uniform) return path;
    CurvePath<3> out;
    out.status = path.status;
    for (double x : uniform_grid(path.s.front(), path.s.back(), spacing)) {
        out.s.push_back(x);
        out.p.push_back(path.position(x));
        out.T.push_back(path.tangent(x));
        if (path.has_acceleration()) out.dT.push_back(path.acceleration(x));
    }
    return out;
}

}  // namespace detail

/// Frenet frame, curvature, torsion, σ and Darboux field of a unit-speed
/// path. Covariant derivatives are chart derivatives on a uniform grid plus
/// Christoffel terms.
inline FrenetData frenet_apparatus(const Manifold3& m, const CurvePath<3>& path, const FrenetOptions& opt = {}) {
    for (std::size_t i = 0; i < path.size(); ++i) {
        const double speed = norm(m, path.p[i], path.T[i]);
        if (std::abs(speed - 1.0) > opt.unit_speed_tol) {
            fail(ErrorCode::NonUnitSpeed, "|T| = " + std::to_string(speed) + " at s = " + std::to_string(path.s[i]));
        }
    }
    const CurvePath<3> grid = detail::resample_uniform(path, opt.spacing);
    const std::size_t n = grid.size();
    detail::require_grid(n);

    FrenetData fd;
    fd.h = grid.s[1] - grid.s[0];
    fd.s = grid.s;
    fd.p = grid.p;
    fd.T = grid.T;
    const std::vector<Vec3> acc = grid.has_acceleration() ? grid.dT : detail::differentiate(grid.T, fd.h);

    std::vector<Mat3> metric(n);
    std::vector<Christoffel<3>> gamma(n);
    std::vector<Vec3> kn(n);
    fd.kappa.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        metric[i] = m.metric(grid.p[i]);
        gamma[i] = m.christoffel(grid.p[i]);
        kn[i] = acc[i] + gamma[i].contract(grid.T[i], grid.T[i]);
        fd.kappa[i] = std::sqrt(kn[i].dot(metric[i] * kn[i]));
    }
    detail::check_kappa(fd.s, fd.kappa, opt.kappa_min);

    fd.N.resize(n);
    fd.B.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fd.N[i] = kn[i] / fd.kappa[i];
        fd.B[i] = cross(metric[i], fd.T[i], fd.N[i]);
    }
    const auto dN = detail::differentiate(fd.N, fd.h);
    fd.tau.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 cov = dN[i] + gamma[i].contract(fd.T[i], fd.N[i]);
        fd.tau[i] = cov.dot(metric[i] * fd.B[i]);
    }
    detail::complete_frenet(fd);
    return fd;
}

inline const std::vector<double>& sigma(const FrenetData& fd) { return fd.sigma; }

inline const std::vector<Vec3>& darboux_field(const FrenetData& fd) { return fd.D; }

/// Curvature along a path without building the full frame; zero curvature
/// is allowed here.
inline std::vector<double> curvature_profile(const Manifold3& m, const CurvePath<3>& path, double spacing = kDefaultSampleSpacing) {
    const CurvePath<3> grid = detail::resample_uniform(path, spacing);
    detail::require_grid(grid.size());
    const double h = grid.s[1] - grid.s[0];
    const std::vector<Vec3> acc = grid.has_acceleration() ? grid.dT : detail::differentiate(grid.T, h);
    std::vector<double> kappa(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3 kn = acc[i] + m.christoffel(grid.p[i]).contract(grid.T[i], grid.T[i]);
        kappa[i] = std::sqrt(kn.dot(m.metric(grid.p[i]) * kn));
    }
    return kappa;
}

/// The path underlying Frenet data, with coordinate acceleration κN − Γ(T,T).
inline CurvePath<3> frenet_path(const Manifold3& m, const FrenetData& fd) {
    CurvePath<3> path;
    path.s = fd.s;
    path.p = fd.p;
    path.T = fd.T;
    path.dT.resize(fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
        path.dT[i] = fd.kappa[i] * fd.N[i] - m.christoffel(fd.p[i]).contract(fd.T[i], fd.T[i]);
    }
    return path;
}

enum class IndicatrixKind { tangent, normal, binormal };

inline std::string_view to_string(IndicatrixKind k) {
    switch (k) {
        case IndicatrixKind::tangent: return "tangent";
        case IndicatrixKind::normal: return "normal";
        case IndicatrixKind::binormal: return "binormal";
    }
    return "unknown";
}

/// A frame vector field transported back to T_{γ(s₀)}M, as a curve on the
/// unit sphere of that tangent space.
struct IndicatrixCurve {
    IndicatrixKind kind = IndicatrixKind::normal;
    std::size_t base_index = 0;
    Vec3 base_point = Vec3::Zero();
    std::vector<double> s;
    /// Chart components of P_{s₀}(W(s)) at the base point.
    std::vector<Vec3> points;
    /// Components of the same vectors in the transported orthonormal basis.
    std::vector<Vec3> components;
    std::vector<double> kappa_g;
};

/// Indicatrix of the tangent, normal or binormal field. The geodesic
/// curvature is det(α, α', α'')/|α'|³ in an oriented orthonormal basis of
/// the base tangent space, with s-derivatives by finite differences.
inline IndicatrixCurve indicatrix(const Manifold3& m, const FrenetData& fd, IndicatrixKind which, std::size_t s0_index,
                                  const IntegratorSettings& settings = {}) {
    const std::size_t n = fd.size();
    if (s0_index >= n) fail(ErrorCode::BadParams, "indicatrix base index out of range");
    detail::check_kappa(fd.s, fd.kappa, kKappaMin);
    if (which == IndicatrixKind::binormal) {
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(fd.tau[i]) < 1e-6) {
                throw GeometryError(ErrorCode::TauVanishes, "binormal indicatrix needs τ ≠ 0",
                                    {fd.s[i], fd.s[i]});
            }
        }
    }
    const CurvePath<3> path = frenet_path(m, fd);
    // Oriented orthonormal basis at the base point: the Frenet frame there.
    const std::vector<Vec3> basis{fd.T[s0_index], fd.N[s0_index], fd.B[s0_index]};
    const auto frame = parallel_transport_frame<3>(m, path, basis, settings, s0_index);

    const std::vector<Vec3>& field =
        which == IndicatrixKind::tangent ? fd.T : which == IndicatrixKind::normal ? fd.N : fd.B;
    IndicatrixCurve out;
    out.kind = which;
    out.base_index = s0_index;
    out.base_point = fd.p[s0_index];
    out.s = fd.s;
    out.components.resize(n);
    out.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Mat3 g = m.metric(fd.p[i]);
        Vec3 a;
        for (int k = 0; k < 3; ++k) a[k] = field[i].dot(g * frame[k][i]);
        out.components[i] = a;
        out.points[i] = a[0] * basis[0] + a[1] * basis[1] + a[2] * basis[2];
    }
    const auto d1 = detail::differentiate(out.components, fd.h);
    const auto d2 = detail::differentiate(out.components, fd.h, 2);
    out.kappa_g.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.kappa_g[i] = out.components[i].dot(d1[i].cross(d2[i])) / std::pow(d1[i].norm(), 3);
    }
    return out;
}

}  // namespace cangle
