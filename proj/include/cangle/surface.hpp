#pragma once

// Ruled patches exp_{β(u)}(v W(u)) in a 3-manifold: intrinsic cylinders,
// rectifying surfaces, constant-angle surfaces in M² × ℝ, plus arbitrary
// parametrized patches. Fundamental forms, curvatures and the constant-angle
// diagnostics live here as well.
//
// Conventions: ν is the unit normal with (X_u, X_v, ν) positively oriented,
// h_ij = ⟨∇_{X_i} X_j, ν⟩, shape operator A = −∇ν.

#include "cangle/helix.hpp"
#include "cangle/parallel.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace cangle {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
/// Samples per finite-difference window on patch grids.
inline constexpr std::size_t kPatchStencil = 7;

template <class T>
struct Grid {
    std::size_t nu = 0, nv = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(std::size_t nu_, std::size_t nv_, const T& init = T{}) : nu(nu_), nv(nv_), data(nu_ * nv_, init) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * nv + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * nv + j]; }
    bool empty() const { return data.empty(); }
};

/// ∂/∂u (axis 0) or ∂/∂v (axis 1) of a grid field at a node.
template <class T>
T grid_derivative(const Grid<T>& f, std::size_t i, std::size_t j, int axis, double h, int order = 1) {
    if (axis == 0) return derivative_at<T>(f.nu, i, h, order, kPatchStencil, [&](std::size_t k) { return f(k, j); });
    return derivative_at<T>(f.nv, j, h, order, kPatchStencil, [&](std::size_t k) { return f(i, k); });
}

enum class PatchKind { cylinder, rectifying, product_angle, custom };

inline std::string_view to_string(PatchKind k) {
    switch (k) {
        case PatchKind::cylinder: return "cylinder";
        case PatchKind::rectifying: return "rectifying";
        case PatchKind::product_angle: return "product_angle";
        case PatchKind::custom: return "custom";
    }
    return "unknown";
}

/// Ruling parameter range. Nodes are j·spacing for the integers j with
/// lo ≤ j·spacing ≤ hi, so v = 0 is always a node.
struct VRange {
    double lo = 0.0;
    double hi = 0.0;
    double spacing = 0.01;

    std::vector<double> nodes() const {
        if (!(lo <= 0.0 && hi >= 0.0)) fail(ErrorCode::BadParams, "v range must contain 0");
        if (!(spacing > 0.0)) fail(ErrorCode::BadParams, "v spacing must be positive");
        const auto below = static_cast<long>(std::floor(-lo / spacing + 1e-9));
        const auto above = static_cast<long>(std::floor(hi / spacing + 1e-9));
        std::vector<double> v;
        for (long j = -below; j <= above; ++j) v.push_back(static_cast<double>(j) * spacing);
        return v;
    }
};

/// Tolerances used for ruling shots. Tight, with the step capped at the v
/// spacing, so that integration error is smooth across u-columns and does
/// not pollute u-differences.
inline IntegratorSettings patch_settings(double v_spacing) {
    IntegratorSettings s;
    s.rel_tol = 1e-12;
    s.abs_tol = 1e-13;
    s.max_step = v_spacing;
    return s;
}

struct RuledPatch {
    PatchKind kind = PatchKind::custom;
    std::vector<double> u, v;
    double hu = 0.0, hv = 0.0;
    /// Index of the v = 0 column for ruled kinds.
    std::size_t j0 = 0;

    Grid<Vec3> X, Xu, Xv, Xuu, Xuv, Xvv;

    // Generator data for ruled kinds: X(u, v) = exp_{β(u)}(v W(u)).
    CurvePath<3> directrix;
    std::vector<Vec3> W, dW;
    std::function<Vec3(double, double)> generator;

    // Filled by fundamental_forms.
    bool has_forms = false;
    Grid<Vec3> normal;
    Grid<Vec3> Duu, Duv, Dvv;  // ∇_{X_i} X_j
    Grid<double> g11, g12, g22, h11, h12, h22;
    Grid<double> K_ext, K_int, lambda;

    std::size_t nu() const { return u.size(); }
    std::size_t nv() const { return v.size(); }
    bool is_ruled() const { return kind != PatchKind::custom; }
};

struct SurfaceAxisField {
    double theta = 0.0;
    /// Sign s with V = sin θ e₁ + s cos θ ν along the directrix.
    int normal_sign = 1;
    Grid<Vec3> V;
    std::string construction = "transported along rulings";
};

namespace detail {

inline void require_forms(const RuledPatch& p) {
    if (!p.has_forms) fail(ErrorCode::MissingForms, "fundamental forms have not been computed");
}

inline double dot(const Mat3& g, const Vec3& a, const Vec3& b) { return a.dot(g * b); }

/// u-derivatives of X and X_v on every node.
inline void fill_u_partials(RuledPatch& p) {
    const std::size_t nu = p.nu(), nv = p.nv();
    p.Xu = p.Xuu = p.Xuv = Grid<Vec3>(nu, nv, Vec3::Zero());
    if (nu < kPatchStencil) return;
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j < nv; ++j) {
            p.Xu(i, j) = grid_derivative(p.X, i, j, 0, p.hu);
            p.Xuu(i, j) = grid_derivative(p.X, i, j, 0, p.hu, 2);
            p.Xuv(i, j) = grid_derivative(p.Xv, i, j, 0, p.hu);
        }
}

inline double uniform_spacing(const std::vector<double>& s, const char* what) {
    if (s.size() < 2) fail(ErrorCode::BadParams, std::string(what) + " needs at least two samples");
    const double h = s[1] - s[0];
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (std::abs(s[i] - s[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) {
            fail(ErrorCode::BadParams, std::string(what) + " must be sampled uniformly");
        }
    }
    return h;
}

/// Shoots the rulings of every column and fills X, X_v, X_vv.
inline RuledPatch shoot_rulings(const Manifold3& m, PatchKind kind, CurvePath<3> directrix, std::vector<Vec3> W,
                                const VRange& vr, std::optional<IntegratorSettings> settings) {
    RuledPatch p;
    p.kind = kind;
    p.u = directrix.s;
    p.hu = uniform_spacing(p.u, "directrix");
    p.v = vr.nodes();
    p.hv = vr.spacing;
    p.j0 = static_cast<std::size_t>(std::find(p.v.begin(), p.v.end(), 0.0) - p.v.begin());
    const std::size_t nu = p.nu(), nv = p.nv();
    const IntegratorSettings st = settings.value_or(patch_settings(vr.spacing));
    p.X = p.Xv = p.Xvv = Grid<Vec3>(nu, nv, Vec3::Zero());

    parallel_for(nu, [&](std::size_t i) {
        const Vec3 x0 = directrix.p[i];
        const Vec3 w = W[i];
        p.X(i, p.j0) = x0;
        p.Xv(i, p.j0) = w;
        p.Xvv(i, p.j0) = -m.christoffel(x0).contract(w, w);
        for (int dir : {1, -1}) {
            std::vector<double> out;
            std::vector<std::size_t> idx;
            if (dir > 0) {
                for (std::size_t j = p.j0 + 1; j < nv; ++j) {
                    out.push_back(p.v[j]);
                    idx.push_back(j);
                }
            } else {
                for (std::size_t j = p.j0; j-- > 0;) {
                    out.push_back(-p.v[j]);
                    idx.push_back(j);
                }
            }
            if (out.empty()) continue;
            const auto traj = geodesic_trajectory<3>(m, x0, Vec3(dir * w), out, st);
            if (traj.t.size() != out.size()) {
                fail(ErrorCode::LeftChart, "ruling at u = " + std::to_string(p.u[i]) + " leaves the chart of " + m.name());
            }
            for (std::size_t k = 0; k < out.size(); ++k) {
                p.X(i, idx[k]) = traj.y[k].head<3>();
                p.Xv(i, idx[k]) = dir * traj.y[k].tail<3>();
                p.Xvv(i, idx[k]) = traj.dy[k].tail<3>();
            }
        }
    });
    fill_u_partials(p);

    p.directrix = std::move(directrix);
    p.W = std::move(W);
    p.dW.resize(nu);
    if (nu >= kPatchStencil) {
        for (std::size_t i = 0; i < nu; ++i) {
            p.dW[i] = derivative_at<Vec3>(nu, i, p.hu, 1, kPatchStencil, [&](std::size_t k) { return p.W[k]; });
        }
    }
    return p;
}

}  // namespace detail

/// First and second fundamental forms, normal, K_ext, K_int (Brioschi) and λ.
inline RuledPatch fundamental_forms(const Manifold3& m, RuledPatch p) {
    const std::size_t nu = p.nu(), nv = p.nv();
    if (nu < kPatchStencil || nv < kPatchStencil) {
        fail(ErrorCode::DegeneratePatch, "patch grid too small for finite differences");
    }
    p.normal = p.Duu = p.Duv = p.Dvv = Grid<Vec3>(nu, nv, Vec3::Zero());
    p.g11 = p.g12 = p.g22 = p.h11 = p.h12 = p.h22 = p.K_ext = p.K_int = p.lambda = Grid<double>(nu, nv, 0.0);
    std::vector<std::optional<std::string>> bad(nu);

    parallel_for(nu, [&](std::size_t i) {
        for (std::size_t j = 0; j < nv; ++j) {
            const Vec3 x = p.X(i, j), xu = p.Xu(i, j), xv = p.Xv(i, j);
            const Mat3 g = m.metric(x);
            const auto gamma = m.christoffel(x);
            const double E = detail::dot(g, xu, xu), F = detail::dot(g, xu, xv), G = detail::dot(g, xv, xv);
            const double det = E * G - F * F;
            if (!(det > 1e-10)) {
                if (!bad[i]) bad[i] = "det g = " + std::to_string(det) + " at (u, v) = (" + std::to_string(p.u[i]) +
                                      ", " + std::to_string(p.v[j]) + ")";
                continue;
            }
            Vec3 n = cross(g, xu, xv);
            n /= std::sqrt(detail::dot(g, n, n));
            const Vec3 duu = p.Xuu(i, j) + gamma.contract(xu, xu);
            const Vec3 duv = p.Xuv(i, j) + gamma.contract(xu, xv);
            const Vec3 dvv = p.Xvv(i, j) + gamma.contract(xv, xv);
            const double L = detail::dot(g, duu, n), M = detail::dot(g, duv, n), N = detail::dot(g, dvv, n);
            p.normal(i, j) = n;
            p.Duu(i, j) = duu;
            p.Duv(i, j) = duv;
            p.Dvv(i, j) = dvv;
            p.g11(i, j) = E;
            p.g12(i, j) = F;
            p.g22(i, j) = G;
            p.h11(i, j) = L;
            p.h12(i, j) = M;
            p.h22(i, j) = N;
            p.K_ext(i, j) = (L * N - M * M) / det;

            // λ in the frame e₁ = X_v/|X_v|, e₂ ⟂ e₁: defined only when
            // h(e₁, e₁) and h(e₁, e₂) vanish.
            const double a = 1.0 / std::sqrt(det / G);  // e₂ = a (X_u − (F/G) X_v)
            const double b = -a * F / G;
            const double h_e1e1 = N / G;
            const double h_e1e2 = (a * M + b * N) / std::sqrt(G);
            const double lam = a * a * L + 2 * a * b * M + b * b * N;
            const bool ok = std::abs(h_e1e1) < 1e-4 * (1 + std::abs(lam)) && std::abs(h_e1e2) < 1e-4 * (1 + std::abs(lam));
            p.lambda(i, j) = ok ? lam : kNaN;
        }
    });
    for (const auto& b : bad)
        if (b) fail(ErrorCode::DegeneratePatch, "irregular patch: " + *b);

    // Brioschi formula from E, F, G alone.
    Grid<double> Fu(nu, nv);
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j < nv; ++j) Fu(i, j) = grid_derivative(p.g12, i, j, 0, p.hu);
    parallel_for(nu, [&](std::size_t i) {
        for (std::size_t j = 0; j < nv; ++j) {
            const double E = p.g11(i, j), F = p.g12(i, j), G = p.g22(i, j);
            const double Eu = grid_derivative(p.g11, i, j, 0, p.hu), Ev = grid_derivative(p.g11, i, j, 1, p.hv);
            const double Gu = grid_derivative(p.g22, i, j, 0, p.hu), Gv = grid_derivative(p.g22, i, j, 1, p.hv);
            const double Fv = grid_derivative(p.g12, i, j, 1, p.hv);
            const double Evv = grid_derivative(p.g11, i, j, 1, p.hv, 2);
            const double Guu = grid_derivative(p.g22, i, j, 0, p.hu, 2);
            const double Fuv = grid_derivative(Fu, i, j, 1, p.hv);
            Mat3 a, b;
            a << -0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu(i, j) - 0.5 * Ev,  //
                Fv - 0.5 * Gu, E, F,                                          //
                0.5 * Gv, F, G;
            b << 0.0, 0.5 * Ev, 0.5 * Gu,  //
                0.5 * Ev, E, F,            //
                0.5 * Gu, F, G;
            const double det = E * G - F * F;
            p.K_int(i, j) = (a.determinant() - b.determinant()) / (det * det);
        }
    });
    p.has_forms = true;
    return p;
}

inline const Grid<double>& extrinsic_curvature(const RuledPatch& p) {
    detail::require_forms(p);
    return p.K_ext;
}

inline const Grid<double>& intrinsic_curvature(const RuledPatch& p) {
    detail::require_forms(p);
    return p.K_int;
}

/// K_int − K_ext − K_sec(span{X_u, X_v}) per node.
inline Grid<double> gauss_residual(const Manifold3& m, const RuledPatch& p) {
    detail::require_forms(p);
    Grid<double> out(p.nu(), p.nv());
    parallel_for(p.nu(), [&](std::size_t i) {
        for (std::size_t j = 0; j < p.nv(); ++j) {
            const double ks = sectional_curvature<3>(m, p.X(i, j), p.Xu(i, j), p.Xv(i, j));
            out(i, j) = p.K_int(i, j) - p.K_ext(i, j) - ks;
        }
    });
    return out;
}

namespace detail {

inline RuledPatch finish(const Manifold3& m, RuledPatch p) {
    if (p.nu() >= kPatchStencil && p.nv() >= kPatchStencil) return fundamental_forms(m, std::move(p));
    return p;
}

}  // namespace detail

/// Intrinsic cylinder exp_{β(u)}(v V(u)) with V the transport of V0 along β.
/// β is resampled to the given u spacing when it is not uniform.
inline RuledPatch build_cylinder(const Manifold3& m, const CurvePath<3>& beta, const Vec3& V0, const VRange& vr,
                                 double u_spacing = kDefaultSampleSpacing,
                                 std::optional<IntegratorSettings> settings = std::nullopt) {
    const CurvePath<3> base = detail::resample_uniform(beta, u_spacing);
    if (std::abs(norm(m, base.p.front(), V0) - 1.0) > 1e-8) fail(ErrorCode::BadParams, "V0 must be a unit vector");
    const auto V = parallel_transport<3>(m, base, V0, settings.value_or(patch_settings(vr.spacing)));
    for (std::size_t i = 0; i < base.size(); ++i) {
        const Mat3 g = m.metric(base.p[i]);
        const Vec3& t = base.T[i];
        const double gram = detail::dot(g, t, t) * detail::dot(g, V[i], V[i]) - std::pow(detail::dot(g, t, V[i]), 2);
        if (!(gram > 1e-8)) {
            throw GeometryError(ErrorCode::DegenerateRuling, "ruling direction parallel to the directrix",
                                std::pair{base.s[i], base.s[i]});
        }
    }
    auto p = detail::shoot_rulings(m, PatchKind::cylinder, base, V, vr, settings);
    return detail::finish(m, std::move(p));
}

/// Rectifying surface exp_{γ(u)}(v D(u)) of a curve with Frenet data fd.
inline RuledPatch build_rectifying_surface(const Manifold3& m, const FrenetData& fd, const VRange& vr,
                                           std::optional<IntegratorSettings> settings = std::nullopt) {
    detail::check_kappa(fd.s, fd.kappa, kKappaMin);
    auto p = detail::shoot_rulings(m, PatchKind::rectifying, frenet_path(m, fd), fd.D, vr, settings);
    return detail::finish(m, std::move(p));
}

/// Constant-angle surface (exp^M_{α(u)}(v cos θ Jα′), v sin θ) in M² × ℝ.
/// Its rulings are geodesics of the product, so they are shot in M² × ℝ.
inline RuledPatch build_product_surface(const Manifold3& m, const CurvePath<2>& alpha, double theta, const VRange& vr,
                                        std::optional<IntegratorSettings> settings = std::nullopt) {
    if (m.kind() != MetricKind::product) fail(ErrorCode::BadParams, "product surfaces need an M² × ℝ ambient");
    if (!(theta > 0.0 && theta < pi / 2)) fail(ErrorCode::BadParams, "angle must lie in (0, π/2)");
    const Manifold2 factor = m.factor();
    detail::uniform_spacing(alpha.s, "curve in M²");
    CurvePath<3> base;
    std::vector<Vec3> W;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const Mat2 g = factor.metric(alpha.p[i]);
        const Vec2& t = alpha.T[i];
        if (std::abs(std::sqrt(t.dot(g * t)) - 1.0) > 1e-6) {
            fail(ErrorCode::NonUnitSpeed, "curve in M² must have unit speed");
        }
        base.s.push_back(alpha.s[i]);
        base.p.emplace_back(alpha.p[i][0], alpha.p[i][1], 0.0);
        base.T.emplace_back(t[0], t[1], 0.0);
        if (alpha.has_acceleration()) base.dT.emplace_back(alpha.dT[i][0], alpha.dT[i][1], 0.0);
        const Vec2 jt = rotate_quarter(g, t);
        W.emplace_back(std::cos(theta) * jt[0], std::cos(theta) * jt[1], std::sin(theta));
    }
    auto p = detail::shoot_rulings(m, PatchKind::product_angle, base, W, vr, settings);
    return detail::finish(m, std::move(p));
}

/// Patch from an explicit parametrization; all partials by differences.
inline RuledPatch build_custom_patch(const Manifold3& m, std::function<Vec3(double, double)> X,
                                     const std::vector<double>& u, const std::vector<double>& v) {
    RuledPatch p;
    p.kind = PatchKind::custom;
    p.u = u;
    p.v = v;
    p.hu = detail::uniform_spacing(u, "u grid");
    p.hv = detail::uniform_spacing(v, "v grid");
    const std::size_t nu = u.size(), nv = v.size();
    p.X = Grid<Vec3>(nu, nv);
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j < nv; ++j) {
            p.X(i, j) = X(u[i], v[j]);
            m.require_in_chart(p.X(i, j));
        }
    p.Xv = p.Xvv = Grid<Vec3>(nu, nv, Vec3::Zero());
    if (nv >= kPatchStencil) {
        for (std::size_t i = 0; i < nu; ++i)
            for (std::size_t j = 0; j < nv; ++j) {
                p.Xv(i, j) = grid_derivative(p.X, i, j, 1, p.hv);
                p.Xvv(i, j) = grid_derivative(p.X, i, j, 1, p.hv, 2);
            }
    }
    detail::fill_u_partials(p);
    p.generator = std::move(X);
    return detail::finish(m, std::move(p));
}

/// Largest |∇_{X_v} X_v| over the patch, with ∂_v X_v differenced from the
/// stored ruling tangents.
inline double ruling_geodesic_residual(const Manifold3& m, const RuledPatch& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.nu(); ++i)
        for (std::size_t j = 0; j < p.nv(); ++j) {
            const Vec3 a = grid_derivative(p.Xv, i, j, 1, p.hv) + m.christoffel(p.X(i, j)).contract(p.Xv(i, j), p.Xv(i, j));
            worst = std::max(worst, norm(m, p.X(i, j), a));
        }
    return worst;
}

/// Geodesic curvature in the patch of the u-line v = v[j], per node.
inline std::vector<double> u_line_geodesic_curvature(const Manifold3& m, const RuledPatch& p, std::size_t j) {
    detail::require_forms(p);
    std::vector<double> out(p.nu());
    for (std::size_t i = 0; i < p.nu(); ++i) {
        const Mat3 g = m.metric(p.X(i, j));
        const Vec3& xu = p.Xu(i, j);
        Vec3 t = p.Duu(i, j) - p.h11(i, j) * p.normal(i, j);
        t -= detail::dot(g, t, xu) / p.g11(i, j) * xu;
        out[i] = std::sqrt(detail::dot(g, t, t)) / p.g11(i, j);
    }
    return out;
}

/// Transport of the directrix axis V(u, 0) along every ruling.
inline SurfaceAxisField extend_axis(const Manifold3& m, const RuledPatch& p, const std::vector<Vec3>& V0,
                                    double theta, std::optional<IntegratorSettings> settings = std::nullopt) {
    if (!p.is_ruled()) fail(ErrorCode::BadParams, "axis extension needs a ruled patch");
    if (V0.size() != p.nu()) fail(ErrorCode::BadParams, "one axis vector per u node is required");
    const IntegratorSettings st = settings.value_or(patch_settings(p.hv));
    SurfaceAxisField ax;
    ax.theta = theta;
    ax.V = Grid<Vec3>(p.nu(), p.nv(), Vec3::Zero());
    parallel_for(p.nu(), [&](std::size_t i) {
        if (p.nv() < 2) {
            ax.V(i, 0) = V0[i];
            return;
        }
        CurvePath<3> ruling;
        for (std::size_t j = 0; j < p.nv(); ++j) {
            ruling.s.push_back(p.v[j]);
            ruling.p.push_back(p.X(i, j));
            ruling.T.push_back(p.Xv(i, j));
            ruling.dT.push_back(p.Xvv(i, j));
        }
        const auto moved = parallel_transport<3>(m, ruling, V0[i], st, p.j0);
        for (std::size_t j = 0; j < p.nv(); ++j) ax.V(i, j) = moved[j];
    });
    if (p.has_forms) {
        std::vector<double> c(p.nu());
        for (std::size_t i = 0; i < p.nu(); ++i) c[i] = inner<3>(m, p.X(i, p.j0), V0[i], p.normal(i, p.j0));
        ax.normal_sign = detail::median(c) < 0.0 ? -1 : 1;
    }
    return ax;
}

/// |∇_{X_u} V| per node; zero exactly when the extended axis is parallel on
/// the whole patch.
inline Grid<double> axis_transport_residual(const Manifold3& m, const RuledPatch& p, const SurfaceAxisField& ax) {
    if (p.nu() < kPatchStencil) fail(ErrorCode::DegeneratePatch, "patch grid too small for finite differences");
    Grid<double> out(p.nu(), p.nv());
    for (std::size_t i = 0; i < p.nu(); ++i)
        for (std::size_t j = 0; j < p.nv(); ++j) {
            const Vec3 x = p.X(i, j);
            const Vec3 cov = grid_derivative(ax.V, i, j, 0, p.hu) + m.christoffel(x).contract(p.Xu(i, j), ax.V(i, j));
            out(i, j) = norm<3>(m, x, cov);
        }
    return out;
}

/// Directrix axis of the rectifying surface of a slant helix:
/// V = cos θ N + sin θ D with cot θ = σ, θ ∈ (0, π).
inline std::vector<Vec3> rectifying_axis(const FrenetData& fd, double theta) {
    std::vector<Vec3> V(fd.size());
    for (std::size_t i = 0; i < fd.size(); ++i) V[i] = std::cos(theta) * fd.N[i] + std::sin(theta) * fd.D[i];
    return V;
}

struct AngleDefect {
    /// ⟨X_u, ∇_{X_u} V⟩ with ∂_u V differenced on the grid.
    Grid<double> direct;
    /// (∂_v g11 / 2) sin θ − s cos θ h11, s the axis normal sign.
    Grid<double> closed;
};

inline AngleDefect parallel_angle_defect(const Manifold3& m, const RuledPatch& p, const SurfaceAxisField& ax) {
    detail::require_forms(p);
    if (ax.V.nu != p.nu() || ax.V.nv != p.nv()) fail(ErrorCode::MissingForms, "axis field does not match the patch");
    AngleDefect d{Grid<double>(p.nu(), p.nv()), Grid<double>(p.nu(), p.nv())};
    const double st = std::sin(ax.theta), ct = std::cos(ax.theta);
    parallel_for(p.nu(), [&](std::size_t i) {
        for (std::size_t j = 0; j < p.nv(); ++j) {
            const Vec3 x = p.X(i, j), xu = p.Xu(i, j);
            const Mat3 g = m.metric(x);
            const Vec3 cov = grid_derivative(ax.V, i, j, 0, p.hu) + m.christoffel(x).contract(xu, ax.V(i, j));
            d.direct(i, j) = detail::dot(g, xu, cov);
            // ∂_v g11 = 2⟨∇_u X_v, X_u⟩.
            const double g11_v = 2.0 * detail::dot(g, p.Duv(i, j), xu);
            d.closed(i, j) = 0.5 * g11_v * st - ax.normal_sign * ct * p.h11(i, j);
        }
    });
    return d;
}

/// Closed form of the defect on the rectifying surface of a slant helix in
/// S³(r): −sin θ/(rω²) tan(v/r) (κ cos(v/r) + rω²σ sin(v/r))².
inline double sphere_defect_oracle(double kappa, double tau, double sigma, double theta, double r, double v) {
    const double w2 = kappa * kappa + tau * tau;
    const double x = v / r;
    const double q = kappa * std::cos(x) + r * w2 * sigma * std::sin(x);
    return -std::sin(theta) / (r * w2) * std::tan(x) * q * q;
}

struct CurvatureOperator {
    Grid<Vec3> RV;              // R(X_u, X_v)V
    Grid<double> projection;    // ⟨R(X_u, X_v)V, X_u⟩
    Grid<double> scalar;        // sin θ R_uvvu + s cos θ R_uvνu
};

inline CurvatureOperator curvature_operator_on_axis(const Manifold3& m, const RuledPatch& p,
                                                    const SurfaceAxisField& ax) {
    detail::require_forms(p);
    CurvatureOperator c{Grid<Vec3>(p.nu(), p.nv()), Grid<double>(p.nu(), p.nv()), Grid<double>(p.nu(), p.nv())};
    const double st = std::sin(ax.theta), ct = std::cos(ax.theta);
    parallel_for(p.nu(), [&](std::size_t i) {
        for (std::size_t j = 0; j < p.nv(); ++j) {
            const Vec3 x = p.X(i, j), xu = p.Xu(i, j), xv = p.Xv(i, j), n = p.normal(i, j);
            const Mat3 g = m.metric(x);
            const auto R = riemann_at<3>(m, x);
            c.RV(i, j) = R.apply(xu, xv, ax.V(i, j));
            c.projection(i, j) = detail::dot(g, c.RV(i, j), xu);
            const double r_uvvu = detail::dot(g, R.apply(xu, xv, xv), xu);
            const double r_uvnu = detail::dot(g, R.apply(xu, xv, n), xu);
            c.scalar(i, j) = st * r_uvvu + ax.normal_sign * ct * r_uvnu;
        }
    });
    return c;
}

namespace detail {

/// Unit tangent e₁ along the projection of V, written as α X_u + β X_v.
inline Vec2 e1_coordinates(const Manifold3& m, const RuledPatch& p, const SurfaceAxisField& ax, std::size_t i,
                           std::size_t j) {
    const Mat3 g = m.metric(p.X(i, j));
    const Vec3 n = p.normal(i, j);
    const Vec3 V = ax.V(i, j);
    const Vec3 t = V - dot(g, V, n) * n;
    Mat2 G;
    G << p.g11(i, j), p.g12(i, j), p.g12(i, j), p.g22(i, j);
    const Vec2 rhs(dot(g, t, p.Xu(i, j)), dot(g, t, p.Xv(i, j)));
    Vec2 c = G.ldlt().solve(rhs);
    return c / std::sqrt(c.dot(G * c));
}

}  // namespace detail

struct RiccatiCheck {
    Grid<double> lambda_1;   // e₁(λ)
    Grid<double> residual;   // λ,₁ + λ² cot θ + ½ K^M sin 2θ
    Grid<double> K_cor;      // −(λ,₁ + λ² cot θ) cot θ
};

/// Riccati diagnostics for constant-angle surfaces in M² × ℝ; K_M is the
/// Gaussian curvature of the factor at the projected point.
inline RiccatiCheck riccati_residual(const Manifold3& m, const RuledPatch& p, const SurfaceAxisField& ax,
                                     const std::function<double(const Vec3&)>& K_M) {
    detail::require_forms(p);
    const std::size_t nu = p.nu(), nv = p.nv();
    RiccatiCheck r{Grid<double>(nu, nv), Grid<double>(nu, nv), Grid<double>(nu, nv)};
    const double cot = std::cos(ax.theta) / std::sin(ax.theta);
    for (std::size_t i = 0; i < nu; ++i)
        for (std::size_t j = 0; j < nv; ++j) {
            const Vec2 c = detail::e1_coordinates(m, p, ax, i, j);
            const double lu = grid_derivative(p.lambda, i, j, 0, p.hu);
            const double lv = grid_derivative(p.lambda, i, j, 1, p.hv);
            const double lam = p.lambda(i, j);
            const double l1 = c[0] * lu + c[1] * lv;
            r.lambda_1(i, j) = l1;
            r.residual(i, j) = l1 + lam * lam * cot + 0.5 * K_M(p.X(i, j)) * std::sin(2.0 * ax.theta);
            r.K_cor(i, j) = -(l1 + lam * lam * cot) * cot;
        }
    return r;
}

/// Gaussian curvature of the M² factor, as a function on M² × ℝ.
inline std::function<double(const Vec3&)> factor_curvature(const Manifold3& m) {
    if (m.kind() != MetricKind::product) fail(ErrorCode::BadParams, "not a product manifold");
    return [f = m.factor()](const Vec3& x) { return gaussian_curvature(f, Vec2(x.head<2>())); };
}

/// ⟨R(e₂, e₁)e₁, ν⟩ with e₁ the unit ruling direction and e₂ ⟂ e₁.
inline Grid<double> ruledness_criterion(const Manifold3& m, const RuledPatch& p, bool swap = false) {
    detail::require_forms(p);
    Grid<double> out(p.nu(), p.nv());
    parallel_for(p.nu(), [&](std::size_t i) {
        for (std::size_t j = 0; j < p.nv(); ++j) {
            const Vec3 x = p.X(i, j);
            const Mat3 g = m.metric(x);
            const Vec3 e1 = p.Xv(i, j) / std::sqrt(p.g22(i, j));
            Vec3 e2 = p.Xu(i, j) - detail::dot(g, p.Xu(i, j), e1) * e1;
            e2 /= std::sqrt(detail::dot(g, e2, e2));
            const auto R = riemann_at<3>(m, x);
            const Vec3 a = swap ? e2 : e1, b = swap ? e1 : e2;
            out(i, j) = detail::dot(g, R.apply(b, a, a), p.normal(i, j));
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Geodesics of the induced metric.

/// Bicubic Hermite interpolant of a scalar grid field, with nodal
/// derivatives from finite differences.
class GridSpline {
public:
    GridSpline() = default;
    GridSpline(const std::vector<double>& u, const std::vector<double>& v, const Grid<double>& f)
        : u_(u), v_(v), f_(f), fu_(f.nu, f.nv), fv_(f.nu, f.nv), fuv_(f.nu, f.nv) {
        hu_ = u[1] - u[0];
        hv_ = v[1] - v[0];
        for (std::size_t i = 0; i < f.nu; ++i)
            for (std::size_t j = 0; j < f.nv; ++j) {
                fu_(i, j) = grid_derivative(f, i, j, 0, hu_);
                fv_(i, j) = grid_derivative(f, i, j, 1, hv_);
            }
        for (std::size_t i = 0; i < f.nu; ++i)
            for (std::size_t j = 0; j < f.nv; ++j) fuv_(i, j) = grid_derivative(fu_, i, j, 1, hv_);
    }

    /// Value and first partials at (u, v).
    std::array<double, 3> operator()(double u, double v) const {
        const auto [i, x] = locate(u_, u, hu_);
        const auto [j, y] = locate(v_, v, hv_);
        const auto bx = basis(x), by = basis(y);
        std::array<double, 3> out{0.0, 0.0, 0.0};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                const std::size_t ii = i + a, jj = j + b;
                const double c[4] = {f_(ii, jj), hu_ * fu_(ii, jj), hv_ * fv_(ii, jj), hu_ * hv_ * fuv_(ii, jj)};
                // c[k] pairs with the value (0) or derivative (1) basis in x and y.
                for (int k = 0; k < 4; ++k) {
                    const int px = 2 * (k & 1) + a, py = 2 * (k >> 1) + b;
                    out[0] += c[k] * bx[0][px] * by[0][py];
                    out[1] += c[k] * bx[1][px] * by[0][py] / hu_;
                    out[2] += c[k] * bx[0][px] * by[1][py] / hv_;
                }
            }
        return out;
    }

private:
    static std::pair<std::size_t, double> locate(const std::vector<double>& g, double x, double h) {
        const double t = (x - g.front()) / h;
        auto i = static_cast<std::ptrdiff_t>(std::floor(t));
        i = std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(g.size()) - 2);
        return {static_cast<std::size_t>(i), t - static_cast<double>(i)};
    }

    // [0]: values of (H_value@0, H_value@1, H_deriv@0, H_deriv@1); [1]: their x-derivatives.
    static std::array<std::array<double, 4>, 2> basis(double x) {
        const double x2 = x * x, x3 = x2 * x;
        return {{{2 * x3 - 3 * x2 + 1, -2 * x3 + 3 * x2, x3 - 2 * x2 + x, x3 - x2},
                 {6 * x2 - 6 * x, -6 * x2 + 6 * x, 3 * x2 - 4 * x + 1, 3 * x2 - 2 * x}}};
    }

    std::vector<double> u_, v_;
    double hu_ = 1.0, hv_ = 1.0;
    Grid<double> f_, fu_, fv_, fuv_;
};

struct SurfaceGeodesic {
    std::vector<double> s;
    std::vector<Vec2> uv, duv;
    /// The curve in M; T differenced from the lifted positions.
    CurvePath<3> lifted;
    PathStatus status = PathStatus::Complete;
};

namespace detail {

/// X(u, v) off the grid: exact regeneration for ruled patches, the stored
/// parametrization for custom ones.
inline Vec3 patch_point(const Manifold3& m, const RuledPatch& p, double u, double v, const IntegratorSettings& st) {
    if (!p.is_ruled()) return p.generator(u, v);
    const std::size_t i = p.directrix.segment(u);
    const Vec3 base = p.directrix.position(u);
    const Vec3 w = hermite(p.u[i], p.W[i], p.dW[i], p.u[i + 1], p.W[i + 1], p.dW[i + 1], u);
    if (v == 0.0) return base;
    const double sgn = v > 0 ? 1.0 : -1.0;
    const auto traj = geodesic_trajectory<3>(m, base, Vec3(sgn * w), {std::abs(v)}, st);
    if (traj.t.empty()) fail(ErrorCode::LeftChart, "patch point leaves the chart");
    return traj.y.back().head<3>();
}

}  // namespace detail

/// Geodesic of the induced metric from (u0, v0) with initial direction w0
/// (unit in the patch metric), sampled every `spacing` and lifted to M.
inline SurfaceGeodesic surface_geodesic(const Manifold3& m, const RuledPatch& p, const Vec2& start, const Vec2& w0,
                                        double length, double spacing = 0.04,
                                        const IntegratorSettings& settings = {}) {
    detail::require_forms(p);
    const double umin = p.u.front(), umax = p.u.back(), vmin = p.v.front(), vmax = p.v.back();
    auto inside = [&](const Vec2& x) { return x[0] >= umin && x[0] <= umax && x[1] >= vmin && x[1] <= vmax; };
    if (!(start[0] > umin && start[0] < umax && start[1] > vmin && start[1] < vmax)) {
        fail(ErrorCode::LeftPatch, "surface geodesic must start in the interior of the patch");
    }
    const GridSpline E(p.u, p.v, p.g11), F(p.u, p.v, p.g12), G(p.u, p.v, p.g22);
    auto metric = [&](const Vec2& x, std::array<Mat2, 2>& dg) {
        const auto e = E(x[0], x[1]), f = F(x[0], x[1]), gg = G(x[0], x[1]);
        Mat2 g;
        g << e[0], f[0], f[0], gg[0];
        for (int l = 0; l < 2; ++l) dg[l] << e[1 + l], f[1 + l], f[1 + l], gg[1 + l];
        return g;
    };
    {
        std::array<Mat2, 2> dg;
        const Mat2 g = metric(start, dg);
        if (std::abs(std::sqrt(w0.dot(g * w0)) - 1.0) > 1e-6) fail(ErrorCode::BadParams, "w0 must be unit in the patch metric");
    }
    using State = Eigen::Matrix<double, 4, 1>;
    auto rhs = [&](double, const State& y) {
        const Vec2 x = y.head<2>(), w = y.tail<2>();
        std::array<Mat2, 2> dg;
        const Mat2 g = metric(x, dg);
        const Mat2 gi = g.inverse();
        Vec2 acc = Vec2::Zero();
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double c = 0.0;
                    for (int l = 0; l < 2; ++l) c += 0.5 * gi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
                    acc[k] -= c * w[i] * w[j];
                }
        State dy;
        dy << w, acc;
        return dy;
    };
    State y0;
    y0 << start, w0;
    OdeHooks<4> hooks;
    hooks.guard = [&](const State& y) { return inside(Vec2(y.head<2>())); };
    const auto traj = integrate<4>(rhs, 0.0, y0, uniform_grid(0.0, length, spacing), settings, hooks);

    SurfaceGeodesic out;
    out.status = traj.stop == OdeStop::Guard ? PathStatus::LeftPatch : PathStatus::Complete;
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        out.s.push_back(traj.t[k]);
        out.uv.emplace_back(traj.y[k].head<2>());
        out.duv.emplace_back(traj.y[k].tail<2>());
    }
    const IntegratorSettings st = patch_settings(p.hv);
    out.lifted.status = out.status;
    out.lifted.s = out.s;
    out.lifted.p.resize(out.s.size());
    parallel_for(out.s.size(), [&](std::size_t k) {
        out.lifted.p[k] = detail::patch_point(m, p, out.uv[k][0], out.uv[k][1], st);
    });
    const std::size_t n = out.s.size();
    if (n >= kCurveStencil) {
        const double h = out.s[1] - out.s[0];
        out.lifted.T = detail::differentiate(out.lifted.p, h);
        out.lifted.dT = detail::differentiate(out.lifted.p, h, 2);
    }
    return out;
}

}  // namespace cangle
