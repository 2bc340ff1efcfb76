#pragma once

// Ambient Riemannian manifolds described by a single coordinate chart.
//
// Built-in charts:
//   euclidean      Cartesian coordinates, any box.
//   sphere (3D)    stereographic coordinates of S³(r) from the north pole,
//                  g = 4r⁴/(r² + |x|²)² δ, restricted to |x| ≤ 12r.
//   sphere (2D)    geographic coordinates (φ latitude, ψ longitude) of S²(r),
//                  g = diag(r², r² cos²φ), |φ| ≤ π/2 − 1e-3, ψ periodic.
//   hyperbolic     Poincaré ball/disk of H³(r)/H²(r), g = 4r⁴/(r² − |x|²)² δ,
//                  restricted to |x| ≤ 0.95r.
//   product        M² × ℝ with g = gᴹ ⊕ dt², factor in the first two slots.
//   custom         user metric function; connection and curvature by
//                  fourth-order central differences.
//
// Curvature sign convention. The curvature operator is
//   R(X, Y)Z = ∇_Y∇_X Z − ∇_X∇_Y Z + ∇_[X,Y] Z,
// the negative of the common textbook operator. Components are stored as
// R^l_{kij} with R(X, Y)Z = R^l_{kij} Xⁱ Yʲ Zᵏ ∂_l, i.e. the operator slots
// (X, Y, Z) map to the indices (i, j, k). In this convention
//   ⟨R(X, Y)X, Y⟩ = K_sec (|X|²|Y|² − ⟨X, Y⟩²),
// so the round sphere has ⟨R(X,Y)X,Y⟩ > 0.

#include "cangle/errors.hpp"
#include "cangle/types.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace cangle {

enum class MetricKind { euclidean, sphere, hyperbolic, product, custom };

inline std::string_view to_string(MetricKind k) {
    switch (k) {
        case MetricKind::euclidean: return "euclidean";
        case MetricKind::sphere: return "sphere";
        case MetricKind::hyperbolic: return "hyperbolic";
        case MetricKind::product: return "product";
        case MetricKind::custom: return "custom";
    }
    return "unknown";
}

inline constexpr double kSingularMetricDet = 1e-12;
inline constexpr double kSphereChartExtent = 12.0;   // |x| ≤ 12r in stereographic coordinates
inline constexpr double kBallChartFraction = 0.95;   // |x| ≤ 0.95r in the Poincaré ball
inline constexpr double kPolarMargin = 1e-3;         // geographic latitude margin

template <int N>
struct ChartDomain {
    Vec<N> lo = Vec<N>::Constant(-std::numeric_limits<double>::infinity());
    Vec<N> hi = Vec<N>::Constant(std::numeric_limits<double>::infinity());
    /// Optional ball |x_{0..ball_dims-1}| ≤ ball_radius.
    double ball_radius = std::numeric_limits<double>::infinity();
    int ball_dims = N;
    /// Coordinate periods, 0 for non-periodic coordinates.
    Vec<N> period = Vec<N>::Zero();

    bool contains(const VecArg<N>& p, double margin = 0.0) const {
        for (int i = 0; i < N; ++i) {
            if (!std::isfinite(p[i])) return false;
            if (p[i] < lo[i] + margin || p[i] > hi[i] - margin) return false;
        }
        if (std::isfinite(ball_radius)) {
            double r2 = 0.0;
            for (int i = 0; i < ball_dims; ++i) r2 += p[i] * p[i];
            const double limit = ball_radius - margin;
            if (limit <= 0.0 || r2 > limit * limit) return false;
        }
        return true;
    }

    /// Chart-coordinate difference q − p with periodic coordinates wrapped to
    /// (−period/2, period/2].
    Vec<N> difference(const VecArg<N>& p, const VecArg<N>& q) const {
        Vec<N> d = q - p;
        for (int i = 0; i < N; ++i) {
            if (period[i] > 0.0) d[i] -= period[i] * std::round(d[i] / period[i]);
        }
        return d;
    }
};

template <int N>
using MetricFunction = std::function<Mat<N>(const Vec<N>&)>;

/// Riemann tensor at a point, components R^l_{kij} in the convention above.
template <int N>
class CurvatureTensor {
public:
    CurvatureTensor() { data_.fill(0.0); }

    double operator()(int l, int k, int i, int j) const { return data_[index(l, k, i, j)]; }
    double& operator()(int l, int k, int i, int j) { return data_[index(l, k, i, j)]; }

    /// R(X, Y)Z
    Vec<N> apply(const VecArg<N>& x, const VecArg<N>& y, const VecArg<N>& z) const {
        Vec<N> out = Vec<N>::Zero();
        for (int l = 0; l < N; ++l)
            for (int k = 0; k < N; ++k)
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) out[l] += (*this)(l, k, i, j) * x[i] * y[j] * z[k];
        return out;
    }

    /// ⟨R(X, Y)Z, W⟩
    double lowered(const Mat<N>& g, const VecArg<N>& x, const VecArg<N>& y, const VecArg<N>& z,
                   const VecArg<N>& w) const {
        return apply(x, y, z).dot(g * w);
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    static constexpr int index(int l, int k, int i, int j) { return ((l * N + k) * N + i) * N + j; }
    std::array<double, N * N * N * N> data_{};
};

namespace detail {

inline double fd_step(double coord_norm) { return std::max(1e-4, 1e-4 * coord_norm); }

template <int N>
Mat<N> checked_inverse(const Mat<N>& g) {
    const double det = g.determinant();
    if (!(det >= kSingularMetricDet)) {
        fail(ErrorCode::SingularMetric, "metric determinant " + std::to_string(det) + " below 1e-12");
    }
    return g.inverse();
}

/// Christoffel symbols from metric and its partials: dg[l] = ∂_l g.
template <int N>
Christoffel<N> christoffel_from_partials(const Mat<N>& ginv, const std::array<Mat<N>, N>& dg) {
    Christoffel<N> c = Christoffel<N>::zero();
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < N; ++i)
            for (int j = i; j < N; ++j) {
                double s = 0.0;
                for (int l = 0; l < N; ++l) s += ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
                c(k, i, j) = 0.5 * s;
                c(k, j, i) = 0.5 * s;
            }
    return c;
}

// Conformally flat metric g = e^{2f} δ with f = log(2r²) − log(r² + ε|x|²):
// ε = +1 is the stereographic sphere, ε = −1 the Poincaré ball.
template <int N>
struct Conformal {
    double r;
    double eps;

    double denom(const VecArg<N>& x) const { return r * r + eps * x.squaredNorm(); }

    Mat<N> metric(const VecArg<N>& x) const {
        const double d = denom(x);
        const double factor = 4.0 * r * r * r * r / (d * d);
        return factor * Mat<N>::Identity();
    }

    Vec<N> grad_f(const VecArg<N>& x) const { return (-2.0 * eps / denom(x)) * x; }

    Mat<N> hess_f(const VecArg<N>& x) const {
        const double d = denom(x);
        return (-2.0 * eps / d) * Mat<N>::Identity() + (4.0 / (d * d)) * (x * x.transpose());
    }

    // Γᵏ_ij = δ_ki f_j + δ_kj f_i − δ_ij f_k
    Christoffel<N> christoffel(const VecArg<N>& x) const {
        const Vec<N> f = grad_f(x);
        Christoffel<N> c = Christoffel<N>::zero();
        for (int k = 0; k < N; ++k)
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    double v = 0.0;
                    if (k == i) v += f[j];
                    if (k == j) v += f[i];
                    if (i == j) v -= f[k];
                    c(k, i, j) = v;
                }
        return c;
    }

    ChristoffelDerivative<N> christoffel_derivative(const VecArg<N>& x) const {
        const Mat<N> H = hess_f(x);
        ChristoffelDerivative<N> out = ChristoffelDerivative<N>::zero();
        for (int l = 0; l < N; ++l)
            for (int k = 0; k < N; ++k)
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) {
                        double v = 0.0;
                        if (k == i) v += H(j, l);
                        if (k == j) v += H(i, l);
                        if (i == j) v -= H(k, l);
                        out.d[l](k, i, j) = v;
                    }
        return out;
    }
};

// Round S²(r) in geographic coordinates (φ, ψ).
struct Geographic {
    double r;

    Mat2 metric(const Vec2& x) const {
        const double c = std::cos(x[0]);
        Mat2 g;
        g << r * r, 0.0, 0.0, r * r * c * c;
        return g;
    }

    Christoffel<2> christoffel(const Vec2& x) const {
        Christoffel<2> c = Christoffel<2>::zero();
        const double s = std::sin(x[0]);
        const double co = std::cos(x[0]);
        c(0, 1, 1) = s * co;
        c(1, 0, 1) = -s / co;
        c(1, 1, 0) = -s / co;
        return c;
    }

    ChristoffelDerivative<2> christoffel_derivative(const Vec2& x) const {
        ChristoffelDerivative<2> out = ChristoffelDerivative<2>::zero();
        const double co = std::cos(x[0]);
        out.d[0](0, 1, 1) = std::cos(2.0 * x[0]);
        out.d[0](1, 0, 1) = -1.0 / (co * co);
        out.d[0](1, 1, 0) = -1.0 / (co * co);
        return out;
    }
};

}  // namespace detail

/// First derivatives of the metric by fourth-order central differences.
template <int N>
std::array<Mat<N>, N> metric_partials_fd(const MetricFunction<N>& metric, const VecArg<N>& p, double h) {
    std::array<Mat<N>, N> dg;
    for (int l = 0; l < N; ++l) {
        Vec<N> e = Vec<N>::Zero();
        e[l] = h;
        dg[l] = central_diff4(metric(p - 2.0 * e), metric(p - e), metric(p + e), metric(p + 2.0 * e), h);
    }
    return dg;
}

/// Γ from a black-box metric using fourth-order central differences.
template <int N>
Christoffel<N> christoffel_fd(const MetricFunction<N>& metric, const VecArg<N>& p, double h) {
    const Mat<N> ginv = detail::checked_inverse<N>(metric(p));
    return detail::christoffel_from_partials<N>(ginv, metric_partials_fd<N>(metric, p, h));
}

template <int N>
ChristoffelDerivative<N> christoffel_derivative_fd(const MetricFunction<N>& metric, const VecArg<N>& p,
                                                   double h) {
    // Second level uses a coarser step so round-off of the inner difference
    // (≈ ε/h) is not amplified by another 1/h.
    const double outer = 10.0 * h;
    ChristoffelDerivative<N> out;
    for (int l = 0; l < N; ++l) {
        Vec<N> e = Vec<N>::Zero();
        e[l] = outer;
        const auto cm2 = christoffel_fd<N>(metric, p - 2.0 * e, h);
        const auto cm1 = christoffel_fd<N>(metric, p - e, h);
        const auto cp1 = christoffel_fd<N>(metric, p + e, h);
        const auto cp2 = christoffel_fd<N>(metric, p + 2.0 * e, h);
        for (int k = 0; k < N; ++k)
            out.d[l].gamma[k] = central_diff4(cm2.gamma[k], cm1.gamma[k], cp1.gamma[k], cp2.gamma[k], outer);
    }
    return out;
}

/// Factor description of a product manifold M² × ℝ.
struct ProductFactor {
    MetricKind kind = MetricKind::euclidean;  // euclidean, sphere or hyperbolic
    double radius = 1.0;
};

/// A manifold of dimension N ∈ {2, 3} described through one chart.
/// Immutable after construction; all evaluations are pure and thread-safe.
template <int N>
class Manifold {
    static_assert(N == 2 || N == 3, "only dimensions 2 and 3 are supported");

public:
    static Manifold euclidean() {
        Manifold m;
        m.name_ = N == 3 ? "E3" : "E2";
        m.kind_ = MetricKind::euclidean;
        return m;
    }

    /// S³(r) in stereographic coordinates (N = 3) or S²(r) in geographic
    /// coordinates (N = 2).
    static Manifold sphere(double r) {
        check_radius(r);
        Manifold m;
        m.kind_ = MetricKind::sphere;
        m.radius_ = r;
        if constexpr (N == 3) {
            m.name_ = "S3(" + format_radius(r) + ")";
            m.domain_.lo = Vec<N>::Constant(-kSphereChartExtent * r);
            m.domain_.hi = Vec<N>::Constant(kSphereChartExtent * r);
            m.domain_.ball_radius = kSphereChartExtent * r;
        } else {
            m.name_ = "S2(" + format_radius(r) + ")";
            m.domain_.lo[0] = -pi / 2 + kPolarMargin;
            m.domain_.hi[0] = pi / 2 - kPolarMargin;
            m.domain_.period[1] = 2.0 * pi;
        }
        return m;
    }

    /// H³(r) or H²(r) in the Poincaré ball model.
    static Manifold hyperbolic(double r) {
        check_radius(r);
        Manifold m;
        m.name_ = (N == 3 ? "H3(" : "H2(") + format_radius(r) + ")";
        m.kind_ = MetricKind::hyperbolic;
        m.radius_ = r;
        m.domain_.lo = Vec<N>::Constant(-r);
        m.domain_.hi = Vec<N>::Constant(r);
        m.domain_.ball_radius = kBallChartFraction * r;
        return m;
    }

    /// M² × ℝ; coordinates (x¹, x², t).
    static Manifold product(const Manifold<2>& factor)
        requires(N == 3)
    {
        if (factor.kind() == MetricKind::custom || factor.kind() == MetricKind::product) {
            fail(ErrorCode::BadParams, "product factor must be euclidean, sphere or hyperbolic");
        }
        Manifold m;
        m.name_ = factor.name() + "xR";
        m.kind_ = MetricKind::product;
        m.radius_ = factor.radius();
        m.factor_ = ProductFactor{factor.kind(), factor.radius()};
        const auto& fd = factor.domain();
        for (int i = 0; i < 2; ++i) {
            m.domain_.lo[i] = fd.lo[i];
            m.domain_.hi[i] = fd.hi[i];
            m.domain_.period[i] = fd.period[i];
        }
        m.domain_.ball_radius = fd.ball_radius;
        m.domain_.ball_dims = 2;
        return m;
    }

    static Manifold custom(std::string name, MetricFunction<N> metric, ChartDomain<N> domain) {
        Manifold m;
        m.name_ = std::move(name);
        m.kind_ = MetricKind::custom;
        m.custom_ = std::make_shared<const MetricFunction<N>>(std::move(metric));
        m.domain_ = domain;
        return m;
    }

    const std::string& name() const { return name_; }
    static constexpr int dim() { return N; }
    MetricKind kind() const { return kind_; }
    double radius() const { return radius_; }
    const ChartDomain<N>& domain() const { return domain_; }
    const ProductFactor& product_factor() const { return factor_; }

    /// The M² factor of a product manifold.
    Manifold<2> factor() const
        requires(N == 3)
    {
        if (kind_ != MetricKind::product) fail(ErrorCode::BadParams, name_ + " is not a product manifold");
        switch (factor_.kind) {
            case MetricKind::sphere: return Manifold<2>::sphere(factor_.radius);
            case MetricKind::hyperbolic: return Manifold<2>::hyperbolic(factor_.radius);
            default: return Manifold<2>::euclidean();
        }
    }

    bool contains(const VecArg<N>& p) const { return domain_.contains(p); }

    void require_in_chart(const VecArg<N>& p) const {
        if (!domain_.contains(p)) fail(ErrorCode::OutOfChart, "point outside the chart of " + name_);
    }

    Mat<N> metric(const VecArg<N>& p) const {
        require_in_chart(p);
        return metric_unchecked(p);
    }

    Christoffel<N> christoffel(const VecArg<N>& p) const {
        require_in_chart(p);
        switch (kind_) {
            case MetricKind::euclidean: return Christoffel<N>::zero();
            case MetricKind::sphere:
                if constexpr (N == 3) return detail::Conformal<N>{radius_, 1.0}.christoffel(p);
                else return detail::Geographic{radius_}.christoffel(p);
            case MetricKind::hyperbolic: return detail::Conformal<N>{radius_, -1.0}.christoffel(p);
            case MetricKind::product:
                if constexpr (N == 3) return product_christoffel(p);
                else break;
            case MetricKind::custom: {
                const double h = detail::fd_step(p.norm());
                if (!domain_.contains(p, 2.0 * 10.0 * h)) {
                    fail(ErrorCode::OutOfChart, "finite-difference stencil leaves the chart of " + name_);
                }
                return christoffel_fd<N>(*custom_, p, h);
            }
        }
        return Christoffel<N>::zero();
    }

    ChristoffelDerivative<N> christoffel_derivative(const VecArg<N>& p) const {
        require_in_chart(p);
        switch (kind_) {
            case MetricKind::euclidean: return ChristoffelDerivative<N>::zero();
            case MetricKind::sphere:
                if constexpr (N == 3) return detail::Conformal<N>{radius_, 1.0}.christoffel_derivative(p);
                else return detail::Geographic{radius_}.christoffel_derivative(p);
            case MetricKind::hyperbolic:
                return detail::Conformal<N>{radius_, -1.0}.christoffel_derivative(p);
            case MetricKind::product:
                if constexpr (N == 3) return product_christoffel_derivative(p);
                else break;
            case MetricKind::custom: {
                const double h = detail::fd_step(p.norm());
                if (!domain_.contains(p, 3.0 * 10.0 * h)) {
                    fail(ErrorCode::OutOfChart, "finite-difference stencil leaves the chart of " + name_);
                }
                return christoffel_derivative_fd<N>(*custom_, p, h);
            }
        }
        return ChristoffelDerivative<N>::zero();
    }

    /// The raw metric function, valid without chart checks (used by oracles).
    MetricFunction<N> metric_function() const {
        Manifold copy = *this;
        return [copy](const VecArg<N>& p) { return copy.metric_unchecked(p); };
    }

private:
    Manifold() = default;

    static void check_radius(double r) {
        if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::BadParams, "radius must be positive");
    }

    static std::string format_radius(double r) {
        std::string s = std::to_string(r);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    Mat<N> metric_unchecked(const VecArg<N>& p) const {
        switch (kind_) {
            case MetricKind::euclidean: return Mat<N>::Identity();
            case MetricKind::sphere:
                if constexpr (N == 3) return detail::Conformal<N>{radius_, 1.0}.metric(p);
                else return detail::Geographic{radius_}.metric(p);
            case MetricKind::hyperbolic: return detail::Conformal<N>{radius_, -1.0}.metric(p);
            case MetricKind::product:
                if constexpr (N == 3) {
                    Mat<N> g = Mat<N>::Zero();
                    g.template topLeftCorner<2, 2>() = factor_metric(p.template head<2>());
                    g(2, 2) = 1.0;
                    return g;
                } else {
                    break;
                }
            case MetricKind::custom: return (*custom_)(p);
        }
        return Mat<N>::Identity();
    }

    Mat2 factor_metric(const Vec2& x) const {
        switch (factor_.kind) {
            case MetricKind::sphere: return detail::Geographic{factor_.radius}.metric(x);
            case MetricKind::hyperbolic: return detail::Conformal<2>{factor_.radius, -1.0}.metric(x);
            default: return Mat2::Identity();
        }
    }

    Christoffel<N> product_christoffel(const VecArg<N>& p) const {
        Christoffel<2> c2 = Christoffel<2>::zero();
        const Vec2 x = p.template head<2>();
        if (factor_.kind == MetricKind::sphere) c2 = detail::Geographic{factor_.radius}.christoffel(x);
        if (factor_.kind == MetricKind::hyperbolic) c2 = detail::Conformal<2>{factor_.radius, -1.0}.christoffel(x);
        Christoffel<N> c = Christoffel<N>::zero();
        for (int k = 0; k < 2; ++k) c.gamma[k].template topLeftCorner<2, 2>() = c2.gamma[k];
        return c;
    }

    ChristoffelDerivative<N> product_christoffel_derivative(const VecArg<N>& p) const {
        ChristoffelDerivative<2> d2 = ChristoffelDerivative<2>::zero();
        const Vec2 x = p.template head<2>();
        if (factor_.kind == MetricKind::sphere) d2 = detail::Geographic{factor_.radius}.christoffel_derivative(x);
        if (factor_.kind == MetricKind::hyperbolic) {
            d2 = detail::Conformal<2>{factor_.radius, -1.0}.christoffel_derivative(x);
        }
        ChristoffelDerivative<N> d = ChristoffelDerivative<N>::zero();
        for (int l = 0; l < 2; ++l)
            for (int k = 0; k < 2; ++k) d.d[l].gamma[k].template topLeftCorner<2, 2>() = d2.d[l].gamma[k];
        return d;
    }

    std::string name_;
    MetricKind kind_ = MetricKind::euclidean;
    double radius_ = 1.0;
    ChartDomain<N> domain_{};
    ProductFactor factor_{};
    std::shared_ptr<const MetricFunction<N>> custom_;
};

using Manifold2 = Manifold<2>;
using Manifold3 = Manifold<3>;

// ---------------------------------------------------------------------------
// Pointwise evaluation API.

template <int N>
Mat<N> metric_at(const Manifold<N>& m, const VecArg<N>& p) {
    return m.metric(p);
}

template <int N>
Christoffel<N> christoffel_at(const Manifold<N>& m, const VecArg<N>& p) {
    (void)detail::checked_inverse<N>(m.metric(p));
    return m.christoffel(p);
}

/// Riemann tensor from Γ and ∂Γ:
/// R^l_{kij} = ∂_jΓ^l_ik − ∂_iΓ^l_jk + Γ^l_jm Γ^m_ik − Γ^l_im Γ^m_jk.
template <int N>
CurvatureTensor<N> riemann_from_connection(const Christoffel<N>& c, const ChristoffelDerivative<N>& dc) {
    CurvatureTensor<N> r;
    for (int l = 0; l < N; ++l)
        for (int k = 0; k < N; ++k)
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    double v = dc.d[j](l, i, k) - dc.d[i](l, j, k);
                    for (int m = 0; m < N; ++m) v += c(l, j, m) * c(m, i, k) - c(l, i, m) * c(m, j, k);
                    r(l, k, i, j) = v;
                }
    return r;
}

template <int N>
CurvatureTensor<N> riemann_at(const Manifold<N>& m, const VecArg<N>& p) {
    (void)detail::checked_inverse<N>(m.metric(p));
    return riemann_from_connection<N>(m.christoffel(p), m.christoffel_derivative(p));
}

template <int N>
double inner(const Manifold<N>& m, const VecArg<N>& p, const VecArg<N>& x, const VecArg<N>& y) {
    return x.dot(m.metric(p) * y);
}

template <int N>
double norm(const Manifold<N>& m, const VecArg<N>& p, const VecArg<N>& x) {
    return std::sqrt(std::max(0.0, inner(m, p, x, x)));
}

/// Angle in [0, π] between two nonzero tangent vectors.
template <int N>
double angle(const Manifold<N>& m, const VecArg<N>& p, const VecArg<N>& x, const VecArg<N>& y) {
    const Mat<N> g = m.metric(p);
    const double nx = std::sqrt(x.dot(g * x));
    const double ny = std::sqrt(y.dot(g * y));
    if (nx == 0.0 || ny == 0.0) fail(ErrorCode::ZeroVector, "angle with a zero vector");
    return std::acos(std::clamp(x.dot(g * y) / (nx * ny), -1.0, 1.0));
}

/// K(X, Y) = −⟨R(X,Y)Y, X⟩ / (|X|²|Y|² − ⟨X,Y⟩²); +1/r² on S³(r).
template <int N>
double sectional_curvature(const Manifold<N>& m, const VecArg<N>& p, const VecArg<N>& x, const VecArg<N>& y) {
    const Mat<N> g = m.metric(p);
    const double gram = x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2);
    if (!(gram >= 1e-12)) fail(ErrorCode::DegeneratePlane, "tangent vectors span a degenerate plane");
    const auto r = riemann_at(m, p);
    return -r.lowered(g, x, y, y, x) / gram;
}

/// Sectional curvature from a precomputed tensor and metric (no checks).
template <int N>
double sectional_curvature(const CurvatureTensor<N>& r, const Mat<N>& g, const VecArg<N>& x, const VecArg<N>& y) {
    const double gram = x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2);
    return -r.lowered(g, x, y, y, x) / gram;
}

/// Metric cross product in dimension 3: ⟨X × Y, W⟩ = vol(X, Y, W), with vol
/// the chart-oriented Riemannian volume form.
inline Vec3 cross(const Mat3& g, const Vec3& x, const Vec3& y) {
    const Vec3 lower = std::sqrt(g.determinant()) * x.cross(y);
    return g.ldlt().solve(lower);
}

/// vol(X, Y, Z) = √det g · det[X Y Z].
inline double volume(const Mat3& g, const Vec3& x, const Vec3& y, const Vec3& z) {
    Mat3 m;
    m << x, y, z;
    return std::sqrt(g.determinant()) * m.determinant();
}

/// π/2 rotation in an oriented 2-manifold: J(w) ⟂ w, |Jw| = |w|, (w, Jw)
/// positively oriented.
inline Vec2 rotate_quarter(const Mat2& g, const Vec2& w) {
    Vec2 lower(-w[1], w[0]);
    lower *= std::sqrt(g.determinant());
    return g.ldlt().solve(lower);
}

/// Gaussian curvature of a 2-manifold at p (sectional curvature of T_pM).
inline double gaussian_curvature(const Manifold<2>& m, const Vec2& p) {
    const Mat2 g = m.metric(p);
    const Vec2 e0(1.0, 0.0), e1(0.0, 1.0);
    return sectional_curvature<2>(riemann_at(m, p), g, e0, e1);
}

// ---------------------------------------------------------------------------
// Embeddings of the built-in charts; used by oracles and mesh export.

/// Point of the standard model in ℝ⁴ (S³ ⊂ ℝ⁴, H³ ⊂ ℝ^{1,3} hyperboloid with
/// the time coordinate first) or ℝ³ for 2-manifolds (S² ⊂ ℝ³, H² hyperboloid).
template <int N>
Eigen::Matrix<double, N + 1, 1> model_point(const Manifold<N>& m, const VecArg<N>& p) {
    Eigen::Matrix<double, N + 1, 1> out = Eigen::Matrix<double, N + 1, 1>::Zero();
    const double r = m.radius();
    switch (m.kind()) {
        case MetricKind::sphere:
            if constexpr (N == 3) {
                const double d = p.squaredNorm() + r * r;
                out.template head<3>() = 2.0 * r * r * p / d;
                out[3] = r * (p.squaredNorm() - r * r) / d;
            } else {
                out << r * std::cos(p[0]) * std::cos(p[1]), r * std::cos(p[0]) * std::sin(p[1]),
                    r * std::sin(p[0]);
            }
            break;
        case MetricKind::hyperbolic: {
            const double d = r * r - p.squaredNorm();
            out[0] = r * (r * r + p.squaredNorm()) / d;
            out.template tail<N>() = 2.0 * r * r * p / d;
            break;
        }
        default: out.template head<N>() = p; break;
    }
    return out;
}

/// Geodesic distance on the round sphere S³(r) between chart points.
inline double sphere_distance(const Manifold<3>& m, const Vec3& p, const Vec3& q) {
    const auto a = model_point(m, p);
    const auto b = model_point(m, q);
    const double r = m.radius();
    return r * std::acos(std::clamp(a.dot(b) / (r * r), -1.0, 1.0));
}

/// Three-dimensional picture of a 3-manifold point for mesh export:
/// chart coordinates for E³, the stereographic and Poincaré-ball charts;
/// for M² × ℝ the cylinder picture (S²: e^{t} times the unit-sphere point;
/// otherwise the factor chart with t as height).
inline Vec3 visualization_point(const Manifold<3>& m, const Vec3& p) {
    if (m.kind() != MetricKind::product) return p;
    if (m.product_factor().kind == MetricKind::sphere) {
        const double c = std::cos(p[0]);
        return std::exp(p[2]) * Vec3(c * std::cos(p[1]), c * std::sin(p[1]), std::sin(p[0]));
    }
    return p;
}

}  // namespace cangle
