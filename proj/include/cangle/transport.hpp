#pragma once

// Geodesics, exponential map and parallel transport along discretized curves.

#include "cangle/curve_path.hpp"
#include "cangle/manifold.hpp"
#include "cangle/ode.hpp"

#include <vector>

namespace cangle {

inline constexpr double kDefaultSampleSpacing = 0.01;

/// Geodesic ODE in first-order form, state (x, ẋ).
template <int N>
OdeTrajectory<2 * N> geodesic_trajectory(const Manifold<N>& m, const VecArg<N>& p0, const VecArg<N>& v0,
                                         const std::vector<double>& outputs,
                                         const IntegratorSettings& settings = {}) {
    using State = Eigen::Matrix<double, 2 * N, 1>;
    State y0;
    y0 << p0, v0;
    auto rhs = [&m](double, const State& y) {
        State dy;
        const Vec<N> x = y.template head<N>();
        const Vec<N> v = y.template tail<N>();
        dy << v, -m.christoffel(x).contract(v, v);
        return dy;
    };
    OdeHooks<2 * N> hooks;
    hooks.guard = [&m](const State& y) { return m.contains(Vec<N>(y.template head<N>())); };
    return integrate<2 * N>(rhs, 0.0, y0, outputs, settings, hooks);
}

/// Unit-speed geodesic sampled every `spacing` (last sample exactly at s_max).
/// Leaving the chart ends the path early with status LeftChart.
template <int N>
CurvePath<N> integrate_geodesic(const Manifold<N>& m, const VecArg<N>& p0, const VecArg<N>& v0, double s_max,
                                const IntegratorSettings& settings = {},
                                double spacing = kDefaultSampleSpacing) {
    m.require_in_chart(p0);
    if (!(s_max >= 0.0)) fail(ErrorCode::BadParams, "s_max must be non-negative");
    const double speed = norm(m, p0, v0);
    if (std::abs(speed - 1.0) > 1e-8) fail(ErrorCode::BadParams, "initial velocity must be unit length");
    const Vec<N> v = v0 / speed;
    std::vector<double> outputs = s_max > 0.0 ? uniform_grid(0.0, s_max, spacing) : std::vector<double>{0.0};
    auto traj = geodesic_trajectory(m, p0, v, outputs, settings);
    return path_from_trajectory<N>(traj);
}

/// exp_p(v): endpoint of the unit-speed geodesic of length |v| with initial
/// direction v/|v|.
template <int N>
Vec<N> exp_map(const Manifold<N>& m, const VecArg<N>& p, const VecArg<N>& v, const IntegratorSettings& settings = {}) {
    m.require_in_chart(p);
    if (v.isZero(0.0)) return p;
    const double len = norm(m, p, v);
    auto traj = geodesic_trajectory(m, p, Vec<N>(v / len), {len}, settings);
    if (traj.stop == OdeStop::Guard || traj.t.empty()) {
        fail(ErrorCode::LeftChart, "exponential map leaves the chart of " + m.name());
    }
    return traj.y.back().template head<N>();
}

/// Parallel transport of several vectors along a path, starting from sample
/// `start` and integrating towards both ends. Result[k][i] is the k-th vector
/// at sample i.
template <int N>
std::vector<std::vector<Vec<N>>> parallel_transport_frame(const Manifold<N>& m, const CurvePath<N>& path,
                                                          const std::vector<Vec<N>>& initial,
                                                          const IntegratorSettings& settings = {},
                                                          std::size_t start = 0) {
    using State = Eigen::VectorXd;
    const std::size_t n = path.size();
    const auto k = static_cast<int>(initial.size());
    if (start >= n) fail(ErrorCode::BadParams, "transport start index out of range");
    std::vector<std::vector<Vec<N>>> out(initial.size(), std::vector<Vec<N>>(n));
    for (int a = 0; a < k; ++a) out[a][start] = initial[a];
    if (n < 2 || k == 0) return out;

    State y0(N * k);
    for (int a = 0; a < k; ++a) y0.segment<N>(N * a) = initial[a];
    auto rhs = [&](double s, const State& y) {
        const Vec<N> x = path.position(s);
        const Vec<N> t = path.tangent(s);
        const auto gamma = m.christoffel(x);
        State dy(y.size());
        for (int a = 0; a < k; ++a) dy.segment<N>(N * a) = -gamma.contract(t, y.segment<N>(N * a));
        return dy;
    };
    auto run = [&](std::vector<double> outputs, std::vector<std::size_t> index) {
        if (outputs.size() < 2) return;
        auto traj = integrate<Eigen::Dynamic>(rhs, outputs.front(), y0, outputs, settings);
        if (traj.t.size() != outputs.size()) fail(ErrorCode::StepFailure, "transport left the chart");
        for (std::size_t i = 0; i < outputs.size(); ++i)
            for (int a = 0; a < k; ++a) out[a][index[i]] = traj.y[i].template segment<N>(N * a);
    };
    std::vector<double> fwd, bwd;
    std::vector<std::size_t> fwd_idx, bwd_idx;
    for (std::size_t i = start; i < n; ++i) {
        fwd.push_back(path.s[i]);
        fwd_idx.push_back(i);
    }
    for (std::size_t i = start + 1; i-- > 0;) {
        bwd.push_back(path.s[i]);
        bwd_idx.push_back(i);
    }
    run(fwd, fwd_idx);
    run(bwd, bwd_idx);
    return out;
}

template <int N>
std::vector<Vec<N>> parallel_transport(const Manifold<N>& m, const CurvePath<N>& path, const VecArg<N>& v0,
                                       const IntegratorSettings& settings = {}, std::size_t start = 0) {
    return parallel_transport_frame<N>(m, path, {v0}, settings, start)[0];
}

/// Orthonormal basis of T_pM by Gram–Schmidt on the coordinate basis.
template <int N>
std::vector<Vec<N>> orthonormal_basis(const Mat<N>& g) {
    std::vector<Vec<N>> e;
    for (int i = 0; i < N; ++i) {
        Vec<N> v = Vec<N>::Unit(i);
        for (const auto& b : e) v -= v.dot(g * b) * b;
        e.push_back(v / std::sqrt(v.dot(g * v)));
    }
    return e;
}

namespace detail {

template <int N>
void require_closed(const Manifold<N>& m, const CurvePath<N>& loop) {
    const Vec<N> gap = m.domain().difference(loop.p.front(), loop.p.back());
    if (gap.norm() > 1e-8) fail(ErrorCode::NotClosed, "loop endpoints differ by " + std::to_string(gap.norm()));
}

}  // namespace detail

/// Rotation angle in [0, π] of the holonomy around a closed loop.
template <int N>
double loop_holonomy(const Manifold<N>& m, const CurvePath<N>& loop, const IntegratorSettings& settings = {}) {
    if (loop.size() < 2 || loop.length() == 0.0) return 0.0;
    detail::require_closed(m, loop);
    const Mat<N> g = m.metric(loop.p.front());
    const auto basis = orthonormal_basis<N>(g);
    const auto moved = parallel_transport_frame<N>(m, loop, basis, settings);
    Mat<N> q;
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) q(a, b) = moved[b].back().dot(g * basis[a]);
    if constexpr (N == 2) {
        return std::abs(std::atan2(q(1, 0) - q(0, 1), q(0, 0) + q(1, 1)));
    } else {
        const Vec3 w(q(2, 1) - q(1, 2), q(0, 2) - q(2, 0), q(1, 0) - q(0, 1));
        return std::atan2(0.5 * w.norm(), 0.5 * (q.trace() - 1.0));
    }
}

/// Angle between v0 and its transport around a closed loop.
template <int N>
double loop_holonomy(const Manifold<N>& m, const CurvePath<N>& loop, const VecArg<N>& v0,
                     const IntegratorSettings& settings = {}) {
    if (loop.size() < 2 || loop.length() == 0.0) return 0.0;
    detail::require_closed(m, loop);
    const auto moved = parallel_transport<N>(m, loop, v0, settings);
    return angle(m, loop.p.front(), v0, moved.back());
}

/// Circle of constant latitude φ₀ on S²(r), unit speed, one full turn.
inline CurvePath<2> latitude_circle(const Manifold<2>& sphere, double latitude, double spacing = kDefaultSampleSpacing) {
    const double r = sphere.radius();
    const double rho = r * std::cos(latitude);
    const double length = 2.0 * pi * rho;
    CurvePath<2> path;
    for (double s : uniform_grid(0.0, length, spacing)) {
        path.s.push_back(s);
        path.p.emplace_back(latitude, s / rho);
        path.T.emplace_back(0.0, 1.0 / rho);
        path.dT.emplace_back(0.0, 0.0);
    }
    return path;
}

}  // namespace cangle
