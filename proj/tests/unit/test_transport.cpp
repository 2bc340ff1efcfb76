#include "cangle/metrics.hpp"
#include "cangle/transport.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cangle;
using cangle::test::Gen;

namespace {

Vec3 unit_at(const Manifold3& m, const Vec3& p, Vec3 v) { return v / norm(m, p, v); }

// A non-geodesic chart curve with its coordinate derivatives, s used as a
// plain parameter.
CurvePath<3> coil(const Manifold3& m, double scale, double t_max) {
    CurvePath<3> path;
    for (double t : uniform_grid(0.0, t_max, 0.01)) {
        path.s.push_back(t);
        path.p.emplace_back(scale * std::cos(t), scale * std::sin(t), 0.1 * scale * t);
        path.T.emplace_back(-scale * std::sin(t), scale * std::cos(t), 0.1 * scale);
        path.dT.emplace_back(-scale * std::cos(t), -scale * std::sin(t), 0.0);
    }
    (void)m;
    return path;
}

}  // namespace

TEST(Geodesic, EuclideanStraightLine) {
    const auto path = integrate_geodesic(Manifold3::euclidean(), Vec3::Zero(), Vec3(1, 0, 0), 2.0);
    EXPECT_EQ(path.status, PathStatus::Complete);
    EXPECT_LT((path.p.back() - Vec3(2, 0, 0)).norm(), 1e-12);
    EXPECT_DOUBLE_EQ(path.s.back(), 2.0);
}

TEST(Geodesic, SphereGreatCircleCloses) {
    const auto s2 = Manifold2::sphere(1.0);
    const auto path = integrate_geodesic(s2, Vec2(0.0, 0.0), Vec2(0.0, 1.0), 2.0 * pi);
    EXPECT_LT(s2.domain().difference(path.p.front(), path.p.back()).norm(), 1e-5);
    // Tilted great circle through the equator: returns as well.
    const Vec2 v(std::sin(0.7), std::cos(0.7));
    const auto tilted = integrate_geodesic(s2, Vec2(0.0, 0.3), v, 2.0 * pi);
    EXPECT_LT(s2.domain().difference(tilted.p.front(), tilted.p.back()).norm(), 1e-5);
}

TEST(Geodesic, SpeedDriftOverTenUnits) {
    Gen gen(21);
    const std::vector<Manifold3> ms{Manifold3::euclidean(), Manifold3::sphere(1.0), Manifold3::hyperbolic(1.0),
                                    Manifold3::product(Manifold2::sphere(1.0)),
                                    Manifold3::product(Manifold2::hyperbolic(1.0))};
    for (const auto& m : ms) {
        for (int n = 0; n < 5; ++n) {
            const Vec3 p = m.kind() == MetricKind::hyperbolic ? gen.in_ball<3>(0.3) : test::interior_point(gen, m);
            const Vec3 v = unit_at(m, p, gen.vec<3>());
            const auto path = integrate_geodesic(m, p, v, 10.0);
            ASSERT_GE(path.size(), 2u);
            const double drift = path.speed_defect([&](const Vec3& x) { return m.metric(x); });
            EXPECT_LT(drift, 1e-6) << m.name();
        }
    }
}

TEST(Geodesic, LeavingTheChartReturnsPartialPath) {
    const auto h = Manifold3::hyperbolic(1.0);
    const auto path = integrate_geodesic(h, Vec3::Zero(), Vec3(0.5, 0, 0), 10.0);
    EXPECT_EQ(path.status, PathStatus::LeftChart);
    EXPECT_LT(path.s.back(), 10.0);
    EXPECT_GT(path.p.back()[0], 0.9);
}

TEST(Geodesic, RejectsNonUnitVelocity) {
    EXPECT_THROW(integrate_geodesic(Manifold3::euclidean(), Vec3::Zero(), Vec3(2, 0, 0), 1.0), GeometryError);
}

TEST(ExpMap, ZeroAndEuclidean) {
    const Vec3 p(0.1, 0.2, 0.3);
    EXPECT_EQ(exp_map(Manifold3::sphere(1.0), p, Vec3::Zero()), p);
    EXPECT_LT((exp_map(Manifold3::euclidean(), p, Vec3(1, -2, 0.5)) - Vec3(1.1, -1.8, 0.8)).norm(), 1e-12);
}

TEST(ExpMap, SphereDistance) {
    Gen gen(22);
    const auto m = Manifold3::sphere(1.5);
    for (int n = 0; n < 20; ++n) {
        const Vec3 p = gen.in_ball<3>(1.0);
        const double len = gen.uniform(0.1, 0.95 * pi * 1.5);
        const Vec3 v = len * unit_at(m, p, gen.vec<3>());
        Vec3 q;
        try {
            q = exp_map(m, p, v);
        } catch (const GeometryError& e) {
            EXPECT_EQ(e.code(), ErrorCode::LeftChart);
            continue;
        }
        EXPECT_NEAR(sphere_distance(m, p, q), len, 1e-5);
    }
}

TEST(ExpMap, Semigroup) {
    Gen gen(23);
    const auto m = Manifold3::hyperbolic(1.0);
    const Vec3 p(0.1, -0.2, 0.05);
    const Vec3 v = unit_at(m, p, Vec3(1, 2, -1));
    const auto traj = geodesic_trajectory(m, p, v, {0.7, 1.5});
    const Vec3 mid = traj.y[0].head<3>();
    const Vec3 mid_v = traj.y[0].tail<3>();
    const auto second = geodesic_trajectory(m, mid, mid_v, {0.8});
    EXPECT_LT((second.y[0].head<3>() - traj.y[1].head<3>()).norm(), 1e-7);
    EXPECT_LT((exp_map(m, p, Vec3(1.5 * v)) - traj.y[1].head<3>()).norm(), 1e-7);
}

TEST(Transport, EuclideanComponentsConstant) {
    const auto m = Manifold3::euclidean();
    const auto path = coil(m, 1.0, 6.0);
    const auto v = parallel_transport(m, path, Vec3(0.3, -0.4, 1.0));
    for (const auto& x : v) EXPECT_LT((x - Vec3(0.3, -0.4, 1.0)).norm(), 1e-13);
}

TEST(Transport, PreservesGramMatrix) {
    for (const auto& m : {Manifold3::sphere(1.0), Manifold3::hyperbolic(2.0), custom_metric("wavy")}) {
        const auto path = coil(m, 0.4, 10.0);
        const Mat3 g0 = m.metric(path.p.front());
        const auto basis = orthonormal_basis<3>(g0);
        const auto moved = parallel_transport_frame<3>(m, path, basis);
        for (std::size_t i = 0; i < path.size(); i += 50) {
            const Mat3 g = m.metric(path.p[i]);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    EXPECT_NEAR(moved[a][i].dot(g * moved[b][i]), a == b ? 1.0 : 0.0, 1e-6) << m.name();
        }
    }
}

TEST(Transport, StartingInTheMiddleAgrees) {
    const auto m = Manifold3::sphere(1.0);
    const auto path = coil(m, 0.5, 4.0);
    const auto forward = parallel_transport(m, path, Vec3(1, 0, 0));
    const std::size_t mid = path.size() / 2;
    const auto both = parallel_transport(m, path, forward[mid], {}, mid);
    for (std::size_t i = 0; i < path.size(); ++i) EXPECT_LT((both[i] - forward[i]).norm(), 1e-8);
}

TEST(Holonomy, SphericalCap) {
    const auto s2 = Manifold2::sphere(1.0);
    const double colat = pi / 3;
    const auto loop = latitude_circle(s2, pi / 2 - colat);
    const double expected = 2.0 * pi * (1.0 - std::cos(colat));
    EXPECT_NEAR(loop_holonomy(s2, loop), expected, 1e-4);
    EXPECT_NEAR(loop_holonomy(s2, loop, Vec2(1.0, 0.0)), expected, 1e-4);
}

TEST(Holonomy, ShrinksWithArea) {
    const auto s2 = Manifold2::sphere(1.0);
    for (double c : {0.4, 0.2}) {
        const double big = loop_holonomy(s2, latitude_circle(s2, pi / 2 - c));
        const double small = loop_holonomy(s2, latitude_circle(s2, pi / 2 - c / 2));
        const double area_ratio = (1.0 - std::cos(c)) / (1.0 - std::cos(c / 2));
        EXPECT_NEAR(big / small / area_ratio, 1.0, 0.05);
    }
}

TEST(Holonomy, FlatAndDegenerateLoops) {
    const auto e = Manifold3::euclidean();
    CurvePath<3> loop;
    for (double t : uniform_grid(0.0, 2 * pi, 0.01)) {
        loop.s.push_back(t);
        loop.p.emplace_back(std::cos(t), std::sin(t), 0.0);
        loop.T.emplace_back(-std::sin(t), std::cos(t), 0.0);
        loop.dT.emplace_back(-std::cos(t), -std::sin(t), 0.0);
    }
    loop.p.back() = loop.p.front();
    EXPECT_LT(loop_holonomy(e, loop), 1e-6);

    CurvePath<3> point;
    point.s = {0.0};
    point.p = {Vec3(1, 2, 3)};
    point.T = {Vec3(1, 0, 0)};
    EXPECT_EQ(loop_holonomy(e, point), 0.0);

    auto open = loop;
    open.p.back() += Vec3(1e-3, 0, 0);
    try {
        loop_holonomy(e, open);
        FAIL();
    } catch (const GeometryError& err) {
        EXPECT_EQ(err.code(), ErrorCode::NotClosed);
    }
}
