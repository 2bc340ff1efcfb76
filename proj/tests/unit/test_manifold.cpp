#include "cangle/manifold.hpp"
#include "cangle/metrics.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cangle;
using cangle::test::Gen;

namespace {

std::vector<Manifold3> builtins() {
    return {Manifold3::euclidean(),
            Manifold3::sphere(1.0),
            Manifold3::sphere(2.0),
            Manifold3::hyperbolic(1.0),
            Manifold3::hyperbolic(0.7),
            Manifold3::product(Manifold2::sphere(1.0)),
            Manifold3::product(Manifold2::hyperbolic(1.0)),
            Manifold3::product(Manifold2::euclidean())};
}

// Γ from the metric with an independent difference quotient.
Christoffel<3> christoffel_oracle(const Manifold3& m, const Vec3& p) {
    const auto dg = test::metric_partials_oracle(m, p);
    const Mat3 ginv = m.metric(p).inverse();
    Christoffel<3> c = Christoffel<3>::zero();
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int l = 0; l < 3; ++l)
                    c(k, i, j) += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
    return c;
}

}  // namespace

TEST(Metric, EuclideanIsIdentity) {
    EXPECT_TRUE(metric_at(Manifold3::euclidean(), Vec3(0.3, -1, 2)).isApprox(Mat3::Identity()));
}

TEST(Metric, ProductSphereGeographic) {
    const auto m = Manifold3::product(Manifold2::sphere(1.0));
    const Mat3 g = metric_at(m, Vec3(pi / 4, 0, 5));
    const Mat3 expected = Vec3(1.0, std::pow(std::cos(pi / 4), 2), 1.0).asDiagonal();
    EXPECT_LT((g - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Metric, PoincareBallAtOrigin) {
    const Mat3 g = metric_at(Manifold3::hyperbolic(1.0), Vec3::Zero());
    EXPECT_LT((g - 4.0 * Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Metric, Errors) {
    EXPECT_THROW(Manifold3::sphere(0.0), GeometryError);
    EXPECT_THROW(Manifold3::hyperbolic(-1.0), GeometryError);
    try {
        metric_at(Manifold3::hyperbolic(1.0), Vec3(0.97, 0, 0));
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), ErrorCode::OutOfChart);
    }
    try {
        Manifold3::sphere(-2.0);
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadParams);
    }
}

TEST(Metric, SingularMetricDetected) {
    ChartDomain<3> box;
    const auto m = Manifold3::custom("degenerate", [](const Vec3& p) {
        return Mat3(Vec3(1.0, 1.0, p[0] * p[0]).asDiagonal());
    }, box);
    try {
        christoffel_at(m, Vec3(0.0, 0.0, 0.0));
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularMetric);
    }
}

TEST(Metric, SymmetricPositiveDefiniteOnSamples) {
    Gen gen(11);
    for (const auto& m : builtins()) {
        for (int n = 0; n < 50; ++n) {
            const Vec3 p = test::interior_point(gen, m);
            const Mat3 g = metric_at(m, p);
            EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-15);
            EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(g).eigenvalues().minCoeff(), 0.0) << m.name();
        }
    }
}

TEST(Christoffel, EuclideanVanishes) {
    const auto c = christoffel_at(Manifold3::euclidean(), Vec3(1, 2, 3));
    for (int k = 0; k < 3; ++k) EXPECT_EQ(c.gamma[k].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Christoffel, ClosedFormMatchesFiniteDifferences) {
    Gen gen(7);
    for (const auto& m : builtins()) {
        double worst = 0.0;
        for (int n = 0; n < 100; ++n) {
            const Vec3 p = test::interior_point(gen, m);
            const auto c = christoffel_at(m, p);
            const auto o = christoffel_oracle(m, p);
            for (int k = 0; k < 3; ++k) {
                worst = std::max(worst, (c.gamma[k] - o.gamma[k]).cwiseAbs().maxCoeff());
                EXPECT_LT((c.gamma[k] - c.gamma[k].transpose()).cwiseAbs().maxCoeff(), 1e-15);
            }
        }
        EXPECT_LT(worst, 1e-6) << m.name();
    }
}

TEST(Christoffel, MetricCompatibility) {
    Gen gen(8);
    auto ms = builtins();
    ms.push_back(custom_metric("wavy"));
    for (const auto& m : ms) {
        double worst = 0.0;
        for (int n = 0; n < 100; ++n) {
            const Vec3 p = test::interior_point(gen, m);
            const auto dg = test::metric_partials_oracle(m, p);
            const auto c = christoffel_at(m, p);
            const Mat3 g = m.metric(p);
            for (int k = 0; k < 3; ++k)
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        double r = dg[k](i, j);
                        for (int l = 0; l < 3; ++l) r -= c(l, k, i) * g(l, j) + c(l, k, j) * g(i, l);
                        worst = std::max(worst, std::abs(r));
                    }
        }
        EXPECT_LT(worst, 1e-8) << m.name();
    }
}

TEST(Curvature, EuclideanIsZero) {
    EXPECT_EQ(riemann_at(Manifold3::euclidean(), Vec3(1, 0, 0)).max_abs(), 0.0);
    EXPECT_EQ(sectional_curvature(Manifold3::euclidean(), Vec3(1, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)), 0.0);
}

TEST(Curvature, ConstantCurvatureTensor) {
    // In the operator convention used here, R(X,Y)Z = −K(⟨Y,Z⟩X − ⟨X,Z⟩Y).
    Gen gen(9);
    for (const auto& [m, K] : std::vector<std::pair<Manifold3, double>>{
             {Manifold3::sphere(1.0), 1.0}, {Manifold3::sphere(2.0), 0.25},
             {Manifold3::hyperbolic(1.0), -1.0}, {Manifold3::hyperbolic(0.5), -4.0}}) {
        for (int n = 0; n < 20; ++n) {
            const Vec3 p = test::interior_point(gen, m);
            const auto r = riemann_at(m, p);
            const Mat3 g = m.metric(p);
            double worst = 0.0;
            for (int l = 0; l < 3; ++l)
                for (int k = 0; k < 3; ++k)
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) {
                            const double expect = -K * (g(j, k) * (l == i) - g(i, k) * (l == j));
                            worst = std::max(worst, std::abs(r(l, k, i, j) - expect) / (1.0 + g.maxCoeff()));
                        }
            EXPECT_LT(worst, 1e-8) << m.name();
        }
    }
}

TEST(Curvature, SectionalOfSpaceForms) {
    Gen gen(10);
    const std::vector<std::pair<Manifold3, double>> cases{
        {Manifold3::sphere(2.0), 0.25}, {Manifold3::sphere(1.0), 1.0},
        {Manifold3::hyperbolic(1.0), -1.0}, {custom_metric("horo"), -1.0}};
    for (const auto& [m, K] : cases) {
        for (int n = 0; n < 100; ++n) {
            const Vec3 p = test::interior_point(gen, m);
            const Vec3 x = gen.vec<3>(), y = gen.vec<3>();
            EXPECT_NEAR(sectional_curvature(m, p, x, y), K, 1e-5) << m.name();
        }
    }
}

TEST(Curvature, DegeneratePlane) {
    try {
        sectional_curvature(Manifold3::sphere(1.0), Vec3(0.1, 0, 0), Vec3(1, 2, 3), Vec3(2, 4, 6));
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegeneratePlane);
    }
}

TEST(Curvature, SymmetriesAndBianchi) {
    Gen gen(12);
    auto ms = builtins();
    ms.push_back(custom_metric("wavy"));
    for (const auto& m : ms) {
        for (int n = 0; n < 20; ++n) {
            const Vec3 p = test::interior_point(gen, m);
            const auto r = riemann_at(m, p);
            const Vec3 x = gen.vec<3>(), y = gen.vec<3>(), z = gen.vec<3>();
            const double scale = 1.0 + r.max_abs();
            EXPECT_LT((r.apply(x, y, z) + r.apply(y, x, z)).norm() / scale, 1e-12) << m.name();
            const Vec3 bianchi = r.apply(x, y, z) + r.apply(y, z, x) + r.apply(z, x, y);
            EXPECT_LT(bianchi.norm() / scale, 1e-8) << m.name();
        }
    }
}

TEST(Curvature, ProductVerticalSlotVanishes) {
    Gen gen(13);
    for (const auto& m : {Manifold3::product(Manifold2::sphere(1.0)), Manifold3::product(Manifold2::hyperbolic(1.0))}) {
        for (int n = 0; n < 20; ++n) {
            const Vec3 p = test::interior_point(gen, m);
            const auto r = riemann_at(m, p);
            const Mat3 g = m.metric(p);
            const Vec3 dt(0, 0, 1);
            const Vec3 a = gen.vec<3>(), b = gen.vec<3>(), c = gen.vec<3>();
            EXPECT_LT(std::abs(r.lowered(g, dt, a, b, c)), 1e-8);
            EXPECT_LT(std::abs(r.lowered(g, a, dt, b, c)), 1e-8);
            EXPECT_LT(std::abs(r.lowered(g, a, b, dt, c)), 1e-8);
            EXPECT_LT(std::abs(r.lowered(g, a, b, c, dt)), 1e-8);
        }
    }
}

TEST(Curvature, ProductHorizontalPlaneHasFactorCurvature) {
    const auto m = Manifold3::product(Manifold2::sphere(1.0));
    EXPECT_NEAR(sectional_curvature(m, Vec3(0.4, 1, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)), 1.0, 1e-12);
    EXPECT_NEAR(sectional_curvature(m, Vec3(0.4, 1, 0), Vec3(1, 0, 0), Vec3(0, 0, 1)), 0.0, 1e-12);
    EXPECT_NEAR(gaussian_curvature(Manifold2::hyperbolic(2.0), Vec2(0.3, -0.2)), -0.25, 1e-12);
}

TEST(Inner, Basics) {
    const auto e = Manifold3::euclidean();
    EXPECT_EQ(inner(e, Vec3::Zero(), Vec3(1, 0, 0), Vec3(1, 0, 0)), 1.0);
    const auto s = Manifold3::sphere(1.0);
    const Vec3 p(0.2, 0.1, -0.3), x(1, 2, 3);
    EXPECT_NEAR(angle(s, p, x, x), 0.0, 1e-7);
    EXPECT_THROW(angle(s, p, x, Vec3::Zero()), GeometryError);
    const auto prod = Manifold3::product(Manifold2::sphere(1.0));
    Gen gen(3);
    for (int n = 0; n < 10; ++n) {
        EXPECT_EQ(inner(prod, test::interior_point(gen, prod), Vec3(0, 0, 1), Vec3(0, 0, 1)), 1.0);
    }
}

TEST(Inner, MetricCrossProduct) {
    Gen gen(4);
    const auto m = Manifold3::hyperbolic(1.0);
    for (int n = 0; n < 10; ++n) {
        const Vec3 p = test::interior_point(gen, m);
        const Mat3 g = m.metric(p);
        const auto e = [&] {
            Vec3 a = gen.vec<3>(), b = gen.vec<3>();
            a /= std::sqrt(a.dot(g * a));
            b -= b.dot(g * a) * a;
            b /= std::sqrt(b.dot(g * b));
            return std::pair{a, b};
        }();
        const Vec3 c = cross(g, e.first, e.second);
        EXPECT_NEAR(c.dot(g * c), 1.0, 1e-12);
        EXPECT_NEAR(c.dot(g * e.first), 0.0, 1e-12);
        EXPECT_NEAR(volume(g, e.first, e.second, c), 1.0, 1e-12);
    }
}

TEST(Model, StereographicPointsLieOnSphere) {
    Gen gen(5);
    const auto m = Manifold3::sphere(2.0);
    for (int n = 0; n < 10; ++n) {
        EXPECT_NEAR(model_point(m, test::interior_point(gen, m)).norm(), 2.0, 1e-12);
    }
}
