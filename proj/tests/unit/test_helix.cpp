#include "cangle/helix.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace cangle;
using cangle::test::Gen;

namespace {

std::vector<Manifold3> space_forms() {
    return {Manifold3::euclidean(), Manifold3::sphere(1.0), Manifold3::hyperbolic(1.0),
            Manifold3::product(Manifold2::sphere(1.0))};
}

Frame random_frame(Gen& gen, const Manifold3& m, const Vec3& p) {
    for (;;) {
        try {
            return make_frame(m, p, gen.vec<3>(), gen.vec<3>());
        } catch (const GeometryError&) {
        }
    }
}

Vec3 base_point(const Manifold3& m) {
    return m.kind() == MetricKind::product ? Vec3(0.1, 0.2, 0.0) : Vec3(0.05, -0.02, 0.03);
}

// Sup over the curve of |<T, V> - c| with V transported from sample i0.
double transported_angle_residual(const Manifold3& m, const CurvePath<3>& path, const Vec3& v0, double c,
                                  std::size_t i0) {
    const auto v = parallel_transport<3>(m, path, v0, {}, i0);
    double worst = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
        worst = std::max(worst, std::abs(inner(m, path.p[i], path.T[i], v[i]) - c));
    }
    return worst;
}

// Helix angles; in H3 the drift along the axis must stay inside the ball chart.
double random_theta(Gen& gen, const Manifold3& m) {
    const double spread = m.kind() == MetricKind::hyperbolic ? 0.5 : pi / 2 - 0.2;
    return gen.uniform(pi / 2 - spread, pi / 2 + spread);
}

Profile random_kappa(Gen& gen) {
    const double a = gen.uniform(1.5, 3.0);
    const double b = gen.uniform(0.0, 0.5 * a);
    const double w = gen.uniform(0.2, 2.0);
    return [a, b, w](double s) { return a + b * std::sin(w * s); };
}

}  // namespace

TEST(Synthesis, CircularHelixInEuclideanSpace) {
    const auto m = Manifold3::euclidean();
    const Frame f{Vec3(0, 1, 0) / 1.0, Vec3(-1, 0, 0), Vec3(0, 0, 1)};
    auto syn = synthesize_curve(m, Vec3(1, 0, 0), f, [](double) { return 1.0; }, [](double) { return 0.0; },
                                {0.0, 2 * pi});
    for (std::size_t i = 0; i < syn.path.size(); ++i) {
        const double s = syn.path.s[i];
        EXPECT_LT((syn.path.p[i] - Vec3(std::cos(s), std::sin(s), 0.0)).norm(), 1e-8);
    }
}

TEST(Synthesis, RejectsBadFrameAndCurvature) {
    const auto m = Manifold3::euclidean();
    const Frame skew{Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 0, 1)};
    EXPECT_THROW(synthesize_curve(m, Vec3::Zero(), skew, [](double) { return 1.0; }, [](double) { return 0.0; },
                                  {0.0, 1.0}),
                 GeometryError);
    const Frame left{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, -1)};
    EXPECT_THROW(synthesize_curve(m, Vec3::Zero(), left, [](double) { return 1.0; }, [](double) { return 0.0; },
                                  {0.0, 1.0}),
                 GeometryError);
    const Frame f{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    try {
        synthesize_curve(m, Vec3::Zero(), f, [](double s) { return s - 0.5; }, [](double) { return 0.0; }, {0.0, 1.0});
        FAIL();
    } catch (const GeometryError& e) {
        EXPECT_EQ(e.code(), ErrorCode::KappaVanishes);
    }
}

TEST(GeneralizedHelix, TransportedAxisKeepsItsAngle) {
    Gen gen(31);
    for (const auto& m : space_forms()) {
        for (int n = 0; n < 3; ++n) {
            const Vec3 p = base_point(m);
            const double theta = random_theta(gen, m);
            const auto h = make_generalized_helix(m, p, random_frame(gen, m, p), random_kappa(gen), theta,
                                                  {-5.0, 5.0}, {}, kDefaultSampleSpacing, 0.0);
            const std::size_t i0 = h.path.size() / 2;
            ASSERT_NEAR(h.path.s[i0], 0.0, 1e-9);
            EXPECT_LT(transported_angle_residual(m, h.path, h.axis.V[i0], std::cos(theta), i0), 1e-5) << m.name();
            // The frame formula agrees with the transported vector.
            const auto v = parallel_transport<3>(m, h.path, h.axis.V[i0], {}, i0);
            double gap = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) gap = std::max(gap, norm(m, h.path.p[i], Vec3(v[i] - h.axis.V[i])));
            EXPECT_LT(gap, 1e-5) << m.name();
        }
    }
}

TEST(GeneralizedHelix, PerturbedTorsionBreaksTheAngle) {
    Gen gen(32);
    for (const auto& m : space_forms()) {
      for (int n = 0; n < 3; ++n) {
        const Vec3 p = base_point(m);
        const double theta = random_theta(gen, m);
        const auto kappa = random_kappa(gen);
        const double wobble = 0.5 * std::min(theta, pi - theta);
        const Frame f = random_frame(gen, m, p);
        detail::FrenetIntegration syn;
        try {
            syn = synthesize_curve(m, p, f, kappa, [&](double s) { return kappa(s) / std::tan(theta + wobble * std::sin(s)); },
                                   {-5.0, 5.0}, {}, kDefaultSampleSpacing, 0.0);
        } catch (const GeometryError& e) {
            // The S3 chart misses a cap around the antipode; the draw is skipped.
            ASSERT_EQ(e.code(), ErrorCode::LeftChart);
            continue;
        }
        const Vec3 v0 = std::cos(theta) * f.T + std::sin(theta) * f.B;
        const double r = transported_angle_residual(m, syn.path, v0, std::cos(theta), syn.path.size() / 2);
        EXPECT_GT(r, 1e-2) << m.name() << " theta " << theta << " k0 " << kappa(0.0);
      }
    }
}

TEST(GeneralizedHelix, RightAngleGivesPlaneCurve) {
    // θ = π/2: τ = 0 and V = B is parallel.
    const auto m = Manifold3::sphere(1.0);
    const Vec3 p(0.1, 0.0, 0.0);
    const auto h = make_generalized_helix(m, p, make_frame(m, p, Vec3(1, 0, 0), Vec3(0, 1, 0)),
                                          [](double) { return 1.0; }, pi / 2, {0.0, 5.0});
    for (double t : h.frenet.tau) EXPECT_NEAR(t, 0.0, 1e-12);
    EXPECT_LT(*std::max_element(h.axis.residual.begin(), h.axis.residual.end()), 1e-6);
    EXPECT_THROW(make_generalized_helix(m, p, make_frame(m, p, Vec3(1, 0, 0), Vec3(0, 1, 0)),
                                        [](double) { return 1.0; }, pi, {0.0, 5.0}),
                 GeometryError);
}

TEST(GeneralizedHelix, FrameForAxis) {
    Gen gen(33);
    for (const auto& m : space_forms()) {
        const Vec3 p = base_point(m);
        Vec3 axis = gen.vec<3>();
        axis /= norm(m, p, axis);
        const double theta = gen.uniform(0.2, 2.9);
        const Frame f = frame_for_generalized_axis(m, p, axis, theta);
        EXPECT_LT(norm(m, p, Vec3(std::cos(theta) * f.T + std::sin(theta) * f.B - axis)), 1e-12);
        EXPECT_GT(volume(m.metric(p), f.T, f.N, f.B), 0.0);
    }
}

TEST(SlantHelix, SigmaIsCotTheta) {
    Gen gen(34);
    for (const auto& m : space_forms()) {
        for (int n = 0; n < 3; ++n) {
            SlantHelixSpec spec;
            spec.kappa_bar = random_kappa(gen);
            spec.theta = gen.uniform(0.3, 1.3);
            spec.c0 = gen.uniform(-0.3, 0.3);
            spec.sign = gen.sign();
            spec.p0 = base_point(m);
            spec.frame0 = random_frame(gen, m, spec.p0);
            // Stay where |cot θ K − c0| ≤ 0.9; κ̄ ≤ 4.5 for random_kappa.
            const double w = std::min(2.0, (0.9 - std::abs(spec.c0)) * std::tan(spec.theta) / 4.5);
            spec.u_range = {-w, w};
            const auto h = make_slant_helix(m, spec);
            const double cot = 1.0 / std::tan(spec.theta);
            for (double s : h.frenet.sigma) EXPECT_NEAR(s, spec.sign * cot, 1e-4) << m.name();
            // Transported axis matches the frame formula and makes angle θ with N.
            const std::size_t i0 = static_cast<std::size_t>(std::lround((spec.u0 - h.domain.first) / spec.spacing));
            const auto v = parallel_transport<3>(m, h.path, h.axis.V[i0], {}, i0);
            for (std::size_t i = 0; i < v.size(); ++i) {
                EXPECT_LT(norm(m, h.path.p[i], Vec3(v[i] - h.axis.V[i])), 1e-5);
                EXPECT_NEAR(inner(m, h.path.p[i], h.frenet.N[i], v[i]), std::cos(spec.theta), 1e-5);
            }
        }
    }
}

TEST(SlantHelix, DomainOfUnitCurvatureQuarterAngle) {
    // κ̄ = 1, c0 = 0, θ = π/4: x = K = u, so the domain is |u| < 1 − margin.
    SlantHelixSpec spec;
    spec.kappa_bar = [](double) { return 1.0; };
    spec.u_range = {-5.0, 5.0};
    const auto h = make_slant_helix(Manifold3::euclidean(), spec);
    EXPECT_TRUE(h.stopped_below);
    EXPECT_TRUE(h.stopped_above);
    EXPECT_NEAR(h.domain.first, -(1.0 - kSlantStopMargin), 1e-6);
    EXPECT_NEAR(h.domain.second, 1.0 - kSlantStopMargin, 1e-6);
    const double x = std::abs(h.path.s.back());
    EXPECT_GE(x, 1.0 - 2e-3);
    EXPECT_LE(x, 1.0 - 5e-4);
}

TEST(SlantHelix, SignBranchesHaveOppositeTorsion) {
    const auto m = Manifold3::sphere(1.0);
    SlantHelixSpec spec;
    spec.kappa_bar = [](double s) { return 2.0 + 0.3 * std::cos(s); };
    spec.theta = 0.8;
    spec.c0 = 0.2;
    spec.p0 = Vec3(0.1, 0.1, 0.0);
    spec.frame0 = make_frame(m, spec.p0, Vec3(1, 0, 0), Vec3(0, 1, 0));
    spec.u_range = {-0.2, 0.2};
    const auto plus = make_slant_helix(m, spec);
    spec.sign = -1;
    const auto minus = make_slant_helix(m, spec);
    ASSERT_EQ(plus.frenet.size(), minus.frenet.size());
    for (std::size_t i = 0; i < plus.frenet.size(); ++i) EXPECT_NEAR(plus.frenet.tau[i], -minus.frenet.tau[i], 1e-12);
    const auto cp = classify_curve(plus.frenet);
    const auto cm = classify_curve(minus.frenet);
    EXPECT_EQ(cp.kind, CurveClass::slant_helix);
    EXPECT_EQ(cm.kind, CurveClass::slant_helix);
    EXPECT_NEAR(cp.theta, 0.8, 1e-4);
    EXPECT_NEAR(cm.theta, pi - 0.8, 1e-4);
}

TEST(SlantHelix, AxisResidualOfTheWrongAngle) {
    // With θ' ≠ θ the frame formula is no longer parallel: |∇_T V| = |cos θ' − σ sin θ'| ω.
    const auto m = Manifold3::euclidean();
    SlantHelixSpec spec;
    spec.kappa_bar = [](double) { return 1.0; };
    spec.theta = 0.9;
    spec.u_range = {-0.5, 0.5};
    const auto h = make_slant_helix(m, spec);
    const double other = 0.6;
    const auto ax = axis_field(m, HelixKind::slant, h.frenet, other);
    for (std::size_t i = 0; i < h.frenet.size(); i += 10) {
        const double expected =
            std::abs(std::cos(other) - h.frenet.sigma[i] * std::sin(other)) * h.frenet.omega[i];
        EXPECT_NEAR(ax.residual[i], expected, 1e-6);
    }
}

TEST(SlantHelix, Errors) {
    const auto m = Manifold3::euclidean();
    SlantHelixSpec spec;
    spec.kappa_bar = [](double) { return 1.0; };
    auto code = [&](const SlantHelixSpec& s) -> std::optional<ErrorCode> {
        try {
            make_slant_helix(m, s);
        } catch (const GeometryError& e) {
            return e.code();
        }
        return std::nullopt;
    };
    auto bad = spec;
    bad.c0 = 1.2;
    EXPECT_EQ(code(bad), ErrorCode::BadParams);
    bad = spec;
    bad.theta = pi / 2;
    EXPECT_EQ(code(bad), ErrorCode::BadParams);
    bad = spec;
    bad.c0 = 0.9995;
    EXPECT_EQ(code(bad), ErrorCode::DomainExhausted);
    bad = spec;
    bad.c0 = 0.998;  // x starts at -0.998 and leaves the margin almost at once going down
    bad.u_range = {-1.0, 0.0};
    bad.u0 = 0.0;
    EXPECT_EQ(code(bad), ErrorCode::DomainExhausted);
}

TEST(SlantHelix, FrameForAxis) {
    Gen gen(35);
    for (const auto& m : space_forms()) {
        const Vec3 p = base_point(m);
        Vec3 axis = gen.vec<3>();
        axis /= norm(m, p, axis);
        const double theta = gen.uniform(0.3, 1.2);
        const double c0 = gen.uniform(-0.5, 0.5);
        const int sign = gen.sign();
        SlantHelixSpec spec;
        spec.kappa_bar = [](double) { return 2.0; };
        spec.theta = theta;
        spec.c0 = c0;
        spec.sign = sign;
        spec.p0 = p;
        spec.frame0 = frame_for_slant_axis(m, p, axis, theta, c0, sign);
        spec.u_range = {0.0, 0.1};
        const auto h = make_slant_helix(m, spec);
        EXPECT_LT(norm(m, p, Vec3(h.axis.V.front() - axis)), 1e-7) << m.name();
    }
}

TEST(Classify, GeneralizedSlantGenericGeodesic) {
    const auto m = Manifold3::hyperbolic(1.0);
    const Vec3 p(0.05, 0.0, 0.0);
    const Frame f = make_frame(m, p, Vec3(1, 0, 0), Vec3(0, 1, 0));
    const auto gh = make_generalized_helix(m, p, f, [](double s) { return 2.0 + std::sin(s); }, 1.0, {0.0, 3.0});
    const auto c1 = classify_curve(gh.frenet);
    EXPECT_EQ(c1.kind, CurveClass::generalized_helix);
    EXPECT_NEAR(c1.theta, 1.0, 1e-6);

    SlantHelixSpec spec;
    spec.kappa_bar = [](double s) { return 2.0 + std::sin(s); };
    spec.theta = 0.7;
    spec.p0 = p;
    spec.frame0 = f;
    spec.u_range = {-0.2, 0.2};
    const auto c2 = classify_curve(make_slant_helix(m, spec).frenet);
    EXPECT_EQ(c2.kind, CurveClass::slant_helix);
    EXPECT_NEAR(c2.theta, 0.7, 1e-4);

    auto generic = synthesize_curve(m, p, f, [](double) { return 2.0; }, [](double s) { return s * s; }, {0.0, 1.0});
    EXPECT_EQ(classify_curve(generic.frenet).kind, CurveClass::generic);

    const auto geo = integrate_geodesic(m, p, f.T, 1.0);
    EXPECT_EQ(classify_path(m, geo).kind, CurveClass::geodesic);
}

TEST(Classify, SmallPerturbationBecomesGeneric) {
    const auto m = Manifold3::euclidean();
    const Frame f{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    auto syn = synthesize_curve(m, Vec3::Zero(), f, [](double) { return 1.0; },
                                [](double s) { return 0.5 + 0.05 * std::sin(3 * s); }, {0.0, 3.0});
    EXPECT_EQ(classify_curve(syn.frenet).kind, CurveClass::generic);
}

TEST(KappaProfile, Evaluation) {
    auto make = [](std::string kind, std::vector<double> c) { return KappaProfile{std::move(kind), std::move(c)}.function(); };
    EXPECT_DOUBLE_EQ(make("constant", {2.5})(7.0), 2.5);
    EXPECT_DOUBLE_EQ(make("polynomial", {1.0, 2.0, 3.0})(2.0), 17.0);
    EXPECT_NEAR(make("sinusoidal", {1.0, 0.5, 2.0})(0.3), 1.0 + 0.5 * std::sin(0.6), 1e-15);
    EXPECT_THROW(make("cubic", {1.0}), GeometryError);
    EXPECT_THROW(make("constant", {1.0, 2.0}), GeometryError);
}
