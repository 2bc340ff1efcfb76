#pragma once

#include "cangle/manifold.hpp"

#include <random>

namespace cangle::test {

// Small hand-rolled generator set; every test seeds its own engine.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(engine_); }
    int sign() { return uniform(0.0, 1.0) < 0.5 ? -1 : 1; }

    template <int N>
    Vec<N> vec(double scale = 1.0) {
        Vec<N> v;
        for (int i = 0; i < N; ++i) v[i] = uniform(-scale, scale);
        return v;
    }

    template <int N>
    Vec<N> in_ball(double radius) {
        for (;;) {
            Vec<N> v = vec<N>(radius);
            if (v.norm() <= radius) return v;
        }
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// Random interior point of a built-in 3-manifold chart, kept away from the
/// chart boundary.
inline Vec3 interior_point(Gen& gen, const Manifold<3>& m) {
    switch (m.kind()) {
        case MetricKind::sphere: return gen.in_ball<3>(3.0 * m.radius());
        case MetricKind::hyperbolic: return gen.in_ball<3>(0.85 * m.radius());
        case MetricKind::product: {
            Vec3 p;
            if (m.product_factor().kind == MetricKind::sphere) {
                p << gen.uniform(-1.3, 1.3), gen.uniform(-3.0, 3.0), gen.uniform(-5.0, 5.0);
            } else if (m.product_factor().kind == MetricKind::hyperbolic) {
                p.head<2>() = gen.in_ball<2>(0.85 * m.product_factor().radius);
                p[2] = gen.uniform(-5.0, 5.0);
            } else {
                p = gen.vec<3>(5.0);
            }
            return p;
        }
        case MetricKind::custom: return gen.vec<3>(2.0);
        default: return gen.vec<3>(5.0);
    }
}

/// Independent central-difference derivative of the metric (test oracle).
inline std::array<Mat3, 3> metric_partials_oracle(const Manifold<3>& m, const Vec3& p, double h = 1e-4) {
    const auto g = m.metric_function();
    std::array<Mat3, 3> dg;
    for (int l = 0; l < 3; ++l) {
        Vec3 e = Vec3::Zero();
        e[l] = h;
        dg[l] = (-g(p + 2 * e) + 8.0 * g(p + e) - 8.0 * g(p - e) + g(p - 2 * e)) / (12.0 * h);
    }
    return dg;
}

}  // namespace cangle::test
