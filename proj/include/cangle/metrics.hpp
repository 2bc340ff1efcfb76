#pragma once

// Named registry of custom test metrics. Connection and curvature of these
// are computed by finite differences.

#include "cangle/manifold.hpp"

#include <string>
#include <vector>

namespace cangle {

/// Names accepted by custom_metric().
inline std::vector<std::string> custom_metric_names() { return {"horo", "wavy"}; }

/// horo: dx² + e^{2x}(dy² + dz²), hyperbolic space of curvature −1 in
///       horospherical coordinates.
/// wavy: δ + w wᵀ with w = 0.3 (sin y, sin z, sin x), a generic metric.
inline Manifold<3> custom_metric(const std::string& name) {
    ChartDomain<3> box;
    box.lo = Vec3::Constant(-4.0);
    box.hi = Vec3::Constant(4.0);
    if (name == "horo") {
        return Manifold<3>::custom("custom:horo", [](const Vec3& p) {
            const double e = std::exp(2.0 * p[0]);
            return Mat3(Vec3(1.0, e, e).asDiagonal());
        }, box);
    }
    if (name == "wavy") {
        return Manifold<3>::custom("custom:wavy", [](const Vec3& p) {
            const Vec3 w = 0.3 * Vec3(std::sin(p[1]), std::sin(p[2]), std::sin(p[0]));
            return Mat3(Mat3::Identity() + w * w.transpose());
        }, box);
    }
    fail(ErrorCode::BadParams, "unknown custom metric '" + name + "'");
}

}  // namespace cangle
