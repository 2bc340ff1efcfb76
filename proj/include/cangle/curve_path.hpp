#pragma once

#include "cangle/errors.hpp"
#include "cangle/ode.hpp"
#include "cangle/types.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace cangle {

enum class PathStatus { Complete, LeftChart, LeftPatch, Stopped };

inline std::string_view to_string(PathStatus s) {
    switch (s) {
        case PathStatus::Complete: return "complete";
        case PathStatus::LeftChart: return "left-chart";
        case PathStatus::LeftPatch: return "left-patch";
        case PathStatus::Stopped: return "stopped";
    }
    return "unknown";
}

/// Discretized curve in chart coordinates, parametrized by arc length.
/// dT, when present, holds the coordinate acceleration d²x/ds² at each
/// sample and is used for Hermite interpolation of T.
template <int N>
struct CurvePath {
    std::vector<double> s;
    std::vector<Vec<N>> p;
    std::vector<Vec<N>> T;
    std::vector<Vec<N>> dT;
    std::map<std::string, std::vector<Vec<N>>> fields;
    PathStatus status = PathStatus::Complete;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    std::size_t size() const { return s.size(); }
    bool empty() const { return s.empty(); }
    double length() const { return s.empty() ? 0.0 : s.back() - s.front(); }
    bool has_acceleration() const { return !dT.empty() && dT.size() == s.size(); }

    /// Index i with s[i] ≤ x ≤ s[i+1] (clamped to the valid range).
    std::size_t segment(double x) const {
        if (s.size() < 2) fail(ErrorCode::BadParams, "path needs at least two samples");
        auto it = std::upper_bound(s.begin(), s.end(), x);
        std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
        return std::min(i, s.size() - 2);
    }

    Vec<N> position(double x) const {
        const std::size_t i = segment(x);
        return hermite(s[i], p[i], T[i], s[i + 1], p[i + 1], T[i + 1], x);
    }

    Vec<N> tangent(double x) const {
        const std::size_t i = segment(x);
        if (has_acceleration()) return hermite(s[i], T[i], dT[i], s[i + 1], T[i + 1], dT[i + 1], x);
        return lagrange4(T, i, x);
    }

    Vec<N> acceleration(double x) const {
        const std::size_t i = segment(x);
        if (has_acceleration()) {
            return hermite_derivative(s[i], T[i], dT[i], s[i + 1], T[i + 1], dT[i + 1], x);
        }
        return hermite_derivative(s[i], p[i], T[i], s[i + 1], p[i + 1], T[i + 1], x);
    }

    /// Checks the unit-speed contract; returns the largest deviation.
    template <class MetricAt>
    double speed_defect(MetricAt&& metric) const {
        double worst = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double sp = std::sqrt(T[i].dot(metric(p[i]) * T[i]));
            worst = std::max(worst, std::abs(sp - 1.0));
        }
        return worst;
    }

    /// Copy restricted to samples [first, last].
    CurvePath slice(std::size_t first, std::size_t last) const {
        CurvePath out;
        out.status = status;
        for (std::size_t i = first; i <= last && i < s.size(); ++i) {
            out.s.push_back(s[i]);
            out.p.push_back(p[i]);
            out.T.push_back(T[i]);
            if (has_acceleration()) out.dT.push_back(dT[i]);
        }
        for (const auto& [name, values] : fields) {
            auto& dst = out.fields[name];
            for (std::size_t i = first; i <= last && i < values.size(); ++i) dst.push_back(values[i]);
        }
        return out;
    }

private:
    // Four-point Lagrange interpolation of a sampled vector field.
    static Vec<N> lagrange4(const std::vector<Vec<N>>& v, std::size_t i, double x, const std::vector<double>& s) {
        const std::size_t n = s.size();
        std::size_t b = i >= 1 ? i - 1 : 0;
        if (n >= 4 && b + 3 >= n) b = n - 4;
        const std::size_t m = std::min<std::size_t>(4, n);
        Vec<N> out = Vec<N>::Zero();
        for (std::size_t a = b; a < b + m; ++a) {
            double w = 1.0;
            for (std::size_t c = b; c < b + m; ++c)
                if (c != a) w *= (x - s[c]) / (s[a] - s[c]);
            out += w * v[a];
        }
        return out;
    }

    Vec<N> lagrange4(const std::vector<Vec<N>>& v, std::size_t i, double x) const { return lagrange4(v, i, x, s); }

public:
    /// Interpolates an attached field at arc length x.
    Vec<N> field(const std::string& name, double x) const {
        auto it = fields.find(name);
        if (it == fields.end()) fail(ErrorCode::BadParams, "no field named " + name);
        return lagrange4(it->second, segment(x), x);
    }
};

/// Builds a path from an ODE trajectory whose state starts with (x, ẋ).
template <int N, int D>
CurvePath<N> path_from_trajectory(const OdeTrajectory<D>& traj) {
    CurvePath<N> path;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        path.s.push_back(traj.t[i]);
        path.p.push_back(traj.y[i].template head<N>());
        path.T.push_back(traj.y[i].template segment<N>(N));
        path.dT.push_back(traj.dy[i].template segment<N>(N));
    }
    path.accepted_steps = traj.accepted;
    path.rejected_steps = traj.rejected;
    if (traj.stop == OdeStop::Guard) path.status = PathStatus::LeftChart;
    if (traj.stop == OdeStop::Event) path.status = PathStatus::Stopped;
    return path;
}

}  // namespace cangle
