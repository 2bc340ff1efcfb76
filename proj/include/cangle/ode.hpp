#pragma once

// Dormand–Prince 5(4) integrator with FSAL, step-size control and cubic
// Hermite dense output. Steps are clipped so that every requested output
// abscissa is hit exactly by an accepted step.

#include "cangle/errors.hpp"
#include "cangle/types.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace cangle {

struct IntegratorSettings {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    double max_step = 0.1;
    double initial_step = 1e-3;
    double min_step = 1e-13;
    std::size_t max_steps = 20'000'000;

    void validate() const {
        if (!(rel_tol > 0.0 && rel_tol < 1e-2) || !(abs_tol > 0.0 && abs_tol < 1e-2)) {
            fail(ErrorCode::BadParams, "integrator tolerances must lie in (0, 1e-2)");
        }
        if (!(max_step > 0.0) || !(initial_step > 0.0)) {
            fail(ErrorCode::BadParams, "integrator step sizes must be positive");
        }
    }
};

enum class OdeStop { Completed, Guard, Event };

template <int D>
struct OdeTrajectory {
    using State = Eigen::Matrix<double, D, 1>;
    std::vector<double> t;
    std::vector<State> y;
    std::vector<State> dy;
    OdeStop stop = OdeStop::Completed;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

/// Cubic Hermite interpolation on [t0, t1] from end values and derivatives.
template <class T>
T hermite(double t0, const T& y0, const T& f0, double t1, const T& y1, const T& f1, double t) {
    const double h = t1 - t0;
    const double x = (t - t0) / h;
    const double x2 = x * x;
    const double x3 = x2 * x;
    const double h00 = 2 * x3 - 3 * x2 + 1;
    const double h10 = x3 - 2 * x2 + x;
    const double h01 = -2 * x3 + 3 * x2;
    const double h11 = x3 - x2;
    return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

/// Derivative of the cubic Hermite interpolant.
template <class T>
T hermite_derivative(double t0, const T& y0, const T& f0, double t1, const T& y1, const T& f1,
                     double t) {
    const double h = t1 - t0;
    const double x = (t - t0) / h;
    const double x2 = x * x;
    const double d00 = (6 * x2 - 6 * x) / h;
    const double d10 = 3 * x2 - 4 * x + 1;
    const double d01 = (-6 * x2 + 6 * x) / h;
    const double d11 = 3 * x2 - 2 * x;
    return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1;
}

template <int D>
struct OdeHooks {
    using State = Eigen::Matrix<double, D, 1>;
    /// Returns false when a state is no longer admissible (e.g. left the chart).
    std::function<bool(const State&)> guard;
    /// Integration stops at the first sign change of this function.
    std::function<double(double, const State&)> event;
};

namespace detail {

inline bool is_domain_error(const GeometryError& e) {
    return e.code() == ErrorCode::OutOfChart || e.code() == ErrorCode::SingularMetric;
}

}  // namespace detail

/// Integrates y' = f(t, y) from (t0, y0) through the monotone list of output
/// abscissae (all on the same side of t0; t0 itself may be listed first).
/// A failed guard or a domain error raised by f shrinks the step; once the
/// step cannot shrink further the trajectory ends with OdeStop::Guard.
template <int D, class Rhs>
OdeTrajectory<D> integrate(Rhs&& f, double t0, const Eigen::Matrix<double, D, 1>& y0,
                           const std::vector<double>& outputs, const IntegratorSettings& settings,
                           const OdeHooks<D>& hooks = {}) {
    using State = Eigen::Matrix<double, D, 1>;
    settings.validate();
    OdeTrajectory<D> out;
    if (outputs.empty()) return out;

    // Dormand–Prince coefficients.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double dir = outputs.back() >= t0 ? 1.0 : -1.0;
    double t = t0;
    State y = y0;
    State k1 = f(t, y);
    std::size_t next = 0;
    while (next < outputs.size() && (outputs[next] - t) * dir <= 0.0) {
        out.t.push_back(outputs[next]);
        out.y.push_back(y);
        out.dy.push_back(k1);
        ++next;
    }
    if (next == outputs.size()) return out;

    double h = std::min(settings.initial_step, settings.max_step);
    double e_prev = hooks.event ? hooks.event(t, y) : 0.0;
    // Steps shrunk because of the guard stop once they are this short.
    const double guard_floor = 1e-9 * std::max(1.0, std::abs(outputs.back() - t0));

    std::size_t steps = 0;
    while (next < outputs.size()) {
        if (++steps > settings.max_steps) fail(ErrorCode::StepFailure, "step budget exhausted");
        const double target = outputs[next];
        const double remaining = (target - t) * dir;
        double step = std::min(h, settings.max_step);
        bool clipped = false;
        if (step >= remaining * (1.0 - 1e-12)) {
            step = remaining;
            clipped = true;
        }
        const double hs = step * dir;

        State k2, k3, k4, k5, k6, k7, y_new;
        bool domain_failure = false;
        try {
            k2 = f(t + c2 * hs, State(y + hs * (a21 * k1)));
            k3 = f(t + c3 * hs, State(y + hs * (a31 * k1 + a32 * k2)));
            k4 = f(t + c4 * hs, State(y + hs * (a41 * k1 + a42 * k2 + a43 * k3)));
            k5 = f(t + c5 * hs, State(y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
            k6 = f(t + hs, State(y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
            y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            if (hooks.guard && !hooks.guard(y_new)) {
                domain_failure = true;
            } else {
                k7 = f(t + hs, y_new);
            }
        } catch (const GeometryError& e) {
            if (!detail::is_domain_error(e)) throw;
            domain_failure = true;
        }
        if (domain_failure) {
            ++out.rejected;
            h = step * 0.25;
            if (h < guard_floor) {
                out.stop = OdeStop::Guard;
                return out;
            }
            continue;
        }

        const State err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double acc = 0.0;
        for (int i = 0; i < err.size(); ++i) {
            const double sc = settings.abs_tol + settings.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
            acc += std::pow(err[i] / sc, 2);
        }
        const double err_norm = std::sqrt(acc / static_cast<double>(err.size()));
        if (!std::isfinite(err_norm)) {
            ++out.rejected;
            h = step * 0.1;
            if (h < settings.min_step) fail(ErrorCode::StepFailure, "non-finite state");
            continue;
        }
        const double fac = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
        if (err_norm > 1.0) {
            ++out.rejected;
            h = step * std::max(0.1, fac);
            if (h < settings.min_step) fail(ErrorCode::StepFailure, "step size underflow");
            continue;
        }

        ++out.accepted;
        const double t_new = clipped ? target : t + hs;
        if (hooks.event) {
            const double e_new = hooks.event(t_new, y_new);
            if ((e_prev < 0.0) != (e_new < 0.0)) {
                double lo = t, hi = t_new;
                double e_lo = e_prev;
                State y_mid = y_new;
                for (int it = 0; it < 100 && std::abs(hi - lo) > 1e-15 * std::max(1.0, std::abs(t)); ++it) {
                    const double mid = 0.5 * (lo + hi);
                    y_mid = hermite(t, y, k1, t_new, y_new, k7, mid);
                    const double e_mid = hooks.event(mid, y_mid);
                    if ((e_mid < 0.0) == (e_lo < 0.0)) {
                        lo = mid;
                        e_lo = e_mid;
                    } else {
                        hi = mid;
                    }
                }
                const double te = hi;
                const State ye = hermite(t, y, k1, t_new, y_new, k7, te);
                if (!out.t.empty() && std::abs(te - out.t.back()) < 1e-12) {
                    out.t.pop_back();
                    out.y.pop_back();
                    out.dy.pop_back();
                }
                out.t.push_back(te);
                out.y.push_back(ye);
                out.dy.push_back(f(te, ye));
                out.stop = OdeStop::Event;
                return out;
            }
            e_prev = e_new;
        }

        t = t_new;
        y = y_new;
        k1 = k7;
        if (clipped) {
            out.t.push_back(t);
            out.y.push_back(y);
            out.dy.push_back(k1);
            ++next;
            if (step * fac < h) h = step * fac;
        } else {
            h = step * fac;
        }
    }
    return out;
}

/// Uniform grid a, a + h', ..., b with h' ≤ h chosen so that b is hit exactly.
inline std::vector<double> uniform_grid(double a, double b, double h) {
    if (!(h > 0.0)) fail(ErrorCode::BadParams, "grid spacing must be positive");
    const double len = std::abs(b - a);
    const auto n = static_cast<std::size_t>(std::ceil(len / h - 1e-9)) + 1;
    std::vector<double> g(std::max<std::size_t>(n, 2));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(g.size() - 1);
    }
    g.back() = b;
    return g;
}

}  // namespace cangle
