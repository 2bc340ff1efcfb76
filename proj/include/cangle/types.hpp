#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <type_traits>
#include <vector>
#include <algorithm>

namespace cangle {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

template <int N>
using Mat = Eigen::Matrix<double, N, N>;

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Mat2 = Mat<2>;
using Mat3 = Mat<3>;

inline constexpr double pi = std::numbers::pi;

/// Vector parameter type that does not take part in template deduction, so
/// Eigen expressions such as Vec3::Zero() can be passed directly.
template <int N>
using VecArg = std::type_identity_t<Vec<N>>;

/// Γᵏ_ij stored as one symmetric matrix per upper index: gamma[k](i, j).
template <int N>
struct Christoffel {
    std::array<Mat<N>, N> gamma;

    static Christoffel zero() {
        Christoffel c;
        for (auto& m : c.gamma) m.setZero();
        return c;
    }

    /// Γ(X, Y)ᵏ = Γᵏ_ij Xⁱ Yʲ
    Vec<N> contract(const Vec<N>& x, const Vec<N>& y) const {
        Vec<N> out;
        for (int k = 0; k < N; ++k) out[k] = x.dot(gamma[k] * y);
        return out;
    }

    double operator()(int k, int i, int j) const { return gamma[k](i, j); }
    double& operator()(int k, int i, int j) { return gamma[k](i, j); }
};

/// ∂_l Γᵏ_ij stored as d[l].gamma[k](i, j).
template <int N>
struct ChristoffelDerivative {
    std::array<Christoffel<N>, N> d;

    static ChristoffelDerivative zero() {
        ChristoffelDerivative out;
        for (auto& c : out.d) c = Christoffel<N>::zero();
        return out;
    }
};

// Fourth-order finite-difference stencils on a uniform grid.

inline double central_diff4(double fm2, double fm1, double fp1, double fp2, double h) {
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

template <class T>
T central_diff4(const T& fm2, const T& fm1, const T& fp1, const T& fp2, double h) {
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

/// Finite-difference weights for the m-th derivative at z from samples at
/// the abscissae x (Fornberg's recursion).
inline std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(x.size(), std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) w[j] = c[j][m];
    return w;
}

/// Derivative of order `deriv` of uniformly spaced samples at index i using a
/// window of `width` consecutive samples, centred where possible and shifted
/// towards the interior near the ends.
template <class T, class Get>
T derivative_at(std::size_t n, std::size_t i, double h, int deriv, std::size_t width, Get&& f) {
    width = std::min(width, n);
    std::size_t first = i >= width / 2 ? i - width / 2 : 0;
    if (first + width > n) first = n - width;
    std::vector<double> x(width);
    for (std::size_t j = 0; j < width; ++j) x[j] = static_cast<double>(first + j) - static_cast<double>(i);
    const auto w = fd_weights(0.0, x, deriv);
    T out = w[0] * f(first);
    for (std::size_t j = 1; j < width; ++j) out += w[j] * f(first + j);
    return out / std::pow(h, deriv);
}

/// First derivative, fourth order (five-point windows). Needs 5 samples.
template <class T, class Get>
T derivative4_at(std::size_t n, std::size_t i, double h, Get&& f) {
    return derivative_at<T>(n, i, h, 1, 5, f);
}

/// Second derivative, fourth order in the interior (six-point windows at the
/// ends). Needs 6 samples.
template <class T, class Get>
T second_derivative4_at(std::size_t n, std::size_t i, double h, Get&& f) {
    if (i >= 2 && i + 2 < n) return derivative_at<T>(n, i, h, 2, 5, f);
    std::size_t first = i < 2 ? 0 : n - 6;
    std::vector<double> x(6);
    for (std::size_t j = 0; j < 6; ++j) x[j] = static_cast<double>(first + j) - static_cast<double>(i);
    const auto w = fd_weights(0.0, x, 2);
    T out = w[0] * f(first);
    for (std::size_t j = 1; j < 6; ++j) out += w[j] * f(first + j);
    return out / (h * h);
}

}  // namespace cangle
