#pragma once

#include "lss/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <vector>

namespace lss {

inline constexpr int kDefaultWindow = 10;

/// N consecutive samples ending at index t of the parent series.
struct Window {
    Vector values;
    Eigen::Index t = 0;
};

/// Moduli of the lowest M DFT bins of a window.
struct SpectralWindow {
    Vector magnitudes;
    Eigen::Index t = 0;
};

/// Stride-1 windows of length n, end indices n-1 .. T-1.
std::vector<Window> make_windows(const TimeSeries& series, int n);

/// Same windows laid out as the columns of an n x (T-n+1) matrix.
Matrix window_matrix(const Vector& values, int n);

/// Real and imaginary parts of the first m rows of the n-point DFT matrix,
/// stacked as a 2m x n operator: rows [0, m) give Re, rows [m, 2m) give Im.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dft_operator(int n, int m)
{
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> op(2 * m, n);
    for (int k = 0; k < m; ++k) {
        for (int j = 0; j < n; ++j) {
            // reduce k*j mod n first so the angle stays in [0, 2pi)
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / n;
            op(k, j) = static_cast<Scalar>(std::cos(angle));
            op(m + k, j) = static_cast<Scalar>(-std::sin(angle));
        }
    }
    return op;
}

/// Column-wise |DFT| cropped to the lowest m bins. Input columns are windows.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
dft_modulus(const Eigen::MatrixBase<Derived>& windows, int m)
{
    using Scalar = typename Derived::Scalar;
    const int n = static_cast<int>(windows.rows());
    const auto op = dft_operator<Scalar>(n, m);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> parts = columnwise_product(op, windows);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(m, parts.cols());
    for (Eigen::Index j = 0; j < parts.cols(); ++j)
        for (int k = 0; k < m; ++k) {
            using std::sqrt;
            const Scalar re = parts(k, j), im = parts(m + k, j);
            out(k, j) = sqrt(re * re + im * im);
        }
    return out;
}

/// Throws ValidationError when m is not in [1, n].
SpectralWindow dft_magnitude(const Window& window, int m);

/// dft_modulus over a whole window matrix with the same validation as dft_magnitude.
Matrix spectral_matrix(const Matrix& windows, int m);

}  // namespace lss
