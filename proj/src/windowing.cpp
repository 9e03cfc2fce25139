#include "lss/windowing.hpp"

#include "lss/errors.hpp"

namespace lss {

namespace {

void check_window_size(Eigen::Index length, int n)
{
    if (n < 1) throw ValidationError("window size must be >= 1");
    if (length < n)
        throw ValidationError("series of length " + std::to_string(length) +
                              " is shorter than the window size " + std::to_string(n));
}

void check_crop(int n, int m)
{
    if (m < 1 || m > n)
        throw ValidationError("crop length M=" + std::to_string(m) + " must lie in [1, N=" +
                              std::to_string(n) + "]");
}

}  // namespace

std::vector<Window> make_windows(const TimeSeries& series, int n)
{
    check_window_size(series.size(), n);
    std::vector<Window> out;
    out.reserve(static_cast<std::size_t>(series.size() - n + 1));
    for (Eigen::Index t = n - 1; t < series.size(); ++t)
        out.push_back({series.values.segment(t - n + 1, n), t});
    return out;
}

Matrix window_matrix(const Vector& values, int n)
{
    check_window_size(values.size(), n);
    const Eigen::Index count = values.size() - n + 1;
    Matrix out(n, count);
    for (Eigen::Index c = 0; c < count; ++c) out.col(c) = values.segment(c, n);
    return out;
}

SpectralWindow dft_magnitude(const Window& window, int m)
{
    const int n = static_cast<int>(window.values.size());
    if (n < 1) throw ValidationError("empty window");
    check_crop(n, m);
    return {dft_modulus(window.values, m), window.t};
}

Matrix spectral_matrix(const Matrix& windows, int m)
{
    check_crop(static_cast<int>(windows.rows()), m);
    return dft_modulus(windows, m);
}

}  // namespace lss
