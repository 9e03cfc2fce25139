#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace lss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Label { Stochastic, NonStochastic, Unknown };

/// Generator families of the synthetic corpus.
enum class SeriesKind { Lorenz, Logistic, White, Pink };

std::string to_string(Label label);
/// Short form used in reports: "S", "NS" or "?".
std::string short_name(Label label);
Label label_from_string(std::string_view text);

std::string to_string(SeriesKind kind);
SeriesKind kind_from_string(std::string_view text);
Label label_of(SeriesKind kind);

/// A finite real-valued sequence with its sampling interval.
struct TimeSeries {
    Vector values;
    double dt = 1.0;
    std::string id;
    Label label = Label::Unknown;
    /// Set for synthetic series; empty for external ones.
    std::optional<SeriesKind> kind;
    /// Path for external series.
    std::string source_path;
    /// Number of samples filled by interpolation during resampling.
    std::size_t interpolated_samples = 0;

    Eigen::Index size() const { return values.size(); }
};

/// Throws ValidationError if the series is empty or holds a non-finite value.
void check_finite(const TimeSeries& series);

/// a * x evaluated one output column at a time with a fixed summation order.
/// Identical input columns give bit-identical output columns, which a blocked
/// matrix product does not guarantee.
template <typename DA, typename DX>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
columnwise_product(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DX>& x)
{
    using Scalar = typename DA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            Scalar acc(0);
            for (Eigen::Index c = 0; c < a.cols(); ++c) acc += a(r, c) * x(c, j);
            out(r, j) = acc;
        }
    return out;
}

/// Deterministic 64-bit mix used to derive child seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lss
