#pragma once

#include "lss/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lss {

/// Delay-coordinate points, one per row: (X_i, X_{i+tau}, ..., X_{i+(ed-1)tau}).
Matrix delay_embed(const Vector& values, int ed, int tau);

struct CorrelationOptions {
    /// Pairs with |i - j| <= theiler_window are excluded.
    int theiler_window = 10;
};

/// Fraction of admissible pairs closer than r (Euclidean). `indices` gives
/// the time index of each row for the Theiler exclusion; rows are assumed
/// consecutive when it is empty.
double correlation_integral(const Matrix& points, double r, const CorrelationOptions& opts = {},
                            const std::vector<Eigen::Index>& indices = {});

/// Sorted distances of every admissible pair.
std::vector<double> pair_distances(const Matrix& points, const CorrelationOptions& opts = {},
                                   const std::vector<Eigen::Index>& indices = {});

struct CiCurve {
    std::vector<int> ed_values;
    std::vector<double> cd_values;
    bool saturation = false;
    std::optional<double> cd_saturated;
};

struct CiOptions {
    int tau = 1;
    int theiler_window = 10;
    int n_radii = 24;
    /// Scaling region as quantiles of the pair distances. Folded attractors
    /// (the r = 4 logistic map at high ED) only look low-dimensional at the
    /// smallest scales, so the region stays well below the median distance.
    double low_percentile = 0.0001;
    double high_percentile = 0.01;
    /// Embedded points are subsampled to this many before pair counting.
    std::size_t max_points = 5000;
    std::uint64_t seed = 0;
    double saturation_range = 0.4;
};

/// Least-squares slope of log C(r) against log r for the embedding.
double correlation_dimension_at(const Vector& values, int ed, const CiOptions& opts = {});

/// CD for ED = 1..ed_max, plus the saturation verdict: the last three CD
/// values span less than `saturation_range` and average below ed_max / 2.
CiCurve correlation_dimension(const Vector& values, int ed_max, const CiOptions& opts = {});

/// NonStochastic iff the curve saturates.
Label ci_label(const CiCurve& curve);

}  // namespace lss
