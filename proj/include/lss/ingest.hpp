#pragma once

#include "lss/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace lss {

enum class SampleFormat { PlainColumn, TwoColumnTimeValue };

/// Parsed lightcurve; timestamps are absent for single-column input.
struct RawSamples {
    std::optional<Vector> timestamps;
    Vector counts;
};

/// Blank lines and lines starting with '#' are skipped.
RawSamples load_series(const std::filesystem::path& path, SampleFormat format);

/// Bin-averages counts onto a uniform grid of width dt_target starting at the
/// first timestamp. Empty bins are linearly interpolated from their nearest
/// non-empty neighbours; the number filled is recorded in the result.
TimeSeries resample(const RawSamples& raw, double dt_target);

/// Min-max rescaling of the whole series to [0, 1].
TimeSeries normalize(const TimeSeries& series);

/// Probability-integral transform: each sample becomes (rank + 0.5) / T,
/// ties sharing their mean rank. Output lies in (0, 1) with a uniform
/// marginal, so only the temporal ordering of the series survives.
TimeSeries rank_normalize(const TimeSeries& series);

enum class Scaling { MinMax, Rank };

std::string to_string(Scaling scaling);
Scaling scaling_from_string(std::string_view text);
TimeSeries scale_unit(const TimeSeries& series, Scaling scaling);

}  // namespace lss
