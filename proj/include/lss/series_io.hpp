#pragma once

#include "lss/types.hpp"

#include <filesystem>

namespace lss {

/// One value per line, printed with 17 significant digits so reads are exact.
void write_series(const TimeSeries& series, const std::filesystem::path& path);
TimeSeries read_series(const std::filesystem::path& path);

}  // namespace lss
