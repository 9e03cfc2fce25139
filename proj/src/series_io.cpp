#include "lss/series_io.hpp"

#include "lss/errors.hpp"
#include "lss/ingest.hpp"

#include <cstdio>
#include <fstream>

namespace lss {

void write_series(const TimeSeries& series, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[40];
    for (Eigen::Index i = 0; i < series.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g\n", series.values[i]);
        out << buf;
    }
    if (!out) throw IoError("write failed for " + path.string());
}

TimeSeries read_series(const std::filesystem::path& path)
{
    const RawSamples raw = load_series(path, SampleFormat::PlainColumn);
    TimeSeries s;
    s.values = raw.counts;
    s.id = path.stem().string();
    s.source_path = path.string();
    check_finite(s);
    return s;
}

}  // namespace lss
