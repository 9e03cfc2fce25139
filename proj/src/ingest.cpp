#include "lss/ingest.hpp"

#include "lss/errors.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace lss {

namespace {

bool is_blank_or_comment(const std::string& line)
{
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

double parse_number(const std::string& token, std::size_t line_no)
{
    const char* begin = token.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE)
        throw ParseError(line_no, "cannot parse '" + token + "' as a number");
    if (!std::isfinite(v)) throw ParseError(line_no, "non-finite value '" + token + "'");
    return v;
}

}  // namespace

RawSamples load_series(const std::filesystem::path& path, SampleFormat format)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    const std::size_t columns = format == SampleFormat::PlainColumn ? 1 : 2;
    std::vector<double> times;
    std::vector<double> counts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank_or_comment(line)) continue;
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;) tokens.push_back(tok);
        if (tokens.size() != columns)
            throw ParseError(line_no, "expected " + std::to_string(columns) + " column(s), found " +
                                          std::to_string(tokens.size()));
        if (columns == 1) {
            counts.push_back(parse_number(tokens[0], line_no));
        } else {
            const double t = parse_number(tokens[0], line_no);
            if (!times.empty() && !(t > times.back()))
                throw ParseError(line_no, "timestamps must be strictly increasing");
            times.push_back(t);
            counts.push_back(parse_number(tokens[1], line_no));
        }
    }
    if (counts.empty()) throw ValidationError("no samples in " + path.string());

    RawSamples raw;
    raw.counts = Eigen::Map<const Vector>(counts.data(), static_cast<Eigen::Index>(counts.size()));
    if (columns == 2)
        raw.timestamps = Eigen::Map<const Vector>(times.data(), static_cast<Eigen::Index>(times.size()));
    return raw;
}

TimeSeries resample(const RawSamples& raw, double dt_target)
{
    if (!(dt_target > 0.0)) throw ValidationError("dt_target must be > 0");
    if (!raw.timestamps) throw ValidationError("resampling needs timestamps");
    const Vector& t = *raw.timestamps;
    if (t.size() != raw.counts.size()) throw ValidationError("timestamps and counts differ in length");
    if (t.size() < 2) throw ValidationError("resampling needs at least 2 timestamps");
    for (Eigen::Index i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw ValidationError("timestamps must be strictly increasing");

    const double t0 = t[0];
    const double span = t[t.size() - 1] - t0;
    if (dt_target > span) throw ValidationError("dt_target exceeds the total time span");

    // relative slack keeps samples that sit on a bin edge from falling into the previous bin
    const auto bin_of = [&](double ti) {
        return static_cast<Eigen::Index>(std::floor((ti - t0) / dt_target + 1e-9));
    };
    const Eigen::Index n_bins = bin_of(t[t.size() - 1]) + 1;

    Vector sum = Vector::Zero(n_bins);
    Eigen::VectorXi hits = Eigen::VectorXi::Zero(n_bins);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const Eigen::Index b = bin_of(t[i]);
        sum[b] += raw.counts[i];
        ++hits[b];
    }

    TimeSeries out;
    out.values.resize(n_bins);
    out.dt = dt_target;
    Eigen::Index prev = -1;
    for (Eigen::Index b = 0; b < n_bins; ++b) {
        if (hits[b] == 0) continue;
        out.values[b] = sum[b] / hits[b];
        if (prev >= 0 && b - prev > 1) {
            for (Eigen::Index g = prev + 1; g < b; ++g) {
                const double w = static_cast<double>(g - prev) / static_cast<double>(b - prev);
                out.values[g] = (1.0 - w) * out.values[prev] + w * out.values[b];
                ++out.interpolated_samples;
            }
        }
        prev = b;
    }
    return out;
}

TimeSeries normalize(const TimeSeries& series)
{
    check_finite(series);
    const double lo = series.values.minCoeff();
    const double hi = series.values.maxCoeff();
    if (!(hi > lo)) throw ValidationError("cannot normalize constant series '" + series.id + "'");
    TimeSeries out = series;
    out.values = (series.values.array() - lo) / (hi - lo);
    return out;
}

TimeSeries rank_normalize(const TimeSeries& series)
{
    check_finite(series);
    const Eigen::Index n = series.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return series.values[a] < series.values[b]; });
    if (series.values[order.front()] == series.values[order.back()])
        throw ValidationError("cannot normalize constant series '" + series.id + "'");

    TimeSeries out = series;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t lo = 0; lo < order.size();) {
        std::size_t hi = lo + 1;
        while (hi < order.size() && series.values[order[hi]] == series.values[order[lo]]) ++hi;
        const double mean_rank = 0.5 * static_cast<double>(lo + hi - 1);
        for (std::size_t i = lo; i < hi; ++i) out.values[order[i]] = (mean_rank + 0.5) * inv_n;
        lo = hi;
    }
    return out;
}

std::string to_string(Scaling scaling)
{
    return scaling == Scaling::Rank ? "rank" : "minmax";
}

Scaling scaling_from_string(std::string_view text)
{
    if (text == "rank") return Scaling::Rank;
    if (text == "minmax") return Scaling::MinMax;
    throw ValidationError("unknown normalization '" + std::string(text) + "' (expected rank or minmax)");
}

TimeSeries scale_unit(const TimeSeries& series, Scaling scaling)
{
    return scaling == Scaling::Rank ? rank_normalize(series) : normalize(series);
}

}  // namespace lss
