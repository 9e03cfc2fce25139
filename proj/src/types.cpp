#include "lss/types.hpp"

#include "lss/errors.hpp"

#include <cmath>

namespace lss {

std::string to_string(Label label)
{
    switch (label) {
    case Label::Stochastic: return "Stochastic";
    case Label::NonStochastic: return "NonStochastic";
    case Label::Unknown: break;
    }
    return "Unknown";
}

std::string short_name(Label label)
{
    switch (label) {
    case Label::Stochastic: return "S";
    case Label::NonStochastic: return "NS";
    case Label::Unknown: break;
    }
    return "?";
}

Label label_from_string(std::string_view text)
{
    if (text == "Stochastic" || text == "S") return Label::Stochastic;
    if (text == "NonStochastic" || text == "NS") return Label::NonStochastic;
    if (text == "Unknown" || text == "?") return Label::Unknown;
    throw ValidationError("unknown label '" + std::string(text) + "'");
}

std::string to_string(SeriesKind kind)
{
    switch (kind) {
    case SeriesKind::Lorenz: return "lorenz";
    case SeriesKind::Logistic: return "logistic";
    case SeriesKind::White: return "white";
    case SeriesKind::Pink: return "pink";
    }
    return "?";
}

SeriesKind kind_from_string(std::string_view text)
{
    if (text == "lorenz") return SeriesKind::Lorenz;
    if (text == "logistic") return SeriesKind::Logistic;
    if (text == "white") return SeriesKind::White;
    if (text == "pink") return SeriesKind::Pink;
    throw ValidationError("unknown generator kind '" + std::string(text) + "'");
}

Label label_of(SeriesKind kind)
{
    return (kind == SeriesKind::Lorenz || kind == SeriesKind::Logistic) ? Label::NonStochastic
                                                                        : Label::Stochastic;
}

void check_finite(const TimeSeries& series)
{
    if (series.values.size() == 0) throw ValidationError("series '" + series.id + "' is empty");
    if (!series.values.allFinite())
        throw ValidationError("series '" + series.id + "' contains non-finite values");
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer over the combined state
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace lss
