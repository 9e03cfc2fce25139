#pragma once

#include "lss/errors.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace lss::binio {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

inline void write_i32(std::ostream& out, std::int32_t v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_u32(std::ostream& out, std::uint32_t v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline void write_f64(std::ostream& out, double v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in, const std::string& what)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (in.gcount() != static_cast<std::streamsize>(sizeof v)) throw CorruptFileError("truncated while reading " + what);
    return v;
}

/// Bytes left between the current position and the end of the stream.
inline std::streamoff remaining(std::istream& in)
{
    const auto here = in.tellg();
    in.seekg(0, std::ios::end);
    const auto end = in.tellg();
    in.seekg(here);
    return end - here;
}

}  // namespace lss::binio
