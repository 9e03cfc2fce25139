#pragma once

#include "lss/types.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

namespace lss::test {

/// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(std::filesystem::temp_directory_path() /
                ("lss_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++)))
    {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    static int& counter()
    {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_bytes(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> d(lo, hi);
    Vector v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

inline TimeSeries make_series(Vector values, std::string id = "s")
{
    TimeSeries s;
    s.values = std::move(values);
    s.id = std::move(id);
    return s;
}

}  // namespace lss::test
