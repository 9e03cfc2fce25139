#include "lss/signature.hpp"

#include "lss/errors.hpp"
#include "lss/windowing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

namespace lss {

Matrix frequency_features(const Matrix& windows, int m)
{
    return spectral_matrix(windows, m) / static_cast<double>(windows.rows());
}

LatentTrace latent_trace(const Autoencoder& ae_td, const Autoencoder& ae_fd, const TimeSeries& series, int n,
                         int m)
{
    check_finite(series);
    if (ae_td.input_dim() != n)
        throw ValidationError("time-domain autoencoder expects D=" + std::to_string(ae_td.input_dim()) +
                              " but N=" + std::to_string(n));
    if (ae_fd.input_dim() != m)
        throw ValidationError("frequency-domain autoencoder expects D=" + std::to_string(ae_fd.input_dim()) +
                              " but M=" + std::to_string(m));
    constexpr double slack = 1e-9;
    if (series.values.minCoeff() < -slack || series.values.maxCoeff() > 1.0 + slack)
        throw ValidationError("series '" + series.id + "' is not normalized to [0, 1]");

    const Matrix windows = window_matrix(series.values, n);
    const Matrix td = encode_columns(ae_td, windows);
    const Matrix fd = encode_columns(ae_fd, frequency_features(windows, m));

    LatentTrace trace;
    trace.points.reserve(static_cast<std::size_t>(windows.cols()));
    for (Eigen::Index c = 0; c < windows.cols(); ++c) trace.points.emplace_back(td(0, c), fd(0, c));
    return trace;
}

LssImage rasterize(const LatentTrace& trace, int resolution)
{
    if (resolution < 2) throw ValidationError("resolution must be >= 2");
    if (trace.points.empty()) throw ValidationError("cannot rasterize an empty trace");
    LssImage img{BinaryGrid::Zero(resolution, resolution)};
    const auto cell = [resolution](double x) {
        const double scaled = std::floor(x * resolution);
        return static_cast<Eigen::Index>(std::clamp(scaled, 0.0, static_cast<double>(resolution - 1)));
    };
    for (const Eigen::Vector2d& p : trace.points) img.grid(cell(1.0 - p.y()), cell(p.x())) = 1;
    return img;
}

void write_image(const LssImage& img, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.grid.cols() << ' ' << img.grid.rows() << "\n255\n";
    for (Eigen::Index r = 0; r < img.grid.rows(); ++r)
        for (Eigen::Index c = 0; c < img.grid.cols(); ++c) out.put(img.grid(r, c) ? '\0' : '\xff');
    if (!out) throw IoError("write failed for " + path.string());
}

namespace {

/// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& where)
{
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    if (tok.empty()) throw ValidationError("malformed PGM header in " + where);
    return tok;
}

int header_int(std::istream& in, const std::string& where)
{
    const std::string tok = header_token(in, where);
    if (!std::all_of(tok.begin(), tok.end(), [](unsigned char ch) { return std::isdigit(ch); }) ||
        tok.size() > 9)
        throw ValidationError("malformed PGM header in " + where + ": '" + tok + "'");
    return std::stoi(tok);
}

}  // namespace

LssImage read_image(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string where = path.string();
    if (header_token(in, where) != "P5") throw ValidationError("malformed PGM header in " + where + ": not P5");
    const int width = header_int(in, where);
    const int height = header_int(in, where);
    // header_token consumed exactly one whitespace byte after maxval
    const int maxval = header_int(in, where);
    if (width < 1 || height < 1 || maxval < 1 || maxval > 255)
        throw ValidationError("unsupported PGM geometry in " + where);
    if (width != height) throw ValidationError("LSS images must be square: " + where);

    LssImage img{BinaryGrid::Zero(height, width)};
    std::string row(static_cast<std::size_t>(width), '\0');
    for (int r = 0; r < height; ++r) {
        in.read(row.data(), width);
        if (in.gcount() != width) throw IoError("truncated pixel data in " + where);
        for (int c = 0; c < width; ++c)
            img.grid(r, c) = static_cast<unsigned char>(row[static_cast<std::size_t>(c)]) * 2 < maxval ? 1 : 0;
    }
    return img;
}

void write_heatmap_pgm(const Matrix& heat, const std::filesystem::path& path)
{
    if (heat.size() == 0) throw ValidationError("empty heat map");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    const double lo = heat.minCoeff();
    const double hi = heat.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    out << "P5\n" << heat.cols() << ' ' << heat.rows() << "\n255\n";
    for (Eigen::Index r = 0; r < heat.rows(); ++r)
        for (Eigen::Index c = 0; c < heat.cols(); ++c)
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround((heat(r, c) - lo) / span * 255.0))));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace lss
