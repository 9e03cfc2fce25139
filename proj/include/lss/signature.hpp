#pragma once

#include "lss/autoencoder.hpp"
#include "lss/types.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace lss {

inline constexpr int kDefaultResolution = 224;

/// Encoder outputs per window: u from the time-domain encoder (horizontal
/// axis), v from the frequency-domain encoder (vertical axis).
struct LatentTrace {
    std::vector<Eigen::Vector2d> points;
};

using BinaryGrid = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// R x R occupancy grid. Row 0 is the top of the image (v near 1).
struct LssImage {
    BinaryGrid grid;

    int resolution() const { return static_cast<int>(grid.rows()); }
    long set_cells() const { return static_cast<long>(grid.cast<long>().sum()); }
    double occupancy() const
    {
        return grid.size() == 0 ? 0.0 : static_cast<double>(set_cells()) / static_cast<double>(grid.size());
    }
    bool operator==(const LssImage& o) const { return grid == o.grid; }
};

/// Frequency-domain encoder inputs: cropped DFT moduli scaled by 1/N.
Matrix frequency_features(const Matrix& windows, int m);

/// Series values must lie in [0, 1] (1e-9 slack); the first latent
/// component of each encoder is used when s > 1.
LatentTrace latent_trace(const Autoencoder& ae_td, const Autoencoder& ae_fd, const TimeSeries& series, int n,
                         int m);

LssImage rasterize(const LatentTrace& trace, int resolution = kDefaultResolution);

/// Binary PGM (P5, maxval 255); set cells are written black (0) on white.
void write_image(const LssImage& img, const std::filesystem::path& path);
LssImage read_image(const std::filesystem::path& path);

/// 8-bit grayscale PGM of an arbitrary real grid after min-max scaling.
void write_heatmap_pgm(const Matrix& heat, const std::filesystem::path& path);

}  // namespace lss
