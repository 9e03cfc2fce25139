#pragma once

#include "lss/types.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

namespace lss {

enum class LorenzObservable { X, Y, Z };

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double x0 = 1.0;
    double y0 = 1.0;
    double z0 = 1.0;
    double dt_integration = 0.01;
    long n_steps = 30000;
    LorenzObservable observable = LorenzObservable::X;
    /// Half-width of the uniform seed-driven perturbation of (x0, y0, z0).
    double seed_jitter = 0.5;
};

/// Lorenz system integrated with classical RK4; one sample per step.
TimeSeries gen_lorenz(const LorenzParams& params, std::uint64_t seed);

/// Iterates x <- r x (1 - x) starting from x0 (which is the first sample).
TimeSeries gen_logistic(double r, double x0, long length);

/// Draws a logistic start value away from the fixed point 0.75 and the
/// super-stable point 0.5.
double draw_logistic_x0(std::uint64_t seed);

TimeSeries gen_white_noise(long length, std::uint64_t seed);

/// 1/f^exponent noise by spectral shaping of white noise. Amplitudes are
/// scaled by f^(-exponent/2), so exponent 1 gives pink noise.
TimeSeries gen_pink_noise(long length, std::uint64_t seed, double exponent = 1.0);

struct ManifestEntry {
    std::string id;
    /// Relative to the manifest's directory.
    std::string path;
    Label label = Label::Unknown;
    std::optional<SeriesKind> kind;
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;

    std::map<Label, std::size_t> counts_per_label() const;
};

/// How many series of each kind to produce, and how long.
struct CorpusSpec {
    std::map<SeriesKind, long> counts{{SeriesKind::Lorenz, 105},
                                      {SeriesKind::Logistic, 105},
                                      {SeriesKind::White, 106},
                                      {SeriesKind::Pink, 105}};
    long length = 30000;
};

/// Parses "lorenz=105,logistic=105,white=106,pink=105"; unspecified kinds get 0.
std::map<SeriesKind, long> parse_counts(const std::string& text);

/// Generates one corpus member. `index` is the position within its kind.
TimeSeries generate_member(SeriesKind kind, long index, long length, std::uint64_t master_seed);

/// Writes every series as `<id>.txt` plus `manifest.json` into output_dir.
DatasetManifest gen_dataset(const std::filesystem::path& output_dir, const CorpusSpec& spec,
                            std::uint64_t master_seed);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace lss
