#pragma once

#include "lss/autoencoder.hpp"
#include "lss/classifier.hpp"
#include "lss/ingest.hpp"
#include "lss/signature.hpp"
#include "lss/synthgen.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace lss {

enum class Domain { Time, Frequency };

struct AutoencoderStageConfig {
    int epochs = 100;
    double learning_rate = 0.005;
    int minibatch = 64;
    /// Series of each kind pooled for training; 0 uses the whole corpus.
    int series_per_kind = 0;
};

struct ClassifierStageConfig {
    int epochs = 60;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch = 16;
    double val_fraction = 0.2;
};

/// End-to-end configuration. Defaults follow the module defaults; see desk_scale().
struct PipelineConfig {
    std::filesystem::path workspace = "lss_work";
    std::uint64_t seed = 0;
    long series_length = 30000;
    std::map<SeriesKind, long> counts = CorpusSpec{}.counts;
    int window = 10;
    int crop = 10;
    int k = 3;
    int latent_dim = 1;
    int resolution = kDefaultResolution;
    /// Per-series scaling to the unit interval ahead of windowing.
    Scaling normalization = Scaling::Rank;
    AutoencoderStageConfig autoencoder;
    ClassifierStageConfig classifier;

    /// Shorter series and 25 series per kind; N, M, K, s and R unchanged.
    static PipelineConfig desk_scale();
};

nlohmann::json to_json(const PipelineConfig& config);
/// Missing keys keep their defaults.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig load_config(const std::filesystem::path& path);

/// A failure inside run_pipeline, tagged with the stage that raised it.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& cause)
        : Error(cause.kind(), "stage '" + stage + "' failed: " + cause.what()), stage_(std::move(stage))
    {
    }
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct PipelineArtifacts {
    std::filesystem::path series_dir;
    std::filesystem::path ae_td;
    std::filesystem::path ae_fd;
    std::filesystem::path images_dir;
    std::filesystem::path model;
    std::filesystem::path report_csv;
    std::filesystem::path summary_json;
};

struct PipelineResult {
    PipelineArtifacts artifacts;
    EvaluationReport report;
    ClassifierMetrics metrics;
};

PipelineArtifacts artifact_paths(const std::filesystem::path& workspace);

/// Training segments for one domain: per series, normalize, window, and for
/// the frequency domain take scaled DFT moduli.
std::vector<Matrix> training_segments(const DatasetManifest& manifest, const std::filesystem::path& series_dir,
                                      Domain domain, int n, int m, Scaling scaling, int series_per_kind = 0);

/// Window features of an already-normalized series for one domain.
Matrix domain_features(const TimeSeries& normalized, Domain domain, int n, int m);

/// normalize -> latent trace -> rasterize.
LssImage series_to_image(const Autoencoder& ae_td, const Autoencoder& ae_fd, const TimeSeries& series, int n, int m,
                         int resolution, Scaling scaling);

/// Rasterizes every manifest entry into images_dir/<id>.pgm and writes an
/// image manifest (same schema, paths pointing at the images).
DatasetManifest rasterize_corpus(const DatasetManifest& manifest, const std::filesystem::path& series_dir,
                                 const Autoencoder& ae_td, const Autoencoder& ae_fd,
                                 const std::filesystem::path& images_dir, int n, int m, int resolution,
                                 Scaling scaling);

std::vector<LabeledImage> load_labeled_images(const DatasetManifest& manifest, const std::filesystem::path& dir);

/// generate -> train-ae(TD) -> train-ae(FD) -> rasterize -> train-clf -> evaluate.
/// Writes report.csv (held-out rows) and summary.json under the workspace.
PipelineResult run_pipeline(const PipelineConfig& config);

struct ClassifyResult {
    Prediction prediction;
    LssImage image;
    std::optional<CamMap> cam;
};

/// ingest -> normalize -> trace -> rasterize -> predict, optionally with the
/// CAM of the predicted class.
struct ClassifyOptions {
    int n = 10;
    int m = 10;
    Scaling scaling = Scaling::Rank;
    bool with_cam = false;
};

ClassifyResult classify_series(const TimeSeries& series, const Autoencoder& ae_td, const Autoencoder& ae_fd,
                               const CnnModel& model, const ClassifyOptions& opts = {});

ClassifyResult classify_one(const std::filesystem::path& series_path, const std::filesystem::path& ae_td_path,
                            const std::filesystem::path& ae_fd_path, const std::filesystem::path& model_path,
                            const ClassifyOptions& opts = {});

/// CAM values as CSV, one grid row per line.
void write_cam_csv(const Matrix& heat, const std::filesystem::path& path);

}  // namespace lss
