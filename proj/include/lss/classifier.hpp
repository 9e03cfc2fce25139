#pragma once

#include "lss/signature.hpp"
#include "lss/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lss {

/// Class indices of the two-way head.
inline constexpr int kStochasticClass = 0;
inline constexpr int kNonStochasticClass = 1;
inline constexpr int kNumClasses = 2;

int class_index(Label label);
Label class_label(int index);

/// Conv stages are 3x3 "same" convolutions with bias, ReLU and 2x2 max-pool.
struct CnnArchitecture {
    int input_size = kDefaultResolution;
    std::vector<int> channels{8, 16, 32, 64};

    int final_size() const { return input_size >> channels.size(); }
    bool operator==(const CnnArchitecture&) const = default;
};

struct ConvStage {
    Matrix weights;  // out x (in * 9), column index = in_channel * 9 + ky * 3 + kx
    Vector bias;     // out
};

/// Small convolutional classifier with a global-average-pooling head.
/// Feature maps are stored pixels x channels with pixel index y * width + x.
struct CnnModel {
    CnnArchitecture arch;
    std::vector<ConvStage> stages;
    Matrix fc_weights;  // 2 x channels.back()
    Vector fc_bias;     // 2

    bool operator==(const CnnModel& o) const;
    bool all_finite() const;

    /// Flat parameter access in a fixed order (stage weights, stage biases, fc).
    std::size_t size() const;
    double& at(std::size_t i);
    double at(std::size_t i) const;

    /// Zero-valued model of the same shape.
    CnnModel zeros_like() const;
    void descend(const CnnModel& gradient, double step);
};

/// Throws ValidationError unless the input size is divisible by 2^stages.
void check_architecture(const CnnArchitecture& arch);

CnnModel zero_model(const CnnArchitecture& arch);

/// He-uniform convolution weights, small uniform head weights, zero biases.
CnnModel init_model(const CnnArchitecture& arch, std::uint64_t seed);

/// Image as the (pixels x 1) network input: set cells 1, others 0, then
/// standardized to zero mean and unit variance over the image (left as 0/1
/// when the grid is empty or full). Nearest-neighbour resampled to `size`
/// when resolutions differ.
Matrix image_input(const LssImage& img, int size);

struct ForwardOptions {
    bool allow_resize = true;
};

/// Logits [z_S, z_NS].
Eigen::Vector2d forward(const CnnModel& model, const LssImage& img, const ForwardOptions& opts = {});
Eigen::Vector2d forward_input(const CnnModel& model, const Matrix& input);

/// Final-stage feature maps (pixels x channels) that feed the GAP head.
Matrix final_features(const CnnModel& model, const Matrix& input);

struct Prediction {
    double c_s = 0.5;
    double c_ns = 0.5;
    Label label = Label::Stochastic;
};

/// Softmax confidences; ties go to Stochastic.
Prediction from_logits(const Eigen::Vector2d& logits);
Prediction predict(const CnnModel& model, const LssImage& img, const ForwardOptions& opts = {});

/// Mean cross-entropy over the batch; fills `gradient` when non-null.
double cross_entropy(const CnnModel& model, const std::vector<const Matrix*>& inputs,
                     const std::vector<int>& classes, CnnModel* gradient);

struct CamMap {
    Matrix heat;       // final-stage resolution
    Matrix upsampled;  // bilinear, input resolution
    Label label = Label::Stochastic;
    /// Set when every head weight for the class is zero.
    bool degenerate = false;
};

/// Class activation map: head weights of the class applied to the final
/// feature maps, before global average pooling.
CamMap cam(const CnnModel& model, const LssImage& img, Label label);
CamMap cam_input(const CnnModel& model, const Matrix& input, Label label);

/// Bilinear resize with align-corners sampling.
Matrix upsample_bilinear(const Matrix& heat, int rows, int cols);

struct LabeledImage {
    std::string id;
    LssImage image;
    Label label = Label::Unknown;
};

struct ClassifierConfig {
    double learning_rate = 0.01;
    /// Heavy-ball coefficient; 0 is plain minibatch SGD.
    double momentum = 0.9;
    int epochs = 60;
    int batch = 16;
    std::uint64_t seed = 0;
    double val_fraction = 0.2;
    CnnArchitecture arch;
};

struct ClassifierMetrics {
    std::vector<double> epoch_loss;
    double train_accuracy = 0.0;
    /// Accuracy on the held-out split (equals train accuracy when none is held out).
    double heldout_accuracy = 0.0;
    std::vector<std::string> train_ids;
    std::vector<std::string> heldout_ids;
};

struct TrainedClassifier {
    CnnModel model;
    ClassifierMetrics metrics;
};

/// Seeded stratified split: per label, round(val_fraction * count) items are held out.
void stratified_split(const std::vector<LabeledImage>& items, double val_fraction, std::uint64_t seed,
                      std::vector<std::size_t>& train_idx, std::vector<std::size_t>& heldout_idx);

/// Minibatch SGD (heavy-ball momentum) on mean cross-entropy; deterministic per seed.
TrainedClassifier train_classifier(const std::vector<LabeledImage>& items, const ClassifierConfig& config);

struct EvaluationRow {
    std::string id;
    double c_s = 0.0;
    double c_ns = 0.0;
    Label lss_label = Label::Unknown;
    Label reference_label = Label::Unknown;
    bool agree = false;
};

struct EvaluationReport {
    std::vector<EvaluationRow> rows;
    /// Fraction of rows with a known reference label that agree with it.
    double accuracy = 0.0;
};

EvaluationReport evaluate(const CnnModel& model, const std::vector<LabeledImage>& items);
void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path);

/// Binary layout: "LSSCNN", u32 version, u32 input size, u32 stage count,
/// u32 channels per stage, then float64 little-endian parameters: each
/// stage's weights (row-major) and bias, then the head weights (row-major)
/// and bias.
void save_model(const CnnModel& model, const std::filesystem::path& path);
CnnModel load_model(const std::filesystem::path& path);

}  // namespace lss
