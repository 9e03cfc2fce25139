#include "lss/classifier.hpp"

#include "lss/binary_io.hpp"
#include "lss/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

namespace lss {

int class_index(Label label)
{
    switch (label) {
    case Label::Stochastic: return kStochasticClass;
    case Label::NonStochastic: return kNonStochasticClass;
    case Label::Unknown: break;
    }
    throw ValidationError("label Unknown has no class index");
}

Label class_label(int index)
{
    if (index == kStochasticClass) return Label::Stochastic;
    if (index == kNonStochasticClass) return Label::NonStochastic;
    throw ValidationError("class index out of range");
}

// ---------------------------------------------------------------------------
// model bookkeeping

bool CnnModel::operator==(const CnnModel& o) const
{
    if (!(arch == o.arch) || stages.size() != o.stages.size()) return false;
    for (std::size_t i = 0; i < stages.size(); ++i)
        if (stages[i].weights != o.stages[i].weights || stages[i].bias != o.stages[i].bias) return false;
    return fc_weights == o.fc_weights && fc_bias == o.fc_bias;
}

bool CnnModel::all_finite() const
{
    for (const auto& st : stages)
        if (!st.weights.allFinite() || !st.bias.allFinite()) return false;
    return fc_weights.allFinite() && fc_bias.allFinite();
}

std::size_t CnnModel::size() const
{
    std::size_t n = 0;
    for (const auto& st : stages) n += static_cast<std::size_t>(st.weights.size() + st.bias.size());
    return n + static_cast<std::size_t>(fc_weights.size() + fc_bias.size());
}

double& CnnModel::at(std::size_t i)
{
    for (auto& st : stages) {
        if (i < static_cast<std::size_t>(st.weights.size())) return st.weights.data()[i];
        i -= st.weights.size();
        if (i < static_cast<std::size_t>(st.bias.size())) return st.bias.data()[i];
        i -= st.bias.size();
    }
    if (i < static_cast<std::size_t>(fc_weights.size())) return fc_weights.data()[i];
    i -= fc_weights.size();
    if (i < static_cast<std::size_t>(fc_bias.size())) return fc_bias.data()[i];
    throw ValidationError("parameter index out of range");
}

double CnnModel::at(std::size_t i) const { return const_cast<CnnModel*>(this)->at(i); }

CnnModel CnnModel::zeros_like() const
{
    CnnModel z = *this;
    for (auto& st : z.stages) {
        st.weights.setZero();
        st.bias.setZero();
    }
    z.fc_weights.setZero();
    z.fc_bias.setZero();
    return z;
}

void CnnModel::descend(const CnnModel& g, double step)
{
    for (std::size_t i = 0; i < stages.size(); ++i) {
        stages[i].weights -= step * g.stages[i].weights;
        stages[i].bias -= step * g.stages[i].bias;
    }
    fc_weights -= step * g.fc_weights;
    fc_bias -= step * g.fc_bias;
}

void check_architecture(const CnnArchitecture& arch)
{
    if (arch.channels.empty()) throw ValidationError("architecture needs at least one stage");
    for (int c : arch.channels)
        if (c < 1) throw ValidationError("stage channel counts must be >= 1");
    const int div = 1 << arch.channels.size();
    if (arch.input_size < div || arch.input_size % div != 0)
        throw ValidationError("input size " + std::to_string(arch.input_size) + " is not divisible by " +
                              std::to_string(div));
}

CnnModel zero_model(const CnnArchitecture& arch)
{
    check_architecture(arch);
    CnnModel m;
    m.arch = arch;
    int in = 1;
    for (int out : arch.channels) {
        m.stages.push_back({Matrix::Zero(out, in * 9), Vector::Zero(out)});
        in = out;
    }
    m.fc_weights = Matrix::Zero(kNumClasses, in);
    m.fc_bias = Vector::Zero(kNumClasses);
    return m;
}

CnnModel init_model(const CnnArchitecture& arch, std::uint64_t seed)
{
    CnnModel m = zero_model(arch);
    std::mt19937_64 rng(seed);
    for (auto& st : m.stages) {
        const double bound = std::sqrt(6.0 / static_cast<double>(st.weights.cols()));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index i = 0; i < st.weights.size(); ++i) st.weights.data()[i] = dist(rng);
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.fc_weights.cols()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < m.fc_weights.size(); ++i) m.fc_weights.data()[i] = dist(rng);
    return m;
}

// ---------------------------------------------------------------------------
// layers

namespace {

/// (pixels x in) -> (pixels x in*9) patches for a 3x3 kernel with zero padding.
Matrix im2col(const Matrix& in, int size)
{
    const Eigen::Index channels = in.cols();
    Matrix cols(in.rows(), channels * 9);
    for (Eigen::Index ci = 0; ci < channels; ++ci) {
        const double* src = in.col(ci).data();
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                double* dst = cols.col(ci * 9 + ky * 3 + kx).data();
                for (int y = 0; y < size; ++y) {
                    const int sy = y + ky - 1;
                    double* row = dst + static_cast<std::ptrdiff_t>(y) * size;
                    if (sy < 0 || sy >= size) {
                        std::fill(row, row + size, 0.0);
                        continue;
                    }
                    const double* srow = src + static_cast<std::ptrdiff_t>(sy) * size;
                    for (int x = 0; x < size; ++x) {
                        const int sx = x + kx - 1;
                        row[x] = (sx >= 0 && sx < size) ? srow[sx] : 0.0;
                    }
                }
            }
        }
    }
    return cols;
}

/// Adjoint of im2col.
Matrix col2im(const Matrix& cols, Eigen::Index channels, int size)
{
    Matrix out = Matrix::Zero(cols.rows(), channels);
    for (Eigen::Index ci = 0; ci < channels; ++ci) {
        double* dst = out.col(ci).data();
        for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
                const double* src = cols.col(ci * 9 + ky * 3 + kx).data();
                for (int y = 0; y < size; ++y) {
                    const int sy = y + ky - 1;
                    if (sy < 0 || sy >= size) continue;
                    const double* row = src + static_cast<std::ptrdiff_t>(y) * size;
                    double* drow = dst + static_cast<std::ptrdiff_t>(sy) * size;
                    for (int x = 0; x < size; ++x) {
                        const int sx = x + kx - 1;
                        if (sx >= 0 && sx < size) drow[sx] += row[x];
                    }
                }
            }
        }
    }
    return out;
}

struct StageCache {
    Matrix cols;       // im2col of the stage input
    Matrix activated;  // post-ReLU, pre-pool
    Eigen::MatrixXi argmax;
    int size = 0;      // spatial size of the stage input
};

struct ForwardPass {
    std::vector<StageCache> stages;
    Matrix features;  // final pooled maps
    Vector pooled;    // GAP output
    Eigen::Vector2d logits;
};

void max_pool(const Matrix& in, int size, Matrix& out, Eigen::MatrixXi& argmax)
{
    const int half = size / 2;
    out.resize(static_cast<Eigen::Index>(half) * half, in.cols());
    argmax.resize(out.rows(), out.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c) {
        const double* src = in.col(c).data();
        for (int y = 0; y < half; ++y) {
            for (int x = 0; x < half; ++x) {
                int best = (2 * y) * size + 2 * x;
                for (const int cand : {best + 1, best + size, best + size + 1})
                    if (src[cand] > src[best]) best = cand;
                out(y * half + x, c) = src[best];
                argmax(y * half + x, c) = best;
            }
        }
    }
}

ForwardPass run_forward(const CnnModel& model, const Matrix& input, bool keep_cache)
{
    const int expected = model.arch.input_size;
    if (input.rows() != static_cast<Eigen::Index>(expected) * expected || input.cols() != 1)
        throw ValidationError("network input must be a single " + std::to_string(expected) + "x" +
                              std::to_string(expected) + " channel");
    ForwardPass pass;
    Matrix current = input;
    int size = expected;
    for (const ConvStage& st : model.stages) {
        StageCache cache;
        cache.size = size;
        cache.cols = im2col(current, size);
        cache.activated = (cache.cols * st.weights.transpose()).rowwise() + st.bias.transpose();
        cache.activated = cache.activated.cwiseMax(0.0);
        max_pool(cache.activated, size, current, cache.argmax);
        size /= 2;
        if (keep_cache) pass.stages.push_back(std::move(cache));
    }
    pass.features = std::move(current);
    pass.pooled = pass.features.colwise().mean().transpose();
    pass.logits = model.fc_weights * pass.pooled + model.fc_bias;
    return pass;
}

Eigen::Vector2d softmax(const Eigen::Vector2d& z)
{
    const double m = z.maxCoeff();
    const Eigen::Array2d e = (z.array() - m).exp();
    return (e / e.sum()).matrix();
}

}  // namespace

// ---------------------------------------------------------------------------
// inference

Matrix image_input(const LssImage& img, int size)
{
    const int r = img.resolution();
    if (r < 1 || img.grid.cols() != r) throw ValidationError("LSS image must be square and non-empty");
    Matrix input(static_cast<Eigen::Index>(size) * size, 1);
    for (int y = 0; y < size; ++y) {
        const int sy = static_cast<int>(static_cast<long>(y) * r / size);
        for (int x = 0; x < size; ++x) {
            const int sx = static_cast<int>(static_cast<long>(x) * r / size);
            input(static_cast<Eigen::Index>(y) * size + x, 0) = img.grid(sy, sx) ? 1.0 : 0.0;
        }
    }
    // Per-image standardization: set cells are a tiny fraction of the grid.
    const double p = input.mean();
    if (p > 0.0 && p < 1.0) input = (input.array() - p) / std::sqrt(p * (1.0 - p));
    return input;
}

namespace {

Matrix checked_input(const CnnModel& model, const LssImage& img, const ForwardOptions& opts)
{
    const int size = model.arch.input_size;
    if (img.resolution() != size) {
        if (!opts.allow_resize)
            throw ValidationError("image resolution " + std::to_string(img.resolution()) +
                                  " does not match model input " + std::to_string(size));
        std::cerr << "warning: resizing " << img.resolution() << "x" << img.resolution() << " image to " << size
                  << "x" << size << " (nearest neighbour)\n";
    }
    return image_input(img, size);
}

}  // namespace

Eigen::Vector2d forward_input(const CnnModel& model, const Matrix& input)
{
    return run_forward(model, input, false).logits;
}

Eigen::Vector2d forward(const CnnModel& model, const LssImage& img, const ForwardOptions& opts)
{
    return forward_input(model, checked_input(model, img, opts));
}

Matrix final_features(const CnnModel& model, const Matrix& input)
{
    return run_forward(model, input, false).features;
}

Prediction from_logits(const Eigen::Vector2d& logits)
{
    const Eigen::Vector2d p = softmax(logits);
    Prediction out;
    out.c_s = p[kStochasticClass];
    out.c_ns = p[kNonStochasticClass];
    out.label = logits[kNonStochasticClass] > logits[kStochasticClass] ? Label::NonStochastic : Label::Stochastic;
    return out;
}

Prediction predict(const CnnModel& model, const LssImage& img, const ForwardOptions& opts)
{
    return from_logits(forward(model, img, opts));
}

// ---------------------------------------------------------------------------
// training

double cross_entropy(const CnnModel& model, const std::vector<const Matrix*>& inputs,
                     const std::vector<int>& classes, CnnModel* gradient)
{
    if (inputs.empty() || inputs.size() != classes.size())
        throw ValidationError("cross_entropy needs one class per input");
    if (gradient) *gradient = model.zeros_like();
    const double inv_batch = 1.0 / static_cast<double>(inputs.size());
    double total = 0.0;

    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const int cls = classes[b];
        if (cls < 0 || cls >= kNumClasses) throw ValidationError("class index out of range");
        ForwardPass pass = run_forward(model, *inputs[b], gradient != nullptr);
        const double m = pass.logits.maxCoeff();
        const double lse = m + std::log((pass.logits.array() - m).exp().sum());
        total += lse - pass.logits[cls];
        if (!gradient) continue;

        Eigen::Vector2d d_logits = softmax(pass.logits);
        d_logits[cls] -= 1.0;
        d_logits *= inv_batch;
        gradient->fc_weights += d_logits * pass.pooled.transpose();
        gradient->fc_bias += d_logits;

        // GAP spreads the pooled gradient evenly over every pixel
        const Vector d_pooled = model.fc_weights.transpose() * d_logits;
        Matrix d_out = (d_pooled / static_cast<double>(pass.features.rows()))
                           .transpose()
                           .replicate(pass.features.rows(), 1);

        for (std::size_t si = model.stages.size(); si-- > 0;) {
            const StageCache& cache = pass.stages[si];
            const ConvStage& st = model.stages[si];
            Matrix d_act = Matrix::Zero(cache.activated.rows(), cache.activated.cols());
            for (Eigen::Index c = 0; c < d_out.cols(); ++c)
                for (Eigen::Index p = 0; p < d_out.rows(); ++p) {
                    const int src = cache.argmax(p, c);
                    if (cache.activated(src, c) > 0.0) d_act(src, c) += d_out(p, c);
                }
            gradient->stages[si].weights.noalias() += d_act.transpose() * cache.cols;
            gradient->stages[si].bias += d_act.colwise().sum().transpose();
            if (si > 0) {
                const Matrix d_cols = d_act * st.weights;
                d_out = col2im(d_cols, st.weights.cols() / 9, cache.size);
            }
        }
    }
    return total * inv_batch;
}

void stratified_split(const std::vector<LabeledImage>& items, double val_fraction, std::uint64_t seed,
                      std::vector<std::size_t>& train_idx, std::vector<std::size_t>& heldout_idx)
{
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ValidationError("val_fraction must lie in [0, 1)");
    train_idx.clear();
    heldout_idx.clear();
    std::mt19937_64 rng(seed);
    for (const Label label : {Label::Stochastic, Label::NonStochastic}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < items.size(); ++i)
            if (items[i].label == label) members.push_back(i);
        std::shuffle(members.begin(), members.end(), rng);
        const auto n_val = static_cast<std::size_t>(std::lround(val_fraction * static_cast<double>(members.size())));
        heldout_idx.insert(heldout_idx.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_val));
        train_idx.insert(train_idx.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val), members.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(heldout_idx.begin(), heldout_idx.end());
}

TrainedClassifier train_classifier(const std::vector<LabeledImage>& items, const ClassifierConfig& config)
{
    check_architecture(config.arch);
    if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (config.batch < 1) throw ValidationError("batch must be >= 1");
    if (!(config.learning_rate >= 0.0)) throw ValidationError("learning rate must be >= 0");
    if (!(config.momentum >= 0.0 && config.momentum < 1.0)) throw ValidationError("momentum must be in [0, 1)");
    bool has_s = false;
    bool has_ns = false;
    for (const auto& it : items) {
        if (it.label == Label::Unknown) throw ValidationError("training image '" + it.id + "' has no label");
        has_s |= it.label == Label::Stochastic;
        has_ns |= it.label == Label::NonStochastic;
    }
    if (!has_s || !has_ns) throw ValidationError("training data must contain both labels");

    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> heldout_idx;
    stratified_split(items, config.val_fraction, config.seed, train_idx, heldout_idx);
    if (train_idx.empty()) throw ValidationError("no training images after the held-out split");

    std::vector<Matrix> inputs;
    inputs.reserve(items.size());
    for (const auto& it : items) inputs.push_back(image_input(it.image, config.arch.input_size));

    TrainedClassifier out;
    out.model = init_model(config.arch, config.seed);
    std::mt19937_64 rng(mix_seed(config.seed, 1));
    std::vector<std::size_t> order = train_idx;
    CnnModel velocity = zero_model(config.arch);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
            std::vector<const Matrix*> batch;
            std::vector<int> classes;
            for (std::size_t i = start; i < end; ++i) {
                batch.push_back(&inputs[order[i]]);
                classes.push_back(class_index(items[order[i]].label));
            }
            CnnModel g;
            const double value = cross_entropy(out.model, batch, classes, &g);
            if (!std::isfinite(value) || !g.all_finite())
                throw DivergenceError("classifier loss became non-finite in epoch " + std::to_string(epoch + 1));
            epoch_sum += value * static_cast<double>(end - start);
            if (config.momentum > 0.0) {
                for (std::size_t i = 0; i < velocity.size(); ++i)
                    velocity.at(i) = config.momentum * velocity.at(i) + g.at(i);
                out.model.descend(velocity, config.learning_rate);
            } else {
                out.model.descend(g, config.learning_rate);
            }
        }
        out.metrics.epoch_loss.push_back(epoch_sum / static_cast<double>(order.size()));
    }

    const auto accuracy = [&](const std::vector<std::size_t>& idx) {
        std::size_t hit = 0;
        for (std::size_t i : idx)
            hit += from_logits(forward_input(out.model, inputs[i])).label == items[i].label ? 1 : 0;
        return static_cast<double>(hit) / static_cast<double>(idx.size());
    };
    out.metrics.train_accuracy = accuracy(train_idx);
    out.metrics.heldout_accuracy = heldout_idx.empty() ? out.metrics.train_accuracy : accuracy(heldout_idx);
    for (std::size_t i : train_idx) out.metrics.train_ids.push_back(items[i].id);
    for (std::size_t i : heldout_idx) out.metrics.heldout_ids.push_back(items[i].id);
    return out;
}

// ---------------------------------------------------------------------------
// class activation maps

Matrix upsample_bilinear(const Matrix& heat, int rows, int cols)
{
    if (heat.size() == 0 || rows < 1 || cols < 1) throw ValidationError("bad upsampling request");
    Matrix out(rows, cols);
    const auto coord = [](int i, int n_out, Eigen::Index n_in) {
        return n_out > 1 ? static_cast<double>(i) * static_cast<double>(n_in - 1) / (n_out - 1) : 0.0;
    };
    for (int r = 0; r < rows; ++r) {
        const double fy = coord(r, rows, heat.rows());
        const auto y0 = static_cast<Eigen::Index>(std::floor(fy));
        const Eigen::Index y1 = std::min(y0 + 1, heat.rows() - 1);
        const double wy = fy - static_cast<double>(y0);
        for (int c = 0; c < cols; ++c) {
            const double fx = coord(c, cols, heat.cols());
            const auto x0 = static_cast<Eigen::Index>(std::floor(fx));
            const Eigen::Index x1 = std::min(x0 + 1, heat.cols() - 1);
            const double wx = fx - static_cast<double>(x0);
            out(r, c) = (1 - wy) * ((1 - wx) * heat(y0, x0) + wx * heat(y0, x1)) +
                        wy * ((1 - wx) * heat(y1, x0) + wx * heat(y1, x1));
        }
    }
    return out;
}

CamMap cam_input(const CnnModel& model, const Matrix& input, Label label)
{
    const int cls = class_index(label);
    const Matrix features = final_features(model, input);
    const Vector flat = features * model.fc_weights.row(cls).transpose();
    const int side = model.arch.final_size();
    CamMap out;
    out.label = label;
    out.heat.resize(side, side);
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) out.heat(y, x) = flat[static_cast<Eigen::Index>(y) * side + x];
    out.upsampled = upsample_bilinear(out.heat, model.arch.input_size, model.arch.input_size);
    out.degenerate = model.fc_weights.row(cls).isZero(0.0);
    return out;
}

CamMap cam(const CnnModel& model, const LssImage& img, Label label)
{
    return cam_input(model, checked_input(model, img, {}), label);
}

// ---------------------------------------------------------------------------
// evaluation

EvaluationReport evaluate(const CnnModel& model, const std::vector<LabeledImage>& items)
{
    if (items.empty()) throw ValidationError("cannot evaluate an empty dataset");
    EvaluationReport report;
    std::size_t known = 0;
    std::size_t agree = 0;
    for (const auto& it : items) {
        const Prediction p = predict(model, it.image);
        EvaluationRow row{it.id, p.c_s, p.c_ns, p.label, it.label, p.label == it.label};
        if (it.label != Label::Unknown) {
            ++known;
            agree += row.agree ? 1 : 0;
        }
        report.rows.push_back(std::move(row));
    }
    report.accuracy = known ? static_cast<double>(agree) / static_cast<double>(known) : 0.0;
    return report;
}

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "id,c_s,c_ns,lss_label,reference_label,agree\n";
    char buf[64];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.c_s, r.c_ns);
        out << r.id << ',' << buf << ',' << short_name(r.lss_label) << ',' << short_name(r.reference_label) << ','
            << (r.agree ? "yes" : "no") << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// persistence

namespace {

constexpr std::array<char, 6> kModelMagic{'L', 'S', 'S', 'C', 'N', 'N'};
constexpr std::uint32_t kModelVersion = 1;

void write_rows(std::ostream& out, const Matrix& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) binio::write_f64(out, m(r, c));
}

void read_rows(std::istream& in, Matrix& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = binio::read_pod<double>(in, "model parameters");
}

void read_vec(std::istream& in, Vector& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = binio::read_pod<double>(in, "model parameters");
}

}  // namespace

void save_model(const CnnModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kModelMagic.data(), kModelMagic.size());
    binio::write_u32(out, kModelVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(model.arch.input_size));
    binio::write_u32(out, static_cast<std::uint32_t>(model.arch.channels.size()));
    for (int c : model.arch.channels) binio::write_u32(out, static_cast<std::uint32_t>(c));
    for (const auto& st : model.stages) {
        write_rows(out, st.weights);
        for (Eigen::Index i = 0; i < st.bias.size(); ++i) binio::write_f64(out, st.bias[i]);
    }
    write_rows(out, model.fc_weights);
    for (Eigen::Index i = 0; i < model.fc_bias.size(); ++i) binio::write_f64(out, model.fc_bias[i]);
    if (!out) throw IoError("write failed for " + path.string());
}

CnnModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<char, 6> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) || magic != kModelMagic)
        throw CorruptFileError(path.string() + " is not a classifier model file");
    const auto version = binio::read_pod<std::uint32_t>(in, "version");
    if (version != kModelVersion)
        throw VersionError(path.string() + " has model format version " + std::to_string(version) + ", expected " +
                           std::to_string(kModelVersion));

    CnnArchitecture arch;
    arch.input_size = static_cast<int>(binio::read_pod<std::uint32_t>(in, "input size"));
    const auto n_stages = binio::read_pod<std::uint32_t>(in, "stage count");
    if (n_stages == 0 || n_stages > 16) throw CorruptFileError("implausible stage count in " + path.string());
    arch.channels.clear();
    for (std::uint32_t i = 0; i < n_stages; ++i) {
        const auto c = binio::read_pod<std::uint32_t>(in, "channels");
        if (c == 0 || c > 4096) throw CorruptFileError("implausible channel count in " + path.string());
        arch.channels.push_back(static_cast<int>(c));
    }
    CnnModel model;
    try {
        model = zero_model(arch);
    } catch (const ValidationError& ex) {
        throw CorruptFileError(path.string() + ": " + ex.what());
    }
    const std::streamoff expected = static_cast<std::streamoff>(model.size() * sizeof(double));
    if (binio::remaining(in) != expected)
        throw CorruptFileError(path.string() + " payload size does not match its architecture");
    for (auto& st : model.stages) {
        read_rows(in, st.weights);
        read_vec(in, st.bias);
    }
    read_rows(in, model.fc_weights);
    read_vec(in, model.fc_bias);
    if (!model.all_finite()) throw CorruptFileError("non-finite parameters in " + path.string());
    return model;
}

}  // namespace lss
