#include "lss/autoencoder.hpp"

#include "lss/binary_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>

namespace lss {

namespace {

constexpr std::array<char, 6> kMagic{'L', 'S', 'S', 'A', 'E', '1'};

void write_row_major(std::ostream& out, const Matrix& m)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) binio::write_f64(out, m(r, c));
}

void read_row_major(std::istream& in, Matrix& m, const char* what)
{
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = binio::read_pod<double>(in, what);
}

std::int64_t payload_doubles(std::int64_t d, std::int64_t s) { return d * (2 * s + 1) + s; }

}  // namespace

Autoencoder init_params(int input_dim, int latent_dim, std::uint64_t seed)
{
    if (input_dim < 1) throw ValidationError("autoencoder input dimension must be >= 1");
    if (latent_dim < 1) throw ValidationError("autoencoder latent dimension must be >= 1");
    Autoencoder p(input_dim, latent_dim);
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < p.W1.size(); ++i) p.W1.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < p.W2.size(); ++i) p.W2.data()[i] = dist(rng);
    return p;
}

std::vector<WindowRef> valid_timestamps(std::span<const Matrix> segments, int k)
{
    std::vector<WindowRef> out;
    for (std::size_t seg = 0; seg < segments.size(); ++seg)
        for (Eigen::Index t = k; t < segments[seg].cols(); ++t) out.push_back({seg, t});
    return out;
}

TrainResult train_from(Autoencoder initial, std::span<const Matrix> segments, const TrainConfig& config)
{
    if (!(config.learning_rate >= 0.0)) throw ValidationError("learning rate must be >= 0");
    if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (config.minibatch_size < 1) throw ValidationError("minibatch size must be >= 1");
    if (config.k < 1) throw ValidationError("K must be >= 1");
    if (segments.empty()) throw ValidationError("no training windows");

    std::vector<WindowRef> stamps = valid_timestamps(segments, config.k);
    if (stamps.size() < static_cast<std::size_t>(config.minibatch_size))
        throw ValidationError("only " + std::to_string(stamps.size()) +
                              " timestamps have enough history for a minibatch of " +
                              std::to_string(config.minibatch_size));

    TrainResult result{std::move(initial), {}};
    std::mt19937_64 rng(config.seed);
    const std::size_t batch = static_cast<std::size_t>(config.minibatch_size);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(stamps.begin(), stamps.end(), rng);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < stamps.size(); start += batch) {
            const std::size_t len = std::min(batch, stamps.size() - start);
            double value = 0.0;
            const Autoencoder g =
                grad<double>(result.params, segments, std::span(stamps).subspan(start, len), config.k, &value);
            if (!std::isfinite(value) || !g.all_finite())
                throw DivergenceError("autoencoder loss became non-finite in epoch " + std::to_string(epoch + 1));
            epoch_sum += value;
            result.params.descend(g, config.learning_rate);
        }
        if (!result.params.all_finite())
            throw DivergenceError("autoencoder parameters became non-finite in epoch " +
                                  std::to_string(epoch + 1));
        result.epoch_loss.push_back(epoch_sum / static_cast<double>(stamps.size()));
    }
    return result;
}

TrainResult train(std::span<const Matrix> segments, const TrainConfig& config)
{
    if (segments.empty()) throw ValidationError("no training windows");
    const int d = static_cast<int>(segments.front().rows());
    for (const Matrix& seg : segments)
        if (seg.rows() != d) throw ValidationError("training segments differ in window dimension");
    return train_from(init_params(d, config.latent_dim, config.seed), segments, config);
}

TrainResult train(const Matrix& windows, const TrainConfig& config)
{
    return train(std::span(&windows, 1), config);
}

void save_params(const Autoencoder& params, const std::filesystem::path& path)
{
    if (!params.consistent()) throw ValidationError("refusing to save inconsistent autoencoder");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(kMagic.data(), kMagic.size());
    binio::write_i32(out, params.input_dim());
    binio::write_i32(out, params.latent_dim());
    write_row_major(out, params.W1);
    write_row_major(out, params.b1);
    write_row_major(out, params.W2);
    write_row_major(out, params.b2);
    if (!out) throw IoError("write failed for " + path.string());
}

Autoencoder load_params(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::array<char, 6> magic{};
    in.read(magic.data(), magic.size());
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) ||
        !std::equal(kMagic.begin(), kMagic.end() - 1, magic.begin()))
        throw CorruptFileError(path.string() + " is not an autoencoder weights file");
    if (magic.back() != kMagic.back())
        throw VersionError(path.string() + " has format version '" + std::string(1, magic.back()) +
                           "', expected '1'");

    const auto d = binio::read_pod<std::int32_t>(in, "input dimension");
    const auto s = binio::read_pod<std::int32_t>(in, "latent dimension");
    if (d < 1 || s < 1) throw CorruptFileError("non-positive dimensions in " + path.string());

    const std::streamoff left = binio::remaining(in);
    const std::int64_t expected = payload_doubles(d, s);
    if (left != expected * 8) {
        const std::int64_t n = left / 8;
        if (left % 8 == 0 && n > s && (n - s) % (2 * s + 1) == 0) {
            throw ShapeMismatchError("header declares D=" + std::to_string(d) + ", s=" + std::to_string(s) +
                                     " but the payload holds matrices for D=" +
                                     std::to_string((n - s) / (2 * s + 1)));
        }
        throw CorruptFileError(path.string() + " has " + std::to_string(left) + " payload bytes, expected " +
                               std::to_string(expected * 8));
    }

    Autoencoder p(d, s);
    Matrix b1(s, 1), b2(d, 1);
    read_row_major(in, p.W1, "W1");
    read_row_major(in, b1, "b1");
    read_row_major(in, p.W2, "W2");
    read_row_major(in, b2, "b2");
    p.b1 = b1;
    p.b2 = b2;
    if (!p.all_finite()) throw CorruptFileError("non-finite weights in " + path.string());
    return p;
}

}  // namespace lss
