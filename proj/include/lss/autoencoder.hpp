#pragma once

#include "lss/errors.hpp"
#include "lss/types.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lss {

/// Single-hidden-layer autoencoder with logistic activations on both sides:
///   s = sigmoid(W1 v + b1),  v~ = sigmoid(W2 s + b2).
template <typename Scalar>
struct AutoencoderParams {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Mat W1;  // s x D
    Vec b1;  // s
    Mat W2;  // D x s
    Vec b2;  // D

    AutoencoderParams() = default;
    AutoencoderParams(int input_dim, int latent_dim)
        : W1(Mat::Zero(latent_dim, input_dim)),
          b1(Vec::Zero(latent_dim)),
          W2(Mat::Zero(input_dim, latent_dim)),
          b2(Vec::Zero(input_dim))
    {
    }

    int input_dim() const { return static_cast<int>(W1.cols()); }
    int latent_dim() const { return static_cast<int>(W1.rows()); }

    bool consistent() const
    {
        return W1.rows() == b1.size() && W2.rows() == b2.size() && W2.rows() == W1.cols() &&
               W2.cols() == W1.rows() && W1.rows() > 0 && W1.cols() > 0;
    }

    bool all_finite() const
    {
        return W1.allFinite() && b1.allFinite() && W2.allFinite() && b2.allFinite();
    }

    AutoencoderParams& operator+=(const AutoencoderParams& o)
    {
        W1 += o.W1;
        b1 += o.b1;
        W2 += o.W2;
        b2 += o.b2;
        return *this;
    }

    /// this <- this - step * o
    void descend(const AutoencoderParams& o, Scalar step)
    {
        W1 -= step * o.W1;
        b1 -= step * o.b1;
        W2 -= step * o.W2;
        b2 -= step * o.b2;
    }

    bool operator==(const AutoencoderParams& o) const
    {
        return W1 == o.W1 && b1 == o.b1 && W2 == o.W2 && b2 == o.b2;
    }

    /// Flat view used by finite-difference checks: W1, b1, W2, b2 in storage order.
    std::size_t size() const
    {
        return static_cast<std::size_t>(W1.size() + b1.size() + W2.size() + b2.size());
    }
    Scalar& at(std::size_t i)
    {
        if (i < static_cast<std::size_t>(W1.size())) return W1.data()[i];
        i -= W1.size();
        if (i < static_cast<std::size_t>(b1.size())) return b1.data()[i];
        i -= b1.size();
        if (i < static_cast<std::size_t>(W2.size())) return W2.data()[i];
        i -= W2.size();
        return b2.data()[i];
    }
};

using Autoencoder = AutoencoderParams<double>;

/// Element-wise logistic through the scalar exp. The packet exp can round
/// differently from the scalar one, so equal inputs could otherwise map to
/// different outputs depending on their position.
template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& a)
{
    using Scalar = typename Derived::Scalar;
    return a.unaryExpr([](Scalar v) {
        using std::exp;
        return Scalar(1) / (Scalar(1) + exp(-v));
    });
}

/// Encodes every column of `inputs` (D x n) to latents (s x n).
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
encode_columns(const AutoencoderParams<Scalar>& p, const Eigen::MatrixBase<Derived>& inputs)
{
    if (inputs.rows() != p.input_dim())
        throw ValidationError("encoder expects dimension " + std::to_string(p.input_dim()) + ", got " +
                              std::to_string(inputs.rows()));
    return sigmoid((columnwise_product(p.W1, inputs).colwise() + p.b1).array()).matrix();
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
decode_columns(const AutoencoderParams<Scalar>& p, const Eigen::MatrixBase<Derived>& latents)
{
    if (latents.rows() != p.latent_dim())
        throw ValidationError("decoder expects dimension " + std::to_string(p.latent_dim()) + ", got " +
                              std::to_string(latents.rows()));
    return sigmoid((columnwise_product(p.W2, latents).colwise() + p.b2).array()).matrix();
}

template <typename Scalar, typename Derived>
typename AutoencoderParams<Scalar>::Vec encode(const AutoencoderParams<Scalar>& p,
                                              const Eigen::MatrixBase<Derived>& v)
{
    if (v.cols() != 1) throw ValidationError("encode expects a column vector");
    return encode_columns(p, v);
}

template <typename Scalar, typename Derived>
typename AutoencoderParams<Scalar>::Vec decode(const AutoencoderParams<Scalar>& p,
                                              const Eigen::MatrixBase<Derived>& z)
{
    if (z.cols() != 1) throw ValidationError("decode expects a column vector");
    return decode_columns(p, z);
}

/// A timestamp within one of several window sequences.
struct WindowRef {
    std::size_t segment = 0;
    Eigen::Index t = 0;
};

/// The two parts of the training loss, each summed over the batch.
template <typename Scalar>
struct LossTerms {
    Scalar reconstruction = Scalar(0);
    Scalar invariance = Scalar(0);
};

namespace detail {

template <typename Scalar>
using WindowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
void check_batch(const AutoencoderParams<Scalar>& p, std::span<const WindowMatrix<Scalar>> segments,
                 std::span<const WindowRef> batch, int k)
{
    if (k < 1) throw ValidationError("K must be >= 1");
    if (!p.consistent()) throw ValidationError("inconsistent autoencoder shapes");
    for (const WindowRef& ref : batch) {
        if (ref.segment >= segments.size()) throw ValidationError("batch refers to a missing segment");
        const auto& seg = segments[ref.segment];
        if (seg.rows() != p.input_dim())
            throw ValidationError("window dimension " + std::to_string(seg.rows()) +
                                  " does not match autoencoder input " + std::to_string(p.input_dim()));
        if (ref.t >= seg.cols() || ref.t < 0) throw ValidationError("batch timestamp out of range");
        if (ref.t < k)
            throw ValidationError("timestamp " + std::to_string(ref.t) + " lacks " + std::to_string(k) +
                                  " windows of history");
    }
}

/// Shared forward/backward pass. When `g` is non-null it receives the
/// gradient of the returned loss.
template <typename Scalar>
Scalar loss_impl(const AutoencoderParams<Scalar>& p, std::span<const WindowMatrix<Scalar>> segments,
                 std::span<const WindowRef> batch, int k, AutoencoderParams<Scalar>* g,
                 LossTerms<Scalar>* terms = nullptr)
{
    using Mat = WindowMatrix<Scalar>;
    check_batch(p, segments, batch, k);
    const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
    const Eigen::Index d = p.input_dim();
    const Eigen::Index s = p.latent_dim();
    const Eigen::Index h = k + 1;  // windows t, t-1, ..., t-K

    // column i*h + j holds window t_i - j
    Mat history(d, b * h);
    for (Eigen::Index i = 0; i < b; ++i) {
        const auto& ref = batch[static_cast<std::size_t>(i)];
        const auto& seg = segments[ref.segment];
        for (Eigen::Index j = 0; j < h; ++j) history.col(i * h + j) = seg.col(ref.t - j);
    }
    const Mat latents = encode_columns(p, history);

    Mat current(d, b);
    Mat current_latents(s, b);
    for (Eigen::Index i = 0; i < b; ++i) {
        current.col(i) = history.col(i * h);
        current_latents.col(i) = latents.col(i * h);
    }
    const Mat recon = decode_columns(p, current_latents);
    const Mat residual = current - recon;

    Scalar total(0);
    Mat d_latents;
    Mat d_recon_pre;
    if (g) {
        d_latents = Mat::Zero(s, b * h);
        d_recon_pre.resize(d, b);
    }
    const Scalar inv_k = Scalar(1) / Scalar(k);

    for (Eigen::Index i = 0; i < b; ++i) {
        const Scalar rnorm = residual.col(i).norm();
        total += rnorm;
        if (terms) terms->reconstruction += rnorm;
        if (g) {
            // d|r|/d recon = -r/|r|; zero residual contributes a zero subgradient
            if (rnorm > Scalar(0)) {
                d_recon_pre.col(i) = (-residual.col(i).array() / rnorm * recon.col(i).array() *
                                      (Scalar(1) - recon.col(i).array()))
                                         .matrix();
            } else {
                d_recon_pre.col(i).setZero();
            }
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto diff = (latents.col(i * h + j) - latents.col(i * h + j + 1)).eval();
            const Scalar dnorm = diff.norm();
            total += inv_k * dnorm;
            if (terms) terms->invariance += inv_k * dnorm;
            if (g && dnorm > Scalar(0)) {
                const auto unit = (inv_k / dnorm * diff).eval();
                d_latents.col(i * h + j) += unit;
                d_latents.col(i * h + j + 1) -= unit;
            }
        }
    }

    if (g) {
        *g = AutoencoderParams<Scalar>(static_cast<int>(d), static_cast<int>(s));
        g->W2 = d_recon_pre * current_latents.transpose();
        g->b2 = d_recon_pre.rowwise().sum();
        const Mat d_current_latents = p.W2.transpose() * d_recon_pre;
        for (Eigen::Index i = 0; i < b; ++i) d_latents.col(i * h) += d_current_latents.col(i);
        const Mat d_pre = d_latents.cwiseProduct((latents.array() * (Scalar(1) - latents.array())).matrix());
        g->W1 = d_pre * history.transpose();
        g->b1 = d_pre.rowwise().sum();
    }
    return total;
}

}  // namespace detail

/// Reconstruction plus time-invariance loss summed over the batch:
///   sum_t |x_t - x~_t| + (1/K) sum_{k<K} |s_{t-k} - s_{t-k-1}|
/// Every batch timestamp needs K earlier windows in its own segment.
template <typename Scalar>
Scalar loss(const AutoencoderParams<Scalar>& p,
            std::span<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> segments,
            std::span<const WindowRef> batch, int k)
{
    return detail::loss_impl<Scalar>(p, segments, batch, k, nullptr);
}

/// Single-sequence form: windows are the columns of `windows`.
template <typename Scalar>
Scalar loss(const AutoencoderParams<Scalar>& p,
            const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& windows,
            std::span<const Eigen::Index> batch, int k)
{
    std::vector<WindowRef> refs;
    refs.reserve(batch.size());
    for (Eigen::Index t : batch) refs.push_back({0, t});
    return detail::loss_impl<Scalar>(p, std::span(&windows, 1), refs, k, nullptr);
}

/// Reconstruction and invariance parts of `loss`, accumulated separately.
template <typename Scalar>
LossTerms<Scalar> loss_terms(const AutoencoderParams<Scalar>& p,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& windows,
                             std::span<const Eigen::Index> batch, int k)
{
    std::vector<WindowRef> refs;
    refs.reserve(batch.size());
    for (Eigen::Index t : batch) refs.push_back({0, t});
    LossTerms<Scalar> terms;
    detail::loss_impl<Scalar>(p, std::span(&windows, 1), refs, k, nullptr, &terms);
    return terms;
}

/// Analytic gradient of `loss`; the loss value is written to `value` if given.
template <typename Scalar>
AutoencoderParams<Scalar> grad(const AutoencoderParams<Scalar>& p,
                               std::span<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> segments,
                               std::span<const WindowRef> batch, int k, Scalar* value = nullptr)
{
    AutoencoderParams<Scalar> g;
    const Scalar v = detail::loss_impl<Scalar>(p, segments, batch, k, &g);
    if (value) *value = v;
    return g;
}

template <typename Scalar>
AutoencoderParams<Scalar> grad(const AutoencoderParams<Scalar>& p,
                               const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& windows,
                               std::span<const Eigen::Index> batch, int k, Scalar* value = nullptr)
{
    std::vector<WindowRef> refs;
    refs.reserve(batch.size());
    for (Eigen::Index t : batch) refs.push_back({0, t});
    return grad<Scalar>(p, std::span(&windows, 1), refs, k, value);
}

struct TrainConfig {
    /// Step on the batch-summed loss; larger steps drive the latents into
    /// sigmoid saturation.
    double learning_rate = 0.005;
    int epochs = 100;
    int minibatch_size = 64;
    int k = 3;
    std::uint64_t seed = 0;
    int latent_dim = 1;
};

struct TrainResult {
    Autoencoder params;
    /// Mean per-timestamp loss of each epoch, accumulated during the epoch.
    std::vector<double> epoch_loss;
};

/// Weights uniform in [-1/sqrt(D), 1/sqrt(D)], biases zero.
Autoencoder init_params(int input_dim, int latent_dim, std::uint64_t seed);

/// Every timestamp of every segment that has K windows of history.
std::vector<WindowRef> valid_timestamps(std::span<const Matrix> segments, int k);

/// Plain minibatch SGD over the pooled segments. Throws DivergenceError if
/// the loss turns non-finite.
TrainResult train(std::span<const Matrix> segments, const TrainConfig& config);
TrainResult train(const Matrix& windows, const TrainConfig& config);

/// Same as train() but starting from given parameters.
TrainResult train_from(Autoencoder initial, std::span<const Matrix> segments, const TrainConfig& config);

/// Binary layout: "LSSAE1", int32 D, int32 s, then W1, b1, W2, b2 as
/// little-endian float64 in row-major order.
void save_params(const Autoencoder& params, const std::filesystem::path& path);
Autoencoder load_params(const std::filesystem::path& path);

}  // namespace lss
