#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "abxlab/corpus_io.hpp"
#include "abxlab/random.hpp"
#include "json.hpp"

namespace abxlab {

enum class CellKind { lstm, simple_rnn };
enum class Optimizer { sgd, adam };

struct ApcConfig {
    std::size_t prediction_step = 1;  // n
    std::size_t layers = 2;
    std::size_t hidden_dim = 16;
    std::size_t input_dim = 0;        // 0: taken from the training archive
    CellKind cell = CellKind::lstm;
    Optimizer optimizer = Optimizer::adam;
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t epochs = 100;
    std::size_t batch_size = 4;
    std::uint64_t seed = 42;

    /// Large-scale setting: 5 LSTM layers of 100 units, n = 5, Adam with
    /// lr 1e-4, batch 32, 100 epochs.
    static ApcConfig large_preset(std::size_t input_dim);

    void validate() const;
    nlohmann::json to_json() const;
    static ApcConfig from_json(const nlohmann::json& j);
};

/// Recurrent encoder with a linear output projection. Parameters live in one
/// flat vector, layer by layer: input weights (G*H x in, row-major),
/// recurrent weights (G*H x H), bias (G*H); then the projection (d x H).
/// G is 4 for LSTM (gate order input, forget, cell, output) and 1 for the
/// simple tanh RNN.
class ApcModel {
public:
    ApcModel() = default;
    /// All-zero parameters. Requires config.input_dim > 0.
    explicit ApcModel(ApcConfig config);

    /// Uniform(-1/sqrt(H), 1/sqrt(H)) initialisation.
    static ApcModel initialise(ApcConfig config, Rng& rng);

    const ApcConfig& config() const noexcept { return config_; }
    std::span<double> parameters() noexcept { return params_; }
    std::span<const double> parameters() const noexcept { return params_; }

    struct LayerLayout {
        std::size_t in = 0;
        std::size_t w_ih = 0;
        std::size_t w_hh = 0;
        std::size_t bias = 0;
        bool residual = false;
    };
    const std::vector<LayerLayout>& layers() const noexcept { return layers_; }
    std::size_t projection_offset() const noexcept { return projection_; }
    std::size_t gates() const noexcept;

    friend bool operator==(const ApcModel& a, const ApcModel& b) { return a.params_ == b.params_; }

private:
    ApcConfig config_;
    std::vector<LayerLayout> layers_;
    std::size_t projection_ = 0;
    std::vector<double> params_;
};

struct ForwardResult {
    FrameMatrix predictions;  // x-hat, T x d
    FrameMatrix top_hidden;   // h_L, T x H
};

/// Causal: prediction t only reads frames 0..t.
ForwardResult forward(const ApcModel& model, const FrameMatrix& x);

/// Sum over t < T - n of |x-hat_t - x_{t+n}|_1. Throws Error(data) when
/// T <= n.
double apc_loss(const FrameMatrix& predictions, const FrameMatrix& x, std::size_t n);

/// Loss of `model` on `x` and its gradient with respect to every parameter
/// (L1 subgradient 0 at 0), accumulated into `grad`.
double loss_and_gradient(const ApcModel& model, const FrameMatrix& x, std::span<double> grad);

struct TrainResult {
    ApcModel model;
    /// Mean per-frame loss over the corpus: entry 0 before training, entry e
    /// after epoch e.
    std::vector<double> loss_curve;
};

/// Mini-batch training over the utterances of `corpus` in a seeded order.
/// Throws Error(data) naming any utterance with T <= n and Error(training)
/// with the epoch index if the loss becomes non-finite.
TrainResult train(ApcConfig config, const FeatureArchive& corpus);

struct GradCheckResult {
    double max_relative_error = 0.0;
    bool inconclusive = false;
    std::size_t resamples = 0;
    std::size_t parameters = 0;
};

inline constexpr double kKinkThreshold = 1e-4;

/// Central finite differences against loss_and_gradient, parameter by
/// parameter; relative error |ga - gn| / max(|ga|, |gn|, 1e-8). Flags the
/// result inconclusive when any residual component lies within the kink
/// threshold of zero.
GradCheckResult gradient_check(const ApcModel& model, const FrameMatrix& x, double epsilon = 1e-5);

using SequenceSampler = std::function<FrameMatrix(Rng&)>;

/// Random small model plus random data, re-drawing the data up to 10 times
/// while it sits near an L1 kink.
GradCheckResult gradient_check_sampled(const ApcConfig& config, std::uint64_t seed, std::size_t frames = 12,
                                       double epsilon = 1e-5, const SequenceSampler& sampler = {});

/// Top-layer representation of every utterance.
FeatureArchive extract_features(const ApcModel& model, const FeatureArchive& archive, unsigned jobs = 1);

std::string encode_checkpoint(const ApcModel& model);
ApcModel decode_checkpoint(std::string_view bytes, const std::string& source = "<memory>");
void save_checkpoint(const ApcModel& model, const std::filesystem::path& path);
ApcModel load_checkpoint(const std::filesystem::path& path);

}  // namespace abxlab
