#include "abxlab/apc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "abxlab/error.hpp"
#include "parallel.hpp"

namespace abxlab {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config

ApcConfig ApcConfig::large_preset(std::size_t input_dim) {
    ApcConfig cfg;
    cfg.prediction_step = 5;
    cfg.layers = 5;
    cfg.hidden_dim = 100;
    cfg.input_dim = input_dim;
    cfg.learning_rate = 1e-4;
    cfg.batch_size = 32;
    cfg.epochs = 100;
    return cfg;
}

void ApcConfig::validate() const {
    const auto fail = [](const std::string& m) { throw Error(ErrorKind::argument, "APC config: " + m); };
    if (prediction_step == 0) fail("prediction_step must be >= 1");
    if (layers == 0) fail("layers must be >= 1");
    if (hidden_dim == 0) fail("hidden_dim must be >= 1");
    if (batch_size == 0) fail("batch_size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) fail("Adam betas must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) fail("adam_epsilon must be positive");
}

json ApcConfig::to_json() const {
    return {{"prediction_step", prediction_step},
            {"layers", layers},
            {"hidden_dim", hidden_dim},
            {"input_dim", input_dim},
            {"cell", cell == CellKind::lstm ? "lstm" : "simple-rnn"},
            {"optimizer", optimizer == Optimizer::adam ? "adam" : "sgd"},
            {"learning_rate", learning_rate},
            {"beta1", beta1},
            {"beta2", beta2},
            {"adam_epsilon", adam_epsilon},
            {"epochs", epochs},
            {"batch_size", batch_size},
            {"seed", seed}};
}

ApcConfig ApcConfig::from_json(const json& j) {
    ApcConfig cfg;
    try {
        cfg.prediction_step = j.value("prediction_step", cfg.prediction_step);
        cfg.layers = j.value("layers", cfg.layers);
        cfg.hidden_dim = j.value("hidden_dim", cfg.hidden_dim);
        cfg.input_dim = j.value("input_dim", cfg.input_dim);
        const auto cell = j.value("cell", std::string("lstm"));
        if (cell == "lstm")
            cfg.cell = CellKind::lstm;
        else if (cell == "simple-rnn")
            cfg.cell = CellKind::simple_rnn;
        else
            throw Error(ErrorKind::argument, "APC config: cell must be 'lstm' or 'simple-rnn'");
        const auto opt = j.value("optimizer", std::string("adam"));
        if (opt == "adam")
            cfg.optimizer = Optimizer::adam;
        else if (opt == "sgd")
            cfg.optimizer = Optimizer::sgd;
        else
            throw Error(ErrorKind::argument, "APC config: optimizer must be 'adam' or 'sgd'");
        cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
        cfg.beta1 = j.value("beta1", cfg.beta1);
        cfg.beta2 = j.value("beta2", cfg.beta2);
        cfg.adam_epsilon = j.value("adam_epsilon", cfg.adam_epsilon);
        cfg.epochs = j.value("epochs", cfg.epochs);
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::argument, std::string("APC config: ") + e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Model layout

ApcModel::ApcModel(ApcConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.input_dim == 0) throw Error(ErrorKind::argument, "APC model needs a positive input_dim");
    const std::size_t h = config_.hidden_dim;
    const std::size_t g = gates();
    std::size_t offset = 0;
    for (std::size_t l = 0; l < config_.layers; ++l) {
        LayerLayout layer;
        layer.in = l == 0 ? config_.input_dim : h;
        // Residual only where the layer input and output widths agree.
        layer.residual = layer.in == h;
        layer.w_ih = offset;
        offset += g * h * layer.in;
        layer.w_hh = offset;
        offset += g * h * h;
        layer.bias = offset;
        offset += g * h;
        layers_.push_back(layer);
    }
    projection_ = offset;
    offset += config_.input_dim * h;
    params_.assign(offset, 0.0);
}

std::size_t ApcModel::gates() const noexcept { return config_.cell == CellKind::lstm ? 4 : 1; }

ApcModel ApcModel::initialise(ApcConfig config, Rng& rng) {
    ApcModel model(std::move(config));
    const double k = 1.0 / std::sqrt(static_cast<double>(model.config().hidden_dim));
    for (double& p : model.params_) p = rng.uniform(-k, k);
    return model;
}

// ---------------------------------------------------------------------------
// Forward pass, generic over the scalar so the finite-difference check can
// run in extended precision.

namespace {

template <typename S>
S sigmoid(S z) {
    return S(1) / (S(1) + std::exp(-z));
}

template <typename S>
struct LayerCache {
    std::vector<S> input;  // T x in
    std::vector<S> act;    // T x G*H, post-activation gates
    std::vector<S> cell;   // T x H (LSTM only)
    std::vector<S> state;  // T x H recurrent state
    std::vector<S> output; // T x H, state plus residual
};

template <typename S>
struct Trace {
    std::vector<LayerCache<S>> layers;
    std::vector<S> predictions;  // T x d
};

template <typename S>
Trace<S> run(const ApcModel& model, std::span<const S> params, const FrameMatrix& x) {
    const auto& cfg = model.config();
    if (x.cols() != cfg.input_dim)
        throw Error(ErrorKind::argument, "APC input has dim " + std::to_string(x.cols()) + ", model expects " +
                                             std::to_string(cfg.input_dim));
    const std::size_t T = x.rows();
    const std::size_t H = cfg.hidden_dim;
    const std::size_t G = model.gates();
    const bool lstm = cfg.cell == CellKind::lstm;

    Trace<S> trace;
    std::vector<S> input(x.values().begin(), x.values().end());
    for (const auto& layout : model.layers()) {
        LayerCache<S> cache;
        cache.input = std::move(input);
        cache.act.assign(T * G * H, S(0));
        cache.state.assign(T * H, S(0));
        cache.output.assign(T * H, S(0));
        if (lstm) cache.cell.assign(T * H, S(0));
        const S* w_ih = params.data() + layout.w_ih;
        const S* w_hh = params.data() + layout.w_hh;
        const S* bias = params.data() + layout.bias;
        std::vector<S> z(G * H);
        for (std::size_t t = 0; t < T; ++t) {
            const S* in = cache.input.data() + t * layout.in;
            const S* h_prev = t > 0 ? cache.state.data() + (t - 1) * H : nullptr;
            for (std::size_t r = 0; r < G * H; ++r) {
                S acc = bias[r];
                const S* wi = w_ih + r * layout.in;
                for (std::size_t c = 0; c < layout.in; ++c) acc += wi[c] * in[c];
                if (h_prev) {
                    const S* wh = w_hh + r * H;
                    for (std::size_t c = 0; c < H; ++c) acc += wh[c] * h_prev[c];
                }
                z[r] = acc;
            }
            S* act = cache.act.data() + t * G * H;
            S* h = cache.state.data() + t * H;
            if (lstm) {
                S* c = cache.cell.data() + t * H;
                const S* c_prev = t > 0 ? cache.cell.data() + (t - 1) * H : nullptr;
                for (std::size_t k = 0; k < H; ++k) {
                    const S i = sigmoid(z[k]);
                    const S f = sigmoid(z[H + k]);
                    const S g = std::tanh(z[2 * H + k]);
                    const S o = sigmoid(z[3 * H + k]);
                    act[k] = i;
                    act[H + k] = f;
                    act[2 * H + k] = g;
                    act[3 * H + k] = o;
                    c[k] = (c_prev ? f * c_prev[k] : S(0)) + i * g;
                    h[k] = o * std::tanh(c[k]);
                }
            } else {
                for (std::size_t k = 0; k < H; ++k) {
                    act[k] = std::tanh(z[k]);
                    h[k] = act[k];
                }
            }
            S* out = cache.output.data() + t * H;
            for (std::size_t k = 0; k < H; ++k) out[k] = h[k] + (layout.residual ? in[k] : S(0));
        }
        input = cache.output;
        trace.layers.push_back(std::move(cache));
    }

    const std::size_t d = cfg.input_dim;
    const S* w = params.data() + model.projection_offset();
    const auto& top = trace.layers.back().output;
    trace.predictions.assign(T * d, S(0));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t r = 0; r < d; ++r) {
            S acc = S(0);
            for (std::size_t c = 0; c < H; ++c) acc += w[r * H + c] * top[t * H + c];
            trace.predictions[t * d + r] = acc;
        }
    return trace;
}

void require_length(std::size_t T, std::size_t n) {
    if (T <= n)
        throw Error(ErrorKind::data, "sequence of " + std::to_string(T) + " frames is too short for prediction step " +
                                         std::to_string(n));
}

template <typename S>
S l1_loss(std::span<const S> predictions, const FrameMatrix& x, std::size_t n) {
    require_length(x.rows(), n);
    const std::size_t d = x.cols();
    S loss = S(0);
    for (std::size_t t = 0; t + n < x.rows(); ++t)
        for (std::size_t k = 0; k < d; ++k) loss += std::abs(predictions[t * d + k] - S(x(t + n, k)));
    return loss;
}

}  // namespace

ForwardResult forward(const ApcModel& model, const FrameMatrix& x) {
    const auto trace = run<double>(model, model.parameters(), x);
    return {FrameMatrix(x.rows(), model.config().input_dim, trace.predictions),
            FrameMatrix(x.rows(), model.config().hidden_dim, trace.layers.back().output)};
}

double apc_loss(const FrameMatrix& predictions, const FrameMatrix& x, std::size_t n) {
    if (predictions.rows() != x.rows() || predictions.cols() != x.cols())
        throw Error(ErrorKind::argument, "predictions and targets differ in shape");
    return l1_loss<double>(predictions.values(), x, n);
}

// ---------------------------------------------------------------------------
// Backpropagation through time

double loss_and_gradient(const ApcModel& model, const FrameMatrix& x, std::span<double> grad) {
    const auto& cfg = model.config();
    if (grad.size() != model.parameters().size()) throw Error(ErrorKind::argument, "gradient buffer size mismatch");
    const std::size_t n = cfg.prediction_step;
    require_length(x.rows(), n);
    const auto trace = run<double>(model, model.parameters(), x);
    const std::size_t T = x.rows();
    const std::size_t H = cfg.hidden_dim;
    const std::size_t d = cfg.input_dim;
    const std::size_t G = model.gates();
    const bool lstm = cfg.cell == CellKind::lstm;
    const auto params = model.parameters();

    double loss = 0.0;
    std::vector<double> d_pred(T * d, 0.0);
    for (std::size_t t = 0; t + n < T; ++t)
        for (std::size_t k = 0; k < d; ++k) {
            const double r = trace.predictions[t * d + k] - x(t + n, k);
            loss += std::abs(r);
            d_pred[t * d + k] = r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        }

    // Projection.
    const double* w = params.data() + model.projection_offset();
    double* dw = grad.data() + model.projection_offset();
    const auto& top = trace.layers.back().output;
    std::vector<double> d_out(T * H, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t r = 0; r < d; ++r) {
            const double g = d_pred[t * d + r];
            if (g == 0.0) continue;
            for (std::size_t c = 0; c < H; ++c) {
                dw[r * H + c] += g * top[t * H + c];
                d_out[t * H + c] += g * w[r * H + c];
            }
        }

    for (std::size_t li = model.layers().size(); li-- > 0;) {
        const auto& layout = model.layers()[li];
        const auto& cache = trace.layers[li];
        const double* w_ih = params.data() + layout.w_ih;
        const double* w_hh = params.data() + layout.w_hh;
        double* gw_ih = grad.data() + layout.w_ih;
        double* gw_hh = grad.data() + layout.w_hh;
        double* gb = grad.data() + layout.bias;

        std::vector<double> d_in(T * layout.in, 0.0);
        if (layout.residual)
            for (std::size_t i = 0; i < T * H; ++i) d_in[i] = d_out[i];

        std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(G * H);
        for (std::size_t t = T; t-- > 0;) {
            const double* act = cache.act.data() + t * G * H;
            for (std::size_t k = 0; k < H; ++k) {
                const double dh = d_out[t * H + k] + dh_next[k];
                if (lstm) {
                    const double i = act[k], f = act[H + k], g = act[2 * H + k], o = act[3 * H + k];
                    const double tc = std::tanh(cache.cell[t * H + k]);
                    const double dc = dh * o * (1.0 - tc * tc) + dc_next[k];
                    const double c_prev = t > 0 ? cache.cell[(t - 1) * H + k] : 0.0;
                    dz[k] = dc * g * i * (1.0 - i);
                    dz[H + k] = dc * c_prev * f * (1.0 - f);
                    dz[2 * H + k] = dc * i * (1.0 - g * g);
                    dz[3 * H + k] = dh * tc * o * (1.0 - o);
                    dc_next[k] = dc * f;
                } else {
                    const double h = act[k];
                    dz[k] = dh * (1.0 - h * h);
                }
            }
            const double* in = cache.input.data() + t * layout.in;
            const double* h_prev = t > 0 ? cache.state.data() + (t - 1) * H : nullptr;
            std::fill(dh_next.begin(), dh_next.end(), 0.0);
            for (std::size_t r = 0; r < G * H; ++r) {
                const double g = dz[r];
                gb[r] += g;
                for (std::size_t c = 0; c < layout.in; ++c) {
                    gw_ih[r * layout.in + c] += g * in[c];
                    d_in[t * layout.in + c] += g * w_ih[r * layout.in + c];
                }
                if (h_prev) {
                    for (std::size_t c = 0; c < H; ++c) {
                        gw_hh[r * H + c] += g * h_prev[c];
                        dh_next[c] += g * w_hh[r * H + c];
                    }
                }
            }
        }
        d_out = std::move(d_in);
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Training

namespace {

std::vector<const FrameMatrix*> training_sequences(const ApcConfig& cfg, const FeatureArchive& corpus) {
    std::vector<const FrameMatrix*> seqs;
    for (const auto& [utt, m] : corpus.utterances()) {
        if (m.rows() <= cfg.prediction_step)
            throw Error(ErrorKind::data, "utterance '" + utt + "' has " + std::to_string(m.rows()) +
                                             " frames, prediction step is " + std::to_string(cfg.prediction_step));
        seqs.push_back(&m);
    }
    if (seqs.empty()) throw Error(ErrorKind::empty_input, "no training utterances");
    return seqs;
}

double corpus_loss(const ApcModel& model, const std::vector<const FrameMatrix*>& seqs) {
    double loss = 0.0;
    std::size_t frames = 0;
    for (const auto* m : seqs) {
        const auto fwd = run<double>(model, model.parameters(), *m);
        loss += l1_loss<double>(fwd.predictions, *m, model.config().prediction_step);
        frames += m->rows() - model.config().prediction_step;
    }
    return loss / static_cast<double>(frames);
}

}  // namespace

TrainResult train(ApcConfig config, const FeatureArchive& corpus) {
    config.validate();
    if (config.input_dim == 0) config.input_dim = corpus.dim();
    if (config.input_dim != corpus.dim())
        throw Error(ErrorKind::argument, "APC input_dim " + std::to_string(config.input_dim) +
                                             " does not match corpus dim " + std::to_string(corpus.dim()));
    const auto seqs = training_sequences(config, corpus);

    Rng rng(config.seed);
    TrainResult result{ApcModel::initialise(config, rng), {}};
    ApcModel& model = result.model;
    const std::size_t P = model.parameters().size();
    std::vector<double> grad(P), m1(P, 0.0), m2(P, 0.0);
    std::vector<std::size_t> order(seqs.size());
    std::iota(order.begin(), order.end(), 0);
    std::uint64_t step = 0;

    result.loss_curve.push_back(corpus_loss(model, seqs));
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            std::fill(grad.begin(), grad.end(), 0.0);
            std::size_t frames = 0;
            for (std::size_t b = start; b < stop; ++b) {
                const auto& seq = *seqs[order[b]];
                loss_and_gradient(model, seq, grad);
                frames += seq.rows() - config.prediction_step;
            }
            const double scale = 1.0 / static_cast<double>(frames);
            auto params = model.parameters();
            ++step;
            if (config.optimizer == Optimizer::adam) {
                const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
                for (std::size_t i = 0; i < P; ++i) {
                    const double g = grad[i] * scale;
                    m1[i] = config.beta1 * m1[i] + (1.0 - config.beta1) * g;
                    m2[i] = config.beta2 * m2[i] + (1.0 - config.beta2) * g * g;
                    params[i] -= config.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + config.adam_epsilon);
                }
            } else {
                for (std::size_t i = 0; i < P; ++i) params[i] -= config.learning_rate * grad[i] * scale;
            }
        }
        const double loss = corpus_loss(model, seqs);
        if (!std::isfinite(loss)) throw Error(ErrorKind::training, "training diverged at epoch " + std::to_string(epoch));
        result.loss_curve.push_back(loss);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Gradient check

GradCheckResult gradient_check(const ApcModel& model, const FrameMatrix& x, double epsilon) {
    const auto& cfg = model.config();
    const std::size_t n = cfg.prediction_step;
    GradCheckResult result;
    result.parameters = model.parameters().size();

    const auto fwd = forward(model, x);
    for (std::size_t t = 0; t + n < x.rows(); ++t)
        for (std::size_t k = 0; k < x.cols(); ++k)
            if (std::abs(fwd.predictions(t, k) - x(t + n, k)) < kKinkThreshold) {
                result.inconclusive = true;
                return result;
            }

    std::vector<double> analytic(result.parameters, 0.0);
    loss_and_gradient(model, x, analytic);

    std::vector<long double> params(model.parameters().begin(), model.parameters().end());
    const auto loss_at = [&] {
        const auto trace = run<long double>(model, std::span<const long double>(params), x);
        return l1_loss<long double>(trace.predictions, x, n);
    };
    for (std::size_t i = 0; i < params.size(); ++i) {
        const long double saved = params[i];
        params[i] = saved + epsilon;
        const long double up = loss_at();
        params[i] = saved - epsilon;
        const long double down = loss_at();
        params[i] = saved;
        const double numeric = static_cast<double>((up - down) / (2.0L * epsilon));
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic[i] - numeric) / denom);
    }
    return result;
}

GradCheckResult gradient_check_sampled(const ApcConfig& config, std::uint64_t seed, std::size_t frames,
                                       double epsilon, const SequenceSampler& sampler) {
    if (config.input_dim == 0) throw Error(ErrorKind::argument, "gradient check needs a positive input_dim");
    if (config.layers > 2 || config.hidden_dim > 8 || frames > 20)
        throw Error(ErrorKind::argument, "gradient check is limited to <= 2 layers, hidden_dim <= 8, T <= 20");
    if (frames <= config.prediction_step)
        throw Error(ErrorKind::argument, "gradient check sequence must be longer than the prediction step");
    Rng rng(seed);
    const ApcModel model = ApcModel::initialise(config, rng);
    const SequenceSampler draw = sampler ? sampler : [&](Rng& r) {
        std::vector<double> v(frames * config.input_dim);
        for (double& e : v) e = r.normal();
        return FrameMatrix(frames, config.input_dim, std::move(v));
    };
    constexpr std::size_t kMaxResamples = 10;
    GradCheckResult result;
    for (std::size_t attempt = 0; attempt <= kMaxResamples; ++attempt) {
        result = gradient_check(model, draw(rng), epsilon);
        result.resamples = attempt;
        if (!result.inconclusive) break;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Extraction

FeatureArchive extract_features(const ApcModel& model, const FeatureArchive& archive, unsigned jobs) {
    if (archive.dim() != model.config().input_dim)
        throw Error(ErrorKind::argument, "archive dim " + std::to_string(archive.dim()) +
                                             " does not match model input_dim " +
                                             std::to_string(model.config().input_dim));
    std::vector<std::pair<UttId, const FrameMatrix*>> utts;
    for (const auto& [utt, m] : archive.utterances()) utts.emplace_back(utt, &m);
    std::vector<FrameMatrix> hidden(utts.size());
    detail::parallel_for(utts.size(), jobs,
                         [&](std::size_t i) { hidden[i] = forward(model, *utts[i].second).top_hidden; });
    std::map<UttId, FrameMatrix> out;
    for (std::size_t i = 0; i < utts.size(); ++i) out.emplace(utts[i].first, std::move(hidden[i]));
    return FeatureArchive(model.config().hidden_dim, archive.frame_period(), std::move(out));
}

// ---------------------------------------------------------------------------
// Checkpoints: "APC1", u32 LE JSON length, JSON config, f64 LE parameters.

std::string encode_checkpoint(const ApcModel& model) {
    const std::string cfg = model.config().to_json().dump();
    std::string out = "APC1";
    const auto len = static_cast<std::uint32_t>(cfg.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xffu));
    out += cfg;
    for (double p : model.parameters()) {
        const auto bits = std::bit_cast<std::uint64_t>(p);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
    }
    return out;
}

ApcModel decode_checkpoint(std::string_view bytes, const std::string& source) {
    if (bytes.size() < 8 || bytes.substr(0, 4) != "APC1")
        throw Error(ErrorKind::format, source + ": not an APC1 checkpoint");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 + i])) << (8 * i);
    if (bytes.size() < 8 + std::size_t{len}) throw Error(ErrorKind::format, source + ": truncated config block");
    json cfg_json;
    try {
        cfg_json = json::parse(bytes.substr(8, len));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::format, source + ": bad config block: " + e.what());
    }
    ApcModel model(ApcConfig::from_json(cfg_json));
    auto params = model.parameters();
    const std::string_view payload = bytes.substr(8 + len);
    if (payload.size() != params.size() * 8)
        throw Error(ErrorKind::format, source + ": expected " + std::to_string(params.size()) + " parameters, found " +
                                           std::to_string(payload.size()) + " bytes");
    for (std::size_t i = 0; i < params.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[8 * i + b])) << (8 * b);
        params[i] = std::bit_cast<double>(bits);
        if (!std::isfinite(params[i])) throw Error(ErrorKind::data, source + ": non-finite parameter");
    }
    return model;
}

void save_checkpoint(const ApcModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const std::string bytes = encode_checkpoint(model);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
}

ApcModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_checkpoint(ss.str(), path.string());
}

}  // namespace abxlab
