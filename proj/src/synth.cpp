#include "abxlab/synth.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "abxlab/error.hpp"
#include "abxlab/random.hpp"

namespace abxlab {

namespace fs = std::filesystem;
using nlohmann::json;

SynthConfig SynthConfig::defaults() {
    SynthConfig cfg;
    for (const char* p : {"AA", "IY", "UW", "S", "T", "M"}) cfg.phones.push_back({p, {}});
    cfg.dim = 8;
    cfg.n_speakers = 3;
    cfg.speaker_offset_scale = 0.3;
    cfg.noise_scale = 0.1;
    cfg.segments_per_cell = 3;
    cfg.frames_min = 4;
    cfg.frames_max = 8;
    cfg.contexts = {{"B", "D"}, {"K", "SIL"}};
    cfg.seed = 42;
    return cfg;
}

void SynthConfig::validate() const {
    const auto fail = [](const std::string& msg) { throw Error(ErrorKind::argument, "synth config: " + msg); };
    if (phones.empty()) fail("at least one phone is required");
    if (n_speakers == 0) fail("at least one speaker is required");
    if (dim == 0) fail("dim must be positive");
    if (contexts.empty()) fail("at least one context is required");
    if (segments_per_cell == 0) fail("segments_per_cell must be positive");
    if (frames_min == 0 || frames_max < frames_min) fail("need 1 <= frames_min <= frames_max");
    if (frame_period.count() <= 0) fail("frame period must be positive");
    if (!(speaker_offset_scale >= 0.0) || !(noise_scale >= 0.0) || !std::isfinite(speaker_offset_scale) ||
        !std::isfinite(noise_scale) || !std::isfinite(mean_scale))
        fail("scales must be finite and non-negative");
    std::set<std::string> seen;
    bool one_hot = false;
    for (const auto& p : phones) {
        if (p.symbol.empty()) fail("empty phone symbol");
        if (!seen.insert(p.symbol).second) fail("duplicate phone '" + p.symbol + "'");
        if (p.mean.empty())
            one_hot = true;
        else if (p.mean.size() != dim)
            fail("mean of phone '" + p.symbol + "' has " + std::to_string(p.mean.size()) + " values, dim is " +
                 std::to_string(dim));
    }
    if (one_hot && dim < phones.size()) fail("one-hot means need dim >= number of phones");
}

json SynthConfig::to_json() const {
    json phone_list = json::array();
    for (const auto& p : phones) {
        if (p.mean.empty())
            phone_list.push_back(p.symbol);
        else
            phone_list.push_back({{"symbol", p.symbol}, {"mean", p.mean}});
    }
    json ctx = json::array();
    for (const auto& c : contexts) ctx.push_back({c.prev, c.next});
    return {{"phones", phone_list},
            {"dim", dim},
            {"n_speakers", n_speakers},
            {"mean_scale", mean_scale},
            {"speaker_offset_scale", speaker_offset_scale},
            {"noise_scale", noise_scale},
            {"segments_per_cell", segments_per_cell},
            {"frames_min", frames_min},
            {"frames_max", frames_max},
            {"contexts", ctx},
            {"frame_period_us", frame_period.count()},
            {"seed", seed}};
}

SynthConfig SynthConfig::from_json(const json& j) {
    SynthConfig cfg = defaults();
    try {
        if (j.contains("phones")) {
            cfg.phones.clear();
            for (const auto& p : j.at("phones")) {
                if (p.is_string())
                    cfg.phones.push_back({p.get<std::string>(), {}});
                else
                    cfg.phones.push_back(
                        {p.at("symbol").get<std::string>(), p.value("mean", std::vector<double>{})});
            }
        }
        cfg.dim = j.value("dim", cfg.dim);
        cfg.n_speakers = j.value("n_speakers", cfg.n_speakers);
        cfg.mean_scale = j.value("mean_scale", cfg.mean_scale);
        cfg.speaker_offset_scale = j.value("speaker_offset_scale", cfg.speaker_offset_scale);
        cfg.noise_scale = j.value("noise_scale", cfg.noise_scale);
        cfg.segments_per_cell = j.value("segments_per_cell", cfg.segments_per_cell);
        cfg.frames_min = j.value("frames_min", cfg.frames_min);
        cfg.frames_max = j.value("frames_max", cfg.frames_max);
        if (j.contains("contexts")) {
            cfg.contexts.clear();
            for (const auto& c : j.at("contexts"))
                cfg.contexts.push_back({c.at(0).get<std::string>(), c.at(1).get<std::string>()});
        }
        cfg.frame_period = Microseconds(j.value("frame_period_us", cfg.frame_period.count()));
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::argument, std::string("synth config: ") + e.what());
    }
    return cfg;
}

SynthCorpus generate_corpus(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);

    std::vector<std::vector<double>> means;
    for (std::size_t p = 0; p < cfg.phones.size(); ++p) {
        if (!cfg.phones[p].mean.empty()) {
            means.push_back(cfg.phones[p].mean);
        } else {
            std::vector<double> m(cfg.dim, 0.0);
            m[p] = cfg.mean_scale;
            means.push_back(std::move(m));
        }
    }

    // Unit-norm random direction per speaker, drawn even at scale 0 so the
    // rest of the stream does not depend on the scale.
    std::vector<std::vector<double>> bias(cfg.n_speakers, std::vector<double>(cfg.dim));
    for (auto& b : bias) {
        double norm = 0.0;
        for (auto& v : b) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : b) v = norm > 0.0 ? cfg.speaker_offset_scale * v / norm : 0.0;
    }

    const auto period_ns = std::chrono::duration_cast<Nanoseconds>(cfg.frame_period);
    std::map<UttId, FrameMatrix> utterances;
    std::vector<ItemSegment> items;
    std::vector<FrameLabelTrack> truth;
    for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
        const std::string speaker = "spk" + std::to_string(s + 1);
        for (std::size_t c = 0; c < cfg.contexts.size(); ++c) {
            const UttId utt = speaker + "_c" + std::to_string(c);
            FrameLabelTrack track{utt, {}};
            std::vector<double> values;
            std::size_t frame = 0;
            for (std::size_t p = 0; p < cfg.phones.size(); ++p) {
                for (std::size_t k = 0; k < cfg.segments_per_cell; ++k) {
                    const std::size_t len = cfg.frames_min + rng.below(cfg.frames_max - cfg.frames_min + 1);
                    for (std::size_t t = 0; t < len; ++t) {
                        for (std::size_t d = 0; d < cfg.dim; ++d) {
                            const double z = rng.normal();
                            const double v = means[p][d] + bias[s][d] + cfg.noise_scale * z;
                            values.push_back(static_cast<float>(v));
                        }
                    }
                    const Nanoseconds onset = period_ns * static_cast<long long>(frame);
                    const Nanoseconds offset = period_ns * static_cast<long long>(frame + len);
                    items.push_back({utt, onset, offset, cfg.phones[p].symbol, cfg.contexts[c].prev,
                                     cfg.contexts[c].next, speaker});
                    track.spans.push_back({onset, offset, cfg.phones[p].symbol});
                    frame += len;
                }
            }
            utterances.emplace(utt, FrameMatrix(frame, cfg.dim, std::move(values)));
            truth.push_back(std::move(track));
        }
    }

    SynthCorpus out{FeatureArchive(cfg.dim, cfg.frame_period, std::move(utterances)), std::move(items),
                    std::move(truth), json::object()};
    out.sidecar = {{"config", cfg.to_json()},
                   {"seed", cfg.seed},
                   {"generator", {{"name", Rng::kName}, {"version", Rng::kVersion}}},
                   {"utterances", out.archive.size()},
                   {"segments", out.items.size()},
                   {"frames", out.archive.total_frames()}};
    return out;
}

void write_corpus(const SynthCorpus& corpus, const fs::path& dir) {
    fs::create_directories(dir);
    write_feature_archive(corpus.archive, dir / "features", FeatureFormat::binary);
    {
        std::ofstream out(dir / "items.item", std::ios::trunc);
        write_item_file(corpus.items, out);
        if (!out) throw Error(ErrorKind::io, "cannot write items.item");
    }
    {
        std::ofstream out(dir / "truth.tsv", std::ios::trunc);
        write_label_tracks(corpus.truth, out);
        if (!out) throw Error(ErrorKind::io, "cannot write truth.tsv");
    }
    std::ofstream out(dir / "synth.json", std::ios::trunc);
    out << corpus.sidecar.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::io, "cannot write synth.json");
}

}  // namespace abxlab
