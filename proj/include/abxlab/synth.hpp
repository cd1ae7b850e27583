#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "abxlab/abx.hpp"
#include "abxlab/corpus_io.hpp"
#include "json.hpp"

namespace abxlab {

struct SynthPhone {
    std::string symbol;
    /// Mean frame; empty selects mean_scale times the one-hot vector of the
    /// phone's position in the phone list.
    std::vector<double> mean;
};

struct SynthConfig {
    std::vector<SynthPhone> phones;
    std::size_t dim = 0;
    std::size_t n_speakers = 0;
    double mean_scale = 1.0;
    double speaker_offset_scale = 0.0;
    double noise_scale = 0.0;
    std::size_t segments_per_cell = 0;
    std::size_t frames_min = 0;
    std::size_t frames_max = 0;
    std::vector<Context> contexts;
    Microseconds frame_period{10000};
    std::uint64_t seed = 0;

    /// Six phones, dim 8, three speakers, two contexts, 3 segments of 4-8
    /// frames per cell, offset 0.3, noise 0.1, seed 42.
    static SynthConfig defaults();

    /// Throws Error(argument) for impossible configurations.
    void validate() const;

    nlohmann::json to_json() const;
    /// Missing keys fall back to defaults().
    static SynthConfig from_json(const nlohmann::json& j);
};

struct SynthCorpus {
    FeatureArchive archive;
    std::vector<ItemSegment> items;
    std::vector<FrameLabelTrack> truth;
    nlohmann::json sidecar;  // config, seed and generator identity
};

/// Frames are phone mean + speaker bias + noise, rounded to float32 so the
/// in-memory archive equals what the binary writer stores. One utterance per
/// (speaker, context) holds the segments back to back.
SynthCorpus generate_corpus(const SynthConfig& cfg);

/// Writes features/ (binary), items.item, truth.tsv and synth.json.
void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace abxlab
