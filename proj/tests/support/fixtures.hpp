#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "abxlab/corpus_io.hpp"

namespace fixture {

struct Corpus {
    abxlab::FeatureArchive archive;
    std::vector<abxlab::ItemSegment> items;
};

struct RandomCorpusSpec {
    std::size_t max_phones = 5;
    std::size_t max_speakers = 3;
    std::size_t max_contexts = 4;
    std::size_t max_per_cell = 3;  // segments per (speaker, context, phone)
    std::size_t max_frames = 5;
    std::size_t dim = 3;
};

/// Small random corpus, one utterance per speaker. Half of the seeds use
/// small-integer frames (many exact distance ties and some zero frames), the
/// other half float-valued Gaussian frames.
Corpus random_corpus(std::uint64_t seed, const RandomCorpusSpec& spec = {});

abxlab::FeatureArchive scaled(const abxlab::FeatureArchive& archive, double factor);

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir,
                  abxlab::FeatureFormat format = abxlab::FeatureFormat::binary);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args);

}  // namespace fixture
