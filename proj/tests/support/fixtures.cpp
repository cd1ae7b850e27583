#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "abxlab/abx.hpp"
#include "abxlab/cli.hpp"
#include "abxlab/random.hpp"

namespace fixture {

using namespace abxlab;
namespace fs = std::filesystem;

Corpus random_corpus(std::uint64_t seed, const RandomCorpusSpec& spec) {
    static const std::vector<std::string> kPhones{"AA", "IY", "S", "T", "M"};
    static const std::vector<Context> kContexts{{"B", "D"}, {"K", "SIL"}, {"P", "T"}, {"SIL", "N"}};
    Rng rng(seed);
    const bool integer = seed % 2 == 0;
    const std::size_t n_phones = 2 + rng.below(std::min(spec.max_phones, kPhones.size()) - 1);
    const std::size_t n_speakers = 1 + rng.below(spec.max_speakers);
    const std::size_t n_contexts = 1 + rng.below(std::min(spec.max_contexts, kContexts.size()));
    const Microseconds period{10000};
    const auto step = std::chrono::duration_cast<Nanoseconds>(period);

    Corpus c;
    std::map<UttId, FrameMatrix> utts;
    for (std::size_t s = 0; s < n_speakers; ++s) {
        const std::string spk = "s" + std::to_string(s);
        const UttId utt = "utt_" + spk;
        std::vector<double> values;
        std::size_t frame = 0;
        for (std::size_t k = 0; k < n_contexts; ++k)
            for (std::size_t p = 0; p < n_phones; ++p) {
                const std::size_t count = rng.below(spec.max_per_cell + 1);
                for (std::size_t r = 0; r < count; ++r) {
                    const std::size_t len = 1 + rng.below(spec.max_frames);
                    for (std::size_t t = 0; t < len * spec.dim; ++t) {
                        if (integer)
                            values.push_back(static_cast<double>(rng.below(4)) - 1.0);
                        else
                            values.push_back(static_cast<float>(rng.normal() + (t % spec.dim == p % spec.dim)));
                    }
                    c.items.push_back({utt, step * static_cast<long long>(frame),
                                       step * static_cast<long long>(frame + len), kPhones[p], kContexts[k].prev,
                                       kContexts[k].next, spk});
                    frame += len;
                }
            }
        if (frame == 0) {
            values.assign(spec.dim, 1.0);
            frame = 1;
        }
        utts.emplace(utt, FrameMatrix(frame, spec.dim, std::move(values)));
    }
    c.archive = FeatureArchive(spec.dim, period, std::move(utts));
    return c;
}

FeatureArchive scaled(const FeatureArchive& archive, double factor) {
    std::map<UttId, FrameMatrix> out;
    for (const auto& [utt, m] : archive.utterances()) {
        std::vector<double> v(m.values().begin(), m.values().end());
        for (double& e : v) e *= factor;
        out.emplace(utt, FrameMatrix(m.rows(), m.cols(), std::move(v)));
    }
    return FeatureArchive(archive.dim(), archive.frame_period(), std::move(out));
}

void write_corpus(const Corpus& corpus, const fs::path& dir, FeatureFormat format) {
    fs::create_directories(dir);
    write_feature_archive(corpus.archive, dir / "features", format);
    std::ofstream out(dir / "items.item");
    write_item_file(corpus.items, out);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
}

TempDir::TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("abxlab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

}  // namespace fixture
