// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "abxlab/abx.hpp"
#include "abxlab/analysis.hpp"
#include "abxlab/apc.hpp"
#include "abxlab/cli.hpp"
#include "abxlab/corpus_io.hpp"
#include "abxlab/error.hpp"
#include "abxlab/synth.hpp"
#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace abxlab;
using fixture::run_cli;
using fixture::TempDir;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failures; the first few messages end up in the summary line.
class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        if (failures_++ < 3) notes_ += (notes_.empty() ? "" : "; ") + what;
    }
    Outcome done(const std::string& summary) const {
        if (failures_ == 0) return {true, summary};
        return {false, std::to_string(failures_) + " failure(s): " + notes_};
    }

private:
    std::size_t failures_ = 0;
    std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

SynthCorpus synth(double noise, double offset = 0.3, std::uint64_t seed = 42) {
    SynthConfig cfg = SynthConfig::defaults();
    cfg.noise_scale = noise;
    cfg.speaker_offset_scale = offset;
    cfg.seed = seed;
    return generate_corpus(cfg);
}

AbxReport score(const FeatureArchive& a, const std::vector<ItemSegment>& items, SpeakerMode mode,
                unsigned jobs = 1) {
    ScoreOptions o;
    o.jobs = jobs;
    return score_corpus(a, items, mode, TaskKind::phone, nullptr, o);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        rows.push_back(f);
    }
    return rows;
}

// ---------------------------------------------------------------------------

Outcome brute_force_equivalence() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t cells = 0, empty = 0, max_segments = 0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const auto corpus = fixture::random_corpus(seed);
        max_segments = std::max(max_segments, corpus.items.size());
        c.expect(corpus.items.size() <= 200, "corpus larger than 200 segments");
        for (SpeakerMode mode : {SpeakerMode::within, SpeakerMode::across}) {
            const auto naive = oracle::naive_abx(corpus.archive, corpus.items, mode);
            if (naive.empty()) {
                ++empty;
                bool threw = false;
                try {
                    score(corpus.archive, corpus.items, mode);
                } catch (const Error& e) {
                    threw = e.kind() == ErrorKind::empty_task;
                }
                c.expect(threw, "seed " + std::to_string(seed) + ": expected empty task");
                continue;
            }
            const auto report = score(corpus.archive, corpus.items, mode);
            c.expect(report.per_cell.size() == naive.size(), "seed " + std::to_string(seed) + ": cell count differs");
            for (const auto& s : report.per_cell) {
                const oracle::CellId id{s.key.pair.first, s.key.pair.second, s.key.context.prev,
                                        s.key.context.next, s.key.speaker_ab, s.key.speaker_x};
                const auto it = naive.find(id);
                if (it == naive.end()) {
                    c.expect(false, "seed " + std::to_string(seed) + ": unexpected cell");
                    continue;
                }
                c.expect(s.epsilon == it->second.epsilon && s.eta_xy == it->second.eta_xy &&
                             s.eta_yx == it->second.eta_yx,
                         "seed " + std::to_string(seed) + ": epsilon differs");
                ++cells;
            }
            c.expect(std::abs(report.overall - oracle::naive_overall(naive)) <= 1e-15, "overall differs");
        }
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 60.0, "runtime " + fmt(secs) + " s");
    c.expect(cells > 0, "no cells compared");
    return c.done(std::to_string(cells) + " cells bit-equal over 25 corpora x 2 conditions (" +
                  std::to_string(empty) + " empty tasks agreed, max " + std::to_string(max_segments) +
                  " segments), " + fmt(secs) + " s");
}

Outcome analytic_oracles() {
    Check c;
    std::string notes;
    for (double offset : {0.0, 0.3}) {
        const auto corpus = synth(0.0, offset);
        for (SpeakerMode mode : {SpeakerMode::within, SpeakerMode::across}) {
            const auto r = score(corpus.archive, corpus.items, mode);
            const std::string shown = report_to_json_value(r)["overall"];
            c.expect(r.overall == 0.0 && shown == "0.000000",
                     std::string("one-hot ") + to_string(mode) + " overall " + shown);
        }
    }
    SynthConfig cfg = SynthConfig::defaults();
    for (auto& p : cfg.phones) p.mean = std::vector<double>(cfg.dim, 0.5);
    cfg.noise_scale = 0.0;
    const auto flat = generate_corpus(cfg);
    for (SpeakerMode mode : {SpeakerMode::within, SpeakerMode::across}) {
        const auto r = score(flat.archive, flat.items, mode);
        const std::string shown = report_to_json_value(r)["overall"];
        c.expect(r.overall == 0.5 && shown == "0.500000",
                 std::string("constant ") + to_string(mode) + " overall " + shown);
    }
    return c.done("one-hot noise-free 0.000000 (within, across); constant features 0.500000 (within, across)");
}

Outcome scale_invariance() {
    Check c;
    TempDir tmp("scale");
    std::vector<fixture::Corpus> corpora;
    for (double noise : {0.1, 0.4}) {
        auto s = synth(noise);
        corpora.push_back({s.archive, s.items});
    }
    for (std::uint64_t seed : {3, 4, 7, 10}) corpora.push_back(fixture::random_corpus(seed));
    std::size_t compared = 0;
    for (std::size_t i = 0; i < corpora.size(); ++i) {
        const auto base = tmp / ("c" + std::to_string(i));
        const auto big = tmp / ("c" + std::to_string(i) + "x");
        fixture::write_corpus(corpora[i], base);
        // 2.5x of a float32 value need not be a float32, so the scaled copy
        // is stored in the text format, which round-trips doubles.
        fixture::write_corpus({fixture::scaled(corpora[i].archive, 2.5), corpora[i].items}, big,
                              FeatureFormat::text);
        for (const char* mode : {"within", "across"}) {
            const auto ra = run_cli({"eval", "--features", (base / "features").string(), "--items",
                                     (base / "items.item").string(), "--mode", mode, "--out",
                                     (base / mode).string(), "--jobs", "1", "--with-cells"});
            const auto rb = run_cli({"eval", "--features", (big / "features").string(), "--items",
                                     (base / "items.item").string(), "--mode", mode, "--out",
                                     (big / mode).string(), "--jobs", "1", "--with-cells"});
            if (ra.code == cli::kExitEmptyTask && rb.code == cli::kExitEmptyTask) continue;
            c.expect(ra.code == 0 && rb.code == 0, "eval failed: " + ra.err + rb.err);
            const auto a = fixture::read_file(base / mode / "report.json");
            const auto b = fixture::read_file(big / mode / "report.json");
            c.expect(!a.empty() && a == b, "report.json differs for corpus " + std::to_string(i) + " " + mode);
            ++compared;
        }
    }
    return c.done(std::to_string(compared) + " report.json pairs byte-identical under x2.5");
}

Outcome parallel_determinism() {
    Check c;
    TempDir tmp("jobs");
    std::vector<fixture::Corpus> corpora;
    {
        auto s = synth(0.4);
        corpora.push_back({s.archive, s.items});
    }
    corpora.push_back(fixture::random_corpus(11));
    corpora.push_back(fixture::random_corpus(12));
    std::size_t compared = 0;
    for (std::size_t i = 0; i < corpora.size(); ++i) {
        const auto dir = tmp / ("c" + std::to_string(i));
        fixture::write_corpus(corpora[i], dir);
        for (const char* mode : {"within", "across"}) {
            std::string reports[2];
            int k = 0;
            for (const char* jobs : {"1", "8"}) {
                const auto out = dir / (std::string(mode) + jobs);
                const auto r = run_cli({"eval", "--features", (dir / "features").string(), "--items",
                                        (dir / "items.item").string(), "--mode", mode, "--out", out.string(),
                                        "--jobs", jobs, "--with-cells"});
                c.expect(r.code == 0 || r.code == cli::kExitEmptyTask, "eval failed: " + r.err);
                reports[k++] = r.code == 0 ? fixture::read_file(out / "report.json") + fixture::read_file(out / "pairwise.csv")
                                           : std::string("empty");
            }
            c.expect(reports[0] == reports[1], "jobs 1 vs 8 differ on corpus " + std::to_string(i) + " " + mode);
            ++compared;
        }
    }
    return c.done(std::to_string(compared) + " runs byte-identical for --jobs 1 and --jobs 8");
}

Outcome dtw_oracle() {
    Check c;
    std::size_t pairs = 0;
    double worst = 0.0;
    for (std::uint64_t seed : {21, 22, 23, 24}) {
        const auto corpus = fixture::random_corpus(seed);
        std::vector<FrameMatrix> segs;
        for (const auto& it : corpus.items) segs.push_back(segment_frames(it, corpus.archive));
        for (std::size_t i = 0; i < segs.size(); ++i)
            for (std::size_t j = 0; j < segs.size(); ++j) {
                if (segs[i].rows() > 5 || segs[j].rows() > 5) continue;
                const double dp = dtw_dissimilarity(segs[i], segs[j]);
                const double ref = oracle::dtw_enumerate(segs[i], segs[j]).mean;
                worst = std::max(worst, std::abs(dp - ref));
                ++pairs;
            }
    }
    c.expect(worst <= 1e-12, "max deviation " + fmt(worst));
    c.expect(pairs > 1000, "only " + std::to_string(pairs) + " pairs");
    return c.done(std::to_string(pairs) + " pairs, max |dp - enumeration| = " + fmt(worst));
}

Outcome monotone_degradation() {
    Check c;
    std::string trace;
    for (SpeakerMode mode : {SpeakerMode::within, SpeakerMode::across}) {
        double prev = -1.0;
        trace += std::string(to_string(mode)) + " [";
        for (double noise : {0.0, 0.1, 0.2, 0.4, 0.8}) {
            const auto corpus = synth(noise);
            const auto r = score(corpus.archive, corpus.items, mode);
            c.expect(r.metadata.comparisons >= 1000, "only " + std::to_string(r.metadata.comparisons) + " comparisons");
            c.expect(prev < 0 || r.overall >= prev - 0.02, "drop at noise " + fmt(noise));
            trace += (prev < 0 ? "" : " ") + format_rate(r.overall);
            prev = r.overall;
        }
        trace += "] ";
    }
    return c.done(trace);
}

Outcome aggregation() {
    Check c;
    TempDir tmp("agg");
    // Phoneme level from pairwise.csv.
    {
        const auto corpus = synth(0.8);
        fixture::write_corpus({corpus.archive, corpus.items}, tmp / "phone");
        const auto dir = tmp / "phone";
        auto r = run_cli({"eval", "--features", (dir / "features").string(), "--items", (dir / "items.item").string(),
                          "--mode", "across", "--out", (dir / "eval").string()});
        c.expect(r.code == 0, "eval: " + r.err);
        r = run_cli({"analyze", "phoneme", "--pairwise", (dir / "eval" / "pairwise.csv").string(), "--out",
                     (dir / "phon").string()});
        c.expect(r.code == 0, "analyze phoneme: " + r.err);
        const json report = json::parse(fixture::read_file(dir / "phon" / "phoneme.json"));
        // Spreadsheet-style re-sum.
        std::map<std::string, std::pair<double, int>> acc;
        for (const auto& row : csv_rows(fixture::read_file(dir / "eval" / "pairwise.csv"))) {
            if (row.size() != 6 || row[0] == "category_x") continue;
            const double v = std::stod(row[5]);
            for (const auto& p : {row[0], row[1]}) {
                acc[p].first += v;
                acc[p].second += 1;
            }
        }
        c.expect(acc.size() == report["rates"].size(), "phone count differs");
        for (const auto& [p, sv] : acc) {
            const double xi = report["rates"].value(p, json::object()).value("xi", -1.0);
            c.expect(std::abs(xi - sv.first / sv.second) <= 1e-9, "xi(" + p + ") differs");
        }
    }
    // Attribute level: AF task through the CLI, then a re-sum of pairwise.csv.
    std::size_t af_rows = 0;
    {
        SynthConfig cfg = SynthConfig::defaults();
        cfg.phones.clear();
        for (const char* p : {"CH", "JH", "W", "L", "F", "S", "P", "T", "M", "N"}) cfg.phones.push_back({p, {}});
        cfg.dim = 10;
        cfg.noise_scale = 0.6;
        const auto corpus = generate_corpus(cfg);
        const auto dir = tmp / "af";
        fixture::write_corpus({corpus.archive, corpus.items}, dir);
        auto r = run_cli({"eval", "--features", (dir / "features").string(), "--items", (dir / "items.item").string(),
                          "--mode", "within", "--task", "af", "--af-table", "english-moa", "--out",
                          (dir / "eval").string()});
        c.expect(r.code == 0, "af eval: " + r.err);
        const auto rows = csv_rows(fixture::read_file(dir / "eval" / "pairwise.csv"));
        af_rows = rows.size() - 1;
        c.expect(af_rows <= 10, "more than 10 MoA pairs");
        fixture::write_file(dir / "attrs.txt", "Affricate Approximant Fricative Stop Nasal\n");
        r = run_cli({"analyze", "phoneme", "--pairwise", (dir / "eval" / "pairwise.csv").string(), "--inventory",
                     (dir / "attrs.txt").string(), "--out", (dir / "attr").string()});
        c.expect(r.code == 0, "analyze attributes: " + r.err);
        const json attr = json::parse(fixture::read_file(dir / "attr" / "phoneme.json"));
        const json rep = json::parse(fixture::read_file(dir / "eval" / "report.json"));
        std::map<std::string, std::pair<double, int>> acc;
        for (const auto& row : rows) {
            if (row.size() != 6 || row[0] == "category_x") continue;
            for (const auto& a : {row[0], row[1]}) {
                acc[a].first += std::stod(row[5]);
                acc[a].second += 1;
            }
        }
        for (const auto& [a, sv] : acc) {
            const double mean = sv.first / sv.second;
            c.expect(std::abs(attr["rates"][a]["xi"].get<double>() - mean) <= 1e-9, "attribute " + a + " differs");
            // report.json renders 6 digits from full-precision pairwise rates.
            c.expect(std::abs(std::stod(rep["attributes"][a].get<std::string>()) - mean) <= 1e-6,
                     "report attribute " + a + " differs");
        }
        // Library level at full precision.
        const AfTable moa = builtin_af_table("english-moa");
        ScoreOptions o;
        const auto lib = score_corpus(corpus.archive, corpus.items, SpeakerMode::within, TaskKind::af, &moa, o);
        const auto rates = af_attribute_rates(lib.pairwise);
        for (const auto& [a, v] : rates.rates) {
            double s = 0;
            int n = 0;
            for (const auto& [pair, rate] : lib.pairwise)
                if (pair.first == a || pair.second == a) s += rate, ++n;
            c.expect(std::abs(v - s / n) <= 1e-9, "library attribute " + a + " differs");
        }
    }
    // Golden articulatory tables, transcribed as grids.
    std::size_t golden = 0;
    {
        const std::vector<std::string> poa{"Bilabial", "Labiodental", "Dental", "Alveolar",
                                           "Postalveolar", "Palatal", "Velar", "Glottal"};
        const std::vector<std::pair<std::string, std::vector<std::string>>> moa_rows{
            {"Affricate", {"", "", "", "", "CH JH", "", "", ""}},
            {"Approximant", {"W", "", "", "L", "R", "Y", "", ""}},
            {"Fricative", {"", "F V", "TH DH", "S Z", "SH ZH", "", "", "HH"}},
            {"Stop", {"P B", "", "", "T D", "", "", "K G", ""}},
            {"Nasal", {"M", "", "", "N", "", "", "NG", ""}}};
        const AfTable moa = builtin_af_table("english-moa"), poat = builtin_af_table("english-poa");
        std::size_t consonants = 0;
        for (const auto& [manner, cells] : moa_rows)
            for (std::size_t j = 0; j < cells.size(); ++j) {
                std::istringstream ss(cells[j]);
                std::string ph;
                while (ss >> ph) {
                    ++consonants;
                    c.expect(moa.lookup(ph).attribute == manner, ph + " MoA");
                    c.expect(poat.lookup(ph).attribute == poa[j], ph + " PoA");
                    golden += 2;
                }
            }
        c.expect(moa.entries().size() == consonants && poat.entries().size() == consonants, "consonant count");
        const std::vector<std::string> back{"Front", "Central", "Back"};
        const std::vector<std::pair<std::string, std::vector<std::string>>> vowel_rows{
            {"Close", {"IY IH", "", "UW UH"}}, {"Mid", {"EH", "ER AH", "AO"}}, {"Open", {"AE", "AA", ""}}};
        const AfTable height = builtin_af_table("english-height"), backness = builtin_af_table("english-backness");
        std::size_t vowels = 0;
        for (const auto& [h, cells] : vowel_rows)
            for (std::size_t j = 0; j < cells.size(); ++j) {
                std::istringstream ss(cells[j]);
                std::string ph;
                while (ss >> ph) {
                    ++vowels;
                    c.expect(height.lookup(ph).attribute == h, ph + " height");
                    c.expect(backness.lookup(ph).attribute == back[j], ph + " backness");
                    golden += 2;
                }
            }
        c.expect(height.entries().size() == vowels && backness.entries().size() == vowels, "vowel count");
        for (const char* d : {"AW", "AY", "EY", "OW", "OY"}) {
            c.expect(height.lookup(d).status == AfTable::Status::excluded, std::string(d) + " not excluded");
            c.expect(backness.lookup(d).status == AfTable::Status::excluded, std::string(d) + " not excluded");
        }
    }
    return c.done("xi and attribute rates match re-sums within 1e-9 (" + std::to_string(af_rows) +
                  " MoA pair rows); " + std::to_string(golden) + " golden table cells match");
}

std::vector<FrameLabelTrack> tracks(const std::string& utt,
                                    const std::vector<std::tuple<int, int, std::string>>& spans_in_frames) {
    FrameLabelTrack t{utt, {}};
    for (const auto& [a, b, l] : spans_in_frames)
        t.spans.push_back({Nanoseconds(a * 10'000'000LL), Nanoseconds(b * 10'000'000LL), l});
    return {t};
}

Outcome confusion_metrics() {
    Check c;
    const Microseconds period{10000};
    const auto rows_sum_to_one = [&](const ConfusionMatrix& cm) {
        for (const auto& row : cm.values) {
            double s = 0;
            for (double v : row) s += v;
            c.expect(std::abs(s - 1.0) <= 1e-9, "row sum " + fmt(s, 17));
        }
    };
    // Identity labeling.
    const auto truth = tracks("u1", {{0, 10, "AA"}, {10, 17, "B"}, {17, 30, "IY"}, {30, 33, "S"}});
    {
        const auto cm = confusion_matrix(truth, truth, period);
        rows_sum_to_one(cm);
        for (const auto& [p, co] : co_occurrence(cm)) c.expect(co.p_co == 1.0 && co.argmax == p, "identity " + p);
    }
    // Uniform labeling over M symbols.
    for (int m : {2, 3, 4, 7}) {
        std::vector<std::tuple<int, int, std::string>> hyp;
        for (int j = 0; j < m; ++j) hyp.push_back({j * 5, (j + 1) * 5, "h" + std::to_string(j)});
        const auto cm = confusion_matrix(tracks("u", {{0, 5 * m, "Q"}}), tracks("u", hyp), period);
        rows_sum_to_one(cm);
        const double p = co_occurrence(cm).at("Q").p_co;
        c.expect(std::abs(p - 1.0 / m) <= 1e-12, "uniform M=" + std::to_string(m) + " p_co " + fmt(p, 17));
    }
    // 40/35/25.
    {
        const auto cm = confusion_matrix(tracks("u", {{0, 100, "Q"}}),
                                         tracks("u", {{0, 40, "o"}, {40, 75, "j"}, {75, 100, "e"}}), period);
        rows_sum_to_one(cm);
        const auto& row = cm.values.at(0);
        c.expect(row[cm.col_index("o")] == 0.40 && row[cm.col_index("j")] == 0.35 && row[cm.col_index("e")] == 0.25,
                 "40/35/25 row");
    }
    // Through the CLI.
    TempDir tmp("conf");
    {
        std::ofstream out(tmp / "truth.tsv");
        write_label_tracks(truth, out);
    }
    const auto r = run_cli({"analyze", "confusion", "--truth", (tmp / "truth.tsv").string(), "--hyp",
                            (tmp / "truth.tsv").string(), "--out", (tmp / "out").string()});
    c.expect(r.code == 0, "cli: " + r.err);
    for (const auto& row : csv_rows(fixture::read_file(tmp / "out" / "pco.csv")))
        if (row.size() == 4 && row[0] != "phone") c.expect(row[1] == "1.000000", "cli p_co " + row[1]);
    return c.done("identity 1.0, uniform 1/M within 1e-12 (M=2,3,4,7), 40/35/25 exact, rows sum to 1");
}

Outcome correlation() {
    Check c;
    const std::vector<double> xs{0.1, 0.35, 0.2, 0.9, 0.55, 0.7, 0.05};
    std::vector<double> lin, anti;
    for (double x : xs) {
        lin.push_back(2 * x + 1);
        anti.push_back(-x);
    }
    const double r1 = pearson_correlation(xs, lin), r2 = pearson_correlation(xs, anti);
    c.expect(r1 == 1.0, "linear r = " + fmt(r1, 17));
    c.expect(r2 == -1.0, "anti-linear r = " + fmt(r2, 17));
    c.expect(spearman_correlation(xs, lin) == 1.0 && spearman_correlation(xs, anti) == -1.0, "spearman");
    const std::vector<double> flat(xs.size(), 0.3);
    for (int side = 0; side < 2; ++side) {
        bool undefined = false;
        try {
            side ? pearson_correlation(xs, flat) : pearson_correlation(flat, xs);
        } catch (const Error& e) {
            undefined = e.kind() == ErrorKind::undefined;
        }
        c.expect(undefined, "constant input not rejected");
    }
    // CLI: p_co against reductions that are linear in it.
    TempDir tmp("corr");
    std::string base = "phone,rate\n", impr = "phone,rate\n", pco = "phone,p_co,argmax,frames\n";
    const std::vector<std::string> phones{"AA", "IY", "S", "T", "M"};
    for (std::size_t i = 0; i < phones.size(); ++i) {
        const double p = 0.2 + 0.15 * static_cast<double>(i);
        base += phones[i] + ",0.5\n";
        impr += phones[i] + "," + std::to_string(0.5 - 0.25 * p) + "\n";
        pco += phones[i] + "," + std::to_string(p) + ",x,10\n";
    }
    fixture::write_file(tmp / "b.csv", base);
    fixture::write_file(tmp / "i.csv", impr);
    fixture::write_file(tmp / "p.csv", pco);
    const auto r = run_cli({"analyze", "correlate", "--baseline", (tmp / "b.csv").string(), "--improved",
                            (tmp / "i.csv").string(), "--pco", (tmp / "p.csv").string(), "--out",
                            (tmp / "out").string()});
    c.expect(r.code == 0, "cli: " + r.err);
    double cli_r = 0;
    if (r.code == 0) cli_r = json::parse(fixture::read_file(tmp / "out" / "correlation.json"))["r"].get<double>();
    c.expect(std::abs(cli_r - 1.0) <= 1e-12, "cli r = " + fmt(cli_r, 17));
    return c.done("r = 1.0 and -1.0 exactly, constant input -> undefined, CLI r = " + fmt(cli_r, 17));
}

Outcome apc_properties() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    // Gradient check.
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ApcConfig cfg;
        cfg.layers = 2;
        cfg.hidden_dim = 8;
        cfg.input_dim = 3;
        cfg.cell = seed % 2 ? CellKind::lstm : CellKind::simple_rnn;
        const auto g = gradient_check_sampled(cfg, seed);
        c.expect(!g.inconclusive, "seed " + std::to_string(seed) + " inconclusive");
        worst = std::max(worst, g.max_relative_error);
    }
    c.expect(worst < 1e-4, "gradcheck " + fmt(worst));
    // Causality.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed * 7919);
        ApcConfig cfg;
        cfg.layers = 1 + rng.below(3);
        cfg.hidden_dim = 4 + rng.below(8);
        cfg.input_dim = 2 + rng.below(4);
        cfg.cell = rng.below(2) ? CellKind::lstm : CellKind::simple_rnn;
        const ApcModel model = ApcModel::initialise(cfg, rng);
        const std::size_t T = 12;
        std::vector<double> v(T * cfg.input_dim);
        for (double& e : v) e = rng.normal();
        const FrameMatrix x(T, cfg.input_dim, v);
        const std::size_t t = 1 + rng.below(T - 1);
        for (std::size_t k = t * cfg.input_dim; k < v.size(); ++k) v[k] += rng.normal();
        const FrameMatrix y(T, cfg.input_dim, v);
        const auto a = forward(model, x), b = forward(model, y);
        for (std::size_t r = 0; r < t; ++r)
            for (std::size_t k = 0; k < cfg.input_dim; ++k)
                c.expect(a.predictions(r, k) == b.predictions(r, k), "causality broken");
        c.expect(a.predictions.row(t)[0] != b.predictions.row(t)[0] || cfg.layers == 0, "perturbation had no effect");
    }
    // Deterministic scalar AR(1), default budget.
    double reduction = 0.0;
    {
        Rng rng(5);
        std::map<UttId, FrameMatrix> utts;
        for (int u = 0; u < 8; ++u) {
            std::vector<double> v(30);
            v[0] = rng.uniform(-1.0, 1.0);
            for (std::size_t t = 1; t < v.size(); ++t) v[t] = 0.9 * v[t - 1];
            utts.emplace("ar" + std::to_string(u), FrameMatrix(v.size(), 1, v));
        }
        const FeatureArchive corpus(1, Microseconds(10000), std::move(utts));
        const auto run1 = train(ApcConfig{}, corpus);
        reduction = 1.0 - run1.loss_curve.back() / run1.loss_curve.front();
        c.expect(reduction >= 0.9, "AR(1) reduction " + fmt(reduction));
        const auto run2 = train(ApcConfig{}, corpus);
        c.expect(encode_checkpoint(run1.model) == encode_checkpoint(run2.model), "checkpoints differ");
        c.expect(run1.loss_curve == run2.loss_curve, "loss curves differ");
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 120.0, "runtime " + fmt(secs) + " s");
    return c.done("gradcheck max " + fmt(worst) + " over 20 seeds, causality on 10 models, AR(1) reduction " +
                  fmt(100 * reduction) + "%, identical checkpoints, " + fmt(secs) + " s");
}

Outcome pipeline() {
    Check c;
    TempDir tmp("pipe");
    std::string trace;
    for (const char* noise : {"0", "0.1", "0.4"}) {
        const auto dir = tmp / (std::string("n") + noise);
        auto r = run_cli({"synth", "--seed", "42", "--noise", noise, "--out", (dir / "corpus").string()});
        c.expect(r.code == 0, "synth: " + r.err);
        r = run_cli({"apc", "train", "--features", (dir / "corpus" / "features").string(), "--out",
                     (dir / "model").string()});
        c.expect(r.code == 0, "train: " + r.err);
        r = run_cli({"apc", "extract", "--model", (dir / "model" / "model.apc").string(), "--features",
                     (dir / "corpus" / "features").string(), "--out", (dir / "apc").string()});
        c.expect(r.code == 0, "extract: " + r.err);
        for (const char* mode : {"within", "across"}) {
            double rates[2];
            int k = 0;
            for (const char* feats : {"apc", "raw"}) {
                const auto fdir = std::string(feats) == "raw" ? dir / "corpus" / "features" : dir / "apc";
                const auto out = dir / (std::string("eval-") + feats + mode);
                r = run_cli({"eval", "--features", fdir.string(), "--items", (dir / "corpus" / "items.item").string(),
                             "--mode", mode, "--out", out.string()});
                c.expect(r.code == 0, std::string("eval ") + feats + ": " + r.err);
                rates[k++] = r.code == 0 ? std::stod(json::parse(fixture::read_file(out / "report.json"))["overall"]
                                                         .get<std::string>())
                                         : 1.0;
            }
            c.expect(rates[0] <= rates[1] + 0.02, std::string("APC worse than raw at noise ") + noise);
            trace += std::string(mode) + "@" + noise + ": apc " + format_rate(rates[0]) + " raw " +
                     format_rate(rates[1]) + "; ";
        }
    }
    return c.done(trace);
}

Outcome round_trips() {
    Check c;
    TempDir tmp("rt");
    std::size_t rejected = 0;
    // Binary archive.
    const auto corpus = synth(0.2);
    write_feature_archive(corpus.archive, tmp / "a", FeatureFormat::binary);
    write_feature_archive(load_feature_archive(tmp / "a", FeatureFormat::binary), tmp / "b", FeatureFormat::binary);
    for (const auto& e : fs::directory_iterator(tmp / "a"))
        c.expect(fixture::read_file(e.path()) == fixture::read_file(tmp / "b" / e.path().filename()),
                 "archive bytes differ");
    // Checkpoint.
    ApcConfig cfg;
    cfg.input_dim = 4;
    Rng rng(9);
    const ApcModel model = ApcModel::initialise(cfg, rng);
    save_checkpoint(model, tmp / "m.apc");
    save_checkpoint(load_checkpoint(tmp / "m.apc"), tmp / "m2.apc");
    c.expect(fixture::read_file(tmp / "m.apc") == fixture::read_file(tmp / "m2.apc"), "checkpoint bytes differ");
    c.expect(load_checkpoint(tmp / "m.apc") == model, "checkpoint parameters differ");

    // Malformed inputs through the CLI.
    fixture::write_corpus({corpus.archive, corpus.items}, tmp / "good");
    const std::string feats = (tmp / "good" / "features").string();
    const std::string header(kItemHeader);
    const std::string good_row = corpus.items.front().utt + " 0.00 0.04 AA B D spk1\n";
    struct Case {
        std::string name, items_text;
        int code;
        std::string needle;
    };
    const std::vector<Case> item_cases{
        {"missing header", good_row, cli::kExitData, ":1"},
        {"offset <= onset", header + "\n" + good_row + corpus.items.front().utt + " 0.25 0.10 AA B D spk1\n",
         cli::kExitData, ":3"},
        {"non-numeric time", header + "\n" + corpus.items.front().utt + " 0.1x 0.25 AA B D spk1\n", cli::kExitData,
         ":2"},
        {"short row", header + "\n" + corpus.items.front().utt + " 0.10 0.25 AA B D\n", cli::kExitData, ":2"},
        {"unknown utterance", header + "\nnope 0.10 0.25 AA B D spk1\n", cli::kExitData, "nope"},
        {"header only", header + "\n", cli::kExitEmptyTask, ""},
    };
    for (std::size_t i = 0; i < item_cases.size(); ++i) {
        const auto& k = item_cases[i];
        const auto path = tmp / ("bad" + std::to_string(i) + ".item");
        fixture::write_file(path, k.items_text);
        const auto out = tmp / ("out" + std::to_string(i));
        const auto r = run_cli({"eval", "--features", feats, "--items", path.string(), "--out", out.string()});
        const bool ok = r.code == k.code && r.err.find(k.needle) != std::string::npos && !fs::exists(out);
        c.expect(ok, k.name + ": exit " + std::to_string(r.code) + " " + r.err);
        rejected += ok;
    }
    // Feature archive malformations.
    const std::string items = (tmp / "good" / "items.item").string();
    const auto bad_archive = [&](const std::string& name, const std::function<void(const fs::path&)>& damage) {
        const auto dir = tmp / ("feat-" + name);
        fs::create_directories(dir);
        fs::copy(tmp / "good" / "features", dir, fs::copy_options::recursive);
        damage(dir);
        const auto r = run_cli({"eval", "--features", dir.string(), "--items", items, "--out", (dir / "o").string()});
        const bool ok = r.code == cli::kExitData && !fs::exists(dir / "o");
        c.expect(ok, name + ": exit " + std::to_string(r.code));
        rejected += ok;
    };
    const auto first_file = [](const fs::path& dir) {
        std::vector<fs::path> v;
        for (const auto& e : fs::directory_iterator(dir)) v.push_back(e.path());
        std::sort(v.begin(), v.end());
        return v.front();
    };
    bad_archive("magic", [&](const fs::path& d) {
        auto p = first_file(d);
        auto b = fixture::read_file(p);
        b[0] = 'X';
        fixture::write_file(p, b);
    });
    bad_archive("payload", [&](const fs::path& d) {
        auto p = first_file(d);
        auto b = fixture::read_file(p);
        b.resize(b.size() - 4);
        fixture::write_file(p, b);
    });
    bad_archive("nonfinite", [&](const fs::path& d) {
        auto p = first_file(d);
        auto b = fixture::read_file(p);
        const float inf = INFINITY;
        std::memcpy(b.data() + 20, &inf, 4);
        fixture::write_file(p, b);
    });
    bad_archive("dim", [&](const fs::path& d) {
        write_feature_archive(FeatureArchive(3, Microseconds(10000), {{"zzz", FrameMatrix(2, 3, {1, 2, 3, 4, 5, 6})}}),
                              d, FeatureFormat::binary);
    });
    bad_archive("empty", [&](const fs::path& d) {
        for (const auto& e : fs::directory_iterator(d)) fs::remove(e.path());
    });
    // Label tracks.
    const std::vector<std::pair<std::string, std::string>> label_cases{
        {"overlap", "u1\t0.0\t0.5\tAA\nu1\t0.4\t0.9\tB\n"},
        {"reversed span", "u1\t0.5\t0.4\tAA\n"},
        {"non-numeric", "u1\tzero\t0.4\tAA\n"},
        {"field count", "u1\t0.0\t0.4\n"},
    };
    for (std::size_t i = 0; i < label_cases.size(); ++i) {
        const auto path = tmp / ("lab" + std::to_string(i) + ".tsv");
        fixture::write_file(path, label_cases[i].second);
        const auto out = tmp / ("lout" + std::to_string(i));
        const auto r = run_cli({"analyze", "confusion", "--truth", path.string(), "--hyp", path.string(), "--out",
                                out.string()});
        const bool ok = r.code == cli::kExitData && r.err.find(path.string()) != std::string::npos && !fs::exists(out);
        c.expect(ok, label_cases[i].first + ": exit " + std::to_string(r.code) + " " + r.err);
        rejected += ok;
    }
    // Usage errors.
    const auto usage = run_cli({"eval", "--features", feats, "--out", (tmp / "u").string()});
    c.expect(usage.code == cli::kExitUsage && usage.err.find("Usage") != std::string::npos, "missing --items");
    rejected += usage.code == cli::kExitUsage;
    return c.done("archive and checkpoint bytes reproduced; " + std::to_string(rejected) +
                  " malformed inputs rejected with documented exit codes and no partial output");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"brute-force equivalence", brute_force_equivalence},
        {"analytic oracles", analytic_oracles},
        {"scale invariance", scale_invariance},
        {"determinism under parallelism", parallel_determinism},
        {"DTW path enumeration", dtw_oracle},
        {"monotone degradation", monotone_degradation},
        {"phoneme/AF aggregation", aggregation},
        {"confusion metrics", confusion_metrics},
        {"correlation", correlation},
        {"APC", apc_properties},
        {"end-to-end pipeline", pipeline},
        {"format round-trips", round_trips},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
