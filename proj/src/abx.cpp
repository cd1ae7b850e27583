#include "abxlab/abx.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_map>

#include "abxlab/error.hpp"
#include "abxlab/random.hpp"
#include "parallel.hpp"
#include "text_util.hpp"

namespace abxlab {

const char* to_string(TaskKind kind) noexcept { return kind == TaskKind::phone ? "phone" : "af"; }
const char* to_string(SpeakerMode mode) noexcept { return mode == SpeakerMode::within ? "within" : "across"; }

TaskKind parse_task_kind(std::string_view s) {
    if (s == "phone") return TaskKind::phone;
    if (s == "af") return TaskKind::af;
    throw Error(ErrorKind::argument, "task must be 'phone' or 'af', got '" + std::string(s) + "'");
}

SpeakerMode parse_speaker_mode(std::string_view s) {
    if (s == "within") return SpeakerMode::within;
    if (s == "across") return SpeakerMode::across;
    throw Error(ErrorKind::argument, "mode must be 'within' or 'across', got '" + std::string(s) + "'");
}

CategoryPair CategoryPair::of(std::string a, std::string b) {
    if (b < a) std::swap(a, b);
    return {std::move(a), std::move(b)};
}

// ---------------------------------------------------------------------------
// Cell construction

std::optional<std::string> segment_category(const ItemSegment& seg, TaskKind kind, const AfTable* table) {
    if (kind == TaskKind::phone) return seg.phone;
    const auto hit = table->lookup(seg.phone);
    switch (hit.status) {
    case AfTable::Status::mapped: return hit.attribute;
    case AfTable::Status::excluded: return std::nullopt;
    case AfTable::Status::unknown: break;
    }
    throw Error(ErrorKind::lookup, "phone '" + seg.phone + "' is not in AF table " + table->feature_name());
}

namespace {

using Group = std::map<std::string, std::vector<std::size_t>>;  // category -> segment indices
using BySpeaker = std::map<std::string, Group>;

const std::vector<std::size_t>* find_set(const Group& g, const std::string& category) {
    const auto it = g.find(category);
    return it == g.end() ? nullptr : &it->second;
}

TaskCell make_cell(TaskKind kind, SpeakerMode mode, const std::string& cx, const std::string& cy,
                   const Context& ctx, const std::string& s_ab, const std::string& s_x, const Group& ab,
                   const Group& x) {
    TaskCell cell;
    cell.kind = kind;
    cell.mode = mode;
    cell.category_x = cx;
    cell.category_y = cy;
    cell.context = ctx;
    cell.speaker_ab = s_ab;
    cell.speaker_x = s_x;
    cell.set_x_ab = ab.at(cx);
    cell.set_y_ab = ab.at(cy);
    cell.set_x_x = x.at(cx);
    cell.set_y_x = x.at(cy);
    return cell;
}

}  // namespace

CellBuild build_cells(std::span<const ItemSegment> segments, SpeakerMode mode, TaskKind kind,
                      const AfTable* af_table, const CellLimits& limits) {
    if ((kind == TaskKind::af) != (af_table != nullptr))
        throw Error(ErrorKind::argument, "an AF table is required for, and only for, the af task");

    std::map<Context, BySpeaker> groups;
    std::set<std::string> unmapped;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        std::optional<std::string> category;
        if (kind == TaskKind::af) {
            const auto hit = af_table->lookup(seg.phone);
            if (hit.status == AfTable::Status::unknown) {
                unmapped.insert(seg.phone);
                continue;
            }
            if (hit.status == AfTable::Status::excluded) continue;
            category = hit.attribute;
        } else {
            category = seg.phone;
        }
        groups[Context{seg.prev, seg.next}][seg.speaker][*category].push_back(i);
    }
    if (!unmapped.empty()) {
        std::string list;
        for (const auto& p : unmapped) list += (list.empty() ? "" : ", ") + p;
        throw Error(ErrorKind::lookup, "phones missing from AF table " + af_table->feature_name() + ": " + list);
    }

    CellBuild out;
    Rng rng(limits.seed);
    for (const auto& [ctx, speakers] : groups) {
        if (mode == SpeakerMode::within) {
            for (const auto& [spk, cats] : speakers) {
                for (auto ix = cats.begin(); ix != cats.end(); ++ix) {
                    for (auto iy = std::next(ix); iy != cats.end(); ++iy) {
                        if (ix->second.size() < 2 || iy->second.size() < 2) {
                            ++out.skipped_size;
                            continue;
                        }
                        out.cells.push_back(make_cell(kind, mode, ix->first, iy->first, ctx, spk, spk, cats, cats));
                    }
                }
            }
            continue;
        }

        // Across: ordered speaker pairs (s_ab supplies A and B, s_x supplies X).
        std::map<std::pair<std::string, std::string>, std::vector<TaskCell>> by_pair;
        for (const auto& [s_ab, ab] : speakers) {
            for (const auto& [s_x, x] : speakers) {
                if (s_ab == s_x) continue;
                for (auto ix = ab.begin(); ix != ab.end(); ++ix) {
                    for (auto iy = std::next(ix); iy != ab.end(); ++iy) {
                        if (!find_set(x, ix->first) || !find_set(x, iy->first)) {
                            ++out.skipped_size;
                            continue;
                        }
                        by_pair[{s_ab, s_x}].push_back(
                            make_cell(kind, mode, ix->first, iy->first, ctx, s_ab, s_x, ab, x));
                    }
                }
            }
        }
        std::vector<std::pair<std::string, std::string>> keys;
        for (const auto& [k, _] : by_pair) keys.push_back(k);
        if (limits.max_speaker_pairs_per_context && keys.size() > *limits.max_speaker_pairs_per_context) {
            rng.shuffle(keys.begin(), keys.end());
            for (std::size_t i = *limits.max_speaker_pairs_per_context; i < keys.size(); ++i)
                out.skipped_limit += by_pair[keys[i]].size();
            keys.resize(*limits.max_speaker_pairs_per_context);
            std::sort(keys.begin(), keys.end());
        }
        for (const auto& k : keys)
            for (auto& cell : by_pair[k]) out.cells.push_back(std::move(cell));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scoring

Eta asymmetric_score(std::span<const std::size_t> ab_x, std::span<const std::size_t> ab_y,
                     std::span<const std::size_t> x_x, SpeakerMode mode, const Dissimilarity& d) {
    if (ab_x.empty() || ab_y.empty() || x_x.empty())
        throw Error(ErrorKind::argument, "ABX sets must be non-empty");
    if (mode == SpeakerMode::within) {
        if (!std::equal(ab_x.begin(), ab_x.end(), x_x.begin(), x_x.end()))
            throw Error(ErrorKind::argument, "within-speaker scoring draws X from the A set");
        if (ab_x.size() < 2) throw Error(ErrorKind::argument, "within-speaker scoring needs |S(x)| >= 2");
    } else {
        for (std::size_t a : ab_x)
            if (std::find(x_x.begin(), x_x.end(), a) != x_x.end())
                throw Error(ErrorKind::argument, "across-speaker A and X sets overlap");
    }

    // Twice the error mass, so half-credit ties stay integral.
    std::uint64_t twice_errors = 0;
    std::uint64_t triples = 0;
    std::vector<double> d_bx(ab_y.size());
    for (std::size_t xi : x_x) {
        for (std::size_t b = 0; b < ab_y.size(); ++b) d_bx[b] = d(ab_y[b], xi);
        for (std::size_t ai : ab_x) {
            if (mode == SpeakerMode::within && ai == xi) continue;
            const double d_ax = d(ai, xi);
            for (double dbx : d_bx) {
                if (d_ax > dbx)
                    twice_errors += 2;
                else if (d_ax == dbx)
                    twice_errors += 1;
            }
            triples += ab_y.size();
        }
    }
    return {static_cast<double>(twice_errors) / static_cast<double>(2 * triples), triples};
}

SegmentStore::SegmentStore(const FeatureArchive& archive, std::span<const ItemSegment> segments, unsigned jobs)
    : frames_(segments.size()) {
    detail::parallel_for(segments.size(), jobs,
                         [&](std::size_t i) { frames_[i] = PreparedFrames(segment_frames(segments[i], archive)); });
}

CellScore pairwise_score(const TaskCell& cell, const SegmentStore& store, const DtwConfig& cfg) {
    std::unordered_map<std::uint64_t, double> memo;
    const Dissimilarity d = [&](std::size_t a, std::size_t x) {
        const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(x);
        if (const auto it = memo.find(key); it != memo.end()) return it->second;
        const double v = dtw_dissimilarity(store[a], store[x], cfg);
        memo.emplace(key, v);
        return v;
    };
    const Eta xy = asymmetric_score(cell.set_x_ab, cell.set_y_ab, cell.set_x_x, cell.mode, d);
    const Eta yx = asymmetric_score(cell.set_y_ab, cell.set_x_ab, cell.set_y_x, cell.mode, d);
    CellScore score;
    score.key = {CategoryPair::of(cell.category_x, cell.category_y), cell.context, cell.speaker_ab, cell.speaker_x};
    // Report eta in the pair's canonical orientation.
    const bool swapped = score.key.pair.first != cell.category_x;
    score.eta_xy = swapped ? yx.value : xy.value;
    score.eta_yx = swapped ? xy.value : yx.value;
    score.epsilon = (score.eta_xy + score.eta_yx) / 2.0;
    score.n_comparisons = xy.comparisons + yx.comparisons;
    return score;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

double mean(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

}  // namespace

AbxReport aggregate(std::span<const CellScore> scores, TaskKind kind, SpeakerMode mode) {
    if (scores.empty()) throw Error(ErrorKind::empty_task, "no cell scores to aggregate");
    AbxReport report;
    report.kind = kind;
    report.mode = mode;
    report.per_cell.assign(scores.begin(), scores.end());
    std::sort(report.per_cell.begin(), report.per_cell.end(),
              [](const CellScore& a, const CellScore& b) { return a.key < b.key; });

    std::map<std::pair<CategoryPair, Context>, std::vector<double>> level1;
    for (const auto& s : report.per_cell) {
        if (!(s.epsilon >= 0.0 && s.epsilon <= 1.0))
            throw Error(ErrorKind::data, "cell error rate outside [0, 1]");
        level1[{s.key.pair, s.key.context}].push_back(s.epsilon);
        report.metadata.comparisons += s.n_comparisons;
    }
    std::map<CategoryPair, std::vector<double>> level2;
    for (const auto& [key, eps] : level1) {
        const double m = mean(eps);
        report.by_context.emplace(key, m);
        level2[key.first].push_back(m);
    }
    std::vector<double> level3;
    for (const auto& [pair, ctx_means] : level2) {
        const double m = mean(ctx_means);
        report.pairwise.emplace(pair, m);
        level3.push_back(m);
    }
    report.overall = mean(level3);
    report.metadata.cells_scored = report.per_cell.size();
    return report;
}

std::string config_hash(SpeakerMode mode, TaskKind kind, const AfTable* af_table, const ScoreOptions& options) {
    std::ostringstream canon;
    canon << "mode=" << to_string(mode) << ";task=" << to_string(kind)
          << ";zero_vector_distance=" << detail::format_double(options.dtw.zero_vector_distance)
          << ";max_speaker_pairs=";
    if (options.limits.max_speaker_pairs_per_context)
        canon << *options.limits.max_speaker_pairs_per_context;
    else
        canon << "none";
    canon << ";seed=" << options.limits.seed;
    if (af_table) {
        canon << ";af=" << af_table->feature_name();
        for (const auto& [p, a] : af_table->entries()) canon << ',' << p << ':' << a;
        for (const auto& p : af_table->excluded()) canon << ",-" << p;
    }
    // 64-bit FNV-1a; identifies a configuration, not a security boundary.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canon.str()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

AbxReport score_corpus(const FeatureArchive& archive, std::span<const ItemSegment> segments, SpeakerMode mode,
                       TaskKind kind, const AfTable* af_table, const ScoreOptions& options) {
    options.dtw.validate();
    CellBuild built = build_cells(segments, mode, kind, af_table, options.limits);
    const SegmentStore store(archive, segments, options.jobs);
    if (built.cells.empty())
        throw Error(ErrorKind::empty_task, "no valid ABX cells (" + std::to_string(built.skipped_size) +
                                               " undersized, " + std::to_string(built.skipped_limit) +
                                               " removed by the speaker-pair limit)");
    std::vector<CellScore> scores(built.cells.size());
    detail::parallel_for(built.cells.size(), options.jobs,
                         [&](std::size_t i) { scores[i] = pairwise_score(built.cells[i], store, options.dtw); });
    AbxReport report = aggregate(scores, kind, mode);
    report.metadata.config_hash = config_hash(mode, kind, af_table, options);
    report.metadata.seed = options.limits.seed;
    report.metadata.max_speaker_pairs = options.limits.max_speaker_pairs_per_context;
    report.metadata.cells_skipped_size = built.skipped_size;
    report.metadata.cells_skipped_limit = built.skipped_limit;
    if (af_table) report.metadata.af_table = af_table->feature_name();
    return report;
}

// ---------------------------------------------------------------------------
// Serialisation

std::string format_rate(double rate) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", rate);
    return buf;
}

nlohmann::json report_to_json_value(const AbxReport& report, bool include_cells) {
    using nlohmann::json;
    json pairwise = json::object();
    for (const auto& [pair, rate] : report.pairwise) pairwise[pair.first][pair.second] = format_rate(rate);
    json contexts = json::array();
    for (const auto& [key, rate] : report.by_context) {
        contexts.push_back({{"category_x", key.first.first},
                            {"category_y", key.first.second},
                            {"context_prev", key.second.prev},
                            {"context_next", key.second.next},
                            {"rate", format_rate(rate)}});
    }
    const auto& md = report.metadata;
    json metadata = {{"config_hash", md.config_hash},
                     {"seed", md.seed},
                     {"cells_scored", md.cells_scored},
                     {"cells_skipped_size", md.cells_skipped_size},
                     {"cells_skipped_limit", md.cells_skipped_limit},
                     {"comparisons", md.comparisons},
                     {"speaker_pairs", report.mode == SpeakerMode::across ? "ordered" : "same"}};
    metadata["max_speaker_pairs"] = md.max_speaker_pairs ? json(*md.max_speaker_pairs) : json(nullptr);
    if (!md.af_table.empty()) metadata["af_table"] = md.af_table;

    json out = {{"task", to_string(report.kind)},
                {"condition", to_string(report.mode)},
                {"overall", format_rate(report.overall)},
                {"pairwise", std::move(pairwise)},
                {"contexts", std::move(contexts)},
                {"metadata", std::move(metadata)}};
    if (include_cells) {
        json cells = json::array();
        for (const auto& c : report.per_cell) {
            cells.push_back({{"category_x", c.key.pair.first},
                             {"category_y", c.key.pair.second},
                             {"context_prev", c.key.context.prev},
                             {"context_next", c.key.context.next},
                             {"speaker_ab", c.key.speaker_ab},
                             {"speaker_x", c.key.speaker_x},
                             {"eta_xy", format_rate(c.eta_xy)},
                             {"eta_yx", format_rate(c.eta_yx)},
                             {"epsilon", format_rate(c.epsilon)},
                             {"comparisons", c.n_comparisons}});
        }
        out["cells"] = std::move(cells);
    }
    return out;
}

std::string report_to_json(const AbxReport& report, bool include_cells) {
    return report_to_json_value(report, include_cells).dump(2) + "\n";
}

std::string report_pairwise_csv(const AbxReport& report) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& [pair, rate] : report.pairwise)
        out += pair.first + "," + pair.second + ",*,*," + to_string(report.mode) + "," + format_rate(rate) + "\n";
    return out;
}

std::string report_contexts_csv(const AbxReport& report) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& [key, rate] : report.by_context)
        out += key.first.first + "," + key.first.second + "," + key.second.prev + "," + key.second.next + "," +
               to_string(report.mode) + "," + format_rate(rate) + "\n";
    return out;
}

}  // namespace abxlab
