#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abxlab/corpus_io.hpp"
#include "abxlab/distance.hpp"
#include "json.hpp"

namespace abxlab {

enum class TaskKind { phone, af };
enum class SpeakerMode { within, across };

const char* to_string(TaskKind kind) noexcept;
const char* to_string(SpeakerMode mode) noexcept;
TaskKind parse_task_kind(std::string_view s);
SpeakerMode parse_speaker_mode(std::string_view s);

struct Context {
    std::string prev;
    std::string next;

    friend auto operator<=>(const Context&, const Context&) = default;
};

/// Unordered category pair stored with first < second.
struct CategoryPair {
    std::string first;
    std::string second;

    static CategoryPair of(std::string a, std::string b);
    friend auto operator<=>(const CategoryPair&, const CategoryPair&) = default;
};

struct CellLimits {
    /// Caps ordered speaker pairs per context in across mode; unset keeps all.
    std::optional<std::size_t> max_speaker_pairs_per_context;
    std::uint64_t seed = 42;
};

/// One ABX scoring unit. Segment sets hold indices into the segment list the
/// cell was built from. In within mode the X sets equal the AB sets and
/// speaker_x equals speaker_ab.
struct TaskCell {
    TaskKind kind = TaskKind::phone;
    SpeakerMode mode = SpeakerMode::within;
    std::string category_x;
    std::string category_y;
    Context context;
    std::string speaker_ab;
    std::string speaker_x;
    std::vector<std::size_t> set_x_ab;
    std::vector<std::size_t> set_y_ab;
    std::vector<std::size_t> set_x_x;
    std::vector<std::size_t> set_y_x;
};

struct CellBuild {
    std::vector<TaskCell> cells;
    std::size_t skipped_size = 0;   // candidate cells below minimum set sizes
    std::size_t skipped_limit = 0;  // cells dropped by speaker-pair subsampling
};

/// Category of a segment: its central phone, or the AF attribute of that
/// phone. Empty optional for phones the AF table excludes.
std::optional<std::string> segment_category(const ItemSegment& seg, TaskKind kind, const AfTable* table);

CellBuild build_cells(std::span<const ItemSegment> segments, SpeakerMode mode, TaskKind kind,
                      const AfTable* af_table, const CellLimits& limits = {});

/// Dissimilarity between the segments at two indices, d(first, second).
using Dissimilarity = std::function<double(std::size_t, std::size_t)>;

struct Eta {
    double value = 0.0;
    std::uint64_t comparisons = 0;
};

/// Asymmetric error rate eta(x -> y): the share of (A, B, X) triples with
/// A in `ab_x`, B in `ab_y`, X in `x_x` where X is closer to B than to A,
/// ties counting one half. Within mode requires `x_x == ab_x` and excludes
/// X == A; across mode uses every X.
Eta asymmetric_score(std::span<const std::size_t> ab_x, std::span<const std::size_t> ab_y,
                     std::span<const std::size_t> x_x, SpeakerMode mode, const Dissimilarity& d);

struct CellKey {
    CategoryPair pair;
    Context context;
    std::string speaker_ab;
    std::string speaker_x;

    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct CellScore {
    CellKey key;
    double eta_xy = 0.0;
    double eta_yx = 0.0;
    double epsilon = 0.0;
    std::uint64_t n_comparisons = 0;
};

/// Prepared frames for every segment of a corpus, in segment order.
class SegmentStore {
public:
    SegmentStore(const FeatureArchive& archive, std::span<const ItemSegment> segments,
                 unsigned jobs = 1);

    const PreparedFrames& operator[](std::size_t i) const { return frames_[i]; }
    std::size_t size() const noexcept { return frames_.size(); }

private:
    std::vector<PreparedFrames> frames_;
};

/// epsilon = (eta(x -> y) + eta(y -> x)) / 2, with DTW values memoised per
/// ordered segment pair inside the cell.
CellScore pairwise_score(const TaskCell& cell, const SegmentStore& store, const DtwConfig& cfg);

struct ReportMetadata {
    std::string config_hash;
    std::uint64_t seed = 42;
    std::optional<std::size_t> max_speaker_pairs;
    std::size_t cells_scored = 0;
    std::size_t cells_skipped_size = 0;
    std::size_t cells_skipped_limit = 0;
    std::uint64_t comparisons = 0;
    std::string af_table;
};

struct AbxReport {
    TaskKind kind = TaskKind::phone;
    SpeakerMode mode = SpeakerMode::within;
    std::map<CategoryPair, double> pairwise;
    std::map<std::pair<CategoryPair, Context>, double> by_context;
    double overall = 0.0;
    std::vector<CellScore> per_cell;  // sorted by key
    ReportMetadata metadata;
};

/// Unweighted means: speakers within (pair, context), then contexts within
/// a pair, then pairs. Sums run in sorted key order.
AbxReport aggregate(std::span<const CellScore> scores, TaskKind kind, SpeakerMode mode);

struct ScoreOptions {
    DtwConfig dtw;
    CellLimits limits;
    unsigned jobs = 1;
};

/// build_cells -> pairwise_score (parallel over cells) -> aggregate.
/// Throws Error(empty_task) when no cell is scorable. The result does not
/// depend on `jobs`.
AbxReport score_corpus(const FeatureArchive& archive, std::span<const ItemSegment> segments, SpeakerMode mode,
                       TaskKind kind, const AfTable* af_table, const ScoreOptions& options);

/// Hash of the scoring configuration recorded in report metadata.
std::string config_hash(SpeakerMode mode, TaskKind kind, const AfTable* af_table, const ScoreOptions& options);

// Serialisation. Rates render with six fractional digits.
std::string format_rate(double rate);
nlohmann::json report_to_json_value(const AbxReport& report, bool include_cells = false);
std::string report_to_json(const AbxReport& report, bool include_cells = false);
/// Pair-level rows (context columns '*').
std::string report_pairwise_csv(const AbxReport& report);
/// Context-level rows.
std::string report_contexts_csv(const AbxReport& report);

inline constexpr std::string_view kCsvHeader = "category_x,category_y,context_prev,context_next,condition,rate";

}  // namespace abxlab
