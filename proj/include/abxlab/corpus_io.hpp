#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace abxlab {

using UttId = std::string;
using Nanoseconds = std::chrono::nanoseconds;
using Microseconds = std::chrono::microseconds;

/// Dense row-major matrix of T frames by d values.
///
/// Values are held in double precision; the binary archive format stores
/// 32-bit floats, which widen exactly on load.
class FrameMatrix {
public:
    FrameMatrix() = default;
    /// Throws Error(data) on a non-finite value, Error(argument) when the
    /// value count does not equal rows * cols or when rows or cols is zero.
    FrameMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static FrameMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * cols_, cols_};
    }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    std::span<const double> values() const noexcept { return values_; }

    /// Rows [begin, end).
    FrameMatrix slice(std::size_t begin, std::size_t end) const;

    friend bool operator==(const FrameMatrix&, const FrameMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Immutable set of per-utterance frame matrices sharing one dimension and
/// frame period.
class FeatureArchive {
public:
    FeatureArchive() = default;
    FeatureArchive(std::size_t dim, Microseconds frame_period,
                   std::map<UttId, FrameMatrix> utterances);

    std::size_t dim() const noexcept { return dim_; }
    Microseconds frame_period() const noexcept { return frame_period_; }
    const std::map<UttId, FrameMatrix>& utterances() const noexcept { return utterances_; }
    std::size_t size() const noexcept { return utterances_.size(); }
    std::size_t total_frames() const noexcept;

    const FrameMatrix* find(const UttId& utt) const;
    /// Throws Error(lookup) when the utterance is absent.
    const FrameMatrix& at(const UttId& utt) const;

private:
    std::size_t dim_ = 0;
    Microseconds frame_period_{0};
    std::map<UttId, FrameMatrix> utterances_;
};

enum class FeatureFormat { binary, text };

inline constexpr std::string_view kBinaryExtension = ".fbin";
inline constexpr std::string_view kTextExtension = ".ftxt";

struct FeatureFile {
    UttId utt;
    Microseconds frame_period{0};
    FrameMatrix frames;
};

std::string encode_binary_features(const FrameMatrix& frames, Microseconds frame_period);
FeatureFile decode_binary_features(std::string_view bytes, const UttId& utt,
                                   const std::string& source = "<memory>");
std::string encode_text_features(const FrameMatrix& frames, Microseconds frame_period);
FeatureFile decode_text_features(std::string_view text, const UttId& utt,
                                 const std::string& source = "<memory>");

/// Loads every `<utt>.fbin` (binary) or `<utt>.ftxt` (text) file in `dir`.
FeatureArchive load_feature_archive(const std::filesystem::path& dir, FeatureFormat format);
/// Picks the format from the extensions present in `dir`.
FeatureFormat detect_feature_format(const std::filesystem::path& dir);
void write_feature_archive(const FeatureArchive& archive, const std::filesystem::path& dir,
                           FeatureFormat format);

// ---------------------------------------------------------------------------
// Times

/// Parses decimal seconds ("0.145", "12", "1.5e-3") into nanoseconds without
/// going through binary floating point for plain decimals.
Nanoseconds parse_seconds(std::string_view text);
/// Shortest decimal-seconds rendering that parses back to the same value.
std::string format_seconds(Nanoseconds t);

struct FrameRange {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
    std::size_t size() const noexcept { return end - begin; }
};

/// round-half-up(t / period) on exact integer arithmetic.
std::size_t time_to_frame(Nanoseconds t, Microseconds frame_period);

/// Frame range for [onset, offset) clamped to `n_frames`; zero-length ranges
/// inside the utterance are widened to one frame. Throws Error(data) when the
/// range is empty at the utterance end.
FrameRange resolve_frame_range(Nanoseconds onset, Nanoseconds offset, Microseconds frame_period,
                               std::size_t n_frames);

// ---------------------------------------------------------------------------
// Item files

inline constexpr std::string_view kItemHeader = "#file onset offset #phone prev-phone next-phone speaker";
inline constexpr std::string_view kBoundary = "SIL";

struct ItemSegment {
    UttId utt;
    Nanoseconds onset{0};
    Nanoseconds offset{0};
    std::string phone;
    std::string prev;
    std::string next;
    std::string speaker;

    friend bool operator==(const ItemSegment&, const ItemSegment&) = default;
};

std::vector<ItemSegment> parse_item_file(std::istream& in, const std::string& source);
std::vector<ItemSegment> load_item_file(const std::filesystem::path& path);
void write_item_file(std::span<const ItemSegment> items, std::ostream& out);

FrameMatrix segment_frames(const ItemSegment& seg, const FeatureArchive& archive);

// ---------------------------------------------------------------------------
// Articulatory feature tables

inline constexpr std::string_view kExcludedToken = "__EXCLUDED__";

class AfTable {
public:
    AfTable() = default;
    /// Throws Error(validation) when a phone is both mapped and excluded.
    AfTable(std::string feature_name, std::map<std::string, std::string> entries,
            std::set<std::string> excluded);

    enum class Status { mapped, excluded, unknown };
    struct Lookup {
        Status status = Status::unknown;
        std::string attribute;
    };

    const std::string& feature_name() const noexcept { return feature_name_; }
    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    const std::set<std::string>& excluded() const noexcept { return excluded_; }

    Lookup lookup(const std::string& phone) const;
    std::set<std::string> attributes() const;
    /// Phones that map to `attribute`, in sorted order.
    std::vector<std::string> phones_of(const std::string& attribute) const;

private:
    std::string feature_name_;
    std::map<std::string, std::string> entries_;
    std::set<std::string> excluded_;
};

const std::vector<std::string>& builtin_af_table_names();
AfTable builtin_af_table(std::string_view name);
AfTable parse_af_table(std::istream& in, const std::string& feature_name, const std::string& source);
AfTable load_af_table(const std::filesystem::path& path);
/// Accepts a builtin name or a TSV path.
AfTable resolve_af_table(const std::string& name_or_path);

// ---------------------------------------------------------------------------
// Frame label tracks

struct LabelSpan {
    Nanoseconds onset{0};
    Nanoseconds offset{0};
    std::string label;

    friend bool operator==(const LabelSpan&, const LabelSpan&) = default;
};

struct FrameLabelTrack {
    UttId utt;
    std::vector<LabelSpan> spans;

    friend bool operator==(const FrameLabelTrack&, const FrameLabelTrack&) = default;
};

std::vector<FrameLabelTrack> parse_label_tracks(std::istream& in, const std::string& source);
std::vector<FrameLabelTrack> load_label_track(const std::filesystem::path& path);
void write_label_tracks(std::span<const FrameLabelTrack> tracks, std::ostream& out);

/// Per-frame labels of one track, indexed from frame 0 up to the end of its
/// last span; unlabeled frames are empty optionals. Spans use the
/// segment_frames rounding rule, and a frame already claimed by an earlier
/// span is not relabeled.
std::vector<std::optional<std::string>> frame_labels(const FrameLabelTrack& track,
                                                     Microseconds frame_period);

}  // namespace abxlab
