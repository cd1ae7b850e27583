#include "abxlab/corpus_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "abxlab/error.hpp"
#include "text_util.hpp"

namespace abxlab {

namespace fs = std::filesystem;
using detail::parse_double;
using detail::split_ws;
using detail::trim;

// ---------------------------------------------------------------------------
// FrameMatrix / FeatureArchive

FrameMatrix::FrameMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (rows_ == 0 || cols_ == 0)
        throw Error(ErrorKind::argument, "frame matrix needs at least one row and one column");
    if (values_.size() != rows_ * cols_)
        throw Error(ErrorKind::argument, "frame matrix value count does not match its shape");
    for (double v : values_) {
        if (!std::isfinite(v)) throw Error(ErrorKind::data, "non-finite value in frame matrix");
    }
}

FrameMatrix FrameMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw Error(ErrorKind::argument, "frame matrix needs at least one row");
    const std::size_t cols = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) throw Error(ErrorKind::argument, "ragged rows in frame matrix");
        values.insert(values.end(), r.begin(), r.end());
    }
    return FrameMatrix(rows.size(), cols, std::move(values));
}

FrameMatrix FrameMatrix::slice(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > rows_) throw Error(ErrorKind::argument, "invalid frame slice");
    std::vector<double> values(values_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                               values_.begin() + static_cast<std::ptrdiff_t>(end * cols_));
    return FrameMatrix(end - begin, cols_, std::move(values));
}

FeatureArchive::FeatureArchive(std::size_t dim, Microseconds frame_period,
                               std::map<UttId, FrameMatrix> utterances)
    : dim_(dim), frame_period_(frame_period), utterances_(std::move(utterances)) {
    if (dim_ == 0) throw Error(ErrorKind::argument, "feature dimension must be positive");
    if (frame_period_.count() <= 0) throw Error(ErrorKind::argument, "frame period must be positive");
    for (const auto& [utt, m] : utterances_) {
        if (m.empty()) throw Error(ErrorKind::data, "utterance '" + utt + "' has no frames");
        if (m.cols() != dim_)
            throw Error(ErrorKind::consistency, "utterance '" + utt + "' has dim " +
                                                    std::to_string(m.cols()) + ", archive dim is " +
                                                    std::to_string(dim_));
    }
}

std::size_t FeatureArchive::total_frames() const noexcept {
    std::size_t n = 0;
    for (const auto& [_, m] : utterances_) n += m.rows();
    return n;
}

const FrameMatrix* FeatureArchive::find(const UttId& utt) const {
    const auto it = utterances_.find(utt);
    return it == utterances_.end() ? nullptr : &it->second;
}

const FrameMatrix& FeatureArchive::at(const UttId& utt) const {
    if (const auto* m = find(utt)) return *m;
    throw Error(ErrorKind::lookup, "utterance '" + utt + "' not in feature archive");
}

// ---------------------------------------------------------------------------
// Binary feature files

namespace {

constexpr std::array<char, 4> kMagic{'F', 'E', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 20;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(std::string_view bytes, std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xffffffffu) throw Error(ErrorKind::argument, std::string(what) + " exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

}  // namespace

std::string encode_binary_features(const FrameMatrix& frames, Microseconds frame_period) {
    std::string out;
    out.reserve(kHeaderBytes + frames.values().size() * 4);
    out.append(kMagic.data(), kMagic.size());
    put_u32(out, kVersion);
    put_u32(out, checked_u32(frames.cols(), "dim"));
    put_u32(out, checked_u32(frames.rows(), "frame count"));
    put_u32(out, checked_u32(static_cast<std::size_t>(frame_period.count()), "frame period"));
    for (double v : frames.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

FeatureFile decode_binary_features(std::string_view bytes, const UttId& utt, const std::string& source) {
    if (bytes.size() < kHeaderBytes)
        throw Error(ErrorKind::format, source + ": truncated header (" + std::to_string(bytes.size()) + " bytes)");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw Error(ErrorKind::format, source + ": bad magic, expected FEAT");
    if (const auto version = get_u32(bytes, 4); version != kVersion)
        throw Error(ErrorKind::format, source + ": unsupported version " + std::to_string(version));
    const std::size_t dim = get_u32(bytes, 8);
    const std::size_t nframes = get_u32(bytes, 12);
    const std::uint32_t period = get_u32(bytes, 16);
    if (dim == 0 || nframes == 0 || period == 0)
        throw Error(ErrorKind::format, source + ": dim, frame count and period must be positive");
    const std::size_t expected = dim * nframes * 4;
    if (bytes.size() - kHeaderBytes != expected)
        throw Error(ErrorKind::format, source + ": payload-size mismatch, header implies " +
                                           std::to_string(expected) + " bytes, found " +
                                           std::to_string(bytes.size() - kHeaderBytes));
    std::vector<double> values(dim * nframes);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float f = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i));
        if (!std::isfinite(f))
            throw Error(ErrorKind::data, source + ": non-finite value at frame " + std::to_string(i / dim));
        values[i] = f;
    }
    return {utt, Microseconds(period), FrameMatrix(nframes, dim, std::move(values))};
}

// ---------------------------------------------------------------------------
// Text feature files

std::string encode_text_features(const FrameMatrix& frames, Microseconds frame_period) {
    std::string out = "dim=" + std::to_string(frames.cols()) +
                      " period_us=" + std::to_string(frame_period.count()) + "\n";
    for (std::size_t r = 0; r < frames.rows(); ++r) {
        const auto row = frames.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out.push_back(' ');
            out += detail::format_double(row[c]);
        }
        out.push_back('\n');
    }
    return out;
}

FeatureFile decode_text_features(std::string_view text, const UttId& utt, const std::string& source) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::format, source + ": missing header line");
    const auto header = split_ws(line);
    std::size_t dim = 0;
    long long period = 0;
    if (header.size() == 2 && header[0].starts_with("dim=") && header[1].starts_with("period_us=")) {
        dim = detail::parse_int<std::size_t>(header[0].substr(4)).value_or(0);
        period = detail::parse_int<long long>(header[1].substr(10)).value_or(0);
    }
    if (dim == 0 || period <= 0)
        throw Error(ErrorKind::format, source + ":1: expected 'dim=<D> period_us=<P>'");

    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != dim)
            throw Error(ErrorKind::format, source + ":" + std::to_string(lineno) + ": expected " +
                                               std::to_string(dim) + " values, found " +
                                               std::to_string(fields.size()));
        for (auto f : fields) {
            const auto v = parse_double(f);
            if (!v) throw Error(ErrorKind::data, source + ":" + std::to_string(lineno) + ": bad number '" + std::string(f) + "'");
            if (!std::isfinite(*v))
                throw Error(ErrorKind::data, source + ":" + std::to_string(lineno) + ": non-finite value");
            values.push_back(*v);
        }
    }
    if (values.empty()) throw Error(ErrorKind::format, source + ": no frames");
    const std::size_t rows = values.size() / dim;
    return {utt, Microseconds(period), FrameMatrix(rows, dim, std::move(values))};
}

// ---------------------------------------------------------------------------
// Archives

FeatureFormat detect_feature_format(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "'" + dir.string() + "' is not a directory");
    bool text = false;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto ext = entry.path().extension().string();
        if (ext == kBinaryExtension) return FeatureFormat::binary;
        if (ext == kTextExtension) text = true;
    }
    if (text) return FeatureFormat::text;
    throw Error(ErrorKind::empty_input, "empty archive: no feature files in '" + dir.string() + "'");
}

FeatureArchive load_feature_archive(const fs::path& dir, FeatureFormat format) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "'" + dir.string() + "' is not a directory");
    const std::string_view ext = format == FeatureFormat::binary ? kBinaryExtension : kTextExtension;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
    }
    if (files.empty())
        throw Error(ErrorKind::empty_input, "empty archive: no '" + std::string(ext) + "' files in '" + dir.string() + "'");
    std::sort(files.begin(), files.end());

    std::map<UttId, FrameMatrix> utterances;
    std::size_t dim = 0;
    Microseconds period{0};
    std::string first;
    for (const auto& path : files) {
        const UttId utt = path.stem().string();
        const std::string bytes = read_file(path);
        FeatureFile f = format == FeatureFormat::binary ? decode_binary_features(bytes, utt, path.string())
                                                        : decode_text_features(bytes, utt, path.string());
        if (first.empty()) {
            dim = f.frames.cols();
            period = f.frame_period;
            first = path.string();
        } else if (f.frames.cols() != dim) {
            throw Error(ErrorKind::consistency, path.string() + ": dim " + std::to_string(f.frames.cols()) +
                                                    " differs from " + std::to_string(dim) + " in " + first);
        } else if (f.frame_period != period) {
            throw Error(ErrorKind::consistency, path.string() + ": frame period " +
                                                    std::to_string(f.frame_period.count()) + "us differs from " +
                                                    std::to_string(period.count()) + "us in " + first);
        }
        utterances.emplace(utt, std::move(f.frames));
    }
    return FeatureArchive(dim, period, std::move(utterances));
}

void write_feature_archive(const FeatureArchive& archive, const fs::path& dir, FeatureFormat format) {
    fs::create_directories(dir);
    for (const auto& [utt, frames] : archive.utterances()) {
        const bool binary = format == FeatureFormat::binary;
        const auto path = dir / (utt + std::string(binary ? kBinaryExtension : kTextExtension));
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write '" + path.string() + "'");
        const std::string bytes = binary ? encode_binary_features(frames, archive.frame_period())
                                         : encode_text_features(frames, archive.frame_period());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------
// Times

Nanoseconds parse_seconds(std::string_view text) {
    const std::string shown(text);
    if (text.empty()) throw Error(ErrorKind::data, "empty time value");
    if (text.find_first_of("eE") != std::string_view::npos) {
        const auto v = parse_double(text);
        if (!v || !std::isfinite(*v) || *v < 0.0 || *v > 9.0e9)
            throw Error(ErrorKind::data, "bad time value '" + shown + "'");
        return Nanoseconds(std::llround(*v * 1e9));
    }
    if (text.front() == '+') text.remove_prefix(1);
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw Error(ErrorKind::data, "bad time value '" + shown + "'");
    const auto all_digits = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (!all_digits(whole) || !all_digits(frac) || whole.size() > 10)
        throw Error(ErrorKind::data, "bad time value '" + shown + "'");
    std::int64_t ns = 0;
    for (char c : whole) ns = ns * 10 + (c - '0');
    ns *= 1'000'000'000;
    std::int64_t scale = 100'000'000;
    for (std::size_t i = 0; i < frac.size() && i < 9; ++i, scale /= 10) ns += (frac[i] - '0') * scale;
    if (frac.size() > 9 && frac[9] >= '5') ++ns;  // round half up on the first dropped digit
    return Nanoseconds(ns);
}

std::string format_seconds(Nanoseconds t) {
    const auto ns = t.count();
    std::string out = std::to_string(ns / 1'000'000'000);
    auto frac = ns % 1'000'000'000;
    if (frac == 0) return out;
    std::string digits = std::to_string(frac);
    digits.insert(0, 9 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    return out + "." + digits;
}

std::size_t time_to_frame(Nanoseconds t, Microseconds frame_period) {
    const std::int64_t p = frame_period.count() * 1000;
    const std::int64_t v = t.count();
    if (v < 0) throw Error(ErrorKind::data, "negative time");
    // floor(v / p + 1/2)
    return static_cast<std::size_t>((2 * v + p) / (2 * p));
}

FrameRange resolve_frame_range(Nanoseconds onset, Nanoseconds offset, Microseconds frame_period,
                               std::size_t n_frames) {
    FrameRange r{time_to_frame(onset, frame_period), time_to_frame(offset, frame_period)};
    r.end = std::min(r.end, n_frames);
    if (r.end <= r.begin) {
        if (r.begin >= n_frames)
            throw Error(ErrorKind::data, "empty segment: starts at frame " + std::to_string(r.begin) +
                                             " of a " + std::to_string(n_frames) + "-frame utterance");
        r.end = r.begin + 1;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Item files

std::vector<ItemSegment> parse_item_file(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kItemHeader)
        throw Error(ErrorKind::format, source + ":1: missing item header '" + std::string(kItemHeader) + "'");
    std::vector<ItemSegment> items;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = split_ws(line);
        if (fields.empty()) continue;
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        if (fields.size() != 7)
            throw Error(ErrorKind::format, where + "expected 7 fields, found " + std::to_string(fields.size()));
        ItemSegment seg;
        seg.utt = std::string(fields[0]);
        try {
            seg.onset = parse_seconds(fields[1]);
            seg.offset = parse_seconds(fields[2]);
        } catch (const Error& e) {
            throw Error(ErrorKind::format, where + e.what());
        }
        if (seg.offset <= seg.onset)
            throw Error(ErrorKind::format, where + "offset " + std::string(fields[2]) +
                                               " is not after onset " + std::string(fields[1]));
        seg.phone = std::string(fields[3]);
        seg.prev = std::string(fields[4]);
        seg.next = std::string(fields[5]);
        seg.speaker = std::string(fields[6]);
        items.push_back(std::move(seg));
    }
    return items;
}

std::vector<ItemSegment> load_item_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    return parse_item_file(in, path.string());
}

void write_item_file(std::span<const ItemSegment> items, std::ostream& out) {
    out << kItemHeader << '\n';
    for (const auto& s : items) {
        out << s.utt << ' ' << format_seconds(s.onset) << ' ' << format_seconds(s.offset) << ' ' << s.phone
            << ' ' << s.prev << ' ' << s.next << ' ' << s.speaker << '\n';
    }
}

FrameMatrix segment_frames(const ItemSegment& seg, const FeatureArchive& archive) {
    const FrameMatrix& m = archive.at(seg.utt);
    try {
        const auto r = resolve_frame_range(seg.onset, seg.offset, archive.frame_period(), m.rows());
        return m.slice(r.begin, r.end);
    } catch (const Error& e) {
        throw Error(e.kind(), "segment " + seg.utt + " [" + format_seconds(seg.onset) + ", " +
                                  format_seconds(seg.offset) + "): " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Articulatory feature tables

AfTable::AfTable(std::string feature_name, std::map<std::string, std::string> entries,
                 std::set<std::string> excluded)
    : feature_name_(std::move(feature_name)), entries_(std::move(entries)), excluded_(std::move(excluded)) {
    for (const auto& p : excluded_) {
        if (entries_.contains(p))
            throw Error(ErrorKind::validation, "AF table " + feature_name_ + ": phone '" + p +
                                                   "' is both mapped and excluded");
    }
}

AfTable::Lookup AfTable::lookup(const std::string& phone) const {
    if (const auto it = entries_.find(phone); it != entries_.end()) return {Status::mapped, it->second};
    if (excluded_.contains(phone)) return {Status::excluded, {}};
    return {};
}

std::set<std::string> AfTable::attributes() const {
    std::set<std::string> out;
    for (const auto& [_, a] : entries_) out.insert(a);
    return out;
}

std::vector<std::string> AfTable::phones_of(const std::string& attribute) const {
    std::vector<std::string> out;
    for (const auto& [p, a] : entries_)
        if (a == attribute) out.push_back(p);
    return out;
}

namespace {

using Row = std::pair<const char*, std::vector<const char*>>;

AfTable make_table(std::string name, const std::vector<Row>& rows, std::set<std::string> excluded) {
    std::map<std::string, std::string> entries;
    for (const auto& [attr, phones] : rows)
        for (const char* p : phones) entries.emplace(p, attr);
    return AfTable(std::move(name), std::move(entries), std::move(excluded));
}

const std::set<std::string> kDiphthongs{"AW", "AY", "EY", "OW", "OY"};

}  // namespace

const std::vector<std::string>& builtin_af_table_names() {
    static const std::vector<std::string> names{"english-moa", "english-poa", "english-height",
                                                "english-backness"};
    return names;
}

// Consonants by manner and place, monophthongs by height and backness.
AfTable builtin_af_table(std::string_view name) {
    if (name == "english-moa") {
        return make_table("MoA",
                          {{"Affricate", {"CH", "JH"}},
                           {"Approximant", {"W", "L", "R", "Y"}},
                           {"Fricative", {"F", "V", "TH", "DH", "S", "Z", "SH", "ZH", "HH"}},
                           {"Stop", {"P", "B", "T", "D", "K", "G"}},
                           {"Nasal", {"M", "N", "NG"}}},
                          {});
    }
    if (name == "english-poa") {
        return make_table("PoA",
                          {{"Bilabial", {"W", "P", "B", "M"}},
                           {"Labiodental", {"F", "V"}},
                           {"Dental", {"TH", "DH"}},
                           {"Alveolar", {"L", "S", "Z", "T", "D", "N"}},
                           {"Postalveolar", {"CH", "JH", "R", "SH", "ZH"}},
                           {"Palatal", {"Y"}},
                           {"Velar", {"K", "G", "NG"}},
                           {"Glottal", {"HH"}}},
                          {});
    }
    if (name == "english-height") {
        return make_table("height",
                          {{"Close", {"IY", "IH", "UW", "UH"}},
                           {"Mid", {"EH", "ER", "AH", "AO"}},
                           {"Open", {"AE", "AA"}}},
                          kDiphthongs);
    }
    if (name == "english-backness") {
        return make_table("backness",
                          {{"Front", {"IY", "IH", "EH", "AE"}},
                           {"Central", {"ER", "AH", "AA"}},
                           {"Back", {"UW", "UH", "AO"}}},
                          kDiphthongs);
    }
    throw Error(ErrorKind::argument, "unknown builtin AF table '" + std::string(name) + "'");
}

AfTable parse_af_table(std::istream& in, const std::string& feature_name, const std::string& source) {
    std::map<std::string, std::string> entries;
    std::set<std::string> excluded;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = detail::split_char(t, '\t');
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty())
            throw Error(ErrorKind::format, where + "expected 'phone<TAB>attribute'");
        const std::string phone(trim(fields[0]));
        const std::string attr(trim(fields[1]));
        if (entries.contains(phone) || excluded.contains(phone))
            throw Error(ErrorKind::validation, where + "duplicate phone '" + phone + "'");
        if (attr == kExcludedToken)
            excluded.insert(phone);
        else
            entries.emplace(phone, attr);
    }
    return AfTable(feature_name, std::move(entries), std::move(excluded));
}

AfTable load_af_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    return parse_af_table(in, path.stem().string(), path.string());
}

AfTable resolve_af_table(const std::string& name_or_path) {
    const auto& names = builtin_af_table_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end())
        return builtin_af_table(name_or_path);
    if (fs::exists(name_or_path)) return load_af_table(name_or_path);
    throw Error(ErrorKind::argument, "'" + name_or_path + "' is neither a builtin AF table nor a file");
}

// ---------------------------------------------------------------------------
// Label tracks

std::vector<FrameLabelTrack> parse_label_tracks(std::istream& in, const std::string& source) {
    std::map<UttId, std::vector<LabelSpan>> by_utt;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty()) continue;
        auto fields = detail::split_char(t, '\t');
        if (fields.size() != 4) fields = split_ws(t);
        const auto where = source + ":" + std::to_string(lineno) + ": ";
        if (fields.size() != 4)
            throw Error(ErrorKind::format, where + "expected 'utt<TAB>onset<TAB>offset<TAB>label'");
        LabelSpan span;
        try {
            span.onset = parse_seconds(trim(fields[1]));
            span.offset = parse_seconds(trim(fields[2]));
        } catch (const Error& e) {
            throw Error(ErrorKind::format, where + e.what());
        }
        if (span.offset <= span.onset)
            throw Error(ErrorKind::format, where + "offset is not after onset");
        span.label = std::string(trim(fields[3]));
        by_utt[std::string(trim(fields[0]))].push_back(std::move(span));
    }

    std::vector<FrameLabelTrack> tracks;
    for (auto& [utt, spans] : by_utt) {
        std::stable_sort(spans.begin(), spans.end(),
                         [](const LabelSpan& a, const LabelSpan& b) { return a.onset < b.onset; });
        for (std::size_t i = 1; i < spans.size(); ++i) {
            if (spans[i].onset < spans[i - 1].offset) {
                const auto show = [](const LabelSpan& s) {
                    return "[" + format_seconds(s.onset) + ", " + format_seconds(s.offset) + ") " + s.label;
                };
                throw Error(ErrorKind::validation, source + ": overlapping spans in utterance '" + utt +
                                                       "': " + show(spans[i - 1]) + " and " + show(spans[i]));
            }
        }
        tracks.push_back({utt, std::move(spans)});
    }
    return tracks;
}

std::vector<FrameLabelTrack> load_label_track(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    return parse_label_tracks(in, path.string());
}

void write_label_tracks(std::span<const FrameLabelTrack> tracks, std::ostream& out) {
    for (const auto& track : tracks)
        for (const auto& s : track.spans)
            out << track.utt << '\t' << format_seconds(s.onset) << '\t' << format_seconds(s.offset) << '\t'
                << s.label << '\n';
}

std::vector<std::optional<std::string>> frame_labels(const FrameLabelTrack& track, Microseconds frame_period) {
    std::vector<std::optional<std::string>> frames;
    for (const auto& s : track.spans) {
        const std::size_t begin = time_to_frame(s.onset, frame_period);
        const std::size_t end = std::max(time_to_frame(s.offset, frame_period), begin + 1);
        if (frames.size() < end) frames.resize(end);
        for (std::size_t t = begin; t < end; ++t)
            if (!frames[t]) frames[t] = s.label;
    }
    return frames;
}

}  // namespace abxlab
