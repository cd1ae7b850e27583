#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abxlab/abx.hpp"
#include "abxlab/corpus_io.hpp"

namespace abxlab {

using PairRates = std::map<CategoryPair, double>;

// ---------------------------------------------------------------------------
// Phoneme inventory

enum class PhoneClass { monophthong, diphthong, consonant, other };

const char* to_string(PhoneClass c) noexcept;

/// The 39 CMU dictionary phonemes: 10 monophthongs, 5 diphthongs and 24
/// consonants, in that order.
const std::vector<std::string>& cmu39_inventory();
PhoneClass phone_class(const std::string& phone);

// ---------------------------------------------------------------------------
// Phoneme- and attribute-level rates

struct PhonemeRate {
    double xi = 0.0;
    std::size_t n_pairs = 0;  // present pairs the mean ran over
    PhoneClass tag = PhoneClass::other;
};

struct PhonemeReport {
    std::map<std::string, PhonemeRate> rates;
    std::vector<std::string> excluded;          // no scorable pair at all
    std::vector<CategoryPair> missing_pairs;    // inventory pairs absent from the input
};

/// xi(w) = mean of eps(w, w') over the w' != w whose pair is present.
/// Pairs involving symbols outside the inventory are ignored.
PhonemeReport phoneme_level_rates(const PairRates& pairwise, std::span<const std::string> inventory);

struct AttributeRates {
    std::map<std::string, double> rates;
    std::vector<std::string> excluded;
};

/// rate(a) = mean of the pairwise rates of all pairs containing a. When
/// `attributes` is given, attributes appearing in no pair are reported as
/// excluded.
AttributeRates af_attribute_rates(const PairRates& pairwise,
                                  std::span<const std::string> attributes = {});

// ---------------------------------------------------------------------------
// Label quality

struct ConfusionMatrix {
    std::vector<std::string> row_symbols;  // ground-truth phonemes with >= 1 co-labeled frame
    std::vector<std::string> col_symbols;  // hypothesis labels
    std::vector<std::vector<double>> values;
    std::vector<std::size_t> frame_counts;
    std::vector<std::string> empty_rows;   // truth symbols never co-labeled

    std::size_t col_index(const std::string& symbol) const;
};

struct ConfusionOptions {
    /// Drop trailing digits from hypothesis labels (tone marks).
    bool strip_tones = false;
};

std::string strip_tone(std::string label);

/// Frame-level confusion between truth and hypothesis tracks. Only frames
/// labeled in both tracks of an utterance count.
ConfusionMatrix confusion_matrix(std::span<const FrameLabelTrack> truth, std::span<const FrameLabelTrack> hyp,
                                 Microseconds frame_period, const ConfusionOptions& options = {});

struct CoOccurrence {
    double p_co = 0.0;
    std::string argmax;
    std::size_t frames = 0;
};

/// p_co(w_i) = max_j e_ij with the first maximising column.
std::map<std::string, CoOccurrence> co_occurrence(const ConfusionMatrix& cm);

/// Merges hypothesis column `b` into column `a` (values added).
ConfusionMatrix merge_columns(const ConfusionMatrix& cm, const std::string& a, const std::string& b);

struct Reduction {
    std::map<std::string, double> percent;
    std::vector<std::string> undefined;  // baseline rate 0
};

/// 100 * (baseline - improved) / baseline per key. Throws Error(validation)
/// listing keys present on only one side.
Reduction relative_reduction(const std::map<std::string, double>& baseline,
                             const std::map<std::string, double>& improved);

/// Throws Error(undefined) when either series has zero variance.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);
/// Pearson correlation of average ranks.
double spearman_correlation(std::span<const double> xs, std::span<const double> ys);

// ---------------------------------------------------------------------------
// Serialisation and plots

std::string confusion_to_csv(const ConfusionMatrix& cm);
std::string phoneme_report_csv(const PhonemeReport& report);

struct BarDatum {
    std::string label;
    double value = 0.0;
    PhoneClass tag = PhoneClass::other;
};

struct ScatterDatum {
    std::string label;
    double x = 0.0;
    double y = 0.0;
};

/// Bar chart of per-phone rates, sorted as given.
std::string bar_chart_svg(std::span<const BarDatum> bars, const std::string& title, const std::string& y_label);
/// Scatter with a least-squares trend line.
std::string scatter_svg(std::span<const ScatterDatum> points, const std::string& title, const std::string& x_label,
                        const std::string& y_label);

}  // namespace abxlab
