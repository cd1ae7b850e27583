#include "abxlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "abxlab/error.hpp"

namespace abxlab {

const char* to_string(PhoneClass c) noexcept {
    switch (c) {
    case PhoneClass::monophthong: return "monophthong";
    case PhoneClass::diphthong: return "diphthong";
    case PhoneClass::consonant: return "consonant";
    case PhoneClass::other: return "other";
    }
    return "other";
}

namespace {

const std::vector<std::string> kMonophthongs{"AA", "AE", "AH", "AO", "EH", "ER", "IH", "IY", "UH", "UW"};
const std::vector<std::string> kDiphthongs{"AW", "AY", "EY", "OW", "OY"};
const std::vector<std::string> kConsonants{"B",  "CH", "D", "DH", "F",  "G", "HH", "JH", "K", "L", "M",  "N",
                                           "NG", "P",  "R", "S",  "SH", "T", "TH", "V",  "W", "Y", "Z", "ZH"};

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

const std::vector<std::string>& cmu39_inventory() {
    static const std::vector<std::string> all = [] {
        std::vector<std::string> v = kMonophthongs;
        v.insert(v.end(), kDiphthongs.begin(), kDiphthongs.end());
        v.insert(v.end(), kConsonants.begin(), kConsonants.end());
        return v;
    }();
    return all;
}

PhoneClass phone_class(const std::string& phone) {
    if (contains(kMonophthongs, phone)) return PhoneClass::monophthong;
    if (contains(kDiphthongs, phone)) return PhoneClass::diphthong;
    if (contains(kConsonants, phone)) return PhoneClass::consonant;
    return PhoneClass::other;
}

// ---------------------------------------------------------------------------

PhonemeReport phoneme_level_rates(const PairRates& pairwise, std::span<const std::string> inventory) {
    const std::set<std::string> omega(inventory.begin(), inventory.end());
    PhonemeReport report;
    for (const auto& w : omega) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& other : omega) {
            if (other == w) continue;
            const auto it = pairwise.find(CategoryPair::of(w, other));
            if (it == pairwise.end()) continue;
            sum += it->second;
            ++n;
        }
        if (n == 0) {
            report.excluded.push_back(w);
            continue;
        }
        report.rates.emplace(w, PhonemeRate{sum / static_cast<double>(n), n, phone_class(w)});
    }
    for (auto a = omega.begin(); a != omega.end(); ++a)
        for (auto b = std::next(a); b != omega.end(); ++b)
            if (!pairwise.contains(CategoryPair{*a, *b})) report.missing_pairs.push_back({*a, *b});
    return report;
}

AttributeRates af_attribute_rates(const PairRates& pairwise, std::span<const std::string> attributes) {
    if (pairwise.empty()) throw Error(ErrorKind::empty_input, "no pairwise AF rates");
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& [pair, rate] : pairwise) {
        for (const auto* a : {&pair.first, &pair.second}) {
            auto& [sum, n] = acc[*a];
            sum += rate;
            ++n;
        }
    }
    AttributeRates out;
    for (const auto& [a, sn] : acc) out.rates.emplace(a, sn.first / static_cast<double>(sn.second));
    for (const auto& a : attributes)
        if (!acc.contains(a)) out.excluded.push_back(a);
    return out;
}

// ---------------------------------------------------------------------------

std::size_t ConfusionMatrix::col_index(const std::string& symbol) const {
    const auto it = std::find(col_symbols.begin(), col_symbols.end(), symbol);
    if (it == col_symbols.end()) throw Error(ErrorKind::lookup, "no hypothesis label '" + symbol + "'");
    return static_cast<std::size_t>(it - col_symbols.begin());
}

std::string strip_tone(std::string label) {
    while (label.size() > 1 && label.back() >= '0' && label.back() <= '9') label.pop_back();
    return label;
}

ConfusionMatrix confusion_matrix(std::span<const FrameLabelTrack> truth, std::span<const FrameLabelTrack> hyp,
                                 Microseconds frame_period, const ConfusionOptions& options) {
    std::map<UttId, const FrameLabelTrack*> hyp_by_utt;
    for (const auto& t : hyp) hyp_by_utt.emplace(t.utt, &t);

    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::set<std::string> truth_symbols;
    for (const auto& t : truth) {
        const auto truth_frames = frame_labels(t, frame_period);
        for (const auto& f : truth_frames)
            if (f) truth_symbols.insert(*f);
        const auto it = hyp_by_utt.find(t.utt);
        if (it == hyp_by_utt.end()) continue;
        const auto hyp_frames = frame_labels(*it->second, frame_period);
        const std::size_t n = std::min(truth_frames.size(), hyp_frames.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!truth_frames[i] || !hyp_frames[i]) continue;
            const std::string label = options.strip_tones ? strip_tone(*hyp_frames[i]) : *hyp_frames[i];
            ++counts[*truth_frames[i]][label];
        }
    }
    if (counts.empty()) throw Error(ErrorKind::empty_input, "no frames are labeled in both tracks");

    ConfusionMatrix cm;
    std::set<std::string> cols;
    for (const auto& [_, row] : counts)
        for (const auto& [label, __] : row) cols.insert(label);
    cm.col_symbols.assign(cols.begin(), cols.end());
    for (const auto& sym : truth_symbols) {
        const auto it = counts.find(sym);
        if (it == counts.end()) {
            cm.empty_rows.push_back(sym);
            continue;
        }
        std::size_t total = 0;
        for (const auto& [_, c] : it->second) total += c;
        std::vector<double> row(cm.col_symbols.size(), 0.0);
        for (std::size_t j = 0; j < cm.col_symbols.size(); ++j) {
            const auto c = it->second.find(cm.col_symbols[j]);
            if (c != it->second.end()) row[j] = static_cast<double>(c->second) / static_cast<double>(total);
        }
        cm.row_symbols.push_back(sym);
        cm.values.push_back(std::move(row));
        cm.frame_counts.push_back(total);
    }
    return cm;
}

std::map<std::string, CoOccurrence> co_occurrence(const ConfusionMatrix& cm) {
    std::map<std::string, CoOccurrence> out;
    for (std::size_t i = 0; i < cm.row_symbols.size(); ++i) {
        const auto& row = cm.values[i];
        const auto best = std::max_element(row.begin(), row.end());
        if (best == row.end()) throw Error(ErrorKind::validation, "confusion matrix has no columns");
        out.emplace(cm.row_symbols[i],
                    CoOccurrence{*best, cm.col_symbols[static_cast<std::size_t>(best - row.begin())],
                                 cm.frame_counts[i]});
    }
    return out;
}

ConfusionMatrix merge_columns(const ConfusionMatrix& cm, const std::string& a, const std::string& b) {
    const std::size_t ia = cm.col_index(a);
    const std::size_t ib = cm.col_index(b);
    if (ia == ib) return cm;
    ConfusionMatrix out = cm;
    out.col_symbols.erase(out.col_symbols.begin() + static_cast<std::ptrdiff_t>(ib));
    for (auto& row : out.values) {
        row[ia] += row[ib];
        row.erase(row.begin() + static_cast<std::ptrdiff_t>(ib));
    }
    return out;
}

// ---------------------------------------------------------------------------

Reduction relative_reduction(const std::map<std::string, double>& baseline,
                             const std::map<std::string, double>& improved) {
    std::string diff;
    for (const auto& [k, _] : baseline)
        if (!improved.contains(k)) diff += " -" + k;
    for (const auto& [k, _] : improved)
        if (!baseline.contains(k)) diff += " +" + k;
    if (!diff.empty())
        throw Error(ErrorKind::validation, "baseline and improved keys differ (- baseline only, + improved only):" + diff);
    Reduction out;
    for (const auto& [k, b] : baseline) {
        if (b == 0.0) {
            out.undefined.push_back(k);
            continue;
        }
        out.percent.emplace(k, 100.0 * (b - improved.at(k)) / b);
    }
    return out;
}

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorKind::argument, "correlation series differ in length");
    if (xs.size() < 2) throw Error(ErrorKind::argument, "correlation needs at least two points");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::undefined, "undefined correlation: zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_correlation(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw Error(ErrorKind::argument, "correlation series differ in length");
    return pearson_correlation(average_ranks(xs), average_ranks(ys));
}

// ---------------------------------------------------------------------------

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

const char* class_colour(PhoneClass c) {
    switch (c) {
    case PhoneClass::monophthong: return "#e67e22";
    case PhoneClass::diphthong: return "#2e86c1";
    default: return "#7f8c8d";
    }
}

}  // namespace

std::string confusion_to_csv(const ConfusionMatrix& cm) {
    std::string out = "phoneme";
    for (const auto& c : cm.col_symbols) out += "," + c;
    out += ",frames\n";
    for (std::size_t i = 0; i < cm.row_symbols.size(); ++i) {
        out += cm.row_symbols[i];
        for (double v : cm.values[i]) out += "," + fixed(v);
        out += "," + std::to_string(cm.frame_counts[i]) + "\n";
    }
    return out;
}

std::string phoneme_report_csv(const PhonemeReport& report) {
    std::string out = "phone,rate,n_pairs,class\n";
    for (const auto& [p, r] : report.rates)
        out += p + "," + fixed(r.xi) + "," + std::to_string(r.n_pairs) + "," + to_string(r.tag) + "\n";
    return out;
}

std::string bar_chart_svg(std::span<const BarDatum> bars, const std::string& title, const std::string& y_label) {
    const double bar_w = 18.0, gap = 6.0, left = 60.0, top = 40.0, plot_h = 300.0, bottom = 60.0;
    const double width = left + static_cast<double>(bars.size()) * (bar_w + gap) + 20.0;
    const double height = top + plot_h + bottom;
    double vmax = 0.0;
    for (const auto& b : bars) vmax = std::max(vmax, b.value);
    if (vmax <= 0.0) vmax = 1.0;

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
                    fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    s += "<text x=\"" + fixed(width / 2, 1) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape_xml(title) + "</text>\n";
    s += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(top, 1) + "\" x2=\"" + fixed(left, 1) + "\" y2=\"" +
         fixed(top + plot_h, 1) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(top + plot_h, 1) + "\" x2=\"" + fixed(width - 10, 1) +
         "\" y2=\"" + fixed(top + plot_h, 1) + "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = vmax * k / 4.0;
        const double y = top + plot_h - plot_h * k / 4.0;
        s += "<text x=\"" + fixed(left - 4, 1) + "\" y=\"" + fixed(y + 3, 1) + "\" text-anchor=\"end\">" +
             fixed(v, 3) + "</text>\n";
    }
    s += "<text x=\"14\" y=\"" + fixed(top + plot_h / 2, 1) + "\" transform=\"rotate(-90 14 " +
         fixed(top + plot_h / 2, 1) + ")\" text-anchor=\"middle\">" + escape_xml(y_label) + "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = plot_h * std::max(0.0, bars[i].value) / vmax;
        const double x = left + gap + static_cast<double>(i) * (bar_w + gap);
        s += "<rect x=\"" + fixed(x, 1) + "\" y=\"" + fixed(top + plot_h - h, 1) + "\" width=\"" + fixed(bar_w, 1) +
             "\" height=\"" + fixed(h, 1) + "\" fill=\"" + class_colour(bars[i].tag) + "\"><title>" +
             escape_xml(bars[i].label) + " " + fixed(bars[i].value) + "</title></rect>\n";
        const double lx = x + bar_w / 2;
        const double ly = top + plot_h + 12;
        s += "<text x=\"" + fixed(lx, 1) + "\" y=\"" + fixed(ly, 1) + "\" text-anchor=\"end\" transform=\"rotate(-60 " +
             fixed(lx, 1) + " " + fixed(ly, 1) + ")\">" + escape_xml(bars[i].label) + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string scatter_svg(std::span<const ScatterDatum> points, const std::string& title, const std::string& x_label,
                        const std::string& y_label) {
    const double left = 70.0, top = 40.0, plot_w = 400.0, plot_h = 300.0;
    const double width = left + plot_w + 30.0, height = top + plot_h + 60.0;
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    if (!points.empty()) {
        xmin = xmax = points[0].x;
        ymin = ymax = points[0].y;
        for (const auto& p : points) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax == ymin) ymax = ymin + 1.0;
    }
    const auto px = [&](double x) { return left + plot_w * (x - xmin) / (xmax - xmin); };
    const auto py = [&](double y) { return top + plot_h - plot_h * (y - ymin) / (ymax - ymin); };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) + "\" height=\"" +
                    fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
    s += "<text x=\"" + fixed(width / 2, 1) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         escape_xml(title) + "</text>\n";
    s += "<rect x=\"" + fixed(left, 1) + "\" y=\"" + fixed(top, 1) + "\" width=\"" + fixed(plot_w, 1) +
         "\" height=\"" + fixed(plot_h, 1) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + (xmax - xmin) * k / 4.0;
        const double yv = ymin + (ymax - ymin) * k / 4.0;
        s += "<text x=\"" + fixed(px(xv), 1) + "\" y=\"" + fixed(top + plot_h + 14, 1) +
             "\" text-anchor=\"middle\">" + fixed(xv, 3) + "</text>\n";
        s += "<text x=\"" + fixed(left - 4, 1) + "\" y=\"" + fixed(py(yv) + 3, 1) + "\" text-anchor=\"end\">" +
             fixed(yv, 3) + "</text>\n";
    }
    s += "<text x=\"" + fixed(left + plot_w / 2, 1) + "\" y=\"" + fixed(height - 12, 1) +
         "\" text-anchor=\"middle\">" + escape_xml(x_label) + "</text>\n";
    s += "<text x=\"14\" y=\"" + fixed(top + plot_h / 2, 1) + "\" transform=\"rotate(-90 14 " +
         fixed(top + plot_h / 2, 1) + ")\" text-anchor=\"middle\">" + escape_xml(y_label) + "</text>\n";
    for (const auto& p : points) {
        s += "<text x=\"" + fixed(px(p.x), 1) + "\" y=\"" + fixed(py(p.y) + 4, 1) +
             "\" text-anchor=\"middle\" font-size=\"12\">+<title>" + escape_xml(p.label) + "</title></text>\n";
    }
    // Least-squares trend line, drawn only when x varies.
    if (points.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (const auto& p : points) {
            mx += p.x;
            my += p.y;
        }
        mx /= static_cast<double>(points.size());
        my /= static_cast<double>(points.size());
        double sxy = 0.0, sxx = 0.0;
        for (const auto& p : points) {
            sxy += (p.x - mx) * (p.y - my);
            sxx += (p.x - mx) * (p.x - mx);
        }
        if (sxx > 0.0) {
            const double slope = sxy / sxx;
            const double y0 = my + slope * (xmin - mx);
            const double y1 = my + slope * (xmax - mx);
            s += "<line x1=\"" + fixed(px(xmin), 1) + "\" y1=\"" + fixed(py(y0), 1) + "\" x2=\"" + fixed(px(xmax), 1) +
                 "\" y2=\"" + fixed(py(y1), 1) + "\" stroke=\"#c0392b\" stroke-dasharray=\"4 3\"/>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

}  // namespace abxlab
