#include "abxlab/cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <unistd.h>

#include "CLI11.hpp"
#include "abxlab/abx.hpp"
#include "abxlab/analysis.hpp"
#include "abxlab/apc.hpp"
#include "abxlab/corpus_io.hpp"
#include "abxlab/synth.hpp"
#include "json.hpp"
#include "text_util.hpp"

#ifndef ABXLAB_VERSION
#define ABXLAB_VERSION "0.0.0"
#endif

namespace abxlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::argument: return kExitUsage;
        case ErrorKind::empty_task: return kExitEmptyTask;
        case ErrorKind::training: return kExitFailure;
        default: return kExitData;
    }
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

namespace {

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& path) {
    try {
        return json::parse(read_bytes(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::argument, path.string() + ": invalid JSON: " + e.what());
    }
}

}  // namespace

std::map<std::string, std::string> digest_inputs(const fs::path& path) {
    std::map<std::string, std::string> out;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(path))
            if (e.is_regular_file()) files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out[f.string()] = sha256_hex(read_bytes(f));
    } else {
        out[path.string()] = sha256_hex(read_bytes(path));
    }
    return out;
}

namespace {

// Outputs are written into a sibling staging directory and moved into place
// only once the whole command has succeeded.
class Staging {
public:
    explicit Staging(fs::path out) : out_(std::move(out)) {
        out_ = out_.lexically_normal();
        if (!out_.has_filename()) out_ = out_.parent_path();
        if (out_.empty()) throw Error(ErrorKind::argument, "--out must name a directory");
        dir_ = out_.parent_path() / ("." + out_.filename().string() + ".partial-" + std::to_string(::getpid()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    Staging(const Staging&) = delete;
    Staging& operator=(const Staging&) = delete;
    ~Staging() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    const fs::path& dir() const noexcept { return dir_; }

    void write(const std::string& name, std::string_view bytes) {
        const fs::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    }

    void commit() {
        fs::create_directories(out_);
        for (const auto& entry : fs::directory_iterator(dir_)) {
            const fs::path target = out_ / entry.path().filename();
            fs::remove_all(target);
            fs::rename(entry.path(), target);
        }
    }

private:
    fs::path out_;
    fs::path dir_;
};

struct Manifest {
    explicit Manifest(std::string cmd) : command(std::move(cmd)) {}

    std::string command;
    json config = json::object();
    json inputs = json::object();
    std::optional<std::uint64_t> seed;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void add_input(const fs::path& path) {
        for (auto& [k, v] : digest_inputs(path)) inputs[k] = v;
    }

    std::string dump() const {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json j = {{"command", command},
                  {"config", config},
                  {"inputs", inputs},
                  {"version", ABXLAB_VERSION},
                  {"seed", seed ? json(*seed) : json(nullptr)},
                  {"wall_time_seconds", wall}};
        return j.dump(2) + "\n";
    }
};

unsigned default_jobs() {
    if (const char* env = std::getenv("ABXLAB_JOBS")) {
        const auto v = detail::parse_int<unsigned>(env);
        if (!v || *v == 0) throw Error(ErrorKind::argument, std::string("ABXLAB_JOBS must be a positive integer, got '") + env + "'");
        return *v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

FeatureArchive load_features(const fs::path& dir) { return load_feature_archive(dir, detect_feature_format(dir)); }

// Two-column view of a CSV with a header: first column as key, `column` as
// value.
std::map<std::string, double> load_keyed_csv(const fs::path& path, const std::string& column) {
    std::istringstream in(read_bytes(path));
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::format, path.string() + ":1: missing header");
    const auto header = detail::split_char(detail::trim(line), ',');
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw Error(ErrorKind::format, path.string() + ":1: no '" + column + "' column");
    const auto col = static_cast<std::size_t>(it - header.begin());
    std::map<std::string, double> out;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        const auto fields = detail::split_char(t, ',');
        const std::string where = path.string() + ":" + std::to_string(lineno);
        if (fields.size() != header.size()) throw Error(ErrorKind::format, where + ": expected " + std::to_string(header.size()) + " fields");
        const auto v = detail::parse_double(fields[col]);
        if (!v) throw Error(ErrorKind::data, where + ": '" + std::string(fields[col]) + "' is not a number");
        if (!out.emplace(std::string(fields[0]), *v).second)
            throw Error(ErrorKind::validation, where + ": duplicate key '" + std::string(fields[0]) + "'");
    }
    return out;
}

PairRates load_pairwise_csv(const fs::path& path) {
    std::istringstream in(read_bytes(path));
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kCsvHeader)
        throw Error(ErrorKind::format, path.string() + ":1: expected header '" + std::string(kCsvHeader) + "'");
    PairRates out;
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        const auto f = detail::split_char(t, ',');
        if (f.size() != 6) throw Error(ErrorKind::format, where + ": expected 6 fields");
        if (f[2] != "*" || f[3] != "*") continue;
        const auto v = detail::parse_double(f[5]);
        if (!v) throw Error(ErrorKind::data, where + ": bad rate '" + std::string(f[5]) + "'");
        if (!out.emplace(CategoryPair::of(std::string(f[0]), std::string(f[1])), *v).second)
            throw Error(ErrorKind::validation, where + ": duplicate pair");
    }
    if (out.empty()) throw Error(ErrorKind::empty_input, path.string() + ": no pair-level rows");
    return out;
}

std::string join_command(const std::vector<std::string>& args) {
    std::string s = "abxlab";
    for (const auto& a : args) s += " " + a;
    return s;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
    std::string features, items, mode = "within", task = "phone", af_table, out, config;
    std::size_t max_speaker_pairs = 0;
    std::uint64_t seed = 42;
    unsigned jobs = 0;
    bool with_cells = false;
};

int cmd_eval(const EvalOptions& o, const CLI::App& sc, const std::string& command, std::ostream& out) {
    json cfg = o.config.empty() ? json::object() : read_json(o.config);
    const auto given = [&](const char* name) { return sc.get_option(name)->count() > 0; };
    const auto pick = [&]<typename T>(const char* flag, const char* key, T value) {
        if (given(flag) || !cfg.contains(key)) return value;
        try {
            return cfg.at(key).get<T>();
        } catch (const json::exception& e) {
            throw Error(ErrorKind::argument, o.config + ": key '" + key + "': " + e.what());
        }
    };
    const std::string features = pick("--features", "features", o.features);
    const std::string items = pick("--items", "items", o.items);
    const std::string mode_s = pick("--mode", "mode", o.mode);
    const std::string task_s = pick("--task", "task", o.task);
    const std::string af_name = pick("--af-table", "af_table", o.af_table);
    const std::size_t max_pairs = pick("--max-speaker-pairs", "max_speaker_pairs", o.max_speaker_pairs);
    const std::uint64_t seed = pick("--seed", "seed", o.seed);
    const unsigned jobs = given("--jobs") ? o.jobs : (cfg.contains("jobs") ? cfg["jobs"].get<unsigned>() : default_jobs());
    if (features.empty() || items.empty())
        throw Error(ErrorKind::argument, "eval needs --features and --items");

    const SpeakerMode mode = parse_speaker_mode(mode_s);
    const TaskKind task = parse_task_kind(task_s);
    std::optional<AfTable> table;
    if (task == TaskKind::af) {
        if (af_name.empty()) throw Error(ErrorKind::argument, "--task af needs --af-table");
        table = resolve_af_table(af_name);
    }

    Staging stage(o.out);
    Manifest manifest(command);
    manifest.seed = seed;
    manifest.add_input(features);
    manifest.add_input(items);
    if (table && fs::is_regular_file(af_name)) manifest.add_input(af_name);

    const FeatureArchive archive = load_features(features);
    const auto segments = load_item_file(items);
    ScoreOptions opts;
    if (max_pairs > 0) opts.limits.max_speaker_pairs_per_context = max_pairs;
    opts.limits.seed = seed;
    opts.jobs = jobs;
    const AbxReport report = score_corpus(archive, segments, mode, task, table ? &*table : nullptr, opts);

    json rj = report_to_json_value(report, o.with_cells);
    if (table) {
        const auto attrs = table->attributes();
        const std::vector<std::string> attr_list(attrs.begin(), attrs.end());
        const auto rates = af_attribute_rates(report.pairwise, attr_list);
        json a = json::object();
        for (const auto& [k, v] : rates.rates) a[k] = format_rate(v);
        rj["attributes"] = std::move(a);
        rj["attributes_excluded"] = rates.excluded;
    }
    manifest.config = {{"features", features},
                       {"items", items},
                       {"mode", to_string(mode)},
                       {"task", to_string(task)},
                       {"af_table", af_name.empty() ? json(nullptr) : json(af_name)},
                       {"max_speaker_pairs", max_pairs > 0 ? json(max_pairs) : json(nullptr)},
                       {"seed", seed},
                       {"jobs", jobs},
                       {"config_hash", report.metadata.config_hash}};
    stage.write("report.json", rj.dump(2) + "\n");
    stage.write("pairwise.csv", report_pairwise_csv(report));
    stage.write("contexts.csv", report_contexts_csv(report));
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << "overall " << format_rate(report.overall) << " (" << report.metadata.cells_scored << " cells, "
        << report.metadata.comparisons << " comparisons)\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_phoneme(const std::string& pairwise_path, const std::string& inventory_path, const std::string& out_dir,
                const std::string& command, std::ostream& out) {
    std::vector<std::string> inventory;
    if (inventory_path.empty()) {
        inventory = cmu39_inventory();
    } else {
        std::istringstream in(read_bytes(inventory_path));
        std::string line;
        while (std::getline(in, line))
            for (auto tok : detail::split_ws(line)) inventory.emplace_back(tok);
        if (inventory.empty()) throw Error(ErrorKind::empty_input, inventory_path + ": empty inventory");
    }
    Staging stage(out_dir);
    Manifest manifest(command);
    manifest.add_input(pairwise_path);
    if (!inventory_path.empty()) manifest.add_input(inventory_path);
    manifest.config = {{"pairwise", pairwise_path},
                       {"inventory", inventory_path.empty() ? json("cmu39") : json(inventory_path)}};

    const auto report = phoneme_level_rates(load_pairwise_csv(pairwise_path), inventory);
    if (report.rates.empty()) throw Error(ErrorKind::empty_input, pairwise_path + ": no inventory phone has a scored pair");
    json rates = json::object();
    std::vector<BarDatum> bars;
    for (const auto& phone : inventory) {
        const auto it = report.rates.find(phone);
        if (it == report.rates.end()) continue;
        rates[phone] = {{"xi", it->second.xi},
                        {"rate", format_rate(it->second.xi)},
                        {"n_pairs", it->second.n_pairs},
                        {"class", to_string(it->second.tag)}};
        bars.push_back({phone, it->second.xi * 100.0, it->second.tag});
    }
    json missing = json::array();
    for (const auto& p : report.missing_pairs) missing.push_back({p.first, p.second});
    const json j = {{"rates", rates}, {"excluded", report.excluded}, {"missing_pairs", missing}};
    stage.write("phoneme.json", j.dump(2) + "\n");
    stage.write("phoneme.csv", phoneme_report_csv(report));
    stage.write("bars.svg", bar_chart_svg(bars, "Phoneme-level ABX error", "error (%)"));
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << report.rates.size() << " phonemes scored, " << report.excluded.size() << " excluded\n";
    return kExitOk;
}

int cmd_confusion(const std::string& truth_path, const std::string& hyp_path, bool strip, long long period_us,
                  const std::string& out_dir, const std::string& command, std::ostream& out) {
    if (period_us <= 0) throw Error(ErrorKind::argument, "--period-us must be positive");
    Staging stage(out_dir);
    Manifest manifest(command);
    manifest.add_input(truth_path);
    manifest.add_input(hyp_path);
    manifest.config = {{"truth", truth_path}, {"hyp", hyp_path}, {"strip_tones", strip}, {"period_us", period_us}};

    const auto truth = load_label_track(truth_path);
    const auto hyp = load_label_track(hyp_path);
    const auto cm = confusion_matrix(truth, hyp, Microseconds(period_us), {strip});
    const auto pco = co_occurrence(cm);

    std::string pco_csv = "phone,p_co,argmax,frames\n";
    json pj = json::object();
    for (const auto& sym : cm.row_symbols) {
        const auto& c = pco.at(sym);
        pco_csv += sym + "," + format_rate(c.p_co) + "," + c.argmax + "," + std::to_string(c.frames) + "\n";
        pj[sym] = {{"p_co", c.p_co}, {"argmax", c.argmax}, {"frames", c.frames}};
    }
    const json j = {{"rows", cm.row_symbols},
                    {"columns", cm.col_symbols},
                    {"values", cm.values},
                    {"frame_counts", cm.frame_counts},
                    {"empty_rows", cm.empty_rows},
                    {"p_co", pj}};
    stage.write("confusion.csv", confusion_to_csv(cm));
    stage.write("pco.csv", pco_csv);
    stage.write("confusion.json", j.dump(2) + "\n");
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << cm.row_symbols.size() << " x " << cm.col_symbols.size() << " confusion matrix\n";
    return kExitOk;
}

int cmd_reduce(const std::string& baseline, const std::string& improved, const std::string& out_dir,
               const std::string& command, std::ostream& out) {
    Staging stage(out_dir);
    Manifest manifest(command);
    manifest.add_input(baseline);
    manifest.add_input(improved);
    manifest.config = {{"baseline", baseline}, {"improved", improved}};
    const auto b = load_keyed_csv(baseline, "rate");
    const auto i = load_keyed_csv(improved, "rate");
    const auto red = relative_reduction(b, i);
    std::string csv = "phone,baseline,improved,reduction_percent\n";
    json pj = json::object();
    for (const auto& [k, base] : b) {
        const auto it = red.percent.find(k);
        csv += k + "," + format_rate(base) + "," + format_rate(i.at(k)) + "," +
               (it == red.percent.end() ? std::string("undefined") : format_rate(it->second)) + "\n";
        if (it != red.percent.end()) pj[k] = it->second;
    }
    const json j = {{"reduction_percent", pj}, {"undefined", red.undefined}};
    stage.write("reduction.csv", csv);
    stage.write("reduction.json", j.dump(2) + "\n");
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << red.percent.size() << " reductions, " << red.undefined.size() << " undefined\n";
    return kExitOk;
}

int cmd_correlate(const std::string& baseline, const std::string& improved, const std::string& pco_path,
                  const std::string& method, const std::string& out_dir, const std::string& command,
                  std::ostream& out) {
    Staging stage(out_dir);
    Manifest manifest(command);
    manifest.add_input(baseline);
    manifest.add_input(improved);
    manifest.add_input(pco_path);
    manifest.config = {{"baseline", baseline}, {"improved", improved}, {"pco", pco_path}, {"method", method}};

    const auto red = relative_reduction(load_keyed_csv(baseline, "rate"), load_keyed_csv(improved, "rate"));
    const auto pco = load_keyed_csv(pco_path, "p_co");
    std::vector<ScatterDatum> points;
    std::vector<double> xs, ys;
    for (const auto& [k, r] : red.percent) {
        const auto it = pco.find(k);
        if (it == pco.end()) continue;
        points.push_back({k, it->second, r});
        xs.push_back(it->second);
        ys.push_back(r);
    }
    if (points.size() < 2)
        throw Error(ErrorKind::empty_input, "fewer than two phonemes have both a p_co and a defined reduction");
    const double r = method == "spearman" ? spearman_correlation(xs, ys) : pearson_correlation(xs, ys);
    json pts = json::array();
    for (const auto& p : points) pts.push_back({{"phone", p.label}, {"p_co", p.x}, {"reduction_percent", p.y}});
    const json j = {{"method", method}, {"r", r}, {"n", points.size()}, {"points", pts}};
    stage.write("correlation.json", j.dump(2) + "\n");
    stage.write("scatter.svg", scatter_svg(points, "Co-occurrence vs. error reduction", "p_co", "relative reduction (%)"));
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << method << " r = " << detail::format_double(r) << " over " << points.size() << " phonemes\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
    std::string config, out, phones;
    std::uint64_t seed = 0;
    std::size_t dim = 0, speakers = 0, segments = 0, frames_min = 0, frames_max = 0;
    double noise = 0, offset = 0, mean_scale = 0;
};

int cmd_synth(const SynthOptions& o, const CLI::App& sc, const std::string& command, std::ostream& out) {
    const auto given = [&](const char* name) { return sc.get_option(name)->count() > 0; };
    json base = o.config.empty() ? json::object() : read_json(o.config);
    if (!given("--seed") && !base.contains("seed")) throw Error(ErrorKind::argument, "synth needs a seed (--seed or config)");
    SynthConfig cfg = SynthConfig::from_json(base);
    if (given("--seed")) cfg.seed = o.seed;
    if (given("--phones")) {
        cfg.phones.clear();
        for (auto p : detail::split_char(o.phones, ','))
            if (!detail::trim(p).empty()) cfg.phones.push_back({std::string(detail::trim(p)), {}});
    }
    if (given("--dim")) cfg.dim = o.dim;
    if (given("--speakers")) cfg.n_speakers = o.speakers;
    if (given("--segments")) cfg.segments_per_cell = o.segments;
    if (given("--frames-min")) cfg.frames_min = o.frames_min;
    if (given("--frames-max")) cfg.frames_max = o.frames_max;
    if (given("--noise")) cfg.noise_scale = o.noise;
    if (given("--offset")) cfg.speaker_offset_scale = o.offset;
    if (given("--mean-scale")) cfg.mean_scale = o.mean_scale;
    cfg.validate();

    Staging stage(o.out);
    Manifest manifest(command);
    if (!o.config.empty()) manifest.add_input(o.config);
    manifest.seed = cfg.seed;
    manifest.config = cfg.to_json();
    const SynthCorpus corpus = generate_corpus(cfg);
    write_corpus(corpus, stage.dir());
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << corpus.archive.size() << " utterances, " << corpus.items.size() << " segments\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// apc

struct ApcOptions {
    std::string features, config, out, model;
    std::uint64_t seed = 42;
    std::size_t epochs = 0, frames = 12;
    unsigned jobs = 0;
};

ApcConfig apc_config(const ApcOptions& o, const CLI::App& sc) {
    ApcConfig cfg = o.config.empty() ? ApcConfig{} : ApcConfig::from_json(read_json(o.config));
    if (sc.get_option("--seed")->count() > 0) cfg.seed = o.seed;
    if (auto* e = sc.get_option_no_throw("--epochs"); e && e->count() > 0) cfg.epochs = o.epochs;
    return cfg;
}

int cmd_apc_train(const ApcOptions& o, const CLI::App& sc, const std::string& command, std::ostream& out) {
    ApcConfig cfg = apc_config(o, sc);
    Staging stage(o.out);
    Manifest manifest(command);
    manifest.add_input(o.features);
    if (!o.config.empty()) manifest.add_input(o.config);
    const FeatureArchive archive = load_features(o.features);
    const TrainResult result = train(cfg, archive);
    manifest.seed = result.model.config().seed;
    manifest.config = result.model.config().to_json();
    stage.write("model.apc", encode_checkpoint(result.model));
    std::string curve = "epoch,loss\n";
    for (std::size_t e = 0; e < result.loss_curve.size(); ++e)
        curve += std::to_string(e) + "," + detail::format_double(result.loss_curve[e]) + "\n";
    stage.write("loss.csv", curve);
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << "loss " << detail::format_double(result.loss_curve.front()) << " -> "
        << detail::format_double(result.loss_curve.back()) << " after " << cfg.epochs << " epochs\n";
    return kExitOk;
}

int cmd_apc_extract(const ApcOptions& o, const std::string& command, std::ostream& out) {
    Staging stage(o.out);
    Manifest manifest(command);
    manifest.add_input(o.model);
    manifest.add_input(o.features);
    const ApcModel model = load_checkpoint(o.model);
    manifest.seed = model.config().seed;
    manifest.config = {{"model", o.model}, {"features", o.features}, {"apc", model.config().to_json()}};
    const FeatureArchive archive = load_features(o.features);
    const FeatureArchive hidden = extract_features(model, archive, o.jobs ? o.jobs : default_jobs());
    write_feature_archive(hidden, stage.dir(), FeatureFormat::binary);
    stage.write("manifest.json", manifest.dump());
    stage.commit();
    out << hidden.size() << " utterances, dim " << hidden.dim() << "\n";
    return kExitOk;
}

ApcConfig default_gradcheck_config() {
    ApcConfig cfg;
    cfg.layers = 2;
    cfg.hidden_dim = 8;
    cfg.input_dim = 3;
    return cfg;
}

int cmd_apc_gradcheck(const ApcOptions& o, std::ostream& out) {
    ApcConfig cfg = o.config.empty() ? default_gradcheck_config() : ApcConfig::from_json(read_json(o.config));
    if (cfg.input_dim == 0) cfg.input_dim = default_gradcheck_config().input_dim;
    const GradCheckResult r = gradient_check_sampled(cfg, o.seed, o.frames);
    if (r.inconclusive) {
        out << "gradcheck inconclusive: residuals near the L1 kink after " << r.resamples << " resamples\n";
        return kExitInconclusive;
    }
    out << "max relative error " << detail::format_double(r.max_relative_error) << " over " << r.parameters
        << " parameters\n";
    return r.max_relative_error < 1e-4 ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"ABX discriminability evaluation and APC feature learning", "abxlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ABXLAB_VERSION);
    const std::string command = join_command(args);
    int rc = kExitOk;

    EvalOptions eo;
    auto* eval = app.add_subcommand("eval", "Score an ABX task");
    eval->add_option("--features", eo.features, "Feature archive directory");
    eval->add_option("--items", eo.items, "Item file");
    eval->add_option("--mode", eo.mode, "within | across")->check(CLI::IsMember({"within", "across"}));
    eval->add_option("--task", eo.task, "phone | af")->check(CLI::IsMember({"phone", "af"}));
    eval->add_option("--af-table", eo.af_table, "Built-in table name or TSV file");
    eval->add_option("--max-speaker-pairs", eo.max_speaker_pairs, "Speaker pairs kept per context (across)")
        ->check(CLI::PositiveNumber);
    eval->add_option("--seed", eo.seed, "Subsampling seed");
    eval->add_option("--jobs", eo.jobs, "Worker threads (default: ABXLAB_JOBS or core count)")
        ->check(CLI::PositiveNumber);
    eval->add_option("--config", eo.config, "JSON config; flags take precedence");
    eval->add_flag("--with-cells", eo.with_cells, "Include per-cell scores in report.json");
    eval->add_option("--out", eo.out, "Output directory")->required();
    eval->callback([&] {
        if (eo.config.empty()) {
            if (eval->get_option("--features")->count() == 0) throw CLI::RequiredError("--features");
            if (eval->get_option("--items")->count() == 0) throw CLI::RequiredError("--items");
        }
    });

    auto* analyze = app.add_subcommand("analyze", "Phoneme, confusion and correlation analysis");
    analyze->require_subcommand(1);
    std::string a_pairwise, a_inventory, a_out, a_truth, a_hyp, a_base, a_impr, a_pco, a_method = "pearson";
    bool a_strip = false;
    long long a_period = 10000;
    auto* phoneme = analyze->add_subcommand("phoneme", "Phoneme-level rates from pairwise.csv");
    phoneme->add_option("--pairwise", a_pairwise, "pairwise.csv from eval")->required();
    phoneme->add_option("--inventory", a_inventory, "Phone list file (default: 39 CMU phonemes)");
    phoneme->add_option("--out", a_out, "Output directory")->required();
    auto* confusion = analyze->add_subcommand("confusion", "Frame-level confusion and co-occurrence");
    confusion->add_option("--truth", a_truth, "Ground-truth label track")->required();
    confusion->add_option("--hyp", a_hyp, "Hypothesis label track")->required();
    confusion->add_flag("--strip-tones", a_strip, "Drop trailing tone digits from hypothesis labels");
    confusion->add_option("--period-us", a_period, "Frame period in microseconds");
    confusion->add_option("--out", a_out, "Output directory")->required();
    auto* correlate = analyze->add_subcommand("correlate", "Correlate p_co with relative error reduction");
    correlate->add_option("--baseline", a_base, "Baseline phoneme.csv")->required();
    correlate->add_option("--improved", a_impr, "Improved phoneme.csv")->required();
    correlate->add_option("--pco", a_pco, "pco.csv from analyze confusion")->required();
    correlate->add_option("--method", a_method, "pearson | spearman")->check(CLI::IsMember({"pearson", "spearman"}));
    correlate->add_option("--out", a_out, "Output directory")->required();
    auto* reduce = analyze->add_subcommand("reduce", "Relative error reduction per phoneme");
    reduce->add_option("--baseline", a_base, "Baseline phoneme.csv")->required();
    reduce->add_option("--improved", a_impr, "Improved phoneme.csv")->required();
    reduce->add_option("--out", a_out, "Output directory")->required();

    SynthOptions so;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    synth->add_option("--config", so.config, "JSON config");
    synth->add_option("--out", so.out, "Output directory")->required();
    synth->add_option("--seed", so.seed, "Random seed (required here or in the config)");
    synth->add_option("--phones", so.phones, "Comma-separated phone list");
    synth->add_option("--dim", so.dim, "Feature dimension");
    synth->add_option("--speakers", so.speakers, "Number of speakers");
    synth->add_option("--segments", so.segments, "Segments per (speaker, context, phone)");
    synth->add_option("--frames-min", so.frames_min, "Shortest segment");
    synth->add_option("--frames-max", so.frames_max, "Longest segment");
    synth->add_option("--noise", so.noise, "Noise scale");
    synth->add_option("--offset", so.offset, "Speaker offset scale");
    synth->add_option("--mean-scale", so.mean_scale, "Scale of one-hot phone means");

    ApcOptions po;
    auto* apc = app.add_subcommand("apc", "Autoregressive predictive coding");
    apc->require_subcommand(1);
    auto* apc_train = apc->add_subcommand("train", "Train a model");
    apc_train->add_option("--features", po.features, "Feature archive directory")->required();
    apc_train->add_option("--config", po.config, "JSON model/training config");
    apc_train->add_option("--seed", po.seed, "Initialisation and shuffling seed");
    apc_train->add_option("--epochs", po.epochs, "Override the epoch count");
    apc_train->add_option("--out", po.out, "Output directory")->required();
    auto* apc_extract = apc->add_subcommand("extract", "Write top-layer features");
    apc_extract->add_option("--model", po.model, "Checkpoint")->required();
    apc_extract->add_option("--features", po.features, "Feature archive directory")->required();
    apc_extract->add_option("--jobs", po.jobs, "Worker threads")->check(CLI::PositiveNumber);
    apc_extract->add_option("--out", po.out, "Output directory")->required();
    auto* apc_grad = apc->add_subcommand("gradcheck", "Finite-difference gradient check");
    apc_grad->add_option("--config", po.config, "JSON model config (small)");
    apc_grad->add_option("--seed", po.seed, "Seed for the model and data");
    apc_grad->add_option("--frames", po.frames, "Sequence length")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            if (dynamic_cast<const CLI::CallForVersion*>(&e))
                out << e.what() << "\n";
            else
                out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (eval->parsed()) rc = cmd_eval(eo, *eval, command, out);
        else if (phoneme->parsed()) rc = cmd_phoneme(a_pairwise, a_inventory, a_out, command, out);
        else if (confusion->parsed()) rc = cmd_confusion(a_truth, a_hyp, a_strip, a_period, a_out, command, out);
        else if (correlate->parsed()) rc = cmd_correlate(a_base, a_impr, a_pco, a_method, a_out, command, out);
        else if (reduce->parsed()) rc = cmd_reduce(a_base, a_impr, a_out, command, out);
        else if (synth->parsed()) rc = cmd_synth(so, *synth, command, out);
        else if (apc_train->parsed()) rc = cmd_apc_train(po, *apc_train, command, out);
        else if (apc_extract->parsed()) rc = cmd_apc_extract(po, command, out);
        else if (apc_grad->parsed()) rc = cmd_apc_gradcheck(po, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return rc;
}

}  // namespace abxlab::cli
