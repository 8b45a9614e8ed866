#include "regsel/pipeline.hpp"

#include "regsel/model_report.hpp"
#include "regsel/stats.hpp"
#include "regsel/table_io.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace regsel {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::prep: return "prep";
        case Stage::prune: return "prune";
        case Stage::select: return "select";
        case Stage::diagnose: return "diagnose";
        case Stage::cv: return "cv";
        case Stage::report: return "report";
        case Stage::all: return "all";
    }
    return "all";
}

Stage parse_stage(std::string_view text) {
    for (auto s : {Stage::prep, Stage::prune, Stage::select, Stage::diagnose, Stage::cv, Stage::report, Stage::all}) {
        if (to_string(s) == text) return s;
    }
    throw ArgumentError("unknown stage '" + std::string(text) + "'");
}

StageError::StageError(Stage stage, const std::string& message, const std::string& hint)
    : Error("[" + std::string(to_string(stage)) + "] " + message + (hint.empty() ? "" : " (hint: " + hint + ")")),
      stage_(stage) {}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

bool is_none(const std::string& v) { return v.empty() || v == "none"; }

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ArgumentError("config key '" + key + "': '" + v + "' is not a number");
    return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        throw ArgumentError("config key '" + key + "': '" + v + "' is not a non-negative integer");
    }
    return out;
}

bool parse_flag(const std::string& key, const std::string& v) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ArgumentError("config key '" + key + "': expected true or false, got '" + v + "'");
}

fs::path resolve(const fs::path& base, const std::string& v) {
    fs::path p(v);
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

void apply_config_override(RunConfig& c, const std::string& key, const std::string& value, const fs::path& base_dir) {
    const std::string v = trim(value);
    if (key == "predictors") {
        c.predictor_tables.clear();
        for (const auto& p : split_list(v)) c.predictor_tables.push_back(resolve(base_dir, p));
    } else if (key == "response") {
        c.response_table = is_none(v) ? std::nullopt : std::optional<fs::path>(resolve(base_dir, v));
    } else if (key == "schema") {
        c.schema = resolve(base_dir, v);
    } else if (key == "delimiter") {
        if (v == "tab" || v == "\\t") {
            c.delimiter = '\t';
        } else if (v == "comma") {
            c.delimiter = ',';
        } else if (v.size() == 1) {
            c.delimiter = v[0];
        } else {
            throw ArgumentError("config key 'delimiter': expected comma, tab or a single character");
        }
    } else if (key == "na_ratio") {
        c.na_ratio = parse_real(key, v);
    } else if (key == "factors") {
        if (v == "auto") {
            c.factors = AutoDetectBinary{};
        } else {
            c.factors = is_none(v) ? std::vector<std::string>{} : split_list(v);
        }
    } else if (key == "max_levels") {
        c.max_levels = parse_count(key, v);
    } else if (key == "vstar") {
        c.vstar = parse_real(key, v);
    } else if (key == "modes") {
        c.modes.clear();
        if (!is_none(v)) {
            for (const auto& m : split_list(v)) {
                const auto d = parse_direction(m);
                if (std::find(c.modes.begin(), c.modes.end(), d) != c.modes.end()) {
                    throw ArgumentError("config key 'modes': '" + m + "' listed twice");
                }
                c.modes.push_back(d);
            }
        }
    } else if (key == "penalty") {
        c.penalty = parse_real(key, v);
    } else if (key == "stepwise_start") {
        if (v == "full") {
            c.stepwise_start = StepwiseStart::full;
        } else if (v == "null") {
            c.stepwise_start = StepwiseStart::null;
        } else {
            throw ArgumentError("config key 'stepwise_start': expected full or null");
        }
    } else if (key == "exclude_rows") {
        c.exclude_rows.clear();
        if (!is_none(v)) {
            for (const auto& r : split_list(v)) {
                const auto row = parse_count(key, r);
                if (row < 1) throw ArgumentError("config key 'exclude_rows': rows are 1-based");
                c.exclude_rows.push_back(row);
            }
        }
    } else if (key == "top_influence") {
        c.top_influence = parse_count(key, v);
    } else if (key == "replications") {
        c.replications = parse_count(key, v);
    } else if (key == "train_fraction") {
        c.train_fraction = parse_real(key, v);
    } else if (key == "seed") {
        c.seed = parse_count(key, v);
    } else if (key == "workers") {
        c.workers = parse_count(key, v);
    } else if (key == "log_response") {
        c.log_response = parse_flag(key, v);
    } else if (key == "chosen_model") {
        if (v != "auto") parse_direction(v);
        c.chosen_model = v;
    } else if (key == "out") {
        c.out_dir = resolve(base_dir, v);
    } else {
        throw ArgumentError("unknown config key '" + key + "'");
    }
}

RunConfig parse_run_config(const std::string& text, const fs::path& base_dir) {
    RunConfig c;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ArgumentError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_config_override(c, trim(std::string_view(line).substr(0, eq)), line.substr(eq + 1), base_dir);
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    return parse_run_config(read_text_file(path), path.parent_path());
}

void apply_environment(RunConfig& config) {
    if (const char* dir = std::getenv(kOutDirVariable); dir != nullptr && *dir != '\0') config.out_dir = dir;
}

void ReportBundle::merge(const ReportBundle& other) {
    for (const auto& [name, text] : other.files) files[name] = text;
}

void ReportBundle::write(const fs::path& dir) const {
    for (const auto& [name, text] : files) write_text_file(dir / name, text);
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    return format_number(v);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) out.push_back(line);
    return out;
}

double parse_cell(const std::string& s) {
    if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Inf") return std::numeric_limits<double>::infinity();
    if (s == "-Inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw DataError("checkpoint cell '" + s + "' is not a number");
    return v;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

}  // namespace

void write_design_checkpoint(const DesignMatrix& d, const fs::path& dir) {
    std::ostringstream data;
    data << "row_id\t" << d.response_name();
    for (const auto& c : d.columns()) data << "\t" << c.name;
    data << "\n";
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        data << d.row_ids()[static_cast<std::size_t>(i)] << "\t" << num(d.y()(i));
        for (Eigen::Index j = 0; j < d.cols(); ++j) data << "\t" << num(d.x()(i, j));
        data << "\n";
    }
    write_text_file(dir / "design.tsv", data.str());

    std::ostringstream cols;
    cols << "name\tsource\tlevel\tterm\n";
    for (const auto& c : d.columns()) {
        cols << c.name << "\t" << c.source << "\t" << c.level << "\t" << (c.term ? std::to_string(*c.term) : "-") << "\n";
    }
    write_text_file(dir / "columns.tsv", cols.str());

    std::ostringstream terms;
    terms << "term\tkind\tcolumns\tlevels\n";
    for (const auto& t : d.terms()) {
        std::vector<std::string> idx;
        for (auto c : t.columns) idx.push_back(std::to_string(c));
        terms << t.name << "\t" << (t.kind == TermKind::numeric ? "numeric" : "factor") << "\t" << join(idx, ",");
        for (const auto& l : t.levels) terms << "\t" << l;
        terms << "\n";
    }
    write_text_file(dir / "terms.tsv", terms.str());
}

DesignMatrix read_design_checkpoint(const fs::path& dir) {
    const auto data = lines_of(read_text_file(dir / "design.tsv"));
    const auto col_lines = lines_of(read_text_file(dir / "columns.tsv"));
    const auto term_lines = lines_of(read_text_file(dir / "terms.tsv"));
    if (data.empty() || col_lines.empty() || term_lines.empty()) throw DataError("design checkpoint is truncated");

    std::vector<DesignColumn> columns;
    for (std::size_t k = 1; k < col_lines.size(); ++k) {
        const auto f = split_tabs(col_lines[k]);
        if (f.size() != 4) throw DataError("columns checkpoint line " + std::to_string(k + 1) + " is malformed");
        DesignColumn c{f[0], f[1], f[2], std::nullopt};
        if (f[3] != "-") c.term = static_cast<std::size_t>(parse_cell(f[3]));
        columns.push_back(c);
    }
    std::vector<TermGroup> terms;
    for (std::size_t k = 1; k < term_lines.size(); ++k) {
        const auto f = split_tabs(term_lines[k]);
        if (f.size() < 3) throw DataError("terms checkpoint line " + std::to_string(k + 1) + " is malformed");
        TermGroup t;
        t.name = f[0];
        t.kind = f[1] == "factor" ? TermKind::factor : TermKind::numeric;
        for (const auto& c : split_list(f[2])) t.columns.push_back(static_cast<std::size_t>(parse_cell(c)));
        t.levels.assign(f.begin() + 3, f.end());
        terms.push_back(t);
    }
    const auto header = split_tabs(data[0]);
    if (header.size() != columns.size() + 2) throw DataError("design checkpoint header does not match its column list");
    const auto n = static_cast<Eigen::Index>(data.size() - 1);
    const auto p = static_cast<Eigen::Index>(columns.size());
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto f = split_tabs(data[static_cast<std::size_t>(i + 1)]);
        if (f.size() != header.size()) throw DataError("design checkpoint row " + std::to_string(i + 1) + " is malformed");
        ids.push_back(f[0]);
        y(i) = parse_cell(f[1]);
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = parse_cell(f[static_cast<std::size_t>(j + 2)]);
    }
    return DesignMatrix(std::move(x), std::move(y), std::move(columns), std::move(terms), header[1], std::move(ids));
}

ResidualDiagnostics residual_diagnostics(const FittedModel& model) {
    ResidualDiagnostics r;
    r.residuals = model.residuals();
    r.fitted = model.fitted();
    const Eigen::Index n = model.n();
    r.studentized = Eigen::VectorXd::Zero(n);
    const double df = static_cast<double>(n - model.rank());
    const bool exact = df < 1 || model.rss() <= rss_floor(model.design().y());
    if (!exact) {
        const double sigma = std::sqrt(model.rss() / df);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double room = 1.0 - model.leverage()(i);
            r.studentized(i) = room > 1e-10 ? r.residuals(i) / (sigma * std::sqrt(room))
                                            : std::numeric_limits<double>::quiet_NaN();
        }
    }
    std::vector<double> finite;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::isfinite(r.studentized(i))) finite.push_back(r.studentized(i));
    }
    std::sort(finite.begin(), finite.end());
    const auto m = static_cast<Eigen::Index>(finite.size());
    r.qq_sample = Eigen::Map<const Eigen::VectorXd>(finite.data(), m);
    r.qq_theoretical.resize(m);
    const boost::math::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < m; ++i) {
        r.qq_theoretical(i) = boost::math::quantile(normal, (static_cast<double>(i) + 0.5) / static_cast<double>(m));
    }
    if (!finite.empty()) r.histogram = histogram(finite);
    return r;
}

std::map<std::string, std::string> residual_diagnostic_files(const FittedModel& model, const std::string& prefix) {
    const auto r = residual_diagnostics(model);
    const auto& ids = model.design().row_ids();
    std::ostringstream by_index;
    std::ostringstream by_fitted;
    by_index << "index\trow_id\tresidual\tstudentized\n";
    by_fitted << "row_id\tfitted\tresidual\n";
    for (Eigen::Index i = 0; i < r.residuals.size(); ++i) {
        const auto& id = ids[static_cast<std::size_t>(i)];
        by_index << i + 1 << "\t" << id << "\t" << num(r.residuals(i)) << "\t" << num(r.studentized(i)) << "\n";
        by_fitted << id << "\t" << num(r.fitted(i)) << "\t" << num(r.residuals(i)) << "\n";
    }
    std::ostringstream qq;
    qq << "theoretical\tsample\n";
    for (Eigen::Index i = 0; i < r.qq_sample.size(); ++i) qq << num(r.qq_theoretical(i)) << "\t" << num(r.qq_sample(i)) << "\n";
    std::ostringstream hist;
    hist << "lower\tupper\tcount\n";
    for (std::size_t b = 0; b < r.histogram.counts.size(); ++b) {
        hist << num(r.histogram.edges[b]) << "\t" << num(r.histogram.edges[b + 1]) << "\t" << r.histogram.counts[b] << "\n";
    }
    return {{prefix + "_index.tsv", by_index.str()},
            {prefix + "_fitted.tsv", by_fitted.str()},
            {prefix + "_qq.tsv", qq.str()},
            {prefix + "_hist.tsv", hist.str()}};
}

namespace {

const char* hint_for(Stage s) {
    switch (s) {
        case Stage::prep: return "check the input paths, the schema file and the delimiter";
        case Stage::prune: return "run the prep stage first or raise vstar";
        case Stage::select: return "run the prune stage first; check modes, penalty and exclude_rows";
        case Stage::diagnose: return "run the select stage first";
        case Stage::cv: return "run the select stage first; check replications and train_fraction";
        case Stage::report: return "run the cv stage first or set chosen_model explicitly";
        case Stage::all: return "";
    }
    return "";
}

struct Labeled {
    std::string label;
    std::vector<std::string> terms;
};

std::string lower_label(Direction d) {
    auto s = mode_label(d);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

std::size_t worker_count(const RunConfig& c) {
    if (c.workers > 0) return c.workers;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::string vif_table(const VifReport& r) {
    std::ostringstream os;
    os << "term\tvif\n";
    for (const auto& v : r.values) os << v.name << "\t" << num(v.value) << "\n";
    return os.str();
}

std::string vif_histogram(const VifReport& r) {
    std::vector<double> finite;
    std::size_t infinite = 0;
    for (const auto& v : r.values) {
        if (std::isfinite(v.value)) {
            finite.push_back(v.value);
        } else {
            ++infinite;
        }
    }
    std::ostringstream os;
    os << "lower\tupper\tcount\n";
    if (!finite.empty()) {
        const auto h = histogram(finite);
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            os << num(h.edges[b]) << "\t" << num(h.edges[b + 1]) << "\t" << h.counts[b] << "\n";
        }
    }
    if (infinite > 0) os << "Inf\tInf\t" << infinite << "\n";
    return os.str();
}

std::string labeled_text(const std::vector<Labeled>& models) {
    std::ostringstream os;
    os << "model\tterms\n";
    for (const auto& m : models) os << m.label << "\t" << join(m.terms, ",") << "\n";
    return os.str();
}

std::vector<Labeled> read_labeled(const fs::path& path) {
    std::vector<Labeled> out;
    const auto lines = lines_of(read_text_file(path));
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const auto f = split_tabs(lines[k]);
        if (f.size() != 2) throw DataError(path.filename().string() + " line " + std::to_string(k + 1) + " is malformed");
        out.push_back({f[0], split_list(f[1])});
    }
    return out;
}

std::vector<std::size_t> zero_based(const RunConfig& c, Eigen::Index n) {
    std::vector<std::size_t> out;
    for (auto r : c.exclude_rows) {
        if (r < 1 || r > static_cast<std::size_t>(n)) {
            throw ArgumentError("excluded row " + std::to_string(r) + " is outside 1.." + std::to_string(n));
        }
        out.push_back(r - 1);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::string suffixed(const std::string& name, const std::string& suffix) {
    const auto dot = name.rfind('.');
    return name.substr(0, dot) + suffix + name.substr(dot);
}

class Runner {
public:
    explicit Runner(const RunConfig& c) : config_(c), checkpoints_(c.out_dir / "checkpoints") {}

    ReportBundle prep() {
        const auto schema = load_schema(config_.schema);
        const TableFormat format{config_.delimiter};
        if (config_.predictor_tables.empty()) throw ArgumentError("no predictor tables configured");
        std::optional<RawTable> merged;
        for (const auto& path : config_.predictor_tables) {
            auto table = drop_sparse_columns(load_table(path, schema, format), config_.na_ratio);
            merged = merged ? merge_by_id(*merged, table) : std::move(table);
        }
        if (config_.response_table) merged = merge_by_id(*merged, load_table(*config_.response_table, schema, format));
        auto complete = drop_incomplete_rows(*merged);
        const bool coerce = std::holds_alternative<AutoDetectBinary>(config_.factors) ||
                            !std::get<std::vector<std::string>>(config_.factors).empty();
        if (coerce) complete = coerce_to_factor(complete, config_.factors, config_.max_levels);
        const auto design = encode_design(complete);
        write_design_checkpoint(design, checkpoints_);

        std::ostringstream summary;
        summary << "key\tvalue\n";
        summary << "rows\t" << design.rows() << "\n";
        summary << "design_columns\t" << design.cols() << "\n";
        summary << "terms\t" << design.terms().size() << "\n";
        summary << "numeric_terms\t" << design.numeric_term_count() << "\n";
        summary << "factor_terms\t" << design.terms().size() - design.numeric_term_count() << "\n";
        summary << "response\t" << design.response_name() << "\n";
        ReportBundle b;
        b.files["audit.txt"] = complete.audit().to_text();
        b.files["prep_summary.tsv"] = summary.str();
        return b;
    }

    ReportBundle prune() {
        const auto design = read_design_checkpoint(checkpoints_);
        const auto r = vif_prune(design, config_.vstar);
        std::ostringstream removed;
        removed << "step\tterm\tvif\n";
        for (std::size_t k = 0; k < r.report.trail.size(); ++k) {
            removed << k + 1 << "\t" << r.report.trail[k].name << "\t" << num(r.report.trail[k].vif) << "\n";
        }
        std::ostringstream kept;
        for (const auto& t : r.design.term_names()) kept << t << "\n";
        write_text_file(checkpoints_ / "pruned_terms.txt", kept.str());
        ReportBundle b;
        b.files["vif_before.tsv"] = vif_table(r.initial);
        b.files["vif_after.tsv"] = vif_table(r.report);
        b.files["vif_removed.tsv"] = removed.str();
        b.files["vif_hist_before.tsv"] = vif_histogram(r.initial);
        b.files["vif_hist_after.tsv"] = vif_histogram(r.report);
        return b;
    }

    ReportBundle select() {
        const auto data = pruned();
        const auto plan = selection_plan();
        ReportBundle b;
        const auto traces = run_selection(data, plan);
        emit_traces(b, traces, "");
        write_text_file(checkpoints_ / "selection.tsv", labeled_text(labeled(traces)));
        if (!config_.exclude_rows.empty()) {
            const auto rerun = refit_excluding_rows(plan, data, zero_based(config_, data.rows()));
            emit_traces(b, rerun.after, "_excluded");
            b.files["exclusion_comparison.tsv"] = rerun.to_text();
            write_text_file(checkpoints_ / "selection_excluded.tsv", labeled_text(labeled(rerun.after)));
        }
        return b;
    }

    ReportBundle diagnose() {
        const auto data = pruned();
        ReportBundle b;
        diagnose_on(b, data, with_full(data, read_labeled(checkpoints_ / "selection.tsv")), "");
        if (!config_.exclude_rows.empty()) {
            const auto reduced = data.without_rows(zero_based(config_, data.rows()));
            diagnose_on(b, reduced, with_full(reduced, read_labeled(checkpoints_ / "selection_excluded.tsv")), "_excluded");
        }
        return b;
    }

    ReportBundle cv() {
        const auto data = pruned();
        ReportBundle b;
        const auto models = read_labeled(checkpoints_ / "selection.tsv");
        std::ostringstream iqr;
        iqr << "model\tmspe_iqr\n";
        if (!models.empty()) {
            const auto result = cross_validate(b, data, models, "");
            for (const auto& m : result.models) iqr << m.label << "\t" << num(m.mspe_summary.iqr) << "\n";
            if (!config_.exclude_rows.empty()) {
                const auto reduced = data.without_rows(zero_based(config_, data.rows()));
                cross_validate(b, reduced, read_labeled(checkpoints_ / "selection_excluded.tsv"), "_excluded");
            }
        }
        write_text_file(checkpoints_ / "cv_iqr.tsv", iqr.str());
        return b;
    }

    ReportBundle report() {
        const auto data = pruned();
        const auto models = read_labeled(checkpoints_ / "selection.tsv");
        Labeled chosen{"full", data.term_names()};
        std::string rule = "full model (no selection modes)";
        if (config_.chosen_model == "auto") {
            if (!models.empty()) {
                const auto lines = lines_of(read_text_file(checkpoints_ / "cv_iqr.tsv"));
                double best = std::numeric_limits<double>::infinity();
                for (std::size_t k = 1; k < lines.size(); ++k) {
                    const auto f = split_tabs(lines[k]);
                    const double v = parse_cell(f.at(1));
                    if (v < best) {
                        best = v;
                        chosen = find_model(models, f[0]);
                    }
                }
                rule = "narrowest MSPE interquartile range";
            }
        } else {
            chosen = find_model(models, lower_label(parse_direction(config_.chosen_model)));
            rule = "configured";
        }
        const auto model = fit_ols(data.select_terms_by_name(chosen.terms));
        ReportBundle b;
        std::ostringstream info;
        info << "key\tvalue\n";
        info << "model\t" << chosen.label << "\n";
        info << "rule\t" << rule << "\n";
        info << "formula\t" << model_formula(model.design()) << "\n";
        b.files["chosen_model.tsv"] = info.str();
        b.files["final_model_report.txt"] = model_report_text(model);
        b.files["final_model_coefficients.tsv"] = model_report_delimited(model);
        for (auto& [name, text] : residual_diagnostic_files(model, "residuals_" + chosen.label)) b.files[name] = text;
        emit_added_variable(b, model, chosen.label);
        if (config_.log_response) {
            const auto logged = refit_log_response(model);
            b.files["final_model_report_log.txt"] = model_report_text(logged);
            b.files["final_model_coefficients_log.tsv"] = model_report_delimited(logged);
            for (auto& [name, text] : residual_diagnostic_files(logged, "residuals_" + chosen.label + "_log")) {
                b.files[name] = text;
            }
        }
        return b;
    }

private:
    DesignMatrix pruned() const {
        const auto design = read_design_checkpoint(checkpoints_);
        return design.select_terms_by_name(lines_of(read_text_file(checkpoints_ / "pruned_terms.txt")));
    }

    SelectionPlan selection_plan() const {
        SelectionPlan plan;
        plan.scope.penalty = config_.penalty;
        plan.modes = config_.modes;
        plan.both_from_lower = config_.stepwise_start == StepwiseStart::null;
        plan.options.workers = worker_count(config_);
        return plan;
    }

    static std::vector<Labeled> labeled(const std::vector<SelectionTrace>& traces) {
        std::vector<Labeled> out;
        for (const auto& t : traces) out.push_back({lower_label(t.mode), t.final_terms});
        return out;
    }

    static Labeled find_model(const std::vector<Labeled>& models, const std::string& label) {
        for (const auto& m : models) {
            if (m.label == label) return m;
        }
        throw ArgumentError("model '" + label + "' was not selected in this run");
    }

    static std::vector<Labeled> with_full(const DesignMatrix& data, std::vector<Labeled> models) {
        models.insert(models.begin(), Labeled{"full", data.term_names()});
        return models;
    }

    static void emit_traces(ReportBundle& b, const std::vector<SelectionTrace>& traces, const std::string& suffix) {
        std::ostringstream formulas;
        formulas << "model\tformula\taic\n";
        std::ostringstream skipped;
        skipped << "model\tstep\tmove\tterm\treason\n";
        for (const auto& t : traces) {
            const auto label = lower_label(t.mode);
            b.files["trace_" + label + suffix + ".tsv"] = trace_to_text(t);
            formulas << label << "\t" << model_formula(t.final_model.design()) << "\t" << num(t.final_aic) << "\n";
            for (const auto& s : t.skipped) {
                skipped << label << "\t" << s.step << "\t" << (s.kind == MoveKind::add ? "add" : "remove") << "\t" << s.term
                        << "\t" << s.reason << "\n";
            }
        }
        b.files["formulas" + suffix + ".tsv"] = formulas.str();
        b.files["selection_skipped" + suffix + ".tsv"] = skipped.str();
    }

    void diagnose_on(ReportBundle& b, const DesignMatrix& data, const std::vector<Labeled>& models,
                     const std::string& suffix) const {
        std::vector<FittedModel> fits;
        std::vector<std::string> labels;
        for (const auto& m : models) {
            fits.push_back(fit_ols(data.select_terms_by_name(m.terms)));
            labels.push_back(m.label);
        }
        b.files["comparison" + suffix + ".tsv"] = compare_models(fits, labels).to_text();
        const auto top = std::min<std::size_t>(config_.top_influence, static_cast<std::size_t>(data.rows()));
        for (std::size_t k = 0; k < fits.size(); ++k) {
            const auto report = influence_flags(fits[k], std::max<std::size_t>(top, 1));
            b.files["influence_" + labels[k] + suffix + ".tsv"] = influence_plot_data(report, data.row_ids());
        }
    }

    CVResult cross_validate(ReportBundle& b, const DesignMatrix& data, const std::vector<Labeled>& models,
                            const std::string& suffix) const {
        CVConfig cfg;
        cfg.replications = config_.replications;
        cfg.train_fraction = config_.train_fraction;
        cfg.seed = config_.seed;
        for (const auto& m : models) cfg.models.push_back({m.label, m.terms});
        CVOptions options;
        options.workers = worker_count(config_);
        const auto result = mc_cross_validate(data, cfg, options);
        b.files["cv_mspe" + suffix + ".tsv"] = mspe_dump(result);
        b.files["cv_summary_mspe" + suffix + ".tsv"] = mspe_summary_table(result, false);
        b.files["cv_summary_rmspe" + suffix + ".tsv"] = mspe_summary_table(result, true);
        for (const auto& [name, text] : emit_mspe_boxplot_data(result)) b.files[suffixed(name, suffix)] = text;
        std::ostringstream info;
        info << "key\tvalue\n";
        info << "replications\t" << cfg.replications << "\n";
        info << "train_fraction\t" << cfg.train_fraction << "\n";
        info << "seed\t" << cfg.seed << "\n";
        info << "train_size\t" << result.train_size << "\n";
        info << "test_size\t" << result.test_size << "\n";
        info << "rank_deficient_fits\t" << result.rank_deficient_fits << "\n";
        info << "unseen_level_rows\t" << result.unseen_level_rows << "\n";
        b.files["cv_info" + suffix + ".tsv"] = info.str();
        return result;
    }

    static void emit_added_variable(ReportBundle& b, const FittedModel& model, const std::string& label) {
        std::ostringstream points;
        std::ostringstream slopes;
        points << "term\trow_id\tx_partial\ty_partial\n";
        slopes << "term\tslope\n";
        const auto& design = model.design();
        for (const auto& t : design.terms()) {
            if (t.columns.size() != 1 || model.aliased()[t.columns[0]]) continue;
            const auto av = added_variable_data(model, t.name);
            slopes << t.name << "\t" << num(av.slope) << "\n";
            for (Eigen::Index i = 0; i < av.x_partial.size(); ++i) {
                points << t.name << "\t" << design.row_ids()[static_cast<std::size_t>(i)] << "\t" << num(av.x_partial(i))
                       << "\t" << num(av.y_partial(i)) << "\n";
            }
        }
        b.files["av_" + label + ".tsv"] = points.str();
        b.files["av_slopes_" + label + ".tsv"] = slopes.str();
    }

    RunConfig config_;
    fs::path checkpoints_;
};

ReportBundle run_one(Runner& runner, Stage stage) {
    switch (stage) {
        case Stage::prep: return runner.prep();
        case Stage::prune: return runner.prune();
        case Stage::select: return runner.select();
        case Stage::diagnose: return runner.diagnose();
        case Stage::cv: return runner.cv();
        case Stage::report: return runner.report();
        case Stage::all: break;
    }
    return {};
}

}  // namespace

ReportBundle run_stage(const RunConfig& config, Stage stage) {
    Runner runner(config);
    const std::vector<Stage> order = stage == Stage::all
                                         ? std::vector<Stage>{Stage::prep, Stage::prune, Stage::select, Stage::diagnose,
                                                              Stage::cv, Stage::report}
                                         : std::vector<Stage>{stage};
    ReportBundle all;
    for (auto s : order) {
        ReportBundle b;
        try {
            b = run_one(runner, s);
            b.write(config.out_dir);
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(s, e.what(), hint_for(s));
        }
        all.merge(b);
    }
    return all;
}

}  // namespace regsel
