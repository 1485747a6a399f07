#include "tailrisk/io.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tailrisk/errors.hpp"

namespace tailrisk::io {

namespace {

using nlohmann::json;

// Splits one CSV record (already free of the record terminator) into fields,
// honoring double quotes with "" escapes.
std::vector<std::string> split_csv_record(const std::string& line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw DataError("line " + std::to_string(lineno) + ": unterminated quote");
    }
    fields.push_back(std::move(cur));
    return fields;
}

bool parse_double(const std::string& field, double* out) {
    if (field.empty()) return false;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size()) return false;
    *out = v;
    return true;
}

std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

}  // namespace

std::vector<double> read_csv_column(std::istream& in, std::size_t column,
                                    const std::string& name) {
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    bool first_record = true;
    while (std::getline(in, line)) {
        ++lineno;
        line = trimmed(line);
        if (line.empty()) {
            if (in.peek() == EOF) break;  // trailing newline
            throw DataError(name + ": line " + std::to_string(lineno) + ": empty record");
        }
        const auto fields = split_csv_record(line, lineno);
        if (column >= fields.size()) {
            throw DataError(name + ": line " + std::to_string(lineno) + ": only " +
                            std::to_string(fields.size()) + " column(s), need index " +
                            std::to_string(column));
        }
        double v = 0.0;
        if (!parse_double(fields[column], &v)) {
            if (first_record) {
                first_record = false;  // header row
                continue;
            }
            throw DataError(name + ": line " + std::to_string(lineno) +
                            ": cannot parse '" + fields[column] + "' as a number");
        }
        if (!std::isfinite(v)) {
            throw DataError(name + ": line " + std::to_string(lineno) +
                            ": non-finite value rejected");
        }
        first_record = false;
        values.push_back(v);
    }
    if (values.empty()) {
        throw DataError(name + ": no numeric rows found");
    }
    return values;
}

std::vector<double> read_jsonl(std::istream& in, const std::string& name) {
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trimmed(line);
        if (line.empty()) {
            if (in.peek() == EOF) break;
            throw DataError(name + ": line " + std::to_string(lineno) + ": empty record");
        }
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_number()) {
            throw DataError(name + ": line " + std::to_string(lineno) +
                            ": expected one JSON number per record");
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            throw DataError(name + ": line " + std::to_string(lineno) +
                            ": non-finite value rejected");
        }
        values.push_back(v);
    }
    if (values.empty()) {
        throw DataError(name + ": no numeric rows found");
    }
    return values;
}

std::vector<double> read_values(const std::string& path, Format format,
                                std::size_t column, std::string* digest_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open input file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    if (digest_out) *digest_out = fnv1a64_hex(bytes);

    Format f = format;
    if (f == Format::kAuto) {
        f = path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl"
                ? Format::kJsonl
                : Format::kCsv;
    }
    std::istringstream contents(bytes);
    return f == Format::kJsonl ? read_jsonl(contents, path)
                               : read_csv_column(contents, column, path);
}

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char out[32];
    std::snprintf(out, sizeof out, "fnv1a64:%016" PRIx64, h);
    return out;
}

std::string format_full(double v) {
    char out[64];
    std::snprintf(out, sizeof out, "%.17g", v);
    return out;
}

std::string utc_timestamp() {
    std::time_t t = 0;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char out[32];
    std::strftime(out, sizeof out, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return out;
}

namespace {

// Emits JSON with insertion-ordered keys and full-precision numbers; the
// report is a golden-file artifact so the byte layout is part of the
// contract.
class JsonWriter {
  public:
    explicit JsonWriter(std::ostream& out) : out_(out) {}

    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(const std::string& k) {
        separate();
        indent();
        out_ << '"' << escaped(k) << "\": ";
        pending_value_ = true;
    }

    void value(double v) { raw(format_full(v)); }
    void value(std::uint64_t v) { raw(std::to_string(v)); }
    void value(bool v) { raw(v ? "true" : "false"); }
    void value(const std::string& v) { raw('"' + escaped(v) + '"'); }
    void value(const char* v) { value(std::string(v)); }
    void null() { raw("null"); }

  private:
    void open(char c) {
        if (!pending_value_) {
            separate();
            indent();
        }
        pending_value_ = false;
        out_ << c;
        first_.push_back(true);
        ++depth_;
    }

    void close(char c) {
        --depth_;
        if (!first_.back()) {
            out_ << '\n';
            indent_only();
        }
        first_.pop_back();
        out_ << c;
        if (depth_ == 0) out_ << '\n';
        mark_written();
    }

    void raw(const std::string& text) {
        if (!pending_value_) {
            separate();
            indent();
        }
        pending_value_ = false;
        out_ << text;
        mark_written();
    }

    void separate() {
        if (first_.empty()) return;
        if (!first_.back()) out_ << ',';
        out_ << '\n';
    }

    void indent() {
        for (int i = 0; i < depth_; ++i) out_ << "  ";
    }

    void indent_only() {
        for (int i = 0; i < depth_; ++i) out_ << "  ";
    }

    void mark_written() {
        if (!first_.empty()) first_.back() = false;
    }

    static std::string escaped(const std::string& s) {
        std::string out;
        out.reserve(s.size());
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\r': out += "\\r"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof buf, "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        return out;
    }

    std::ostream& out_;
    int depth_ = 0;
    bool pending_value_ = false;
    std::vector<bool> first_;
};

void write_fit(JsonWriter& w, const gpd::Fit& fit) {
    w.begin_object();
    w.key("method");
    w.value(fit.method == gpd::FitMethod::kMle ? "mle" : "moments");
    w.key("xi");
    w.value(fit.params.xi);
    w.key("sigma");
    w.value(fit.params.sigma);
    w.key("alpha");
    if (fit.params.xi > 0.0) {
        w.value(1.0 / fit.params.xi);
    } else {
        w.null();
    }
    w.key("n_excesses");
    w.value(fit.n_excesses);
    w.key("log_likelihood");
    w.value(fit.log_likelihood);
    w.key("std_errors");
    if (fit.std_errors) {
        w.begin_object();
        w.key("xi");
        w.value(fit.std_errors->first);
        w.key("sigma");
        w.value(fit.std_errors->second);
        w.end_object();
    } else {
        w.null();
    }
    w.end_object();
}

gpd::Fit read_fit(const json& j) {
    gpd::Fit fit;
    fit.method = j.at("method").get<std::string>() == "moments"
                     ? gpd::FitMethod::kMoments
                     : gpd::FitMethod::kMle;
    fit.params.xi = j.at("xi").get<double>();
    fit.params.sigma = j.at("sigma").get<double>();
    fit.n_excesses = j.at("n_excesses").get<std::size_t>();
    fit.log_likelihood = j.at("log_likelihood").get<double>();
    if (!j.at("std_errors").is_null()) {
        fit.std_errors = std::make_pair(j["std_errors"].at("xi").get<double>(),
                                        j["std_errors"].at("sigma").get<double>());
    }
    return fit;
}

}  // namespace

void write_report_json(const pipeline::RiskReport& report, std::ostream& out) {
    JsonWriter w(out);
    w.begin_object();
    w.key("tool");
    w.value("shadow");
    w.key("version");
    w.value(report.provenance.tool_version);

    w.key("input");
    w.begin_object();
    w.key("source");
    w.value(report.source);
    w.key("n_total");
    w.value(report.n_total);
    w.key("n_exceedances");
    w.value(report.n_exceedances);
    w.key("lower_bound");
    w.value(report.lower_bound);
    w.key("upper_bound");
    w.value(report.upper_bound);
    w.end_object();

    w.key("threshold");
    w.begin_object();
    w.key("kind");
    w.value(report.threshold_spec.kind == pipeline::ThresholdSpec::Kind::kValue
                ? "value"
                : "quantile");
    w.key("requested");
    w.value(report.threshold_spec.value);
    w.key("resolved_y");
    w.value(report.fit.threshold_y);
    w.key("resolved_z");
    w.value(report.fit.threshold_z);
    w.end_object();

    w.key("fit");
    write_fit(w, report.fit.dual_fit);

    w.key("naive");
    w.begin_object();
    w.key("sample_mean_above_u");
    w.value(report.naive.sample_mean_above_u);
    w.key("fit_on_y");
    write_fit(w, report.naive.fit_on_y);
    w.key("dual_mean_finite");
    w.value(report.naive.dual_mean_finite);
    w.end_object();

    w.key("model");
    if (report.fit.model) {
        const auto& m = *report.fit.model;
        w.begin_object();
        w.key("alpha");
        w.value(m.alpha);
        w.key("sigma");
        w.value(m.sigma);
        w.key("lower_bound");
        w.value(m.L);
        w.key("upper_bound");
        w.value(m.H);
        w.key("threshold");
        w.value(m.u);
        w.end_object();
    } else {
        w.null();
    }

    w.key("measures");
    if (report.measures) {
        w.begin_object();
        w.key("shadow_mean");
        w.value(report.measures->shadow_mean);
        w.key("dual_mean_finite");
        w.value(report.measures->dual_mean_finite);
        w.key("var");
        w.begin_array();
        for (const auto& [p, v] : report.measures->var_levels) {
            w.begin_object();
            w.key("p");
            w.value(p);
            w.key("value");
            w.value(v);
            w.end_object();
        }
        w.end_array();
        w.key("es");
        w.begin_array();
        for (const auto& [p, v] : report.measures->es_levels) {
            w.begin_object();
            w.key("p");
            w.value(p);
            w.key("value");
            w.value(v);
            w.end_object();
        }
        w.end_array();
        w.end_object();
    } else {
        w.null();
    }

    w.key("sensitivity");
    if (report.sensitivity) {
        w.begin_array();
        for (const auto& [h, m] : *report.sensitivity) {
            w.begin_object();
            w.key("upper_bound");
            w.value(h);
            w.key("shadow_mean");
            w.value(m);
            w.end_object();
        }
        w.end_array();
    } else {
        w.null();
    }

    w.key("warnings");
    w.begin_array();
    for (const auto& msg : report.fit.warnings) {
        w.value(msg);
    }
    w.end_array();

    w.key("provenance");
    w.begin_object();
    w.key("input_digest");
    w.value(report.provenance.input_digest);
    w.key("seed");
    w.value(report.provenance.seed);
    w.key("tool_version");
    w.value(report.provenance.tool_version);
    w.key("timestamp");
    w.value(report.provenance.timestamp);
    w.end_object();

    w.end_object();
}

std::string report_to_json(const pipeline::RiskReport& report) {
    std::ostringstream out;
    write_report_json(report, out);
    return out.str();
}

pipeline::RiskReport read_report_json(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("report parse error: ") + e.what());
    }
    try {
        pipeline::RiskReport report;
        const auto& input = j.at("input");
        report.source = input.at("source").get<std::string>();
        report.n_total = input.at("n_total").get<std::size_t>();
        report.n_exceedances = input.at("n_exceedances").get<std::size_t>();
        report.lower_bound = input.at("lower_bound").get<double>();
        report.upper_bound = input.at("upper_bound").get<double>();

        const auto& thr = j.at("threshold");
        report.threshold_spec.kind = thr.at("kind").get<std::string>() == "value"
                                         ? pipeline::ThresholdSpec::Kind::kValue
                                         : pipeline::ThresholdSpec::Kind::kQuantile;
        report.threshold_spec.value = thr.at("requested").get<double>();
        report.fit.threshold_y = thr.at("resolved_y").get<double>();
        report.fit.threshold_z = thr.at("resolved_z").get<double>();

        report.fit.dual_fit = read_fit(j.at("fit"));
        report.fit.n_exceedances = report.n_exceedances;

        const auto& naive = j.at("naive");
        report.naive.sample_mean_above_u = naive.at("sample_mean_above_u").get<double>();
        report.naive.fit_on_y = read_fit(naive.at("fit_on_y"));
        report.naive.dual_mean_finite = naive.at("dual_mean_finite").get<bool>();

        if (!j.at("model").is_null()) {
            const auto& m = j["model"];
            report.fit.model.emplace(m.at("alpha").get<double>(),
                                     m.at("sigma").get<double>(),
                                     m.at("lower_bound").get<double>(),
                                     m.at("upper_bound").get<double>(),
                                     m.at("threshold").get<double>());
        }
        if (!j.at("measures").is_null()) {
            const auto& me = j["measures"];
            shadow::RiskMeasures measures;
            measures.shadow_mean = me.at("shadow_mean").get<double>();
            measures.dual_mean_finite = me.at("dual_mean_finite").get<bool>();
            for (const auto& e : me.at("var")) {
                measures.var_levels.emplace_back(e.at("p").get<double>(),
                                                 e.at("value").get<double>());
            }
            for (const auto& e : me.at("es")) {
                measures.es_levels.emplace_back(e.at("p").get<double>(),
                                                e.at("value").get<double>());
            }
            report.measures = std::move(measures);
        }
        if (!j.at("sensitivity").is_null()) {
            std::vector<std::pair<double, double>> rows;
            for (const auto& e : j["sensitivity"]) {
                rows.emplace_back(e.at("upper_bound").get<double>(),
                                  e.at("shadow_mean").get<double>());
            }
            report.sensitivity = std::move(rows);
        }
        for (const auto& msg : j.at("warnings")) {
            report.fit.warnings.push_back(msg.get<std::string>());
        }
        const auto& prov = j.at("provenance");
        report.provenance.input_digest = prov.at("input_digest").get<std::string>();
        report.provenance.seed = prov.at("seed").get<std::uint64_t>();
        report.provenance.tool_version = prov.at("tool_version").get<std::string>();
        report.provenance.timestamp = prov.at("timestamp").get<std::string>();
        return report;
    } catch (const json::exception& e) {
        throw DataError(std::string("report is missing required fields: ") + e.what());
    }
}

}  // namespace tailrisk::io
