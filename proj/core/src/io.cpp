#include "crnr/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace crnr::io {

namespace {

// Field errors raised while decoding a parsed document. The path is turned
// into a line number afterwards when the source text is known.
struct FieldError {
    std::string field;
    std::string what;
};

[[noreturn]] void fail(const std::string& field, const std::string& what)
{
    throw FieldError{field, what};
}

const json& member(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.is_object()) fail(where, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(where.empty() ? key : where + "." + key, "missing field");
    return *it;
}

double number(const json& v, const std::string& field)
{
    if (!v.is_number()) fail(field, "expected a number");
    return v.get<double>();
}

cplx complex_pair(const json& v, const std::string& field)
{
    if (!v.is_array() || v.size() != 2) fail(field, "expected [re, im]");
    const cplx z{number(v[0], field + "[0]"), number(v[1], field + "[1]")};
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) fail(field, "not finite");
    return z;
}

json pair(cplx z) { return json::array({z.real(), z.imag()}); }

Index count(const json& v, const std::string& field)
{
    if (!v.is_number_integer()) fail(field, "expected an integer");
    const auto k = v.get<long long>();
    if (k < 1) fail(field, "must be >= 1");
    return static_cast<Index>(k);
}

json meta_to_json(const SignalMeta& m)
{
    json modes = json::array();
    for (const Mode& mode : m.modes) {
        json res = json::array();
        for (const cplx r : mode.residues) res.push_back(pair(r));
        modes.push_back({{"z", pair(mode.z)}, {"residues", res}, {"delay", mode.delay}});
    }
    json out{{"modes", modes}, {"scale", pair(m.scale)}};
    if (m.snr_db) {
        if (std::isinf(*m.snr_db) && *m.snr_db > 0)
            out["snr_db"] = "inf";
        else
            out["snr_db"] = *m.snr_db;
    } else {
        out["snr_db"] = nullptr;
    }
    out["seed"] = m.seed ? json(*m.seed) : json(nullptr);
    return out;
}

SignalMeta meta_from_json(const json& v)
{
    if (!v.is_object()) fail("meta", "expected an object");
    SignalMeta m;
    if (const auto it = v.find("modes"); it != v.end()) {
        if (!it->is_array()) fail("meta.modes", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string f = "meta.modes[" + std::to_string(i) + "]";
            const json& jm = (*it)[i];
            Mode mode;
            mode.z = complex_pair(member(jm, "z", f), f + ".z");
            const json& res = member(jm, "residues", f);
            if (!res.is_array()) fail(f + ".residues", "expected an array");
            for (std::size_t k = 0; k < res.size(); ++k)
                mode.residues.push_back(
                    complex_pair(res[k], f + ".residues[" + std::to_string(k) + "]"));
            if (const auto d = jm.find("delay"); d != jm.end()) {
                if (!d->is_number_integer() || d->get<long long>() < 0)
                    fail(f + ".delay", "expected a nonnegative integer");
                mode.delay = d->get<int>();
            }
            m.modes.push_back(std::move(mode));
        }
    }
    if (const auto it = v.find("snr_db"); it != v.end() && !it->is_null()) {
        if (it->is_string()) {
            if (it->get<std::string>() != "inf") fail("meta.snr_db", "expected a number or \"inf\"");
            m.snr_db = kNoiselessSnr;
        } else {
            m.snr_db = number(*it, "meta.snr_db");
        }
    }
    if (const auto it = v.find("seed"); it != v.end() && !it->is_null()) {
        if (!it->is_number_unsigned()) fail("meta.seed", "expected a nonnegative integer");
        m.seed = it->get<std::uint64_t>();
    }
    if (const auto it = v.find("scale"); it != v.end()) m.scale = complex_pair(*it, "meta.scale");
    return m;
}

// 1-based line of the first occurrence of the last key named in field.
int line_of_field(const std::string& text, const std::string& field)
{
    std::string key = field;
    if (const auto dot = key.rfind('.'); dot != std::string::npos) key = key.substr(dot + 1);
    if (const auto br = key.find('['); br != std::string::npos) key = key.substr(0, br);
    const auto pos = text.find('"' + key + '"');
    if (key.empty() || pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

int line_of_offset(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

template <typename Decode>
auto decode_or_throw(const json& doc, Decode&& decode, const std::string& text)
{
    try {
        return decode(doc);
    } catch (const FieldError& e) {
        const int line = text.empty() ? 0 : line_of_field(text, e.field);
        throw SchemaError((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                          "field '" + e.field + "': " + e.what);
    } catch (const InvalidArgument& e) {
        throw SchemaError(std::string("invalid content: ") + e.what());
    }
}

template <typename Decode>
auto parse_with(const std::string& text, Decode&& decode)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("line " + std::to_string(line_of_offset(text, e.byte)) +
                          ": malformed JSON: " + e.what());
    }
    return decode_or_throw(doc, decode, text);
}

Signal decode_signal(const json& doc)
{
    const Index T = count(member(doc, "T", ""), "T");
    const Index K = count(member(doc, "K", ""), "K");
    const json& samples = member(doc, "samples", "");
    if (!samples.is_array()) fail("samples", "expected an array");
    if (static_cast<Index>(samples.size()) != T * K)
        fail("samples", "expected T*K = " + std::to_string(T * K) + " entries, got " +
                            std::to_string(samples.size()));
    CMatrix y(T, K);
    for (Index t = 0; t < T; ++t)
        for (Index k = 0; k < K; ++k) {
            const auto i = static_cast<std::size_t>(t * K + k);
            y(t, k) = complex_pair(samples[i], "samples[" + std::to_string(i) + "]");
        }
    std::optional<SignalMeta> meta;
    if (const auto it = doc.find("meta"); it != doc.end() && !it->is_null())
        meta = meta_from_json(*it);
    return Signal(std::move(y), std::move(meta));
}

CandidateClass decode_class(const json& doc)
{
    CandidateClass cls;
    const json& name = member(doc, "name", "");
    if (!name.is_string()) fail("name", "expected a string");
    cls.name = name.get<std::string>();
    const json& freqs = member(doc, "freqs", "");
    if (!freqs.is_array()) fail("freqs", "expected an array");
    if (freqs.empty()) fail("freqs", "must not be empty");
    for (std::size_t i = 0; i < freqs.size(); ++i)
        cls.freqs.push_back(complex_pair(freqs[i], "freqs[" + std::to_string(i) + "]"));
    cls.validate();
    return cls;
}

std::string fmt(double x)
{
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

} // namespace

json to_json(const Signal& signal)
{
    json samples = json::array();
    for (Index t = 0; t < signal.length(); ++t)
        for (Index k = 0; k < signal.looks(); ++k) samples.push_back(pair(signal(t, k)));
    json doc{{"T", signal.length()}, {"K", signal.looks()}, {"samples", samples}};
    doc["meta"] = signal.meta() ? meta_to_json(*signal.meta()) : json(nullptr);
    return doc;
}

Signal signal_from_json(const json& doc) { return decode_or_throw(doc, decode_signal, {}); }

json to_json(const CandidateClass& cls)
{
    json freqs = json::array();
    for (const cplx z : cls.freqs) freqs.push_back(pair(z));
    return {{"name", cls.name}, {"freqs", freqs}};
}

CandidateClass class_from_json(const json& doc) { return decode_or_throw(doc, decode_class, {}); }

Signal parse_signal(const std::string& text)
{
    return parse_with(text, decode_signal);
}

CandidateClass parse_class(const std::string& text)
{
    return parse_with(text, decode_class);
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw InvalidArgument("write failed for '" + path.string() + "'");
}

Signal load_signal(const std::filesystem::path& path)
{
    try {
        return parse_signal(read_text(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

CandidateClass load_class(const std::filesystem::path& path)
{
    try {
        return parse_class(read_text(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

void save_signal(const Signal& signal, const std::filesystem::path& path)
{
    write_text(path, to_json(signal).dump(1) + "\n");
}

void save_class(const CandidateClass& cls, const std::filesystem::path& path)
{
    write_text(path, to_json(cls).dump(2) + "\n");
}

json to_json(const MembershipResult& r)
{
    return {{"theta", pair(r.theta)},
            {"delta", r.delta},
            {"lambda_star", pair(r.lambda_star)},
            {"verdict", to_string(r.verdict)},
            {"stage", to_string(r.stage)},
            {"search_radius", r.search_radius},
            {"radius_bound", to_string(r.bound)}};
}

json to_json(const ClassDecision& d)
{
    json per = json::array();
    for (const MembershipResult& r : d.per_freq) per.push_back(to_json(r));
    json out{{"class", d.class_name},
             {"is_member", d.is_member},
             {"per_freq", per},
             {"disk_center", pair(d.disk.center)},
             {"disk_radius", d.disk.radius},
             {"order", d.order},
             {"cadzow_converged", d.cadzow_converged},
             {"cadzow_iterations", d.cadzow_iterations},
             {"scale", pair(d.scale)}};
    if (d.rejected_at)
        out["rejected_at"] = {{"index", d.rejected_at->first},
                              {"stage", to_string(d.rejected_at->second)}};
    else
        out["rejected_at"] = nullptr;
    return out;
}

json to_json(const SweepReport& report)
{
    json snr = json::array();
    for (const double s : report.snr_grid) snr.push_back(std::isinf(s) ? json("inf") : json(s));
    json out{{"snr_grid", snr}, {"trials", report.trials}, {"seed", report.seed}};
    json rates = json::object();
    for (const MethodCurve& c : report.curves)
        rates[std::string(to_string(c.method))] = {{"error_rate", c.error_rate},
                                                   {"misclassified", c.misclassified}};
    out["error_rate"] = rates;
    auto centers = [](const std::vector<cplx>& v) {
        json a = json::array();
        for (const cplx c : v) a.push_back(pair(c));
        return a;
    };
    if (!report.disk_radius_mean_raw.empty()) {
        out["disk_center_mean"] = {{"raw", centers(report.disk_center_mean_raw)},
                                   {"cadzow", centers(report.disk_center_mean_cadzow)}};
        out["disk_radius_mean"] = {{"raw", report.disk_radius_mean_raw},
                                   {"cadzow", report.disk_radius_mean_cadzow}};
    }
    out["scale_used"] = report.scale_used;
    out["true_class_acceptance"] = report.true_class_acceptance;
    out["mean_order"] = report.mean_order;
    out["cadzow_nonconverged"] = report.cadzow_nonconverged;
    return out;
}

json to_json(const GridField& field)
{
    json values = json::array();
    for (Index i = 0; i < field.values.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < field.values.cols(); ++j) row.push_back(field.values(i, j));
        values.push_back(row);
    }
    return {{"re_axis", field.re_axis}, {"im_axis", field.im_axis}, {"values", values}};
}

json to_json(const Polygon& polygon)
{
    json v = json::array();
    for (const cplx z : polygon.vertices) v.push_back(pair(z));
    return {{"vertices", v}, {"area", polygon.area()}};
}

std::string report_csv(const SweepReport& report)
{
    std::ostringstream os;
    os << "snr_db,method,error_rate,disk_center_re,disk_center_im,disk_radius,variant\n";
    for (const MethodCurve& c : report.curves)
        for (std::size_t i = 0; i < report.snr_grid.size(); ++i)
            os << fmt(report.snr_grid[i]) << ',' << to_string(c.method) << ','
               << fmt(c.error_rate[i]) << ",,,,\n";
    for (std::size_t i = 0; i < report.disk_radius_mean_raw.size(); ++i) {
        const double snr = report.snr_grid[i];
        os << fmt(snr) << ",,," << fmt(report.disk_center_mean_raw[i].real()) << ','
           << fmt(report.disk_center_mean_raw[i].imag()) << ','
           << fmt(report.disk_radius_mean_raw[i]) << ",raw\n";
        os << fmt(snr) << ",,," << fmt(report.disk_center_mean_cadzow[i].real()) << ','
           << fmt(report.disk_center_mean_cadzow[i].imag()) << ','
           << fmt(report.disk_radius_mean_cadzow[i]) << ",cadzow\n";
    }
    return os.str();
}

std::string grid_csv(const GridField& field)
{
    std::ostringstream os;
    os << "re,im,value\n";
    for (std::size_t i = 0; i < field.re_axis.size(); ++i)
        for (std::size_t j = 0; j < field.im_axis.size(); ++j)
            os << fmt(field.re_axis[i]) << ',' << fmt(field.im_axis[j]) << ','
               << fmt(field.values(static_cast<Index>(i), static_cast<Index>(j))) << '\n';
    return os.str();
}

std::string polygon_csv(const Polygon& polygon)
{
    std::ostringstream os;
    os << "re,im\n";
    for (const cplx z : polygon.vertices) os << fmt(z.real()) << ',' << fmt(z.imag()) << '\n';
    return os.str();
}

std::string singular_values_csv(const RVector& sv)
{
    std::ostringstream os;
    os << "index,sigma\n";
    for (Index i = 0; i < sv.size(); ++i) os << i << ',' << fmt(sv(i)) << '\n';
    return os.str();
}

} // namespace crnr::io
