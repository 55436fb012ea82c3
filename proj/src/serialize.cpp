#include "rtfcs/serialize.hpp"

#include "rtfcs/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace rtfcs {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

template <class F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw IoError(std::string(what) + ": " + e.what());
    }
}

void expect_format(const json& j, const char* format) {
    if (!j.is_object() || j.value("format", "") != format)
        throw IoError(std::string("expected a file with format \"") + format + "\"");
    if (j.value("version", 0) != kSchemaVersion)
        throw IoError(std::string(format) + ": unsupported schema version");
}

json complex_array(const ComplexVector& v) {
    json a = json::array();
    for (Index k = 0; k < v.size(); ++k) a.push_back({v(k).real(), v(k).imag()});
    return a;
}

ComplexVector complex_from(const json& a) {
    ComplexVector v(static_cast<Index>(a.size()));
    for (std::size_t k = 0; k < a.size(); ++k) {
        const json& p = a.at(k);
        if (!p.is_array() || p.size() != 2) throw IoError("complex values must be [re, im] pairs");
        v(static_cast<Index>(k)) = {p.at(0).get<double>(), p.at(1).get<double>()};
    }
    return v;
}

json real_array(const RealVector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

RealVector real_from(const json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::Map<const RealVector>(v.data(), static_cast<Index>(v.size()));
}

// JSON has no infinities; non-finite scores are written as strings.
json score_value(double s) {
    if (std::isnan(s)) return "nan";
    if (std::isinf(s)) return s > 0 ? "inf" : "-inf";
    return s;
}

double score_from(const json& j) {
    if (j.is_number()) return j.get<double>();
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw IoError("unrecognized score value \"" + s + "\"");
}

json scores_json(const std::vector<BinScore>& scores) {
    json a = json::array();
    for (const auto& s : scores) a.push_back({{"bin", s.bin}, {"score", score_value(s.score)}, {"valid", s.valid}});
    return a;
}

std::vector<BinScore> scores_from(const json& a) {
    std::vector<BinScore> out;
    for (const auto& s : a) out.push_back({s.at("bin").get<Index>(), score_from(s.at("score")), s.at("valid").get<bool>()});
    return out;
}

json conventions() { return {{"dft_sign", kDftSignTag}, {"delay_compensation", kDelayTag}}; }

void check_conventions(const json& j) {
    const json c = j.at("conventions");
    if (c.at("dft_sign").get<std::string>() != kDftSignTag ||
        c.at("delay_compensation").get<std::string>() != kDelayTag)
        throw IoError("file uses different DFT or delay conventions");
}

json filter_json(const ImpulseResponse& h) { return {{"taps", real_array(h.taps)}, {"delay", h.delay}}; }

}  // namespace

std::string estimate_to_json(const EstimateFile& f) {
    const RtfEstimate& e = f.estimate;
    json j;
    j["format"] = "rtfcs-rtf-estimate";
    j["version"] = kSchemaVersion;
    j["dft_len"] = e.dft_len;
    j["delay"] = f.delay;
    j["conventions"] = conventions();
    j["source"] = std::string(estimator_name(e.source));
    j["values"] = complex_array(e.values);
    j["valid"] = e.valid;
    if (f.kurtosis) j["kurtosis"] = scores_json(*f.kurtosis);
    if (f.coherence) j["coherence"] = scores_json(*f.coherence);
    return j.dump(1) + "\n";
}

EstimateFile estimate_from_json(const std::string& text) {
    const json j = parse_json(text, "estimate");
    return guarded("estimate", [&] {
        expect_format(j, "rtfcs-rtf-estimate");
        check_conventions(j);
        EstimateFile f;
        RtfEstimate& e = f.estimate;
        e.dft_len = j.at("dft_len").get<Index>();
        f.delay = j.at("delay").get<Index>();
        e.source = parse_estimator(j.at("source").get<std::string>());
        e.values = complex_from(j.at("values"));
        e.valid = j.at("valid").get<std::vector<bool>>();
        if (e.dft_len < 4 || e.dft_len % 2 != 0) throw IoError("estimate: dft_len must be even and >= 4");
        if (e.values.size() != e.dft_len / 2 + 1 || e.valid.size() != static_cast<std::size_t>(e.values.size()))
            throw IoError("estimate: expected dft_len/2 + 1 values and validity flags");
        if (j.contains("kurtosis")) f.kurtosis = scores_from(j.at("kurtosis"));
        if (j.contains("coherence")) f.coherence = scores_from(j.at("coherence"));
        return f;
    });
}

std::string filter_to_json(const FilterFile& f) {
    json j = filter_json(f.filter);
    j["format"] = "rtfcs-filter";
    j["version"] = kSchemaVersion;
    j["dft_len"] = f.dft_len;
    j["method"] = f.method;
    j["percentage"] = f.percentage;
    j["conventions"] = conventions();
    return j.dump(1) + "\n";
}

FilterFile filter_from_json(const std::string& text) {
    const json j = parse_json(text, "filter");
    return guarded("filter", [&] {
        expect_format(j, "rtfcs-filter");
        check_conventions(j);
        FilterFile f;
        f.filter = {real_from(j.at("taps")), j.at("delay").get<Index>()};
        f.dft_len = j.at("dft_len").get<Index>();
        f.method = j.value("method", "");
        f.percentage = j.value("percentage", 100.0);
        if (f.filter.size() == 0) throw IoError("filter: no taps");
        return f;
    });
}

std::string truth_to_json(const TruthSidecar& t) {
    json j;
    j["format"] = "rtfcs-truth";
    j["version"] = kSchemaVersion;
    j["dft_len"] = t.dft_len;
    j["oracle_snr"] = scores_json(t.oracle_snr);
    j["h_rel"] = t.h_rel ? filter_json(*t.h_rel) : json(nullptr);
    return j.dump(1) + "\n";
}

TruthSidecar truth_from_json(const std::string& text) {
    const json j = parse_json(text, "truth");
    return guarded("truth", [&] {
        expect_format(j, "rtfcs-truth");
        TruthSidecar t;
        t.dft_len = j.at("dft_len").get<Index>();
        t.oracle_snr = scores_from(j.at("oracle_snr"));
        if (!j.at("h_rel").is_null())
            t.h_rel = ImpulseResponse{real_from(j.at("h_rel").at("taps")), j.at("h_rel").at("delay").get<Index>()};
        return t;
    });
}

std::string demixing_to_json(const DemixingMatrices& d) {
    json j;
    j["format"] = "rtfcs-demixing";
    j["version"] = kSchemaVersion;
    j["dft_len"] = d.dft_len;
    j["delay"] = d.delay;
    const char* names[2][2] = {{"W11", "W12"}, {"W21", "W22"}};
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            ComplexVector v(static_cast<Index>(d.w.size()));
            for (std::size_t k = 0; k < d.w.size(); ++k) v(static_cast<Index>(k)) = d.w[k](r, c);
            j[names[r][c]] = complex_array(v);
        }
    return j.dump(1) + "\n";
}

DemixingMatrices demixing_from_json(const std::string& text) {
    const json j = parse_json(text, "demixing");
    return guarded("demixing", [&] {
        DemixingMatrices d;
        d.dft_len = j.at("dft_len").get<Index>();
        d.delay = j.at("delay").get<Index>();
        if (d.dft_len < 4 || d.dft_len % 2 != 0) throw IoError("demixing: dft_len must be even and >= 4");
        const Index bins = d.dft_len / 2 + 1;
        const char* names[2][2] = {{"W11", "W12"}, {"W21", "W22"}};
        d.w.assign(static_cast<std::size_t>(bins), Eigen::Matrix2cd::Zero());
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                const ComplexVector v = complex_from(j.at(names[r][c]));
                if (v.size() != bins)
                    throw IoError(std::string("demixing: ") + names[r][c] + " needs dft_len/2 + 1 entries");
                for (Index k = 0; k < bins; ++k) d.w[static_cast<std::size_t>(k)](r, c) = v(k);
            }
        return d;
    });
}

void write_results_csv(std::ostream& os, const std::vector<TrialResult>& rows) {
    os << "grid_point,trial,method,percentage,snr_in_db,snr_out_db,attenuation_db,status\n";
    char num[64];
    const auto fmt = [&](double v) {
        std::snprintf(num, sizeof num, "%.6f", v);
        return std::string(num);
    };
    for (const auto& r : rows) {
        os << r.grid_point << ',' << (r.trial < 0 ? std::string("mean") : std::to_string(r.trial)) << ','
           << r.method << ',';
        std::snprintf(num, sizeof num, "%g", r.percentage);
        os << num << ',';
        if (r.ok) {
            os << fmt(r.snr_in_db) << ',' << fmt(r.snr_out_db) << ',' << fmt(r.attenuation_db) << ",ok\n";
        } else {
            // Quote the message; commas inside errors are common.
            std::string msg = r.error;
            for (auto& ch : msg)
                if (ch == '"' || ch == '\n') ch = '\'';
            os << ",,,\"error: " << msg << "\"\n";
        }
    }
}

std::string results_to_json(const std::vector<TrialResult>& rows) {
    json a = json::array();
    for (const auto& r : rows) {
        json e;
        e["grid_point"] = r.grid_point;
        e["trial"] = r.trial < 0 ? json("mean") : json(r.trial);
        e["method"] = r.method;
        e["percentage"] = r.percentage;
        if (r.ok) {
            e["snr_in_db"] = r.snr_in_db;
            e["snr_out_db"] = r.snr_out_db;
            e["attenuation_db"] = r.attenuation_db;
        } else {
            e["snr_in_db"] = e["snr_out_db"] = e["attenuation_db"] = nullptr;
            e["error"] = r.error;
        }
        a.push_back(std::move(e));
    }
    json j = {{"format", "rtfcs-results"}, {"version", kSchemaVersion}, {"rows", a}};
    return j.dump(1) + "\n";
}

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["format"] = "rtfcs-manifest";
    j["version"] = kSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["command"] = m.command;
    j["config_path"] = m.config_path;
    j["seed"] = m.seed;
    j["arguments"] = m.arguments;
    j["resolved"] = m.resolved.empty() ? json::object() : json::parse(m.resolved);
    j["outputs"] = m.outputs;
    j["elapsed_s"] = m.elapsed_s;
    return j.dump(1) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
    const json j = parse_json(text, "manifest");
    return guarded("manifest", [&] {
        expect_format(j, "rtfcs-manifest");
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.config_path = j.at("config_path").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.arguments = j.at("arguments").get<std::vector<std::string>>();
        m.resolved = j.at("resolved").dump();
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.elapsed_s = j.value("elapsed_s", 0.0);
        return m;
    });
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << text;
        if (!out) throw IoError("write failed for " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp + " to " + path.string() + ": " + ec.message());
}

}  // namespace rtfcs
