#include "loopwatch/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <sstream>

namespace loopwatch {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

double round_for_report(double v) {
    return std::strtod(fmt_g(v).c_str(), nullptr);
}

nlohmann::ordered_json json_number(double v) {
    return round_for_report(v);
}

nlohmann::ordered_json json_vector(const Eigen::VectorXd& v) {
    auto arr = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(json_number(v(i)));
    return arr;
}

nlohmann::ordered_json to_json(const DeviationSeries& series) {
    nlohmann::ordered_json j;
    j["z"] = json_number(series.z);
    auto arr = nlohmann::ordered_json::array();
    for (const auto& entry : series.entries) {
        nlohmann::ordered_json e;
        e["r"] = entry.r;
        e["norm"] = json_number(entry.norm);
        e["norm_l2"] = json_number(entry.norm_l2);
        e["diag"] = json_vector(entry.diag);
        arr.push_back(std::move(e));
    }
    j["series"] = std::move(arr);
    return j;
}

nlohmann::ordered_json to_json(const Spectrum& spectrum) {
    nlohmann::ordered_json j;
    j["z"] = json_number(spectrum.z);
    j["eigenvalues"] = json_vector(spectrum.eigenvalues);
    auto clusters = nlohmann::ordered_json::array();
    for (const auto& [value, multiplicity] : spectrum.clusters)
        clusters.push_back({{"value", json_number(value)}, {"multiplicity", multiplicity}});
    j["clusters"] = std::move(clusters);
    j["non_real"] = spectrum.non_real;
    j["max_imag"] = json_number(spectrum.max_imag);
    return j;
}

nlohmann::ordered_json to_json(const DiagnosticsReport& report) {
    nlohmann::ordered_json j;
    j["verdict"] = to_string(report.verdict);
    j["tau"] = json_number(report.tau);
    if (report.first_failing_r)
        j["first_failing_r"] = *report.first_failing_r;
    else
        j["first_failing_r"] = nullptr;
    auto ranking = nlohmann::ordered_json::array();
    for (const auto& [label, deviation] : report.vertex_ranking)
        ranking.push_back({{"vertex", label}, {"deviation", json_number(deviation)}});
    j["vertex_ranking"] = std::move(ranking);
    j["spectrum_deviation"] = json_number(report.spectrum_deviation);
    j["spectrum_non_real"] = report.spectrum_non_real;
    j["spectrum_max_imag"] = json_number(report.spectrum_max_imag);
    j["deviations"] = to_json(report.series);
    return j;
}

nlohmann::ordered_json to_json(const OracleReport& report) {
    nlohmann::ordered_json j;
    j["r"] = report.r;
    j["entries_checked"] = report.entries_checked;
    auto mismatches = nlohmann::ordered_json::array();
    for (const auto& m : report.mismatches) {
        mismatches.push_back(
            {{"u", m.u}, {"v", m.v}, {"max_abs_diff", json_number(m.max_abs_diff)}});
    }
    j["mismatches"] = std::move(mismatches);
    j["max_abs_diff"] = json_number(report.max_abs_diff);
    j["ok"] = report.ok();
    return j;
}

nlohmann::ordered_json to_json(const CorrectionResult& result,
                               const WeightedDigraph& weights_from) {
    nlohmann::ordered_json j;
    auto suspects = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.suspects.size(); ++i) {
        int arc_index = result.suspects[i];
        const Arc& arc = weights_from.arc(arc_index);
        nlohmann::ordered_json s;
        s["from"] = weights_from.label(arc.tail);
        s["to"] = weights_from.label(arc.head);
        s["correction"] = json_number(result.x_star(static_cast<Eigen::Index>(i)));
        s["corrected_weight"] = json_number(arc.weight);
        suspects.push_back(std::move(s));
    }
    j["suspects"] = std::move(suspects);
    j["x_star"] = json_vector(result.x_star);
    j["e_min"] = json_number(result.e_min);
    j["post"] = to_json(result.post_report);
    return j;
}

std::string render_text(const DiagnosticsReport& report) {
    std::ostringstream out;
    out << "verdict: " << to_string(report.verdict) << "\n";
    out << "tau: " << fmt_g(report.tau) << "\n";
    out << "z: " << fmt_g(report.series.z) << "\n";
    out << "norms l1:";
    for (const auto& entry : report.series.entries) out << " " << fmt_g(entry.norm);
    out << "\nnorms l2:";
    for (const auto& entry : report.series.entries) out << " " << fmt_g(entry.norm_l2);
    out << "\n";
    if (report.first_failing_r) {
        out << "first failing r: " << *report.first_failing_r << "\n";
        out << "vertex ranking:";
        for (const auto& [label, deviation] : report.vertex_ranking)
            out << " " << label << "=" << fmt_g(deviation);
        out << "\n";
    }
    out << "spectrum deviation: " << fmt_g(report.spectrum_deviation) << "\n";
    if (report.spectrum_non_real)
        out << "spectrum non-real (max imag " << fmt_g(report.spectrum_max_imag) << ")\n";
    return out.str();
}

std::string render_text(const Spectrum& at_z, const Spectrum& at_one, double deviation) {
    std::ostringstream out;
    out << "spectrum at z=" << fmt_g(at_z.z) << ":";
    for (Eigen::Index i = 0; i < at_z.eigenvalues.size(); ++i)
        out << " " << fmt_g(at_z.eigenvalues(i));
    out << "\nspectrum at z=1:";
    for (Eigen::Index i = 0; i < at_one.eigenvalues.size(); ++i)
        out << " " << fmt_g(at_one.eigenvalues(i));
    out << "\ndeviation: " << fmt_g(deviation) << "\n";
    if (at_z.non_real)
        out << "non-real roots at z=" << fmt_g(at_z.z) << " (max imag "
            << fmt_g(at_z.max_imag) << ")\n";
    return out.str();
}

std::string render_text(const OracleReport& report) {
    std::ostringstream out;
    out << "r=" << report.r << ": " << (report.ok() ? "pass" : "FAIL") << " ("
        << report.entries_checked << " entries, " << report.mismatches.size()
        << " mismatches, max diff " << fmt_g(report.max_abs_diff) << ")\n";
    return out.str();
}

std::string render_text(const CorrectionResult& result, const WeightedDigraph& weights_from) {
    std::ostringstream out;
    for (std::size_t i = 0; i < result.suspects.size(); ++i) {
        const Arc& arc = weights_from.arc(result.suspects[i]);
        out << "suspect " << weights_from.label(arc.tail) << "-"
            << weights_from.label(arc.head) << ": correction "
            << fmt_g(result.x_star(static_cast<Eigen::Index>(i))) << ", corrected weight "
            << fmt_g(arc.weight) << "\n";
    }
    out << "e_min: " << fmt_g(result.e_min) << "\n";
    out << "post-correction " << render_text(result.post_report);
    return out.str();
}

void write_surface_csv(std::ostream& out, const std::vector<SurfaceSample>& samples) {
    if (samples.empty()) return;
    const Eigen::Index vars = samples.front().x.size();
    for (Eigen::Index i = 0; i < vars; ++i) out << "x" << i << ",";
    out << "e\n";
    for (const auto& sample : samples) {
        for (Eigen::Index i = 0; i < vars; ++i) out << fmt_g(sample.x(i)) << ",";
        out << fmt_g(sample.e) << "\n";
    }
}

} // namespace loopwatch
