#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "loopwatch/detect.hpp"
#include "loopwatch/graph.hpp"
#include "loopwatch/poly_matrix.hpp"
#include "loopwatch/spectral.hpp"

namespace loopwatch {

inline constexpr const char* kReportSchema = "loopwatch-report/1";

// Doubles are rounded to 12 significant digits before serialization, so
// identical inputs and config yield byte-identical reports.
double round_for_report(double v);

nlohmann::ordered_json json_number(double v);
nlohmann::ordered_json json_vector(const Eigen::VectorXd& v);

nlohmann::ordered_json to_json(const DeviationSeries& series);
nlohmann::ordered_json to_json(const Spectrum& spectrum);
nlohmann::ordered_json to_json(const DiagnosticsReport& report);
nlohmann::ordered_json to_json(const OracleReport& report);
// weights_from supplies the quoted corrected weights; for reports this is
// the correction applied to the original (ungauged) network.
nlohmann::ordered_json to_json(const CorrectionResult& result,
                               const WeightedDigraph& weights_from);

std::string render_text(const DiagnosticsReport& report);
std::string render_text(const Spectrum& at_z, const Spectrum& at_one, double deviation);
std::string render_text(const OracleReport& report);
std::string render_text(const CorrectionResult& result, const WeightedDigraph& weights_from);

// Header "x0,e" or "x0,x1,e", one row per sample.
void write_surface_csv(std::ostream& out, const std::vector<SurfaceSample>& samples);

} // namespace loopwatch
