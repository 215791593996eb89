#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "loopwatch/exppoly.hpp"
#include "loopwatch/graph.hpp"
#include "loopwatch/poly_matrix.hpp"

namespace loopwatch {

// A network counts as clean while every deviation norm stays below this.
inline constexpr double kCleanNormEps = 1e-9;

// Default gross-error threshold in meters: 1e-3-order closures are survey
// noise, 1e-2-order ones are blunders.
inline constexpr double kDefaultTau = 1e-2;

enum class Verdict { Clean, Minor, Gross };

std::string to_string(Verdict v);

struct DiagnosticsReport {
    DeviationSeries series;
    std::optional<int> first_failing_r; // set iff verdict != Clean
    // (vertex label, deviation at first_failing_r), descending, ties in
    // input vertex order. Empty for clean networks.
    std::vector<std::pair<std::string, double>> vertex_ranking;
    double spectrum_deviation = 0.0;
    bool spectrum_non_real = false;
    double spectrum_max_imag = 0.0;
    Verdict verdict = Verdict::Clean;
    double tau = kDefaultTau;
};

// Gauge-fixes, runs the deviation series and the spectrum comparison, and
// classifies: clean when all norms <= kCleanNormEps, minor when the worst
// per-vertex deviation at the first failing power stays under tau, gross
// otherwise. r_max < 0 means the default, the network order.
DiagnosticsReport detect(const WeightedDigraph& g, double z = 2.0, int r_max = -1,
                         double tau = kDefaultTau);

// Arc indices scored by the sum of the two endpoint deviations at
// first_failing_r, top k, descending, ties in input arc order. A heuristic
// shortlist, not a proof of guilt; callers may always name suspects
// themselves. Throws UsageError on a clean report.
std::vector<int> rank_suspect_arcs(const WeightedDigraph& g, const DiagnosticsReport& report,
                                   int k);

// Network without the given arcs. Throws ValidationError (listing the
// separated vertices) if the removal disconnects it.
WeightedDigraph remove_suspects(const WeightedDigraph& g, std::span<const int> arcs);

// Copy of g with x[i] added to the weight of the i-th suspect arc.
WeightedDigraph apply_corrections(const WeightedDigraph& g, std::span<const int> suspects,
                                  std::span<const double> x);

// tr A(z)^r as a function of the correction variables, minus the reference
// trace at z = 1. Convex: a positively-weighted sum of exponentials of
// affine forms.
class ErrorFunction {
public:
    ErrorFunction(ExpPoly trace_poly, double constant_ref, double z, int r,
                  WeightedDigraph network, std::vector<int> suspects);

    double operator()(std::span<const double> x) const;
    Eigen::VectorXd gradient(std::span<const double> x) const;

    // e(x) regrouped by integer exponent pattern at this z: the pattern
    // (1, -1) with coefficient 8.09 reads 8.09 * z^(x0 - x1). The all-zero
    // pattern absorbs -constant_ref. Patterns in descending lexicographic
    // order.
    std::vector<std::pair<std::vector<int>, double>> collect() const;

    const ExpPoly& trace_poly() const { return trace_poly_; }
    double constant_ref() const { return constant_ref_; }
    double z() const { return z_; }
    int r() const { return r_; }
    const WeightedDigraph& network() const { return network_; }
    const std::vector<int>& suspects() const { return suspects_; }

private:
    ExpPoly trace_poly_;
    double constant_ref_ = 0.0;
    double z_ = 2.0;
    int r_ = 0;
    WeightedDigraph network_;
    std::vector<int> suspects_;
};

// Symbolic trace of A(z)^r with correction variables on the suspect arcs;
// the reference is the closed r-walk count tr A(1)^r. Evaluating the result
// at z needs safe exponents, so gauge_fix first on field-sized weights.
ErrorFunction build_error_function(const WeightedDigraph& g, std::span<const int> suspects,
                                   double z, int r,
                                   std::size_t term_budget = kDefaultTermBudget);

struct CorrectionResult {
    std::vector<int> suspects;
    Eigen::VectorXd x_star;
    double e_min = 0.0;
    WeightedDigraph corrected;
    DiagnosticsReport post_report;
};

// Convex minimization: gradient descent with backtracking line search until
// the gradient infinity-norm drops below 1e-9 (at most 1e4 iterations), then
// a coordinate-bisection fallback if scaling defeated the descent. Throws
// UsageError when some variable never appears in the trace (its arc lies on
// no closed r-walk, so e is flat in it).
CorrectionResult minimize_error(const ErrorFunction& f, std::span<const double> x0 = {});

// Inclusive sampling grid for one variable: steps points from lo to hi.
struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int steps = 0;
};

struct SurfaceSample {
    Eigen::VectorXd x;
    double e = 0.0;
};

// Plot-ready table of e over a full grid (last variable fastest). At most
// two variables; slice larger problems before exporting.
std::vector<SurfaceSample> sample_error_surface(const ErrorFunction& f,
                                                std::span<const GridSpec> grid);

} // namespace loopwatch
