#include "loopwatch/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "loopwatch/errors.hpp"
#include "loopwatch/spectral.hpp"

namespace loopwatch {

namespace {

constexpr double kGradTol = 1e-9;
constexpr int kMaxIterations = 10000;
constexpr double kArmijo = 1e-4;

std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// Objective value with far probes treated as +inf instead of overflowing;
// the function is coercive, so a probe past the exponent range only means
// the step was absurdly long.
double guarded_value(const ErrorFunction& f, const Eigen::VectorXd& x) {
    try {
        return f(as_span(x));
    } catch (const OverflowError&) {
        return std::numeric_limits<double>::infinity();
    }
}

// Bisection on the sign of one partial derivative, which is monotone in its
// own coordinate by convexity. Rescues the rare run where gradient descent
// stalls on badly scaled coefficients.
void coordinate_bisection(const ErrorFunction& f, Eigen::VectorXd& x) {
    const int s = static_cast<int>(x.size());
    auto partial = [&](int i, double xi) {
        Eigen::VectorXd probe = x;
        probe(i) = xi;
        try {
            return f.gradient(as_span(probe))(i);
        } catch (const OverflowError&) {
            // Past the representable range the coercive tail dominates, so
            // the derivative carries the sign of the excursion.
            return xi > x(i) ? std::numeric_limits<double>::infinity()
                             : -std::numeric_limits<double>::infinity();
        }
    };
    for (int sweep = 0; sweep < 100; ++sweep) {
        Eigen::VectorXd grad = f.gradient(as_span(x));
        if (grad.lpNorm<Eigen::Infinity>() < kGradTol) return;
        for (int i = 0; i < s; ++i) {
            double gi = partial(i, x(i));
            if (std::abs(gi) < kGradTol) continue;
            double dir = gi > 0.0 ? -1.0 : 1.0;
            double lo = x(i);
            double h = 1.0;
            double hi = x(i) + dir * h;
            while (partial(i, hi) * gi > 0.0 && h < 1e18) {
                lo = hi;
                h *= 2.0;
                hi = x(i) + dir * h;
            }
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (lo + hi);
                if (partial(i, mid) * gi > 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            x(i) = 0.5 * (lo + hi);
        }
    }
}

} // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Clean: return "clean";
        case Verdict::Minor: return "minor";
        case Verdict::Gross: return "gross";
    }
    return "unknown";
}

DiagnosticsReport detect(const WeightedDigraph& g, double z, int r_max, double tau) {
    DiagnosticsReport report;
    report.tau = tau;
    report.series.z = z;
    if (g.order() == 0) return report;
    if (r_max < 0) r_max = g.order();

    auto [gauged, potential] = gauge_fix(g);
    (void)potential;
    report.series = power_diagonals(gauged, z, r_max);

    Spectrum at_z = spectrum(gauged, z);
    Spectrum at_one = spectrum(gauged, 1.0);
    report.spectrum_deviation = (at_z.eigenvalues - at_one.eigenvalues).lpNorm<1>();
    report.spectrum_non_real = at_z.non_real;
    report.spectrum_max_imag = at_z.max_imag;

    for (const auto& entry : report.series.entries) {
        if (entry.norm > kCleanNormEps) {
            report.first_failing_r = entry.r;
            break;
        }
    }
    if (!report.first_failing_r) {
        report.verdict = Verdict::Clean;
        return report;
    }

    const auto& failing =
        report.series.entries[static_cast<std::size_t>(*report.first_failing_r - 1)];
    std::vector<int> order(static_cast<std::size_t>(g.order()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return failing.diag(a) > failing.diag(b); });
    for (int v : order) report.vertex_ranking.emplace_back(g.label(v), failing.diag(v));

    double worst = failing.diag.cwiseAbs().maxCoeff();
    report.verdict = worst < tau ? Verdict::Minor : Verdict::Gross;
    return report;
}

std::vector<int> rank_suspect_arcs(const WeightedDigraph& g, const DiagnosticsReport& report,
                                   int k) {
    if (report.verdict == Verdict::Clean || !report.first_failing_r)
        throw UsageError("suspect ranking needs a failing report; the network is clean");
    const auto& failing =
        report.series.entries[static_cast<std::size_t>(*report.first_failing_r - 1)];

    std::vector<int> order(static_cast<std::size_t>(g.size()));
    std::iota(order.begin(), order.end(), 0);
    auto score = [&](int i) {
        const Arc& a = g.arc(i);
        return failing.diag(a.tail) + failing.diag(a.head);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score(a) > score(b); });
    if (k < static_cast<int>(order.size())) order.resize(static_cast<std::size_t>(std::max(k, 0)));
    return order;
}

WeightedDigraph remove_suspects(const WeightedDigraph& g, std::span<const int> arcs) {
    std::vector<char> drop(static_cast<std::size_t>(g.size()), 0);
    for (int a : arcs) {
        if (a < 0 || a >= g.size())
            throw UsageError("arc index " + std::to_string(a) + " out of range");
        drop[static_cast<std::size_t>(a)] = 1;
    }
    WeightedDigraph out;
    for (const std::string& label : g.labels()) out.add_vertex(label);
    for (int i = 0; i < g.size(); ++i) {
        if (drop[static_cast<std::size_t>(i)]) continue;
        const Arc& a = g.arc(i);
        out.add_arc(a.tail, a.head, a.weight);
    }
    std::vector<std::vector<int>> components = weak_components(out);
    if (components.size() > 1) {
        std::string msg = "removing those arcs disconnects the network; separated vertices:";
        for (std::size_t c = 1; c < components.size(); ++c)
            for (int v : components[c]) msg += " " + out.label(v);
        throw ValidationError(msg);
    }
    return out;
}

WeightedDigraph apply_corrections(const WeightedDigraph& g, std::span<const int> suspects,
                                  std::span<const double> x) {
    if (suspects.size() != x.size())
        throw UsageError("one correction per suspect arc required");
    std::vector<double> delta(static_cast<std::size_t>(g.size()), 0.0);
    for (std::size_t i = 0; i < suspects.size(); ++i) {
        int a = suspects[i];
        if (a < 0 || a >= g.size())
            throw UsageError("suspect arc index " + std::to_string(a) + " out of range");
        delta[static_cast<std::size_t>(a)] += x[i];
    }
    WeightedDigraph out;
    for (const std::string& label : g.labels()) out.add_vertex(label);
    for (int i = 0; i < g.size(); ++i) {
        const Arc& a = g.arc(i);
        out.add_arc(a.tail, a.head, a.weight + delta[static_cast<std::size_t>(i)]);
    }
    return out;
}

ErrorFunction::ErrorFunction(ExpPoly trace_poly, double constant_ref, double z, int r,
                             WeightedDigraph network, std::vector<int> suspects)
    : trace_poly_(std::move(trace_poly)),
      constant_ref_(constant_ref),
      z_(z),
      r_(r),
      network_(std::move(network)),
      suspects_(std::move(suspects)) {}

double ErrorFunction::operator()(std::span<const double> x) const {
    return trace_poly_.eval(z_, x) - constant_ref_;
}

Eigen::VectorXd ErrorFunction::gradient(std::span<const double> x) const {
    return trace_poly_.gradient(z_, x);
}

std::vector<std::pair<std::vector<int>, double>> ErrorFunction::collect() const {
    const int s = static_cast<int>(suspects_.size());
    const double lnz = std::log(z_);
    std::map<std::vector<int>, double, std::greater<>> groups;
    for (const auto& t : trace_poly_.terms()) {
        std::vector<int> pattern(static_cast<std::size_t>(s), 0);
        for (auto [var, c] : t.exponent.coeffs()) pattern[static_cast<std::size_t>(var)] = c;
        double l = t.exponent.constant() * lnz;
        if (std::abs(l) > 700.0)
            throw OverflowError("exponent " + std::to_string(t.exponent.constant()) +
                                " overflows at z = " + std::to_string(z_) +
                                "; gauge_fix the network first");
        groups[std::move(pattern)] += t.coeff * std::exp(l);
    }
    groups[std::vector<int>(static_cast<std::size_t>(s), 0)] -= constant_ref_;
    return {groups.begin(), groups.end()};
}

ErrorFunction build_error_function(const WeightedDigraph& g, std::span<const int> suspects,
                                   double z, int r, std::size_t term_budget) {
    if (!(z > 0.0) || z == 1.0)
        throw UsageError("error function wants z > 0 and z != 1");
    if (r < 1) throw UsageError("error function wants r >= 1");
    PolyMatrix p = symbolic_power(build_poly_matrix(g, suspects), r, term_budget);
    ExpPoly trace;
    for (int u = 0; u < g.order(); ++u) trace += p(u, u);
    std::vector<double> zeros(suspects.size(), 0.0);
    double constant_ref = trace.eval(1.0, zeros);
    return {std::move(trace), constant_ref, z, r, g,
            std::vector<int>(suspects.begin(), suspects.end())};
}

CorrectionResult minimize_error(const ErrorFunction& f, std::span<const double> x0) {
    const int s = static_cast<int>(f.suspects().size());

    std::vector<char> appears(static_cast<std::size_t>(s), 0);
    for (const auto& t : f.trace_poly().terms())
        for (auto [var, c] : t.exponent.coeffs())
            if (var < s) appears[static_cast<std::size_t>(var)] = 1;
    for (int i = 0; i < s; ++i) {
        if (!appears[static_cast<std::size_t>(i)])
            throw UsageError("suspect arc lies on no closed walk of length r; increase r");
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(s);
    if (!x0.empty()) {
        if (static_cast<int>(x0.size()) != s)
            throw UsageError("starting point needs one entry per suspect arc");
        for (int i = 0; i < s; ++i) x(i) = x0[static_cast<std::size_t>(i)];
    }

    Eigen::VectorXd grad = f.gradient(as_span(x));
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < kGradTol) break;
        double fx = f(as_span(x));
        double g2 = grad.squaredNorm();
        double step = 1.0;
        Eigen::VectorXd next = x - step * grad;
        while (guarded_value(f, next) > fx - kArmijo * step * g2 && step > 1e-18) {
            step *= 0.5;
            next = x - step * grad;
        }
        if (step <= 1e-18) break;
        x = next;
        grad = f.gradient(as_span(x));
    }
    if (grad.lpNorm<Eigen::Infinity>() >= kGradTol) coordinate_bisection(f, x);

    CorrectionResult result;
    result.suspects = f.suspects();
    result.x_star = x;
    result.e_min = f(as_span(x));
    result.corrected = apply_corrections(f.network(), f.suspects(), as_span(x));
    result.post_report = detect(result.corrected, f.z());
    return result;
}

std::vector<SurfaceSample> sample_error_surface(const ErrorFunction& f,
                                                std::span<const GridSpec> grid) {
    const int s = static_cast<int>(f.suspects().size());
    if (s > 2)
        throw UsageError("surface export handles at most 2 variables; slice the others first");
    if (static_cast<int>(grid.size()) != s)
        throw UsageError("surface grid needs one lo:hi:steps range per suspect arc");

    std::vector<std::vector<double>> axes;
    for (const GridSpec& spec : grid) {
        if (spec.steps < 1) throw UsageError("surface grid needs steps >= 1");
        std::vector<double> axis;
        axis.reserve(static_cast<std::size_t>(spec.steps));
        for (int i = 0; i < spec.steps; ++i) {
            axis.push_back(spec.steps == 1
                               ? spec.lo
                               : spec.lo + i * (spec.hi - spec.lo) / (spec.steps - 1));
        }
        axes.push_back(std::move(axis));
    }

    std::vector<SurfaceSample> table;
    if (s == 0) {
        table.push_back({Eigen::VectorXd(0), f({})});
        return table;
    }
    Eigen::VectorXd x(s);
    if (s == 1) {
        for (double v : axes[0]) {
            x(0) = v;
            table.push_back({x, f(as_span(x))});
        }
        return table;
    }
    for (double a : axes[0]) {
        for (double b : axes[1]) {
            x(0) = a;
            x(1) = b;
            table.push_back({x, f(as_span(x))});
        }
    }
    return table;
}

} // namespace loopwatch
