#include "loopwatch/poly_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "loopwatch/errors.hpp"

namespace loopwatch {

namespace {

// Raw (pre-merge) term lists are compacted once they reach this size, so a
// long accumulation cannot hold memory hostage before from_terms runs.
constexpr std::size_t kRawCompactionThreshold = std::size_t{1} << 20;

// Coefficients are walk counts, so anything past rounding noise is a real
// disagreement between the matrix power and the enumeration.
constexpr double kOracleCoeffTol = 1e-6;

[[noreturn]] void throw_budget(std::size_t stored, std::size_t term_budget) {
    throw BudgetError("symbolic term budget exceeded (" + std::to_string(stored) +
                      " terms stored > " + std::to_string(term_budget) +
                      "); raise LOOPWATCH_TERM_BUDGET, gauge_fix the network, or lower r");
}

// Maps arc index -> suspect slot (-1 when not a suspect), validating the list.
std::vector<int> suspect_slots(const WeightedDigraph& g, std::span<const int> suspects) {
    if (suspects.size() > 8)
        throw UsageError("at most 8 suspect arcs are supported, got " +
                         std::to_string(suspects.size()));
    std::vector<int> slot(static_cast<std::size_t>(g.size()), -1);
    for (std::size_t i = 0; i < suspects.size(); ++i) {
        int a = suspects[i];
        if (a < 0 || a >= g.size())
            throw UsageError("suspect arc index " + std::to_string(a) + " out of range");
        if (slot[static_cast<std::size_t>(a)] != -1)
            throw UsageError("duplicate suspect arc index " + std::to_string(a));
        slot[static_cast<std::size_t>(a)] = static_cast<int>(i);
    }
    return slot;
}

// Forward exponent of each arc: w (+ x_i on the i-th suspect).
std::vector<AffineExponent> arc_exponents(const WeightedDigraph& g,
                                          std::span<const int> suspects) {
    std::vector<int> slot = suspect_slots(g, suspects);
    std::vector<AffineExponent> exps;
    exps.reserve(static_cast<std::size_t>(g.size()));
    for (int k = 0; k < g.size(); ++k) {
        const Arc& a = g.arc(k);
        int s = slot[static_cast<std::size_t>(k)];
        if (s == -1)
            exps.emplace_back(a.weight);
        else
            exps.push_back(AffineExponent::variable(s, 1, a.weight));
    }
    return exps;
}

void compact(std::vector<ExpPoly::Term>& raw, std::size_t term_budget) {
    ExpPoly merged = ExpPoly::from_terms(std::move(raw));
    if (merged.term_count() > term_budget)
        throw_budget(merged.term_count(), term_budget);
    raw.assign(merged.terms().begin(), merged.terms().end());
}

PolyMatrix multiply(const PolyMatrix& a, const PolyMatrix& b, std::size_t term_budget,
                    std::size_t& stored) {
    const int n = a.order();
    PolyMatrix out(n);
    std::vector<ExpPoly::Term> raw;
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            raw.clear();
            for (int k = 0; k < n; ++k) {
                const ExpPoly& left = a(u, k);
                const ExpPoly& right = b(k, v);
                if (left.empty() || right.empty()) continue;
                for (const auto& lt : left.terms()) {
                    for (const auto& rt : right.terms())
                        raw.push_back({lt.exponent + rt.exponent, lt.coeff * rt.coeff});
                }
                if (raw.size() >= kRawCompactionThreshold) compact(raw, term_budget);
            }
            ExpPoly entry = ExpPoly::from_terms(std::move(raw));
            raw.clear();
            stored += entry.term_count();
            if (stored > term_budget) throw_budget(stored, term_budget);
            out(u, v) = std::move(entry);
        }
    }
    return out;
}

} // namespace

PolyMatrix PolyMatrix::identity(int n) {
    PolyMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = ExpPoly::constant(1.0);
    return m;
}

std::size_t PolyMatrix::total_terms() const {
    std::size_t total = 0;
    for (const ExpPoly& e : entries_) total += e.term_count();
    return total;
}

PolyMatrix build_poly_matrix(const WeightedDigraph& g, std::span<const int> suspects) {
    std::vector<AffineExponent> exps = arc_exponents(g, suspects);
    PolyMatrix m(g.order());
    for (int k = 0; k < g.size(); ++k) {
        const Arc& a = g.arc(k);
        const AffineExponent& e = exps[static_cast<std::size_t>(k)];
        m(a.tail, a.head) = ExpPoly::term(1.0, e);
        m(a.head, a.tail) = ExpPoly::term(1.0, -e);
    }
    return m;
}

Eigen::MatrixXd numeric_eval(const PolyMatrix& m, double z, std::span<const double> x) {
    const int n = m.order();
    Eigen::MatrixXd out(n, n);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v) out(u, v) = m(u, v).eval(z, x);
    return out;
}

PolyMatrix symbolic_power(const PolyMatrix& m, int r, std::size_t term_budget) {
    if (r < 0) throw UsageError("matrix power wants r >= 0, got " + std::to_string(r));
    PolyMatrix result = PolyMatrix::identity(m.order());
    std::size_t stored = result.total_terms();
    for (int i = 0; i < r; ++i) result = multiply(result, m, term_budget, stored);
    return result;
}

ExpPoly walk_oracle(const WeightedDigraph& g, int u, int v, int r,
                    std::span<const int> suspects) {
    if (g.order() > 10)
        throw UsageError("walk oracle enumerates explicitly; order <= 10 required");
    if (r < 0 || r > 8)
        throw UsageError("walk oracle enumerates explicitly; 0 <= r <= 8 required");
    if (u < 0 || u >= g.order() || v < 0 || v >= g.order())
        throw UsageError("walk oracle endpoint out of range");

    std::vector<AffineExponent> fwd = arc_exponents(g, suspects);
    std::vector<ExpPoly::Term> raw;

    // Depth-first over all r-step walks from u, summing signed arc exponents.
    auto step = [&](auto&& self, int at, int depth, const AffineExponent& sum) -> void {
        if (depth == r) {
            if (at == v) raw.push_back({sum, 1.0});
            return;
        }
        for (const auto& [next, k] : g.incident(at)) {
            const AffineExponent& e = fwd[static_cast<std::size_t>(k)];
            self(self, next, depth + 1, sum + (g.arc(k).tail == at ? e : -e));
        }
        if (raw.size() >= kRawCompactionThreshold)
            compact(raw, std::numeric_limits<std::size_t>::max());
    };
    step(step, u, 0, AffineExponent{});
    return ExpPoly::from_terms(std::move(raw));
}

DeviationSeries power_diagonals(const WeightedDigraph& g, double z, int r_max) {
    if (!(z > 0.0) || z == 1.0)
        throw UsageError("deviation series wants z > 0 and z != 1");
    if (r_max < 1) throw UsageError("deviation series wants r_max >= 1");

    Eigen::MatrixXd az = numeric_eval(build_poly_matrix(g), z);
    Eigen::MatrixXd a1 = numeric_eval(build_poly_matrix(g), 1.0);

    DeviationSeries series;
    series.z = z;
    series.entries.reserve(static_cast<std::size_t>(r_max));
    Eigen::MatrixXd pz = az;
    Eigen::MatrixXd p1 = a1;
    for (int r = 1; r <= r_max; ++r) {
        if (r > 1) {
            pz = pz * az;
            p1 = p1 * a1;
        }
        Eigen::VectorXd diag = pz.diagonal() - p1.diagonal();
        series.entries.push_back({r, diag, diag.lpNorm<1>(), diag.lpNorm<2>()});
    }
    return series;
}

std::pair<double, Eigen::VectorXd> asymptotic_diag_slope(const WeightedDigraph& g, int r,
                                                         std::size_t term_budget) {
    const int n = g.order();
    PolyMatrix p = symbolic_power(build_poly_matrix(g), r, term_budget);

    // Deviation polynomial per vertex: closed-walk sum minus its value at z=1.
    std::vector<ExpPoly> dev(static_cast<std::size_t>(n));
    bool any = false;
    for (int u = 0; u < n; ++u) {
        const ExpPoly& d = p(u, u);
        dev[static_cast<std::size_t>(u)] = d + ExpPoly::constant(-d.eval(1.0));
        any = any || !dev[static_cast<std::size_t>(u)].empty();
    }
    if (!any) return {0.0, Eigen::VectorXd::Zero(n)};

    double e_max = -std::numeric_limits<double>::infinity();
    for (const ExpPoly& d : dev)
        for (const auto& t : d.terms()) e_max = std::max(e_max, t.exponent.constant());

    Eigen::VectorXd coeff = Eigen::VectorXd::Zero(n);
    for (int u = 0; u < n; ++u) {
        for (const auto& t : dev[static_cast<std::size_t>(u)].terms()) {
            if (std::abs(t.exponent.constant() - e_max) <= kExpMergeEps) coeff(u) += t.coeff;
        }
    }
    return {e_max, coeff};
}

OracleReport oracle_check(const WeightedDigraph& g, int r, std::span<const int> suspects,
                          std::size_t term_budget) {
    PolyMatrix p = symbolic_power(build_poly_matrix(g, suspects), r, term_budget);
    return oracle_check_matrix(p, g, r, suspects);
}

OracleReport oracle_check_matrix(const PolyMatrix& power, const WeightedDigraph& g, int r,
                                 std::span<const int> suspects) {
    const int n = g.order();
    OracleReport report;
    report.r = r;
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            ExpPoly diff = power(u, v) - walk_oracle(g, u, v, r, suspects);
            ++report.entries_checked;
            double worst = 0.0;
            for (const auto& t : diff.terms()) worst = std::max(worst, std::abs(t.coeff));
            report.max_abs_diff = std::max(report.max_abs_diff, worst);
            if (worst > kOracleCoeffTol) report.mismatches.push_back({u, v, worst});
        }
    }
    return report;
}

} // namespace loopwatch
