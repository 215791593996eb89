#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "loopwatch/exppoly.hpp"
#include "loopwatch/graph.hpp"

namespace loopwatch {

// Total stored terms allowed across a symbolic power computation.
inline constexpr std::size_t kDefaultTermBudget = 1'000'000;

// Square matrix of exponential polynomials: A(z) and its powers.
class PolyMatrix {
public:
    explicit PolyMatrix(int n) : n_(n), entries_(static_cast<std::size_t>(n) * n) {}

    static PolyMatrix identity(int n);

    int order() const { return n_; }
    const ExpPoly& operator()(int u, int v) const {
        return entries_[static_cast<std::size_t>(u) * n_ + v];
    }
    ExpPoly& operator()(int u, int v) { return entries_[static_cast<std::size_t>(u) * n_ + v]; }

    std::size_t total_terms() const;

private:
    int n_ = 0;
    std::vector<ExpPoly> entries_;
};

// Entry(u,v) = z^w(uv) for arcs, z^-w(vu) for reversed arcs, 0 otherwise.
// The i-th suspect arc (an index into g.arcs()) gets exponent w + x_i forward
// and -w - x_i backward. At most 8 suspects.
PolyMatrix build_poly_matrix(const WeightedDigraph& g, std::span<const int> suspects = {});

// Entrywise ExpPoly evaluation. Throws OverflowError (via ExpPoly::eval) when
// an exponent would overflow, advising gauge_fix.
Eigen::MatrixXd numeric_eval(const PolyMatrix& m, double z, std::span<const double> x = {});

// Exact r-th power by repeated symbolic multiplication; r = 0 gives the
// identity. Throws BudgetError past term_budget total stored terms.
PolyMatrix symbolic_power(const PolyMatrix& m, int r,
                          std::size_t term_budget = kDefaultTermBudget);

// Brute-force walk enumeration over the underlying graph: sum of z^w*(p) over
// all r-walks u -> v, by explicit path recursion. Independent of the matrix
// path; the testing oracle. Limits: r <= 8, order <= 10. Optional suspects
// attach correction variables exactly as build_poly_matrix does.
ExpPoly walk_oracle(const WeightedDigraph& g, int u, int v, int r,
                    std::span<const int> suspects = {});

// Diagonal deviations diag(A(z)^r) - diag(A(1)^r) for r = 1..r_max.
// The norm of record is l1 (it reproduces the small-integer worked series
// 6, 15/2, 78); the l2 norm is carried alongside because survey practice
// quotes euclidean closure sizes and the 10^-3-order series match it.
struct DeviationSeries {
    struct Entry {
        int r = 0;
        Eigen::VectorXd diag;
        double norm = 0.0; // l1
        double norm_l2 = 0.0;
    };
    double z = 0.0;
    std::vector<Entry> entries;
};

DeviationSeries power_diagonals(const WeightedDigraph& g, double z, int r_max);

// Leading behavior of the diagonal deviation as z -> infinity:
// diag(A(z)^r - A(1)^r) ~ c * z^e_max. Returns (0, zero vector) when the
// loop law holds at this r.
std::pair<double, Eigen::VectorXd> asymptotic_diag_slope(
    const WeightedDigraph& g, int r, std::size_t term_budget = kDefaultTermBudget);

// Cross-checks every entry of A(z)^r against the walk enumeration.
struct OracleReport {
    struct Mismatch {
        int u = 0;
        int v = 0;
        double max_abs_diff = 0.0;
    };
    int r = 0;
    int entries_checked = 0;
    std::vector<Mismatch> mismatches;
    double max_abs_diff = 0.0; // largest coefficient gap over all entries
    bool ok() const { return mismatches.empty(); }
};

OracleReport oracle_check(const WeightedDigraph& g, int r,
                          std::span<const int> suspects = {},
                          std::size_t term_budget = kDefaultTermBudget);

// Same comparison against a caller-supplied power matrix; lets tests feed a
// deliberately corrupted engine through the oracle as a negative control.
OracleReport oracle_check_matrix(const PolyMatrix& power, const WeightedDigraph& g, int r,
                                 std::span<const int> suspects = {});

} // namespace loopwatch
