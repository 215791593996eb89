#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace loopwatch {

// Exponent-merge tolerance in meters. Exponent constants are sums of measured
// weights, so algebraically equal walk sums may differ by floating-point
// residue; constants closer than this are treated as the same exponent.
inline constexpr double kExpMergeEps = 1e-9;

// Coefficients whose magnitude falls below this after merging are dropped.
inline constexpr double kCoeffDropEps = 1e-12;

// An affine form c0 + sum_i c_i * x_i with real constant and integer
// coefficients over correction variables. Walk exponents live here: each
// traversal of a suspect arc contributes +-1 to one coefficient.
class AffineExponent {
public:
    AffineExponent() = default;
    explicit AffineExponent(double constant) : constant_(constant) {}
    AffineExponent(double constant, std::vector<std::pair<int, int>> coeffs);

    // c * x_index + constant
    static AffineExponent variable(int index, int coeff = 1, double constant = 0.0);

    double constant() const { return constant_; }
    // (variable index, integer coefficient) pairs, ascending index, no zeros.
    const std::vector<std::pair<int, int>>& coeffs() const { return coeffs_; }
    bool is_constant() const { return coeffs_.empty(); }
    int coeff_of(int index) const;
    int max_var() const { return coeffs_.empty() ? -1 : coeffs_.back().first; }

    double eval(std::span<const double> x) const;

    AffineExponent operator+(const AffineExponent& other) const;
    AffineExponent operator-() const;

    // Three-way compare of the variable parts only (lexicographic).
    static int compare_vars(const AffineExponent& a, const AffineExponent& b);
    // Total order: variable part, then constant. Used for canonical term order.
    static bool less(const AffineExponent& a, const AffineExponent& b);
    // Same variables and |delta constant| <= eps.
    static bool same(const AffineExponent& a, const AffineExponent& b, double eps = kExpMergeEps);

private:
    double constant_ = 0.0;
    std::vector<std::pair<int, int>> coeffs_;
};

// Finite sum of terms coeff * z^exponent with affine exponents, kept in a
// canonical merged order. Immutable value type; all operations are pure.
class ExpPoly {
public:
    struct Term {
        AffineExponent exponent;
        double coeff = 0.0;
    };

    ExpPoly() = default; // zero polynomial

    static ExpPoly constant(double coeff);
    static ExpPoly term(double coeff, AffineExponent exponent);
    static ExpPoly zpow(double exponent); // 1 * z^exponent

    // Canonical form from any term list (sorts, merges, drops near-zeros).
    static ExpPoly from_terms(std::vector<Term> terms,
                              double exp_eps = kExpMergeEps,
                              double coeff_eps = kCoeffDropEps);

    const std::vector<Term>& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }
    // Number of correction variables referenced (max index + 1).
    int num_vars() const;

    // Sum a_j * z^(L_j(x)), each term as exp(L ln z), accumulated in
    // descending magnitude order. Throws std::domain_error for z <= 0,
    // std::invalid_argument if x is shorter than num_vars(), OverflowError
    // when |L ln z| > 700.
    double eval(double z, std::span<const double> x = {}) const;

    // d/dx_i of eval; exact. Result has x.size() entries.
    Eigen::VectorXd gradient(double z, std::span<const double> x) const;

    // True iff all mass sits on the zero exponent (within kExpMergeEps);
    // then *value receives the coefficient there (0 for the empty poly).
    bool is_constant(double* value = nullptr) const;

    // For variable-free polynomials: (largest constant exponent, coefficient
    // at it); (0, constant value) when constant. Throws UsageError if any
    // term carries a variable.
    std::pair<double, double> max_constant_exponent() const;

    // Canonical rendering, terms by descending constant exponent:
    // "24*z^(1 + 1*x0) + 6*z^(-1 - 1*x0)". Empty poly renders "0".
    std::string str() const;

    ExpPoly& operator+=(const ExpPoly& other);
    friend ExpPoly operator+(const ExpPoly& a, const ExpPoly& b);
    friend ExpPoly operator-(const ExpPoly& a, const ExpPoly& b);
    friend ExpPoly operator*(const ExpPoly& a, const ExpPoly& b);
    friend ExpPoly operator*(double s, const ExpPoly& p);

    // Canonical equality: same terms with exponents within kExpMergeEps and
    // coefficients within tolerance.
    friend bool operator==(const ExpPoly& a, const ExpPoly& b);

private:
    std::vector<Term> terms_; // canonical: vars lex, then constant ascending
};

bool approx_equal(const ExpPoly& a, const ExpPoly& b, double coeff_tol);

} // namespace loopwatch
