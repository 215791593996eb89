#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "loopwatch/graph.hpp"

namespace loopwatch {

// Eigenvalues closer than this collapse into one multiplicity cluster, and
// imaginary parts above it flag the spectrum as non-real. A root of
// multiplicity m recovered through a companion matrix splits by roughly
// eps^(1/m), a few 1e-5 for triple roots, so the tolerance sits well above
// that but far below any genuine closure-error signal.
inline constexpr double kEigenClusterTol = 1e-4;

// Traces of the first n powers of A(z): s(k-1) = tr A(z)^k.
struct PowerSums {
    double z = 0.0;
    Eigen::VectorXd s;
};

PowerSums power_sums(const WeightedDigraph& g, double z);

// Monic real polynomial, coefficients stored from z^n down to z^0.
struct MonicPolynomial {
    Eigen::VectorXd coeffs; // coeffs(0) = 1
    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

// The unique monic degree-n polynomial whose root power sums are the given
// ones, via Newton's identities.
MonicPolynomial charpoly_from_power_sums(const PowerSums& ps);

// Same polynomial by literal cofactor expansion of the bordered power-sum
// determinant over n factorial. Exponential cost; n <= 8.
MonicPolynomial gould_charpoly(const PowerSums& ps);

// All complex roots, as eigenvalues of the companion matrix.
std::vector<std::complex<double>> polynomial_roots(const MonicPolynomial& p);

struct Spectrum {
    double z = 0.0;
    // Real parts, descending, length n. Roots within kEigenClusterTol of
    // each other are reported as their common mean; see spectrum().
    Eigen::VectorXd eigenvalues;
    std::vector<std::pair<double, int>> clusters; // (value, multiplicity)
    // Non-real roots mean A(z) cannot share the real spectrum of A(1), a
    // loop-law violation in itself; they are flagged, never hidden.
    bool non_real = false;
    double max_imag = 0.0;
};

// Roots of the characteristic polynomial recovered from power sums. Power
// sums, not a direct eigendecomposition, so the trace identity is what gets
// exercised; see adjacency_spectrum for the direct cross-check.
Spectrum spectrum(const WeightedDigraph& g, double z);

// l1 distance between the descending-sorted spectra at z and at 1.
double spectrum_deviation(const WeightedDigraph& g, double z);

// Spectrum of the underlying graph's adjacency matrix A(1), computed
// directly from the symmetric matrix. Descending.
Eigen::VectorXd adjacency_spectrum(const WeightedDigraph& g);

} // namespace loopwatch
