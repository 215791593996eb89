#include "loopwatch/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "loopwatch/errors.hpp"
#include "loopwatch/poly_matrix.hpp"

namespace loopwatch {

namespace {

// Determinant by cofactor expansion along the first row. Deliberately the
// textbook recursion, so the cross-check shares nothing with Newton's
// identities; exponential cost, callers cap n.
double cofactor_det(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    if (n == 0) return 1.0;
    if (n == 1) return m(0, 0);
    double det = 0.0;
    double sign = 1.0;
    Eigen::MatrixXd sub(n - 1, n - 1);
    for (int j = 0; j < n; ++j, sign = -sign) {
        if (m(0, j) == 0.0) continue;
        for (int r = 1; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c < n; ++c) {
                if (c == j) continue;
                sub(r - 1, cc++) = m(r, c);
            }
        }
        det += sign * m(0, j) * cofactor_det(sub);
    }
    return det;
}

} // namespace

PowerSums power_sums(const WeightedDigraph& g, double z) {
    if (!(z > 0.0)) throw UsageError("power sums want z > 0");
    const int n = g.order();
    Eigen::MatrixXd a = numeric_eval(build_poly_matrix(g), z);
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd s(n);
    for (int k = 1; k <= n; ++k) {
        p = p * a;
        s(k - 1) = p.trace();
    }
    return {z, s};
}

MonicPolynomial charpoly_from_power_sums(const PowerSums& ps) {
    const int n = static_cast<int>(ps.s.size());
    // Elementary symmetric functions from power sums, then sign-alternate
    // into coefficients of z^n .. z^0.
    Eigen::VectorXd e(n + 1);
    e(0) = 1.0;
    for (int k = 1; k <= n; ++k) {
        double acc = 0.0;
        double sign = 1.0;
        for (int i = 1; i <= k; ++i, sign = -sign) acc += sign * e(k - i) * ps.s(i - 1);
        e(k) = acc / k;
    }
    MonicPolynomial p;
    p.coeffs.resize(n + 1);
    double sign = 1.0;
    for (int k = 0; k <= n; ++k, sign = -sign) p.coeffs(k) = sign * e(k);
    return p;
}

MonicPolynomial gould_charpoly(const PowerSums& ps) {
    const int n = static_cast<int>(ps.s.size());
    if (n > 8)
        throw UsageError("determinant expansion is exponential; n <= 8 required, got " +
                         std::to_string(n));
    double n_factorial = 1.0;
    for (int k = 2; k <= n; ++k) n_factorial *= k;

    // Rows 1..n of the bordered matrix: s_{k-j} left of the diagonal, k on
    // it, zeros to the right. Row 0 holds the powers of z and is handled by
    // expanding along it, one minor per coefficient.
    Eigen::MatrixXd body = Eigen::MatrixXd::Zero(n, n + 1);
    for (int k = 1; k <= n; ++k) {
        for (int j = 0; j < k; ++j) body(k - 1, j) = ps.s(k - j - 1);
        body(k - 1, k) = k;
    }

    MonicPolynomial p;
    p.coeffs.resize(n + 1);
    Eigen::MatrixXd minor(n, n);
    double sign = 1.0;
    for (int j = 0; j <= n; ++j, sign = -sign) {
        for (int r = 0; r < n; ++r) {
            int cc = 0;
            for (int c = 0; c <= n; ++c) {
                if (c == j) continue;
                minor(r, cc++) = body(r, c);
            }
        }
        p.coeffs(j) = sign * cofactor_det(minor) / n_factorial;
    }
    return p;
}

std::vector<std::complex<double>> polynomial_roots(const MonicPolynomial& p) {
    const int n = p.degree();
    std::vector<std::complex<double>> roots;
    if (n <= 0) return roots;

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeffs(n - i);

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("companion eigenvalue iteration did not converge");
    roots.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) roots.push_back(solver.eigenvalues()(i));
    return roots;
}

Spectrum spectrum(const WeightedDigraph& g, double z) {
    const int n = g.order();
    Spectrum sp;
    sp.z = z;
    sp.eigenvalues = Eigen::VectorXd::Zero(n);
    if (n == 0) return sp;

    std::vector<std::complex<double>> roots =
        polynomial_roots(charpoly_from_power_sums(power_sums(g, z)));

    std::vector<double> re;
    re.reserve(roots.size());
    for (const auto& root : roots) {
        sp.max_imag = std::max(sp.max_imag, std::abs(root.imag()));
        re.push_back(root.real());
    }
    sp.non_real = sp.max_imag > kEigenClusterTol;

    std::sort(re.begin(), re.end(), std::greater<>());

    // A multiple root comes back from the companion matrix as a symmetric
    // splatter around the true value; its mean is accurate to coefficient
    // precision while the individual copies are not. Report the cluster
    // means, so repeated eigenvalues compare stably across z.
    for (int i = 0; i < n;) {
        int j = i + 1;
        double sum = re[static_cast<std::size_t>(i)];
        while (j < n && std::abs(re[static_cast<std::size_t>(j)] -
                                 re[static_cast<std::size_t>(i)]) <= kEigenClusterTol) {
            sum += re[static_cast<std::size_t>(j)];
            ++j;
        }
        double mean = sum / (j - i);
        sp.clusters.emplace_back(mean, j - i);
        for (int k = i; k < j; ++k) sp.eigenvalues(k) = mean;
        i = j;
    }
    return sp;
}

double spectrum_deviation(const WeightedDigraph& g, double z) {
    if (!(z > 0.0) || z == 1.0)
        throw UsageError("spectrum deviation wants z > 0 and z != 1");
    return (spectrum(g, z).eigenvalues - spectrum(g, 1.0).eigenvalues).lpNorm<1>();
}

Eigen::VectorXd adjacency_spectrum(const WeightedDigraph& g) {
    Eigen::MatrixXd a = numeric_eval(build_poly_matrix(g), 1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("adjacency eigenvalue iteration did not converge");
    return solver.eigenvalues().reverse();
}

} // namespace loopwatch
