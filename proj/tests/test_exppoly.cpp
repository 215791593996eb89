#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "loopwatch/errors.hpp"
#include "loopwatch/exppoly.hpp"

using loopwatch::AffineExponent;
using loopwatch::ExpPoly;

namespace {

// Small random polynomials with integer coefficients and exponents, so ring
// identities hold exactly in double arithmetic.
ExpPoly random_int_poly(std::mt19937& rng, int max_terms, int num_vars) {
    std::uniform_int_distribution<int> nterms(0, max_terms);
    std::uniform_int_distribution<int> coeff(-9, 9);
    std::uniform_int_distribution<int> expo(-5, 5);
    std::uniform_int_distribution<int> varc(-2, 2);
    std::vector<ExpPoly::Term> terms;
    int k = nterms(rng);
    for (int i = 0; i < k; ++i) {
        std::vector<std::pair<int, int>> vars;
        for (int v = 0; v < num_vars; ++v) {
            int c = varc(rng);
            if (c != 0) vars.emplace_back(v, c);
        }
        terms.push_back({AffineExponent(expo(rng), vars), static_cast<double>(coeff(rng))});
    }
    return ExpPoly::from_terms(std::move(terms));
}

} // namespace

TEST_CASE("affine exponents combine and evaluate") {
    AffineExponent e = AffineExponent::variable(1, 2, 3.5);
    CHECK(e.constant() == 3.5);
    CHECK(e.coeff_of(1) == 2);
    CHECK(e.coeff_of(0) == 0);
    CHECK(e.max_var() == 1);
    CHECK_FALSE(e.is_constant());

    double x[] = {10.0, 0.25};
    CHECK(e.eval(x) == doctest::Approx(3.5 + 2 * 0.25));

    AffineExponent f = AffineExponent::variable(0, 1, -1.0);
    AffineExponent sum = e + f;
    CHECK(sum.constant() == 2.5);
    CHECK(sum.coeff_of(0) == 1);
    CHECK(sum.coeff_of(1) == 2);

    AffineExponent neg = -sum;
    CHECK(neg.constant() == -2.5);
    CHECK(neg.coeff_of(1) == -2);

    // opposite variable parts cancel entirely
    AffineExponent cancel = e + (-e);
    CHECK(cancel.is_constant());
    CHECK(cancel.constant() == 0.0);
    CHECK(cancel.max_var() == -1);
}

TEST_CASE("affine exponent ordering and sameness") {
    AffineExponent a(2.0);
    AffineExponent b(2.0 + 1e-12);
    AffineExponent c = AffineExponent::variable(0, 1, 2.0);
    CHECK(AffineExponent::same(a, b));
    CHECK_FALSE(AffineExponent::same(a, c));
    CHECK(AffineExponent::compare_vars(a, c) != 0);
    CHECK(AffineExponent::compare_vars(a, b) == 0);
    CHECK(AffineExponent::less(AffineExponent(1.0), AffineExponent(2.0)));
}

TEST_CASE("from_terms merges exponents and drops tiny coefficients") {
    std::vector<ExpPoly::Term> terms = {
        {AffineExponent(1.0), 2.0},
        {AffineExponent(1.0 + 1e-12), 3.0}, // same exponent up to merge eps
        {AffineExponent(-1.0), 1e-15},      // below the drop threshold
        {AffineExponent(2.0), 0.5},
    };
    ExpPoly p = ExpPoly::from_terms(terms);
    CHECK(p.term_count() == 2);
    CHECK(p.eval(2.0) == doctest::Approx(5.0 * 2.0 + 0.5 * 4.0));

    // exact cancellation leaves the zero polynomial
    ExpPoly q = ExpPoly::zpow(3.0) - ExpPoly::zpow(3.0);
    CHECK(q.empty());
    CHECK(q.eval(2.0) == 0.0);
    CHECK(q.str() == "0");
}

TEST_CASE("ring identities hold exactly on integer polynomials") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        ExpPoly a = random_int_poly(rng, 4, 2);
        ExpPoly b = random_int_poly(rng, 4, 2);
        ExpPoly c = random_int_poly(rng, 3, 2);
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK((a + b) + c == a + (b + c));
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * (b + c) == a * b + a * c);
        CHECK(a - a == ExpPoly());
        CHECK(1.0 * a == a);
        CHECK(a * ExpPoly::constant(1.0) == a);
        CHECK((a * ExpPoly()).empty());
    }
}

TEST_CASE("evaluation is a ring homomorphism") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> zdist(0.3, 3.0);
    std::uniform_real_distribution<double> xdist(-1.5, 1.5);
    for (int trial = 0; trial < 100; ++trial) {
        ExpPoly a = random_int_poly(rng, 5, 2);
        ExpPoly b = random_int_poly(rng, 5, 2);
        double z = zdist(rng);
        double x[] = {xdist(rng), xdist(rng)};
        double va = a.eval(z, x);
        double vb = b.eval(z, x);
        double scale = std::abs(va) + std::abs(vb) + 1.0;
        CHECK((a + b).eval(z, x) == doctest::Approx(va + vb).epsilon(1e-10).scale(scale));
        CHECK((a * b).eval(z, x) ==
              doctest::Approx(va * vb).epsilon(1e-10).scale(scale * scale));
    }
}

TEST_CASE("zpow and constants evaluate as expected") {
    CHECK(ExpPoly::zpow(3.0).eval(2.0) == doctest::Approx(8.0));
    CHECK(ExpPoly::zpow(-2.0).eval(2.0) == doctest::Approx(0.25));
    CHECK(ExpPoly::constant(5.0).eval(0.1) == doctest::Approx(5.0));
    // at z = 1 every term contributes its coefficient
    ExpPoly p = ExpPoly::zpow(4.0) + ExpPoly::zpow(-7.0) + ExpPoly::constant(2.0);
    CHECK(p.eval(1.0) == doctest::Approx(4.0));
}

TEST_CASE("evaluation rejects bad arguments") {
    ExpPoly p = ExpPoly::term(1.0, AffineExponent::variable(0));
    CHECK_THROWS_AS(p.eval(-2.0, std::vector<double>{0.0}), std::domain_error);
    CHECK_THROWS_AS(p.eval(0.0, std::vector<double>{0.0}), std::domain_error);
    CHECK_THROWS_AS(p.eval(2.0), std::invalid_argument);
    CHECK_THROWS_AS(ExpPoly::zpow(1500.0).eval(2.0), loopwatch::OverflowError);
    CHECK_THROWS_AS(ExpPoly::zpow(-1500.0).eval(2.0), loopwatch::OverflowError);
    // the same exponent is harmless closer to 1
    CHECK(ExpPoly::zpow(1500.0).eval(1.0 + 1e-6) == doctest::Approx(std::exp(1500e-6)));
}

TEST_CASE("gradient matches central finite differences") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> xdist(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        ExpPoly p = random_int_poly(rng, 6, 3);
        std::vector<double> x = {xdist(rng), xdist(rng), xdist(rng)};
        Eigen::VectorXd g = p.gradient(2.0, x);
        REQUIRE(g.size() == 3);
        const double h = 1e-6;
        for (int i = 0; i < 3; ++i) {
            std::vector<double> lo = x, hi = x;
            lo[static_cast<std::size_t>(i)] -= h;
            hi[static_cast<std::size_t>(i)] += h;
            double fd = (p.eval(2.0, hi) - p.eval(2.0, lo)) / (2 * h);
            CHECK(g(i) == doctest::Approx(fd).epsilon(1e-5).scale(std::abs(fd) + 1.0));
        }
    }
}

TEST_CASE("gradient of the demo error function") {
    // 24*z^(1+x) + 6*z^(-1-x): stationary exactly at x = -1
    ExpPoly e = ExpPoly::term(24.0, AffineExponent::variable(0, 1, 1.0)) +
                ExpPoly::term(6.0, AffineExponent::variable(0, -1, -1.0));
    std::vector<double> at{-1.0};
    Eigen::VectorXd g = e.gradient(2.0, at);
    CHECK(g(0) == doctest::Approx(18.0 * std::log(2.0)));
    std::vector<double> stat{-1.0 + 0.5 * std::log2(6.0 / 24.0)}; // 24*2^(1+x)=6*2^(-1-x)
    CHECK(e.gradient(2.0, stat)(0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("is_constant and max_constant_exponent") {
    double v = -1.0;
    CHECK(ExpPoly().is_constant(&v));
    CHECK(v == 0.0);
    CHECK(ExpPoly::constant(5.0).is_constant(&v));
    CHECK(v == 5.0);
    CHECK_FALSE(ExpPoly::zpow(2.0).is_constant());
    CHECK_FALSE(ExpPoly::term(1.0, AffineExponent::variable(0)).is_constant());

    ExpPoly p = ExpPoly::zpow(3.0) + 2.0 * ExpPoly::zpow(1.0);
    auto [emax, coeff] = p.max_constant_exponent();
    CHECK(emax == 3.0);
    CHECK(coeff == 1.0);
    auto [e0, c0] = ExpPoly::constant(7.0).max_constant_exponent();
    CHECK(e0 == 0.0);
    CHECK(c0 == 7.0);
    CHECK_THROWS_AS(ExpPoly::term(1.0, AffineExponent::variable(0)).max_constant_exponent(),
                    loopwatch::UsageError);
}

TEST_CASE("rendering is canonical") {
    ExpPoly e = ExpPoly::term(24.0, AffineExponent::variable(0, 1, 1.0)) +
                ExpPoly::term(6.0, AffineExponent::variable(0, -1, -1.0));
    CHECK(e.str() == "24*z^(1 + 1*x0) + 6*z^(-1 - 1*x0)");
    CHECK(ExpPoly::constant(-2.0).str() == "-2*z^(0)");
}

TEST_CASE("num_vars and term introspection") {
    ExpPoly p = ExpPoly::term(1.0, AffineExponent::variable(3));
    CHECK(p.num_vars() == 4);
    CHECK(ExpPoly::constant(1.0).num_vars() == 0);
    CHECK(p.term_count() == 1);
    CHECK_FALSE(p.empty());
}

TEST_CASE("approx_equal tolerates coefficient noise only") {
    ExpPoly a = ExpPoly::zpow(2.0) + ExpPoly::constant(1.0);
    ExpPoly b = 1.0000001 * ExpPoly::zpow(2.0) + ExpPoly::constant(1.0);
    CHECK(approx_equal(a, b, 1e-3));
    CHECK_FALSE(approx_equal(a, b, 1e-12));
    CHECK_FALSE(approx_equal(a, ExpPoly::zpow(2.0), 1e-3)); // different term counts
}
