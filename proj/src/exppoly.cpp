#include "loopwatch/exppoly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "loopwatch/errors.hpp"

namespace loopwatch {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

AffineExponent::AffineExponent(double constant, std::vector<std::pair<int, int>> coeffs)
    : constant_(constant), coeffs_(std::move(coeffs)) {
    std::sort(coeffs_.begin(), coeffs_.end());
    std::erase_if(coeffs_, [](const auto& c) { return c.second == 0; });
}

AffineExponent AffineExponent::variable(int index, int coeff, double constant) {
    AffineExponent e(constant);
    if (coeff != 0)
        e.coeffs_.emplace_back(index, coeff);
    return e;
}

int AffineExponent::coeff_of(int index) const {
    for (const auto& [i, c] : coeffs_)
        if (i == index)
            return c;
    return 0;
}

double AffineExponent::eval(std::span<const double> x) const {
    double v = constant_;
    for (const auto& [i, c] : coeffs_)
        v += c * x[static_cast<std::size_t>(i)];
    return v;
}

AffineExponent AffineExponent::operator+(const AffineExponent& other) const {
    AffineExponent out(constant_ + other.constant_);
    out.coeffs_.reserve(coeffs_.size() + other.coeffs_.size());
    auto a = coeffs_.begin(), b = other.coeffs_.begin();
    while (a != coeffs_.end() || b != other.coeffs_.end()) {
        if (b == other.coeffs_.end() || (a != coeffs_.end() && a->first < b->first)) {
            out.coeffs_.push_back(*a++);
        } else if (a == coeffs_.end() || b->first < a->first) {
            out.coeffs_.push_back(*b++);
        } else {
            int c = a->second + b->second;
            if (c != 0)
                out.coeffs_.emplace_back(a->first, c);
            ++a, ++b;
        }
    }
    return out;
}

AffineExponent AffineExponent::operator-() const {
    AffineExponent out(-constant_);
    out.coeffs_ = coeffs_;
    for (auto& [i, c] : out.coeffs_)
        c = -c;
    return out;
}

int AffineExponent::compare_vars(const AffineExponent& a, const AffineExponent& b) {
    if (a.coeffs_ < b.coeffs_)
        return -1;
    return a.coeffs_ == b.coeffs_ ? 0 : 1;
}

bool AffineExponent::less(const AffineExponent& a, const AffineExponent& b) {
    int c = compare_vars(a, b);
    if (c != 0)
        return c < 0;
    return a.constant_ < b.constant_;
}

bool AffineExponent::same(const AffineExponent& a, const AffineExponent& b, double eps) {
    return a.coeffs_ == b.coeffs_ && std::abs(a.constant_ - b.constant_) <= eps;
}

ExpPoly ExpPoly::constant(double coeff) {
    return term(coeff, AffineExponent{});
}

ExpPoly ExpPoly::term(double coeff, AffineExponent exponent) {
    ExpPoly p;
    if (std::abs(coeff) > kCoeffDropEps)
        p.terms_.push_back({std::move(exponent), coeff});
    return p;
}

ExpPoly ExpPoly::zpow(double exponent) {
    return term(1.0, AffineExponent(exponent));
}

ExpPoly ExpPoly::from_terms(std::vector<Term> terms, double exp_eps, double coeff_eps) {
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
        return AffineExponent::less(a.exponent, b.exponent);
    });
    ExpPoly p;
    p.terms_.reserve(terms.size());
    for (auto& t : terms) {
        if (!p.terms_.empty() && AffineExponent::same(p.terms_.back().exponent, t.exponent, exp_eps)) {
            p.terms_.back().coeff += t.coeff;
        } else {
            if (!p.terms_.empty() && std::abs(p.terms_.back().coeff) <= coeff_eps)
                p.terms_.pop_back();
            p.terms_.push_back(std::move(t));
        }
    }
    if (!p.terms_.empty() && std::abs(p.terms_.back().coeff) <= coeff_eps)
        p.terms_.pop_back();
    return p;
}

int ExpPoly::num_vars() const {
    int n = 0;
    for (const auto& t : terms_)
        n = std::max(n, t.exponent.max_var() + 1);
    return n;
}

double ExpPoly::eval(double z, std::span<const double> x) const {
    if (!(z > 0.0))
        throw std::domain_error("ExpPoly::eval: z must be positive");
    if (static_cast<int>(x.size()) < num_vars())
        throw std::invalid_argument("ExpPoly::eval: x has " + std::to_string(x.size()) +
                                    " entries, polynomial uses " + std::to_string(num_vars()));
    const double lnz = std::log(z);
    std::vector<double> vals;
    vals.reserve(terms_.size());
    for (const auto& t : terms_) {
        double a = t.exponent.eval(x) * lnz;
        if (std::abs(a) > 700.0)
            throw OverflowError("exponent " + fmt_g(t.exponent.eval(x)) + " at z=" + fmt_g(z) +
                                " overflows double range; gauge_fix the network first");
        vals.push_back(t.coeff * std::exp(a));
    }
    std::sort(vals.begin(), vals.end(),
              [](double a, double b) { return std::abs(a) > std::abs(b); });
    double sum = 0.0;
    for (double v : vals)
        sum += v;
    return sum;
}

Eigen::VectorXd ExpPoly::gradient(double z, std::span<const double> x) const {
    if (!(z > 0.0))
        throw std::domain_error("ExpPoly::gradient: z must be positive");
    if (static_cast<int>(x.size()) < num_vars())
        throw std::invalid_argument("ExpPoly::gradient: x shorter than variable count");
    const double lnz = std::log(z);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.size()));
    for (const auto& t : terms_) {
        double a = t.exponent.eval(x) * lnz;
        if (std::abs(a) > 700.0)
            throw OverflowError("exponent overflow in gradient; gauge_fix the network first");
        double v = t.coeff * std::exp(a) * lnz;
        for (const auto& [i, c] : t.exponent.coeffs())
            g[i] += c * v;
    }
    return g;
}

bool ExpPoly::is_constant(double* value) const {
    double v = 0.0;
    for (const auto& t : terms_) {
        if (!t.exponent.is_constant() || std::abs(t.exponent.constant()) > kExpMergeEps) {
            if (value)
                *value = 0.0;
            return false;
        }
        v += t.coeff;
    }
    if (value)
        *value = v;
    return true;
}

std::pair<double, double> ExpPoly::max_constant_exponent() const {
    if (terms_.empty())
        return {0.0, 0.0};
    double best_e = 0.0, best_c = 0.0;
    bool found = false;
    for (const auto& t : terms_) {
        if (!t.exponent.is_constant())
            throw UsageError("max_constant_exponent: polynomial has variable-bearing terms");
        if (!found || t.exponent.constant() > best_e) {
            best_e = t.exponent.constant();
            best_c = t.coeff;
            found = true;
        }
    }
    return {best_e, best_c};
}

std::string ExpPoly::str() const {
    if (terms_.empty())
        return "0";
    std::vector<Term> disp = terms_;
    std::sort(disp.begin(), disp.end(), [](const Term& a, const Term& b) {
        if (a.exponent.constant() != b.exponent.constant())
            return a.exponent.constant() > b.exponent.constant();
        return AffineExponent::compare_vars(a.exponent, b.exponent) < 0;
    });
    std::string s;
    for (std::size_t i = 0; i < disp.size(); ++i) {
        double c = disp[i].coeff;
        if (i == 0) {
            if (c < 0)
                s += "-";
        } else {
            s += c < 0 ? " - " : " + ";
        }
        s += fmt_g(std::abs(c));
        s += "*z^(";
        s += fmt_g(disp[i].exponent.constant());
        for (const auto& [idx, k] : disp[i].exponent.coeffs()) {
            s += k < 0 ? " - " : " + ";
            if (std::abs(k) != 1)
                s += std::to_string(std::abs(k)) + "*";
            else
                s += "1*";
            s += "x" + std::to_string(idx);
        }
        s += ")";
    }
    return s;
}

ExpPoly& ExpPoly::operator+=(const ExpPoly& other) {
    *this = *this + other;
    return *this;
}

ExpPoly operator+(const ExpPoly& a, const ExpPoly& b) {
    std::vector<ExpPoly::Term> terms;
    terms.reserve(a.terms_.size() + b.terms_.size());
    terms.insert(terms.end(), a.terms_.begin(), a.terms_.end());
    terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
    return ExpPoly::from_terms(std::move(terms));
}

ExpPoly operator-(const ExpPoly& a, const ExpPoly& b) {
    return a + (-1.0 * b);
}

ExpPoly operator*(const ExpPoly& a, const ExpPoly& b) {
    std::vector<ExpPoly::Term> terms;
    terms.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_)
        for (const auto& tb : b.terms_)
            terms.push_back({ta.exponent + tb.exponent, ta.coeff * tb.coeff});
    return ExpPoly::from_terms(std::move(terms));
}

ExpPoly operator*(double s, const ExpPoly& p) {
    std::vector<ExpPoly::Term> terms = p.terms_;
    for (auto& t : terms)
        t.coeff *= s;
    return ExpPoly::from_terms(std::move(terms));
}

bool operator==(const ExpPoly& a, const ExpPoly& b) {
    return approx_equal(a, b, kCoeffDropEps);
}

bool approx_equal(const ExpPoly& a, const ExpPoly& b, double coeff_tol) {
    if (a.terms().size() != b.terms().size())
        return false;
    for (std::size_t i = 0; i < a.terms().size(); ++i) {
        const auto& ta = a.terms()[i];
        const auto& tb = b.terms()[i];
        if (!AffineExponent::same(ta.exponent, tb.exponent))
            return false;
        if (std::abs(ta.coeff - tb.coeff) > coeff_tol)
            return false;
    }
    return true;
}

} // namespace loopwatch
