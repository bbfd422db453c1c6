#ifndef WKBSQ_POLY_HPP
#define WKBSQ_POLY_HPP

#include <complex>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

#include "wkbsq/errors.hpp"
#include "wkbsq/scalar.hpp"

namespace wkbsq {

/// Dense univariate polynomial over a field K, coefficients ascending.
template <class K>
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(K constant) {
        c_.push_back(std::move(constant));
        trim();
    }
    explicit Polynomial(std::vector<K> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Polynomial zero() { return Polynomial(); }
    static Polynomial one() { return Polynomial(K(1)); }
    static Polynomial x() { return Polynomial(std::vector<K>{K(0), K(1)}); }
    static Polynomial monomial(int deg, K coeff) {
        std::vector<K> c(deg + 1, K(0));
        c[deg] = std::move(coeff);
        return Polynomial(std::move(c));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; } // -1 for zero
    bool is_zero() const { return c_.empty(); }
    const std::vector<K>& coeffs() const { return c_; }
    K coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[k] : K(0);
    }
    const K& lc() const { return c_.back(); }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<K> c(std::max(a.c_.size(), b.c_.size()), K(0));
        for (size_t i = 0; i < a.c_.size(); ++i) c[i] = c[i] + a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) c[i] = c[i] + b.c_[i];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<K> c(std::max(a.c_.size(), b.c_.size()), K(0));
        for (size_t i = 0; i < a.c_.size(); ++i) c[i] = c[i] + a.c_[i];
        for (size_t i = 0; i < b.c_.size(); ++i) c[i] = c[i] - b.c_[i];
        return Polynomial(std::move(c));
    }
    Polynomial operator-() const {
        std::vector<K> c(c_);
        for (K& v : c) v = -v;
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial();
        std::vector<K> c(a.c_.size() + b.c_.size() - 1, K(0));
        for (size_t i = 0; i < a.c_.size(); ++i)
            for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] = c[i + j] + a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, const K& s) {
        std::vector<K> c(a.c_);
        for (K& v : c) v = v * s;
        return Polynomial(std::move(c));
    }

    friend bool operator==(const Polynomial& a, const Polynomial& b) {
        if (a.c_.size() != b.c_.size()) return false;
        for (size_t i = 0; i < a.c_.size(); ++i)
            if (!(a.c_[i] == b.c_[i])) return false;
        return true;
    }
    friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

    /// Euclidean division a = q*b + r with deg r < deg b.
    static std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
        if (b.is_zero()) throw Error("DivisionByZero", "polynomial division by zero");
        Polynomial r = a;
        std::vector<K> qc(static_cast<size_t>(std::max(0, a.degree() - b.degree() + 1)), K(0));
        while (!r.is_zero() && r.degree() >= b.degree()) {
            K f = r.lc() / b.lc();
            int d = r.degree() - b.degree();
            qc[d] = qc[d] + f;
            Polynomial r2 = r - monomial(d, f) * b;
            if (!r2.is_zero() && r2.degree() == r.degree()) {
                // float round-off left a residue in the leading slot
                std::vector<K> cc = r2.coeffs();
                cc.pop_back();
                r2 = Polynomial(std::move(cc));
            }
            r = r2;
        }
        return {Polynomial(std::move(qc)), r};
    }

    Polynomial derivative() const {
        if (c_.size() <= 1) return Polynomial();
        std::vector<K> c(c_.size() - 1);
        for (size_t i = 1; i < c_.size(); ++i) c[i - 1] = c_[i] * K(static_cast<int>(i));
        return Polynomial(std::move(c));
    }
    /// Termwise antiderivative with zero constant.
    Polynomial antiderivative() const {
        if (is_zero()) return Polynomial();
        std::vector<K> c(c_.size() + 1, K(0));
        for (size_t i = 0; i < c_.size(); ++i) c[i + 1] = c_[i] / K(static_cast<int>(i) + 1);
        return Polynomial(std::move(c));
    }

    K eval(const K& x) const {
        K r = K(0);
        for (size_t i = c_.size(); i-- > 0;) r = r * x + c_[i];
        return r;
    }
    std::complex<double> eval_c(std::complex<double> x) const
        requires std::is_same_v<K, Scalar>
    {
        std::complex<double> r = 0;
        for (size_t i = c_.size(); i-- > 0;) r = r * x + c_[i].to_complex();
        return r;
    }

private:
    void trim() {
        while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
    }
    std::vector<K> c_;
};

using Poly = Polynomial<Scalar>;

/// Monic gcd by the Euclidean algorithm over any coefficient field.
template <class K>
Polynomial<K> polynomial_gcd(Polynomial<K> a, Polynomial<K> b) {
    while (!b.is_zero()) {
        auto [q, r] = Polynomial<K>::divmod(a, b);
        a = b;
        b = r;
    }
    if (a.is_zero()) return a;
    K inv = K(1) / a.lc();
    return a * inv;
}

/// Monic gcd by the Euclidean algorithm; meaningful in exact mode.
Poly poly_gcd(Poly a, Poly b);

/// Numeric roots via the companion matrix (coefficients taken as doubles).
std::vector<std::complex<double>> poly_roots(const Poly& p);

/// Same, for raw complex coefficients (ascending).
std::vector<std::complex<double>> complex_poly_roots(std::vector<std::complex<double>> c);

/// Rational function num/den over the scalar field, reduced in exact mode,
/// denominator normalized to leading coefficient 1.
class RatFunc {
public:
    RatFunc() : num_(), den_(Poly::one()) {}
    RatFunc(int v) : num_(Poly(Scalar(v))), den_(Poly::one()) {}
    RatFunc(Scalar v) : num_(Poly(std::move(v))), den_(Poly::one()) {}
    RatFunc(Poly num) : num_(std::move(num)), den_(Poly::one()) {}
    RatFunc(Poly num, Poly den);

    static RatFunc x() { return RatFunc(Poly::x()); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_constant() const { return num_.degree() <= 0 && den_.degree() == 0; }
    Scalar constant_value() const { return num_.coeff(0) / den_.coeff(0); }

    friend RatFunc operator+(const RatFunc& a, const RatFunc& b) {
        return RatFunc(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFunc operator-(const RatFunc& a, const RatFunc& b) {
        return RatFunc(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
    }
    friend RatFunc operator*(const RatFunc& a, const RatFunc& b) {
        return RatFunc(a.num_ * b.num_, a.den_ * b.den_);
    }
    friend RatFunc operator/(const RatFunc& a, const RatFunc& b) {
        if (b.is_zero()) throw Error("DivisionByZero", "rational function division by zero");
        return RatFunc(a.num_ * b.den_, a.den_ * b.num_);
    }
    RatFunc operator-() const { return RatFunc(-num_, den_); }

    RatFunc derivative() const {
        return RatFunc(num_.derivative() * den_ - num_ * den_.derivative(), den_ * den_);
    }

    /// Evaluation; throws on a denominator zero.
    Scalar eval(const Scalar& x) const {
        Scalar d = den_.eval(x);
        if (d.is_zero()) throw Error("PoleEvaluation", "evaluation at a pole");
        return num_.eval(x) / d;
    }
    std::complex<double> eval(std::complex<double> x) const {
        std::complex<double> d = den_.eval_c(x);
        return num_.eval_c(x) / d;
    }

    friend bool operator==(const RatFunc& a, const RatFunc& b) {
        if (a.num_ == b.num_ && a.den_ == b.den_) return true;
        return a.num_ * b.den_ == b.num_ * a.den_;
    }
    friend bool operator!=(const RatFunc& a, const RatFunc& b) { return !(a == b); }

    std::string str() const;

private:
    void normalize();
    Poly num_, den_;
};

/// Antiderivative that is again a rational function, split off by Hermite
/// reduction. Throws NotIntegrable when a logarithmic part remains.
RatFunc rf_antiderivative(const RatFunc& f);

/// Exact polynomial square root when p is a perfect square (real rational or
/// float coefficients); nullopt otherwise.
std::optional<Poly> poly_sqrt(const Poly& p);

/// Square root of a rational function with perfect-square numerator and
/// denominator.
std::optional<RatFunc> rf_sqrt(const RatFunc& f);

/// Numeric roots of the denominator (pole candidates).
std::vector<std::complex<double>> rf_poles(const RatFunc& f);

} // namespace wkbsq

#endif
