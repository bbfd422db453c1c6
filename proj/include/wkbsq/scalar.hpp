#ifndef WKBSQ_SCALAR_HPP
#define WKBSQ_SCALAR_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

#include "wkbsq/errors.hpp"

namespace wkbsq {

using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.template convert_to<double>(); }

/// Complex scalar carried either as an exact Gaussian rational or as a
/// complex<double>. Mixed-mode arithmetic coerces to floating point; the
/// exact mode survives +, -, *, / and integer powers.
class Scalar {
public:
    Scalar() : exact_(true), re_(0), im_(0) {}
    Scalar(int v) : exact_(true), re_(v), im_(0) {}
    Scalar(long long v) : exact_(true), re_(v), im_(0) {}
    Scalar(const Rational& re, const Rational& im = 0) : exact_(true), re_(re), im_(im) {}
    Scalar(double v) : exact_(false), f_(v, 0.0) {}
    Scalar(std::complex<double> v) : exact_(false), f_(v) {}

    static Scalar exact_rational(const Rational& re, const Rational& im = 0) {
        return Scalar(re, im);
    }
    /// Exact scalar from a double, using the double's exact binary value.
    static Scalar exactify(double re, double im = 0.0) {
        return Scalar(Rational(re), Rational(im));
    }

    bool exact() const { return exact_; }

    std::complex<double> to_complex() const {
        return exact_ ? std::complex<double>(to_double(re_), to_double(im_)) : f_;
    }
    double re_double() const { return exact_ ? to_double(re_) : f_.real(); }
    double im_double() const { return exact_ ? to_double(im_) : f_.imag(); }
    const Rational& re_exact() const { return re_; }
    const Rational& im_exact() const { return im_; }

    bool is_zero() const {
        return exact_ ? (re_ == 0 && im_ == 0) : (f_ == std::complex<double>(0.0, 0.0));
    }
    bool is_real() const { return exact_ ? im_ == 0 : f_.imag() == 0.0; }

    Scalar to_float() const { return exact_ ? Scalar(to_complex()) : *this; }

    friend Scalar operator+(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) return Scalar(a.re_ + b.re_, a.im_ + b.im_);
        return Scalar(a.to_complex() + b.to_complex());
    }
    friend Scalar operator-(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) return Scalar(a.re_ - b.re_, a.im_ - b.im_);
        return Scalar(a.to_complex() - b.to_complex());
    }
    friend Scalar operator*(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_)
            return Scalar(a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_);
        return Scalar(a.to_complex() * b.to_complex());
    }
    friend Scalar operator/(const Scalar& a, const Scalar& b) {
        if (b.is_zero()) throw Error("DivisionByZero", "scalar division by zero");
        if (a.exact_ && b.exact_) {
            Rational n = b.re_ * b.re_ + b.im_ * b.im_;
            return Scalar((a.re_ * b.re_ + a.im_ * b.im_) / n,
                          (a.im_ * b.re_ - a.re_ * b.im_) / n);
        }
        return Scalar(a.to_complex() / b.to_complex());
    }
    Scalar operator-() const {
        return exact_ ? Scalar(-re_, -im_) : Scalar(-f_);
    }
    Scalar& operator+=(const Scalar& b) { return *this = *this + b; }
    Scalar& operator-=(const Scalar& b) { return *this = *this - b; }
    Scalar& operator*=(const Scalar& b) { return *this = *this * b; }
    Scalar& operator/=(const Scalar& b) { return *this = *this / b; }

    Scalar conj() const { return exact_ ? Scalar(re_, -im_) : Scalar(std::conj(f_)); }

    Scalar pow(int n) const {
        if (n < 0) return Scalar(1) / pow(-n);
        Scalar r(1), b = *this;
        while (n) {
            if (n & 1) r *= b;
            b *= b;
            n >>= 1;
        }
        return r;
    }

    double abs() const { return std::abs(to_complex()); }

    /// Structural equality: exact rationals compared exactly, anything float
    /// compared as doubles bit-for-bit.
    friend bool operator==(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) return a.re_ == b.re_ && a.im_ == b.im_;
        return a.to_complex() == b.to_complex();
    }
    friend bool operator!=(const Scalar& a, const Scalar& b) { return !(a == b); }

    friend bool close(const Scalar& a, const Scalar& b, double tol) {
        if (a.exact_ && b.exact_) return a.re_ == b.re_ && a.im_ == b.im_;
        return std::abs(a.to_complex() - b.to_complex()) <= tol;
    }

    /// Ordering of real-valued scalars; mixed modes compare as doubles.
    friend int cmp_real(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) {
            if (a.re_ < b.re_) return -1;
            if (b.re_ < a.re_) return 1;
            return 0;
        }
        double x = a.re_double(), y = b.re_double();
        return x < y ? -1 : (y < x ? 1 : 0);
    }
    friend bool less_real(const Scalar& a, const Scalar& b) { return cmp_real(a, b) < 0; }

    /// Lexicographic order on (Re, Im); used for canonical term order.
    friend int cmp_lex(const Scalar& a, const Scalar& b) {
        if (a.exact_ && b.exact_) {
            if (a.re_ != b.re_) return a.re_ < b.re_ ? -1 : 1;
            if (a.im_ != b.im_) return a.im_ < b.im_ ? -1 : 1;
            return 0;
        }
        std::complex<double> x = a.to_complex(), y = b.to_complex();
        if (x.real() != y.real()) return x.real() < y.real() ? -1 : 1;
        if (x.imag() != y.imag()) return x.imag() < y.imag() ? -1 : 1;
        return 0;
    }

    std::string str() const;

private:
    bool exact_;
    Rational re_, im_;
    std::complex<double> f_{0.0, 0.0};
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string Scalar::str() const {
    if (exact_) {
        std::string s = re_.str();
        if (im_ != 0) s += (im_ > 0 ? "+" : "") + im_.str() + "i";
        return s;
    }
    std::string s = format_double(f_.real());
    if (f_.imag() != 0.0) {
        if (f_.imag() > 0) s += "+";
        s += format_double(f_.imag()) + "i";
    }
    return s;
}

/// Re(a * conj(b)) as a real scalar, exact when both operands are exact.
inline Scalar dot_re(const Scalar& a, const Scalar& b) {
    if (a.exact() && b.exact())
        return Scalar(a.re_exact() * b.re_exact() + a.im_exact() * b.im_exact());
    std::complex<double> z = a.to_complex() * std::conj(b.to_complex());
    return Scalar(z.real());
}

} // namespace wkbsq

#endif
