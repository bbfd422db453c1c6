#ifndef WKBSQ_ANGLE_HPP
#define WKBSQ_ANGLE_HPP

#include <cmath>

#include "wkbsq/scalar.hpp"

namespace wkbsq {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kAngularTol = 1e-12;

/// Angle on the circle, kept as an exact rational multiple of pi when it was
/// constructed from rational data, as plain radians otherwise. Sums and
/// differences of exact angles stay exact; anything mixed degrades to float.
class Angle {
public:
    Angle() : exact_(true), t_(0) {}
    static Angle pi_mult(const Rational& t) {
        Angle a;
        a.exact_ = true;
        a.t_ = t;
        return a;
    }
    static Angle pi_frac(long long num, long long den) {
        return pi_mult(Rational(num) / Rational(den));
    }
    static Angle radians(double r) {
        Angle a;
        a.exact_ = false;
        a.rad_ = r;
        return a;
    }

    bool exact() const { return exact_; }
    double rad() const { return exact_ ? to_double(t_) * kPi : rad_; }
    const Rational& pi_multiple() const { return t_; }

    friend Angle operator+(const Angle& a, const Angle& b) {
        if (a.exact_ && b.exact_) return pi_mult(a.t_ + b.t_);
        return radians(a.rad() + b.rad());
    }
    friend Angle operator-(const Angle& a, const Angle& b) {
        if (a.exact_ && b.exact_) return pi_mult(a.t_ - b.t_);
        return radians(a.rad() - b.rad());
    }
    Angle operator-() const { return exact_ ? pi_mult(-t_) : radians(-rad_); }
    friend Angle operator*(const Angle& a, const Rational& k) {
        if (a.exact_) return pi_mult(a.t_ * k);
        return radians(a.rad_ * to_double(k));
    }

    friend int cmp(const Angle& a, const Angle& b) {
        if (a.exact_ && b.exact_) {
            if (a.t_ < b.t_) return -1;
            if (b.t_ < a.t_) return 1;
            return 0;
        }
        double x = a.rad(), y = b.rad();
        if (x < y - kAngularTol) return -1;
        if (y < x - kAngularTol) return 1;
        return 0;
    }
    friend bool operator<(const Angle& a, const Angle& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Angle& a, const Angle& b) { return cmp(a, b) <= 0; }
    friend bool angle_eq(const Angle& a, const Angle& b) { return cmp(a, b) == 0; }

    /// Reduce into [0, 2*pi).
    Angle normalized() const {
        if (exact_) {
            Rational t = t_;
            // t mod 2
            Rational two(2);
            Rational k = t / two;
            boost::multiprecision::cpp_int fl =
                boost::multiprecision::numerator(k) / boost::multiprecision::denominator(k);
            if (k < 0 && fl * boost::multiprecision::denominator(k) !=
                             boost::multiprecision::numerator(k))
                fl -= 1;
            t -= two * Rational(fl);
            if (t < 0) t += two; // guard against stray signs
            if (t >= two) t -= two;
            return pi_mult(t);
        }
        double r = std::fmod(rad_, 2 * kPi);
        if (r < 0) r += 2 * kPi;
        if (r >= 2 * kPi) r = 0;
        return radians(r);
    }

    /// Unit complex e^{i theta}; exact for the four cardinal directions.
    Scalar unit() const {
        if (exact_) {
            Rational t = normalized().t_;
            if (t == 0) return Scalar(Rational(1), Rational(0));
            if (t == Rational(1, 2)) return Scalar(Rational(0), Rational(1));
            if (t == 1) return Scalar(Rational(-1), Rational(0));
            if (t == Rational(3, 2)) return Scalar(Rational(0), Rational(-1));
        }
        double r = rad();
        return Scalar(std::complex<double>(std::cos(r), std::sin(r)));
    }

    Angle to_float() const { return exact_ ? radians(rad()) : *this; }

private:
    bool exact_;
    Rational t_;
    double rad_ = 0.0;
};

inline Angle angle_pi() { return Angle::pi_mult(1); }
inline Angle angle_two_pi() { return Angle::pi_mult(2); }
inline Angle angle_half_pi() { return Angle::pi_mult(Rational(1, 2)); }

} // namespace wkbsq

#endif
