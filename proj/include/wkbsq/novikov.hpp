#ifndef WKBSQ_NOVIKOV_HPP
#define WKBSQ_NOVIKOV_HPP

#include <limits>
#include <vector>

#include "wkbsq/cone.hpp"
#include "wkbsq/errors.hpp"

namespace wkbsq {

struct NovikovTerm {
    Scalar exponent;
    Scalar coeff;
};

/// Truncated Novikov-ring element: a finite sum of a_c T^c with exponents in
/// a fixed dual cone, computed modulo T^{>=E} in the cone's canonical
/// direction. An element is an equivalence class at one truncation stage;
/// operations require matching cone and cutoff.
class NovikovElement {
public:
    NovikovElement() = default;
    NovikovElement(ConicRegion dual_cone, double cutoff)
        : cone_(std::move(dual_cone)), cutoff_(cutoff) {
        if (!(cutoff_ > 0)) throw Error("InvalidCutoff", "cutoff must be positive");
    }
    NovikovElement(ConicRegion dual_cone, double cutoff, std::vector<NovikovTerm> terms)
        : NovikovElement(std::move(dual_cone), cutoff) {
        terms_ = std::move(terms);
        normalize();
    }

    static NovikovElement zero(const ConicRegion& cone, double cutoff) {
        return NovikovElement(cone, cutoff);
    }
    static NovikovElement constant(const Scalar& coeff, const ConicRegion& cone,
                                   double cutoff) {
        return NovikovElement(cone, cutoff, {{Scalar(0), coeff}});
    }
    static NovikovElement one(const ConicRegion& cone, double cutoff) {
        return constant(Scalar(1), cone, cutoff);
    }
    /// a * T^c.
    static NovikovElement monomial(const Scalar& exponent, const Scalar& coeff,
                                   const ConicRegion& cone, double cutoff) {
        return NovikovElement(cone, cutoff, {{exponent, coeff}});
    }

    const ConicRegion& dual_cone() const { return cone_; }
    double cutoff() const { return cutoff_; }
    const std::vector<NovikovTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// All exponents and coefficients exact.
    bool exact() const;

    Scalar coeff_at(const Scalar& exponent) const;
    /// Directional real part of an exponent in this element's cone.
    Scalar dirval(const Scalar& exponent) const {
        return directional_value(exponent, cone_);
    }

    NovikovElement to_float() const;

    /// Structural equality at the shared truncation (bitwise in exact mode).
    friend bool operator==(const NovikovElement& a, const NovikovElement& b);
    friend bool operator!=(const NovikovElement& a, const NovikovElement& b) {
        return !(a == b);
    }

    std::string str() const;

private:
    friend NovikovElement nv_add(const NovikovElement&, const NovikovElement&);
    friend NovikovElement nv_mul(const NovikovElement&, const NovikovElement&);
    friend NovikovElement nv_neg(const NovikovElement&);
    friend NovikovElement nv_invert(const NovikovElement&);
    friend NovikovElement nv_restrict(const NovikovElement&, const ConicRegion&);

    void normalize();

    ConicRegion cone_;
    double cutoff_ = 1.0;
    std::vector<NovikovTerm> terms_;
};

NovikovElement nv_add(const NovikovElement& a, const NovikovElement& b);
NovikovElement nv_sub(const NovikovElement& a, const NovikovElement& b);
NovikovElement nv_neg(const NovikovElement& a);
NovikovElement nv_mul(const NovikovElement& a, const NovikovElement& b);

/// Minimum directional exponent value; +infinity for the zero element.
double nv_valuation(const NovikovElement& a);

/// Inverse in the truncated ring by geometric series; requires a nonzero
/// coefficient at exponent 0 and a strictly positive valuation tail.
NovikovElement nv_invert(const NovikovElement& a);

/// Restriction homomorphism along an inclusion of sectoroids: reinterprets
/// the terms in the dual cone of the smaller sectoroid.
NovikovElement nv_restrict(const NovikovElement& a, const ConicRegion& smaller_sectoroid_cone);

/// Evaluate at T = e^{-1/hbar} for a numeric hbar on the canonical ray.
std::complex<double> nv_eval(const NovikovElement& a, std::complex<double> hbar);

inline NovikovElement operator+(const NovikovElement& a, const NovikovElement& b) {
    return nv_add(a, b);
}
inline NovikovElement operator-(const NovikovElement& a, const NovikovElement& b) {
    return nv_sub(a, b);
}
inline NovikovElement operator*(const NovikovElement& a, const NovikovElement& b) {
    return nv_mul(a, b);
}

} // namespace wkbsq

#endif
