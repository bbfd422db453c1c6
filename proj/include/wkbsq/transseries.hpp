#ifndef WKBSQ_TRANSSERIES_HPP
#define WKBSQ_TRANSSERIES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "wkbsq/novikov.hpp"
#include "wkbsq/poly.hpp"

namespace wkbsq {

// ---- parameter-ring helpers -------------------------------------------

inline Scalar coeff_derivative(const Scalar&) { return Scalar(0); }
inline RatFunc coeff_derivative(const RatFunc& r) { return r.derivative(); }

inline bool coeff_exact(const Scalar& s) { return s.exact(); }
inline bool coeff_exact(const RatFunc& r) {
    for (const Scalar& s : r.num().coeffs())
        if (!s.exact()) return false;
    for (const Scalar& s : r.den().coeffs())
        if (!s.exact()) return false;
    return true;
}

inline Scalar coeff_to_float(const Scalar& s) { return s.to_float(); }
inline RatFunc coeff_to_float(const RatFunc& r) {
    auto conv = [](const Poly& p) {
        std::vector<Scalar> c;
        for (const Scalar& s : p.coeffs()) c.push_back(s.to_float());
        return Poly(std::move(c));
    };
    return RatFunc(conv(r.num()), conv(r.den()));
}

inline std::complex<double> coeff_eval(const Scalar& s, std::complex<double>) {
    return s.to_complex();
}
inline std::complex<double> coeff_eval(const RatFunc& r, std::complex<double> x) {
    return r.eval(x);
}

inline std::string coeff_str(const Scalar& s) { return s.str(); }
inline std::string coeff_str(const RatFunc& r) { return r.str(); }

// ---- truncation data ---------------------------------------------------

/// Shared truncation stage: exponent cone with cutoff, hbar order (powers
/// >= hbar_order die) and a floor for Laurent degrees (powers < min_degree
/// die). All binary operations require matching stages.
struct Truncation {
    ConicRegion cone;
    double cutoff = 1.0;
    int hbar_order = 8;
    int min_degree = -8;

    Truncation() = default;
    Truncation(ConicRegion c, double e, int n, int m = -8)
        : cone(std::move(c)), cutoff(e), hbar_order(n), min_degree(m) {
        if (!(cutoff > 0)) throw Error("InvalidCutoff", "cutoff must be positive");
        if (min_degree >= hbar_order)
            throw Error("InvalidTruncation", "min_degree must be below hbar_order");
    }

    friend bool operator==(const Truncation& a, const Truncation& b) {
        return a.cone == b.cone && a.cutoff == b.cutoff &&
               a.hbar_order == b.hbar_order && a.min_degree == b.min_degree;
    }
};

/// Exponent window for the associated graded piece: terms of directional
/// value below r survive.
struct GradeWindow {
    double r;
    explicit GradeWindow(double radius) : r(radius) {
        if (!(r > 0)) throw Error("InvalidGradeWindow", "radius must be positive");
    }
};

enum class SeClass { very_rapid_decay_zero, ae, ce, se, exp_growth };

inline const char* to_string(SeClass c) {
    switch (c) {
        case SeClass::very_rapid_decay_zero: return "very_rapid_decay_zero";
        case SeClass::ae: return "ae";
        case SeClass::ce: return "ce";
        case SeClass::se: return "se";
        case SeClass::exp_growth: return "exp_growth";
    }
    return "?";
}

// ---- transseries -------------------------------------------------------

/// Truncated transseries sum of e^{-c/hbar} * phi_c(hbar) with phi_c a
/// Laurent polynomial in hbar over the parameter ring R (complex scalars or
/// rational functions in x). An element is its normal form; representations
/// are unique at fixed truncation by construction.
template <class R>
class Transseries {
public:
    struct Term {
        Scalar exponent;
        std::map<int, R> poly; // hbar degree -> coefficient
    };

    Transseries() = default;
    explicit Transseries(Truncation tr) : tr_(std::move(tr)) {}
    Transseries(Truncation tr, std::vector<Term> terms) : tr_(std::move(tr)) {
        for (auto& t : terms)
            for (auto& [d, r] : t.poly) add_term_raw(t.exponent, d, r);
        normalize();
    }

    static Transseries zero(const Truncation& tr) { return Transseries(tr); }
    static Transseries constant(const Truncation& tr, R v) {
        Transseries a(tr);
        a.add_term_raw(Scalar(0), 0, std::move(v));
        a.normalize();
        return a;
    }
    static Transseries one(const Truncation& tr) { return constant(tr, R(1)); }
    /// v * hbar^deg * e^{-c/hbar}.
    static Transseries monomial(const Truncation& tr, const Scalar& c, int deg, R v) {
        Transseries a(tr);
        a.add_term_raw(c, deg, std::move(v));
        a.normalize();
        return a;
    }

    const Truncation& truncation() const { return tr_; }
    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    bool exact() const {
        if (!tr_.cone.canonical_direction().exact()) return false;
        for (const auto& t : terms_) {
            if (!t.exponent.exact()) return false;
            for (const auto& [d, r] : t.poly)
                if (!coeff_exact(r)) return false;
        }
        return true;
    }

    Transseries to_float() const {
        Transseries a(tr_);
        a.tr_.cone.set_canonical_direction(tr_.cone.canonical_direction().to_float());
        for (const auto& t : terms_)
            for (const auto& [d, r] : t.poly)
                a.add_term_raw(t.exponent.to_float(), d, coeff_to_float(r));
        a.normalize();
        return a;
    }

    /// Coefficient polynomial at an exponent (empty map if absent).
    const std::map<int, R>* poly_at(const Scalar& exponent) const {
        bool em = exact() && exponent.exact();
        for (const auto& t : terms_)
            if (exps_equal(t.exponent, exponent, em)) return &t.poly;
        return nullptr;
    }
    R coeff_at(const Scalar& exponent, int deg) const {
        const auto* p = poly_at(exponent);
        if (!p) return R(0);
        auto it = p->find(deg);
        return it == p->end() ? R(0) : it->second;
    }

    friend bool operator==(const Transseries& a, const Transseries& b) {
        if (a.terms_.size() != b.terms_.size()) return false;
        for (size_t i = 0; i < a.terms_.size(); ++i) {
            if (a.terms_[i].exponent != b.terms_[i].exponent) return false;
            if (a.terms_[i].poly.size() != b.terms_[i].poly.size()) return false;
            auto it = b.terms_[i].poly.begin();
            for (const auto& [d, r] : a.terms_[i].poly) {
                if (d != it->first || !(r == it->second)) return false;
                ++it;
            }
        }
        return true;
    }
    friend bool operator!=(const Transseries& a, const Transseries& b) { return !(a == b); }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& t : terms_) {
            for (const auto& [d, r] : t.poly) {
                if (!first) os << " + ";
                first = false;
                os << "(" << coeff_str(r) << ")";
                if (d != 0) os << "*h^" << d;
                if (!t.exponent.is_zero()) os << "*e^{-(" << t.exponent.str() << ")/h}";
            }
        }
        return os.str();
    }

    // internal builders used by the free operations
    void add_term_raw(const Scalar& c, int deg, R v) {
        if (deg >= tr_.hbar_order || deg < tr_.min_degree) return;
        if (v.is_zero()) return;
        terms_.push_back(Term{c, {{deg, std::move(v)}}});
    }
    void normalize() {
        bool em = true;
        for (const auto& t : terms_) {
            if (!t.exponent.exact()) em = false;
            for (const auto& [d, r] : t.poly)
                if (!coeff_exact(r)) em = false;
        }
        if (!tr_.cone.canonical_direction().exact()) em = false;
        if (!em) {
            std::vector<Term> fl;
            for (auto& t : terms_) {
                Term nt{t.exponent.to_float(), {}};
                for (auto& [d, r] : t.poly) nt.poly.emplace(d, coeff_to_float(r));
                fl.push_back(std::move(nt));
            }
            terms_ = std::move(fl);
        }
        // exponents outside the cone are representable: they are exactly the
        // exponential-growth stratum that se_classify reports
        std::sort(terms_.begin(), terms_.end(), [&](const Term& x, const Term& y) {
            return cmp_exp_key(x.exponent, y.exponent) < 0;
        });
        std::vector<Term> out;
        for (auto& t : terms_) {
            if (!out.empty() && exps_equal(out.back().exponent, t.exponent, em)) {
                for (auto& [d, r] : t.poly) {
                    auto [it, fresh] = out.back().poly.emplace(d, r);
                    if (!fresh) it->second = it->second + r;
                }
            } else {
                out.push_back(std::move(t));
            }
        }
        terms_.clear();
        for (auto& t : out) {
            if (above_cutoff(t.exponent)) continue;
            for (auto it = t.poly.begin(); it != t.poly.end();) {
                if (it->second.is_zero() || it->first >= tr_.hbar_order ||
                    it->first < tr_.min_degree)
                    it = t.poly.erase(it);
                else
                    ++it;
            }
            if (!t.poly.empty()) terms_.push_back(std::move(t));
        }
    }

    Scalar dirval(const Scalar& c) const { return directional_value(c, tr_.cone); }
    bool above_cutoff(const Scalar& c) const {
        Scalar dv = dirval(c);
        if (dv.exact()) return dv.re_exact() >= Rational(tr_.cutoff);
        return dv.re_double() >= tr_.cutoff;
    }

private:
    static bool exps_equal(const Scalar& a, const Scalar& b, bool exact_mode) {
        if (exact_mode) return a == b;
        return std::abs(a.to_complex() - b.to_complex()) <= 1e-12;
    }
    int cmp_exp_key(const Scalar& a, const Scalar& b) const {
        int d = cmp_real(dirval(a), dirval(b));
        if (d != 0) return d;
        int i = cmp_lex(Scalar(0) + a, Scalar(0) + b);
        return i;
    }

    Truncation tr_;
    std::vector<Term> terms_;
};

using TransseriesC = Transseries<Scalar>;
using TransseriesR = Transseries<RatFunc>;

// ---- arithmetic ---------------------------------------------------------

template <class R>
void require_compatible_ts(const Transseries<R>& a, const Transseries<R>& b) {
    if (!(a.truncation().cone == b.truncation().cone))
        throw ConeMismatch("transseries over different cones");
    if (a.truncation().cutoff != b.truncation().cutoff)
        throw CutoffMismatch("transseries with different cutoffs");
    if (a.truncation().hbar_order != b.truncation().hbar_order ||
        a.truncation().min_degree != b.truncation().min_degree)
        throw Error("TruncationMismatch", "transseries with different hbar truncation");
}

template <class R>
Transseries<R> ts_add(const Transseries<R>& a, const Transseries<R>& b) {
    require_compatible_ts(a, b);
    Transseries<R> r(a.truncation());
    for (const auto& t : a.terms())
        for (const auto& [d, v] : t.poly) r.add_term_raw(t.exponent, d, v);
    for (const auto& t : b.terms())
        for (const auto& [d, v] : t.poly) r.add_term_raw(t.exponent, d, v);
    r.normalize();
    return r;
}

template <class R>
Transseries<R> ts_neg(const Transseries<R>& a) {
    Transseries<R> r(a.truncation());
    for (const auto& t : a.terms())
        for (const auto& [d, v] : t.poly) r.add_term_raw(t.exponent, d, -v);
    r.normalize();
    return r;
}

template <class R>
Transseries<R> ts_sub(const Transseries<R>& a, const Transseries<R>& b) {
    return ts_add(a, ts_neg(b));
}

template <class R>
Transseries<R> ts_mul(const Transseries<R>& a, const Transseries<R>& b) {
    require_compatible_ts(a, b);
    Transseries<R> r(a.truncation());
    for (const auto& ta : a.terms()) {
        if (r.above_cutoff(ta.exponent)) continue;
        for (const auto& tb : b.terms()) {
            Scalar c = ta.exponent + tb.exponent;
            if (r.above_cutoff(c)) continue;
            for (const auto& [da, va] : ta.poly)
                for (const auto& [db, vb] : tb.poly)
                    r.add_term_raw(c, da + db, va * vb);
        }
    }
    r.normalize();
    return r;
}

template <class R>
Transseries<R> operator+(const Transseries<R>& a, const Transseries<R>& b) {
    return ts_add(a, b);
}
template <class R>
Transseries<R> operator-(const Transseries<R>& a, const Transseries<R>& b) {
    return ts_sub(a, b);
}
template <class R>
Transseries<R> operator*(const Transseries<R>& a, const Transseries<R>& b) {
    return ts_mul(a, b);
}

/// Multiply by hbar^k (degree shift through the truncation window).
template <class R>
Transseries<R> ts_mul_hbar(const Transseries<R>& a, int k) {
    Transseries<R> r(a.truncation());
    for (const auto& t : a.terms())
        for (const auto& [d, v] : t.poly) r.add_term_raw(t.exponent, d + k, v);
    r.normalize();
    return r;
}

/// Multiply by e^{-c/hbar}.
template <class R>
Transseries<R> ts_shift_exponent(const Transseries<R>& a, const Scalar& c) {
    Transseries<R> r(a.truncation());
    for (const auto& t : a.terms())
        for (const auto& [d, v] : t.poly) r.add_term_raw(t.exponent + c, d, v);
    r.normalize();
    return r;
}

/// x-derivative (exponents are constants in this model).
template <class R>
Transseries<R> ts_derivative(const Transseries<R>& a) {
    Transseries<R> r(a.truncation());
    for (const auto& t : a.terms())
        for (const auto& [d, v] : t.poly) r.add_term_raw(t.exponent, d, coeff_derivative(v));
    r.normalize();
    return r;
}

/// Quotient map onto the graded piece: keeps directional values < w.r.
template <class R>
Transseries<R> grade_project(const Transseries<R>& a, const GradeWindow& w) {
    if (w.r > a.truncation().cutoff + 1e-15)
        throw Error("InvalidGradeWindow", "window exceeds the cutoff");
    Transseries<R> r(a.truncation());
    for (const auto& t : a.terms()) {
        Scalar dv = a.dirval(t.exponent);
        bool keep = dv.exact() ? (dv.re_exact() < Rational(w.r)) : (dv.re_double() < w.r);
        if (!keep) continue;
        for (const auto& [d, v] : t.poly) r.add_term_raw(t.exponent, d, v);
    }
    r.normalize();
    return r;
}

namespace detail {

inline bool exp_of_constant(const Scalar& v, Scalar& out) {
    if (v.is_zero()) {
        out = Scalar(1);
        return true;
    }
    out = Scalar(std::exp(v.to_complex()));
    return true;
}
inline bool exp_of_constant(const RatFunc& v, RatFunc& out) {
    if (v.is_zero()) {
        out = RatFunc(1);
        return true;
    }
    if (!v.is_constant()) return false;
    out = RatFunc(Scalar(std::exp(v.constant_value().to_complex())));
    return true;
}

} // namespace detail

/// Exponential by the truncated Taylor series. Requires: no negative hbar
/// degrees at exponent 0, and every nonzero exponent of strictly positive
/// directional value (otherwise the series does not stabilize at a finite
/// stage).
template <class R>
Transseries<R> ts_exp(const Transseries<R>& a) {
    const Truncation& tr = a.truncation();
    R head0{0};
    Transseries<R> rest(tr);
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& t : a.terms()) {
        Scalar dv = a.dirval(t.exponent);
        bool exp_zero = t.exponent.is_zero();
        double dvd = dv.re_double();
        if (!exp_zero && dvd <= 0)
            throw NotExponentiable("nonzero exponent of nonpositive directional value");
        if (!exp_zero) vmin = std::min(vmin, dvd);
        for (const auto& [d, v] : t.poly) {
            if (exp_zero && d < 0)
                throw NotExponentiable("negative hbar degree at exponent zero");
            if (exp_zero && d == 0)
                head0 = head0 + v;
            else
                rest.add_term_raw(t.exponent, d, v);
        }
    }
    rest.normalize();

    R lead{0};
    if (!detail::exp_of_constant(head0, lead))
        throw NotExponentiable("hbar-degree-0 part is not exponentiable in the parameter ring");

    // every monomial eventually leaves the truncation window, so iterate
    // until the running power vanishes
    long max_pow = tr.hbar_order - tr.min_degree + 4;
    if (std::isfinite(vmin) && vmin > 0)
        max_pow += static_cast<long>((1 - tr.min_degree) * std::ceil(tr.cutoff / vmin)) + 4;
    Transseries<R> sum = Transseries<R>::one(tr);
    Transseries<R> pw = sum;
    Rational fact(1);
    for (long n = 1; n <= max_pow && !pw.is_zero(); ++n) {
        pw = ts_mul(pw, rest);
        if (pw.is_zero()) break;
        fact *= static_cast<int>(n);
        Transseries<R> scaled(tr);
        for (const auto& t : pw.terms())
            for (const auto& [d, v] : t.poly)
                scaled.add_term_raw(t.exponent, d, v * R(Scalar(Rational(1) / fact)));
        scaled.normalize();
        sum = ts_add(sum, scaled);
    }
    Transseries<R> leadts = Transseries<R>::constant(tr, lead);
    return ts_mul(leadts, sum);
}

/// Stratum of the growth hierarchy this finite sum certifiably lies in.
/// Model convention: any exponent outside the cone is exponential growth; a
/// negative hbar power anywhere lands in the subexponential stratum; terms
/// at classical level (directional value 0) keep it continuously extendable;
/// purely positive directional values are asymptotically expandable (to 0).
template <class R>
SeClass se_classify(const Transseries<R>& a) {
    if (a.is_zero()) return SeClass::very_rapid_decay_zero;
    bool has_negative_degree = false;
    bool has_classical_level = false;
    for (const auto& t : a.terms()) {
        if (!a.truncation().cone.contains_point(t.exponent)) return SeClass::exp_growth;
        Scalar dv = a.dirval(t.exponent);
        bool classical = dv.exact() ? dv.re_exact() == 0 : std::abs(dv.re_double()) <= 1e-12;
        if (dv.re_double() < -1e-12) return SeClass::exp_growth;
        if (classical) has_classical_level = true;
        if (t.poly.begin()->first < 0) has_negative_degree = true;
    }
    if (has_negative_degree) return SeClass::se;
    if (has_classical_level) return SeClass::ce;
    return SeClass::ae;
}

/// Directional infimum of the subexponential support: the largest shift s
/// with e^{s/hbar} * a still subexponential; equals the minimal directional
/// value over the stored terms.
template <class R>
double se_support(const Transseries<R>& a) {
    if (a.is_zero()) throw ZeroElement("se_support of the zero element");
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : a.terms()) m = std::min(m, a.dirval(t.exponent).re_double());
    return m;
}

/// Novikov valuation of the transseries (min directional value; +inf for 0).
template <class R>
double ts_valuation(const Transseries<R>& a) {
    if (a.is_zero()) return std::numeric_limits<double>::infinity();
    double m = std::numeric_limits<double>::infinity();
    for (const auto& t : a.terms()) m = std::min(m, a.dirval(t.exponent).re_double());
    return m;
}

/// Numeric evaluation at (x, hbar); x is ignored for scalar coefficients.
template <class R>
std::complex<double> ts_eval(const Transseries<R>& a, std::complex<double> x,
                             std::complex<double> hbar) {
    std::complex<double> s = 0;
    for (const auto& t : a.terms()) {
        std::complex<double> p = 0;
        for (const auto& [d, v] : t.poly)
            p += coeff_eval(v, x) * std::pow(hbar, static_cast<double>(d));
        s += p * std::exp(-t.exponent.to_complex() / hbar);
    }
    return s;
}

/// Inverse at truncation for elements whose (exponent 0, degree 0) part is a
/// unit and whose remainder has positive valuation or positive hbar degree.
template <class R>
Transseries<R> ts_invert(const Transseries<R>& a) {
    const Truncation& tr = a.truncation();
    R head{0};
    Transseries<R> rest(tr);
    for (const auto& t : a.terms())
        for (const auto& [d, v] : t.poly) {
            if (t.exponent.is_zero() && d == 0)
                head = head + v;
            else
                rest.add_term_raw(t.exponent, d, v);
        }
    rest.normalize();
    if (head.is_zero()) throw NotAUnit("no (exponent 0, degree 0) part");
    for (const auto& t : rest.terms()) {
        Scalar dv = rest.dirval(t.exponent);
        if (dv.re_double() <= 0 && t.poly.begin()->first <= 0)
            throw NotAUnit("tail neither hbar-positive nor valuation-positive");
    }
    R headinv = R(1) / head;
    Transseries<R> u(tr);
    for (const auto& t : rest.terms())
        for (const auto& [d, v] : t.poly) u.add_term_raw(t.exponent, d, -(v * headinv));
    u.normalize();
    double vmin = std::numeric_limits<double>::infinity();
    for (const auto& t : u.terms()) {
        double dv = u.dirval(t.exponent).re_double();
        if (dv > 0) vmin = std::min(vmin, dv);
    }
    long max_pow = tr.hbar_order - tr.min_degree + 4;
    if (std::isfinite(vmin))
        max_pow += static_cast<long>((1 - tr.min_degree) * std::ceil(tr.cutoff / vmin)) + 4;
    Transseries<R> sum = Transseries<R>::one(tr);
    Transseries<R> pw = sum;
    for (long n = 1; n <= max_pow; ++n) {
        pw = ts_mul(pw, u);
        if (pw.is_zero()) break;
        sum = ts_add(sum, pw);
    }
    Transseries<R> inv(tr);
    for (const auto& t : sum.terms())
        for (const auto& [d, v] : t.poly) inv.add_term_raw(t.exponent, d, v * headinv);
    inv.normalize();
    return inv;
}

// R / hbar-degree / exponent division helper used by solvers: head term of
// the classical part.
template <class R>
R classical_leading(const Transseries<R>& a) {
    return a.coeff_at(Scalar(0), 0);
}

} // namespace wkbsq

#endif
