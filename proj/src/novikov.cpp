#include "wkbsq/novikov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace wkbsq {

namespace {

constexpr double kExpTol = 1e-12; // float-mode exponent identification

bool scalar_exact(const Scalar& s) { return s.exact(); }

// (directional value, Im, Re) lexicographic term order
int cmp_term_key(const Scalar& c1, const Scalar& c2, const ConicRegion& cone) {
    int d = cmp_real(directional_value(c1, cone), directional_value(c2, cone));
    if (d != 0) return d;
    if (c1.exact() && c2.exact()) {
        if (c1.im_exact() != c2.im_exact()) return c1.im_exact() < c2.im_exact() ? -1 : 1;
        if (c1.re_exact() != c2.re_exact()) return c1.re_exact() < c2.re_exact() ? -1 : 1;
        return 0;
    }
    double i1 = c1.im_double(), i2 = c2.im_double();
    if (i1 != i2) return i1 < i2 ? -1 : 1;
    double r1 = c1.re_double(), r2 = c2.re_double();
    if (r1 != r2) return r1 < r2 ? -1 : 1;
    return 0;
}

bool exps_equal(const Scalar& a, const Scalar& b, bool exact_mode) {
    if (exact_mode) return a == b;
    return std::abs(a.to_complex() - b.to_complex()) <= kExpTol;
}

bool at_or_above_cutoff(const Scalar& dv, double cutoff) {
    if (dv.exact()) return dv.re_exact() >= Rational(cutoff);
    return dv.re_double() >= cutoff;
}

} // namespace

bool NovikovElement::exact() const {
    if (!cone_.canonical_direction().exact()) return false;
    for (const auto& t : terms_)
        if (!t.exponent.exact() || !t.coeff.exact()) return false;
    return true;
}

void NovikovElement::normalize() {
    bool exact_mode = exact();
    if (!exact_mode) {
        for (auto& t : terms_) {
            t.exponent = t.exponent.to_float();
            t.coeff = t.coeff.to_float();
        }
    }
    for (const auto& t : terms_)
        if (!t.coeff.is_zero() && !cone_.contains_point(t.exponent))
            throw Error("ExponentOutsideCone",
                        "exponent " + t.exponent.str() + " not in the dual cone");
    std::sort(terms_.begin(), terms_.end(), [&](const NovikovTerm& x, const NovikovTerm& y) {
        return cmp_term_key(x.exponent, y.exponent, cone_) < 0;
    });
    std::vector<NovikovTerm> out;
    out.reserve(terms_.size());
    for (auto& t : terms_) {
        if (!out.empty() && exps_equal(out.back().exponent, t.exponent, exact_mode))
            out.back().coeff += t.coeff;
        else
            out.push_back(t);
    }
    terms_.clear();
    for (auto& t : out) {
        if (t.coeff.is_zero()) continue;
        if (at_or_above_cutoff(dirval(t.exponent), cutoff_)) continue;
        terms_.push_back(t);
    }
}

Scalar NovikovElement::coeff_at(const Scalar& exponent) const {
    bool exact_mode = exact();
    for (const auto& t : terms_)
        if (exps_equal(t.exponent, exponent, exact_mode && exponent.exact()))
            return t.coeff;
    return Scalar(0);
}

NovikovElement NovikovElement::to_float() const {
    NovikovElement r(cone_, cutoff_);
    ConicRegion c = cone_;
    c.set_canonical_direction(cone_.canonical_direction().to_float());
    r.cone_ = c;
    for (const auto& t : terms_)
        r.terms_.push_back({t.exponent.to_float(), t.coeff.to_float()});
    r.normalize();
    return r;
}

bool operator==(const NovikovElement& a, const NovikovElement& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i) {
        if (a.terms_[i].exponent != b.terms_[i].exponent) return false;
        if (a.terms_[i].coeff != b.terms_[i].coeff) return false;
    }
    return true;
}

std::string NovikovElement::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "(" << t.coeff.str() << ")";
        if (!t.exponent.is_zero()) os << "*T^{" << t.exponent.str() << "}";
    }
    return os.str();
}

namespace {

void require_compatible(const NovikovElement& a, const NovikovElement& b) {
    if (!(a.dual_cone() == b.dual_cone()))
        throw ConeMismatch("operands live over different dual cones");
    if (a.cutoff() != b.cutoff())
        throw CutoffMismatch("operands have different cutoffs");
}

// coerce to a common mode before combining
std::pair<NovikovElement, NovikovElement> align(const NovikovElement& a,
                                                const NovikovElement& b) {
    bool ea = a.exact(), eb = b.exact();
    if (ea == eb) return {a, b};
    return {a.to_float(), b.to_float()};
}

} // namespace

NovikovElement nv_add(const NovikovElement& a0, const NovikovElement& b0) {
    require_compatible(a0, b0);
    auto [a, b] = align(a0, b0);
    std::vector<NovikovTerm> terms = a.terms();
    terms.insert(terms.end(), b.terms().begin(), b.terms().end());
    return NovikovElement(a.dual_cone(), a.cutoff(), std::move(terms));
}

NovikovElement nv_neg(const NovikovElement& a) {
    NovikovElement r = a;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
}

NovikovElement nv_sub(const NovikovElement& a, const NovikovElement& b) {
    return nv_add(a, nv_neg(b));
}

NovikovElement nv_mul(const NovikovElement& a0, const NovikovElement& b0) {
    require_compatible(a0, b0);
    if (!(hull(a0.dual_cone()) == a0.dual_cone()))
        throw NonConvexCone("dual cone is not addition-closed");
    auto [a, b] = align(a0, b0);
    std::vector<NovikovTerm> terms;
    terms.reserve(a.terms().size() * b.terms().size());
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms())
            terms.push_back({ta.exponent + tb.exponent, ta.coeff * tb.coeff});
    return NovikovElement(a.dual_cone(), a.cutoff(), std::move(terms));
}

double nv_valuation(const NovikovElement& a) {
    if (a.is_zero()) return std::numeric_limits<double>::infinity();
    // terms are sorted by directional value
    return a.dirval(a.terms().front().exponent).re_double();
}

NovikovElement nv_invert(const NovikovElement& a) {
    if (a.is_zero()) throw NotAUnit("zero element");
    bool exact_mode = a.exact();
    Scalar c0(0);
    std::vector<NovikovTerm> tail;
    for (const auto& t : a.terms()) {
        if (exps_equal(t.exponent, Scalar(0), exact_mode))
            c0 = t.coeff;
        else
            tail.push_back(t);
    }
    if (c0.is_zero()) throw NotAUnit("no constant term");
    if (tail.empty())
        return NovikovElement::constant(Scalar(1) / c0, a.dual_cone(), a.cutoff());

    NovikovElement m(a.dual_cone(), a.cutoff(), tail);
    double v = nv_valuation(m);
    if (!(v > 0))
        throw NotAUnit("tail of directional valuation zero cannot be inverted at a finite stage");
    int iters = static_cast<int>(std::ceil(a.cutoff() / v)) + 1;

    Scalar c0inv = Scalar(1) / c0;
    NovikovElement u = nv_mul(m, NovikovElement::constant(-c0inv, a.dual_cone(), a.cutoff()));
    NovikovElement acc = NovikovElement::one(a.dual_cone(), a.cutoff());
    NovikovElement pw = acc;
    for (int k = 1; k <= iters; ++k) {
        pw = nv_mul(pw, u);
        if (pw.is_zero()) break;
        acc = nv_add(acc, pw);
    }
    return nv_mul(acc, NovikovElement::constant(c0inv, a.dual_cone(), a.cutoff()));
}

NovikovElement nv_restrict(const NovikovElement& a, const ConicRegion& smaller_sectoroid_cone) {
    ConicRegion target = polar_dual(smaller_sectoroid_cone);
    if (!target.contains(a.dual_cone()))
        throw ConeNotContained("target dual cone does not contain the source exponent cone");
    NovikovElement r(target, a.cutoff());
    return NovikovElement(target, a.cutoff(), a.terms());
}

std::complex<double> nv_eval(const NovikovElement& a, std::complex<double> hbar) {
    std::complex<double> s = 0;
    for (const auto& t : a.terms())
        s += t.coeff.to_complex() * std::exp(-t.exponent.to_complex() / hbar);
    return s;
}

} // namespace wkbsq
