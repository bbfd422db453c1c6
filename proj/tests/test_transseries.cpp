#include "doctest.h"

#include <random>

#include "wkbsq/transseries.hpp"

using namespace wkbsq;

namespace {

Truncation std_tr(double cutoff = 4.0, int order = 6, int mindeg = -8) {
    return Truncation(ConicRegion::half_plane_re_ge0(), cutoff, order, mindeg);
}

TransseriesC rand_ts(std::mt19937_64& rng, const Truncation& tr) {
    std::uniform_int_distribution<int> nterms(0, 3);
    std::uniform_int_distribution<int> numer(-5, 5);
    std::uniform_int_distribution<int> denom(1, 3);
    std::uniform_int_distribution<int> expn(0, 6);
    std::uniform_int_distribution<int> deg(0, tr.hbar_order - 1);
    TransseriesC a(tr);
    int n = nterms(rng);
    for (int i = 0; i < n; ++i)
        a.add_term_raw(Scalar(Rational(expn(rng)) / denom(rng)), deg(rng),
                       Scalar(Rational(numer(rng)) / denom(rng)));
    a.normalize();
    return a;
}

} // namespace

TEST_CASE("multiplication and addition at truncation") {
    Truncation tr = std_tr();
    auto e = [&](Rational c, int d) {
        return TransseriesC::monomial(tr, Scalar(c), d, Scalar(1));
    };
    // (e^{-a/h} h) * (e^{-b/h}) = e^{-(a+b)/h} h
    CHECK(ts_mul(e(1, 1), e(2, 0)) == e(3, 1));

    // (1 + h)(1 - h) = 1 at hbar_order 2
    Truncation tr2 = Truncation(ConicRegion::half_plane_re_ge0(), 4.0, 2, 0);
    TransseriesC one = TransseriesC::one(tr2);
    TransseriesC ph = ts_add(one, TransseriesC::monomial(tr2, Scalar(0), 1, Scalar(1)));
    TransseriesC mh = ts_sub(one, TransseriesC::monomial(tr2, Scalar(0), 1, Scalar(1)));
    CHECK(ts_mul(ph, mh) == one);

    // rational-function coefficients: (x e^{-1/h}) * x = x^2 e^{-1/h}
    TransseriesR xe = TransseriesR::monomial(tr, Scalar(1), 0, RatFunc::x());
    TransseriesR x = TransseriesR::constant(tr, RatFunc::x());
    TransseriesR prod = ts_mul(xe, x);
    CHECK(prod == TransseriesR::monomial(tr, Scalar(1), 0, RatFunc::x() * RatFunc::x()));
}

TEST_CASE("grade projection is a ring quotient") {
    Truncation tr = std_tr();
    auto e = [&](double c) { return TransseriesC::monomial(tr, Scalar::exactify(c), 0, Scalar(1)); };
    TransseriesC one = TransseriesC::one(tr);

    CHECK(grade_project(ts_add(one, e(1.0)), GradeWindow(0.5)) == one);
    CHECK(grade_project(ts_add(e(0.3), e(0.7)), GradeWindow(0.5)) == e(0.3));

    std::mt19937_64 rng(23);
    GradeWindow w(2.0);
    for (int i = 0; i < 100; ++i) {
        TransseriesC a = rand_ts(rng, tr), b = rand_ts(rng, tr);
        TransseriesC lhs = grade_project(ts_mul(a, b), w);
        TransseriesC rhs =
            grade_project(ts_mul(grade_project(a, w), grade_project(b, w)), w);
        CHECK(lhs == rhs);
        CHECK(grade_project(ts_add(a, b), w) ==
              ts_add(grade_project(a, w), grade_project(b, w)));
    }
}

TEST_CASE("exponential against the Taylor oracle") {
    // exp(0) = 1
    Truncation tr = std_tr(3.5, 4, -8);
    CHECK(ts_exp(TransseriesC::zero(tr)) == TransseriesC::one(tr));

    // exp(e^{-1/h}) at cutoff 3.5: sum of e^{-n/h}/n! for n = 0..3, frozen
    // from the factorial oracle
    TransseriesC a = TransseriesC::monomial(tr, Scalar(1), 0, Scalar(1));
    TransseriesC ex = ts_exp(a);
    TransseriesC expect = TransseriesC::one(tr);
    Rational f(1);
    for (int n = 1; n <= 3; ++n) {
        f *= n;
        expect = ts_add(expect, TransseriesC::monomial(tr, Scalar(n), 0,
                                                       Scalar(Rational(1) / f)));
    }
    CHECK(ex == expect);

    // exp(h) at hbar_order 3 = 1 + h + h^2/2
    Truncation tr3 = Truncation(ConicRegion::half_plane_re_ge0(), 3.5, 3, 0);
    TransseriesC h = TransseriesC::monomial(tr3, Scalar(0), 1, Scalar(1));
    TransseriesC eh = ts_exp(h);
    TransseriesC expect3 = TransseriesC::one(tr3);
    expect3 = ts_add(expect3, h);
    expect3 = ts_add(expect3, TransseriesC::monomial(tr3, Scalar(0), 2,
                                                     Scalar(Rational(1, 2))));
    CHECK(eh == expect3);

    // exp(a)exp(-a) = 1 and exp(a+b) = exp(a)exp(b) at truncation
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        TransseriesC u = rand_ts(rng, tr);
        // strip to exponentiable shape: drop degree-0 exponent-0 classical part
        TransseriesC v(tr);
        for (const auto& t : u.terms())
            for (const auto& [d, r] : t.poly)
                if (!(t.exponent.is_zero() && d == 0) &&
                    !(t.exponent.is_zero() == false && u.dirval(t.exponent).re_double() <= 0))
                    v.add_term_raw(t.exponent, d, r);
        v.normalize();
        CHECK(ts_mul(ts_exp(v), ts_exp(ts_neg(v))) == TransseriesC::one(tr));
        TransseriesC w = rand_ts(rng, tr);
        TransseriesC w2(tr);
        for (const auto& t : w.terms())
            for (const auto& [d, r] : t.poly)
                if (!(t.exponent.is_zero() && d == 0)) w2.add_term_raw(t.exponent, d, r);
        w2.normalize();
        CHECK(ts_exp(ts_add(v, w2)) == ts_mul(ts_exp(v), ts_exp(w2)));
    }

    CHECK_THROWS_AS(ts_exp(TransseriesC::monomial(tr, Scalar(0), -1, Scalar(1))),
                    NotExponentiable);
}

TEST_CASE("subexponential classification follows the model convention") {
    Truncation tr = std_tr();
    // 1 + h x with rational-function coefficients: polynomial in h -> ce
    TransseriesR a = ts_add(TransseriesR::one(tr),
                            TransseriesR::monomial(tr, Scalar(0), 1, RatFunc::x()));
    CHECK(se_classify(a) == SeClass::ce);

    // h^{-1} e^{-1/h} -> se
    TransseriesC b = TransseriesC::monomial(tr, Scalar(1), -1, Scalar(1));
    CHECK(se_classify(b) == SeClass::se);

    // h^{-1} alone is already subexponential
    CHECK(se_classify(TransseriesC::monomial(tr, Scalar(0), -1, Scalar(1))) ==
          SeClass::se);

    // e^{+1/h}: exponent -1 outside the dual cone -> exponential growth
    CHECK(se_classify(TransseriesC::monomial(tr, Scalar(-1), 0, Scalar(1))) ==
          SeClass::exp_growth);

    // purely exponentially small terms are asymptotically expandable (to 0)
    CHECK(se_classify(TransseriesC::monomial(tr, Scalar(1), 2, Scalar(1))) ==
          SeClass::ae);

    CHECK(se_classify(TransseriesC::zero(tr)) == SeClass::very_rapid_decay_zero);

    // multiplying by e^{-c/h} never moves the class toward growth
    auto rank = [](SeClass c) {
        switch (c) {
            case SeClass::very_rapid_decay_zero: return 0;
            case SeClass::ae: return 1;
            case SeClass::ce: return 2;
            case SeClass::se: return 3;
            case SeClass::exp_growth: return 4;
        }
        return 5;
    };
    std::mt19937_64 rng(31);
    for (int i = 0; i < 60; ++i) {
        TransseriesC u = rand_ts(rng, tr);
        TransseriesC shifted = ts_shift_exponent(u, Scalar(Rational(1, 2)));
        CHECK(rank(se_classify(shifted)) <= rank(se_classify(u)));
    }
}

TEST_CASE("subexponential support") {
    Truncation tr = std_tr();
    CHECK(se_support(TransseriesC::monomial(tr, Scalar(1), 0, Scalar(1))) ==
          doctest::Approx(1.0));
    CHECK(se_support(TransseriesC::one(tr)) == doctest::Approx(0.0));
    TransseriesC m = ts_add(TransseriesC::monomial(tr, Scalar::exactify(0.3), 0, Scalar(1)),
                            TransseriesC::monomial(tr, Scalar::exactify(0.9), 0, Scalar(1)));
    CHECK(se_support(m) == doctest::Approx(0.3));
    CHECK_THROWS_AS(se_support(TransseriesC::zero(tr)), ZeroElement);

    // shift-and-classify cross-check: e^{s/h} m stays out of growth for
    // s < 0.3 and degrades at s > 0.3
    CHECK(se_classify(ts_shift_exponent(m, Scalar::exactify(-0.29))) != SeClass::exp_growth);
    CHECK(se_classify(ts_shift_exponent(m, Scalar::exactify(-0.31))) == SeClass::exp_growth);

    // support superadditivity under products
    std::mt19937_64 rng(41);
    for (int i = 0; i < 60; ++i) {
        TransseriesC x = rand_ts(rng, tr), y = rand_ts(rng, tr);
        if (x.is_zero() || y.is_zero()) continue;
        TransseriesC xy = ts_mul(x, y);
        if (xy.is_zero()) continue;
        CHECK(se_support(xy) >= se_support(x) + se_support(y) - 1e-12);
    }
}

TEST_CASE("ring laws for both coefficient rings") {
    Truncation tr = std_tr(3.0, 4, -4);
    std::mt19937_64 rng(53);
    for (int i = 0; i < 60; ++i) {
        TransseriesC a = rand_ts(rng, tr), b = rand_ts(rng, tr), c = rand_ts(rng, tr);
        CHECK(ts_mul(a, b) == ts_mul(b, a));
        CHECK(ts_mul(ts_mul(a, b), c) == ts_mul(a, ts_mul(b, c)));
        CHECK(ts_mul(a, ts_add(b, c)) == ts_add(ts_mul(a, b), ts_mul(a, c)));
    }
    // spot-check the rational-function instantiation
    TransseriesR x = TransseriesR::constant(tr, RatFunc::x());
    TransseriesR e1 = TransseriesR::monomial(tr, Scalar(1), 1, RatFunc(1));
    TransseriesR s = ts_add(x, e1);
    CHECK(ts_mul(s, s) == ts_add(ts_mul(x, x),
                                 ts_add(ts_mul(ts_mul(x, e1), TransseriesR::constant(tr, RatFunc(2))),
                                        ts_mul(e1, e1))));
}

TEST_CASE("transseries inverse") {
    Truncation tr = std_tr(3.0, 4, -4);
    TransseriesC a = ts_add(TransseriesC::one(tr),
                            TransseriesC::monomial(tr, Scalar(1), -1, Scalar(1)));
    TransseriesC inv = ts_invert(a);
    CHECK(ts_mul(a, inv) == TransseriesC::one(tr));
    CHECK_THROWS_AS(ts_invert(TransseriesC::monomial(tr, Scalar(1), 0, Scalar(1))),
                    NotAUnit);
}
