#include "doctest.h"

#include "wkbsq/linalg.hpp"
#include "wkbsq/poly.hpp"

using namespace wkbsq;

namespace {
Poly from_ints(std::initializer_list<int> cs) {
    std::vector<Scalar> v;
    for (int c : cs) v.push_back(Scalar(c));
    return Poly(std::move(v));
}
} // namespace

TEST_CASE("polynomial arithmetic and division") {
    Poly x = Poly::x();
    Poly p = x * x - from_ints({1}); // x^2 - 1
    auto [q, r] = Poly::divmod(p, x - from_ints({1}));
    CHECK(q == x + from_ints({1}));
    CHECK(r.is_zero());

    CHECK(p.derivative() == from_ints({0, 2}));
    CHECK(from_ints({0, 2}).antiderivative() == from_ints({0, 0, 1}));
    CHECK(p.eval(Scalar(3)) == Scalar(8));
}

TEST_CASE("gcd and rational function normalization") {
    Poly x = Poly::x();
    Poly a = (x - from_ints({1})) * (x + from_ints({2}));
    Poly b = (x - from_ints({1})) * (x - from_ints({3}));
    Poly g = poly_gcd(a, b);
    CHECK(g == x - from_ints({1}));

    RatFunc f(a, b); // reduces the common factor
    CHECK(f.num() == x + from_ints({2}));
    CHECK(f.den() == x - from_ints({3}));

    RatFunc d = RatFunc(Poly::one(), x).derivative(); // -1/x^2
    CHECK(d == RatFunc(-Poly::one(), x * x));
}

TEST_CASE("numeric roots") {
    Poly x = Poly::x();
    Poly p = x * x - from_ints({2}); // roots +-sqrt(2)
    auto rs = poly_roots(p);
    REQUIRE(rs.size() == 2);
    std::sort(rs.begin(), rs.end(),
              [](auto a, auto b) { return a.real() < b.real(); });
    CHECK(std::abs(rs[0] + std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(rs[1] - std::sqrt(2.0)) < 1e-12);

    // cubic with known integer roots
    Poly c = (x - from_ints({1})) * (x - from_ints({2})) * (x + from_ints({4}));
    auto cr = poly_roots(c);
    REQUIRE(cr.size() == 3);
    double prod = 1;
    for (auto z : cr) prod *= std::abs(z);
    CHECK(prod == doctest::Approx(8.0).epsilon(1e-10));
}

TEST_CASE("rational antiderivatives via the Ostrogradsky split") {
    Poly x = Poly::x();
    // d/dx (x^3/3) = x^2
    RatFunc f(x * x);
    RatFunc F = rf_antiderivative(f);
    CHECK(F.derivative() == f);

    // d/dx (1/x) = -1/x^2
    RatFunc g(-Poly::one(), x * x);
    RatFunc G = rf_antiderivative(g);
    CHECK(G.derivative() == g);
    CHECK(G == RatFunc(Poly::one(), x));

    // 1/(x^2 - 1) integrates to logs only
    CHECK_THROWS_AS(rf_antiderivative(RatFunc(Poly::one(), x * x - Poly::one())),
                    NotIntegrable);
    // 1/x as well
    CHECK_THROWS_AS(rf_antiderivative(RatFunc(Poly::one(), x)), NotIntegrable);

    // mixed: (x^4 + 1)/x^2 = x^2 + x^{-2}
    RatFunc h(x * x * x * x + Poly::one(), x * x);
    RatFunc H = rf_antiderivative(h);
    CHECK(H.derivative() == h);
}

TEST_CASE("field linear algebra over rational functions") {
    RatFunc x = RatFunc::x();
    Mat<RatFunc> m = {{x, RatFunc(1)}, {RatFunc(1), x}};
    RatFunc d = det_field(m);
    CHECK(d == x * x - RatFunc(1));

    Mat<RatFunc> inv = inverse_field(m);
    Mat<RatFunc> prod = mat_mul(m, inv);
    CHECK(prod[0][0] == RatFunc(1));
    CHECK(prod[0][1] == RatFunc(0));
    CHECK(prod[1][0] == RatFunc(0));
    CHECK(prod[1][1] == RatFunc(1));

    auto sol = solve_field(m, {RatFunc(1), RatFunc(0)});
    REQUIRE(sol.has_value());
    CHECK((*sol)[0] == x / (x * x - RatFunc(1)));
}
