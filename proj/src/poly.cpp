#include "wkbsq/poly.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "wkbsq/linalg.hpp"

namespace wkbsq {

Poly poly_gcd(Poly a, Poly b) {
    while (!b.is_zero()) {
        auto [q, r] = Poly::divmod(a, b);
        a = b;
        b = r;
    }
    if (a.is_zero()) return a;
    // monic normalization
    Scalar inv = Scalar(1) / a.lc();
    return a * inv;
}

std::vector<std::complex<double>> poly_roots(const Poly& p) {
    std::vector<std::complex<double>> c;
    for (const Scalar& s : p.coeffs()) c.push_back(s.to_complex());
    return complex_poly_roots(std::move(c));
}

std::vector<std::complex<double>> complex_poly_roots(std::vector<std::complex<double>> c) {
    // drop numerically negligible leading coefficients
    double maxc = 0;
    for (auto z : c) maxc = std::max(maxc, std::abs(z));
    if (maxc == 0) return {};
    while (c.size() > 1 && std::abs(c.back()) < 1e-13 * maxc) c.pop_back();
    int n = static_cast<int>(c.size()) - 1;
    if (n <= 0) return {};
    if (n == 1) return {-c[0] / c[1]};

    Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[i] / c[n];
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
    std::vector<std::complex<double>> roots;
    roots.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::complex<double> r = es.eigenvalues()(i);
        // a couple of Newton steps to sharpen
        for (int it = 0; it < 3; ++it) {
            std::complex<double> f = 0, df = 0;
            for (int k = n; k >= 0; --k) {
                df = df * r + f;
                f = f * r + c[k];
            }
            if (std::abs(df) < 1e-300) break;
            std::complex<double> step = f / df;
            r -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(r))) break;
        }
        roots.push_back(r);
    }
    return roots;
}

RatFunc::RatFunc(Poly num, Poly den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw Error("DivisionByZero", "zero denominator");
    normalize();
}

namespace {

bool poly_exact(const Poly& p) {
    for (const Scalar& s : p.coeffs())
        if (!s.exact()) return false;
    return true;
}

} // namespace

void RatFunc::normalize() {
    if (num_.is_zero()) {
        den_ = Poly::one();
        return;
    }
    if (poly_exact(num_) && poly_exact(den_)) {
        Poly g = poly_gcd(num_, den_);
        if (g.degree() > 0) {
            num_ = Poly::divmod(num_, g).first;
            den_ = Poly::divmod(den_, g).first;
        }
    }
    Scalar inv = Scalar(1) / den_.lc();
    num_ = num_ * inv;
    den_ = den_ * inv;
}

std::string RatFunc::str() const {
    auto poly_str = [](const Poly& p) {
        if (p.is_zero()) return std::string("0");
        std::string s;
        for (int k = p.degree(); k >= 0; --k) {
            Scalar c = p.coeff(k);
            if (c.is_zero()) continue;
            if (!s.empty()) s += " + ";
            s += "(" + c.str() + ")";
            if (k == 1) s += "*x";
            if (k > 1) s += "*x^" + std::to_string(k);
        }
        return s;
    };
    if (den_.degree() == 0 && den_.coeff(0) == Scalar(1)) return poly_str(num_);
    return "(" + poly_str(num_) + ")/(" + poly_str(den_) + ")";
}

namespace {

Poly exactify_poly(const Poly& p) {
    std::vector<Scalar> c;
    for (const Scalar& s : p.coeffs()) {
        if (s.exact())
            c.push_back(s);
        else
            c.push_back(Scalar::exactify(s.re_double(), s.im_double()));
    }
    return Poly(std::move(c));
}

Poly floatify_poly(const Poly& p) {
    std::vector<Scalar> c;
    for (const Scalar& s : p.coeffs()) c.push_back(s.to_float());
    return Poly(std::move(c));
}

} // namespace

RatFunc rf_antiderivative(const RatFunc& f) {
    bool was_float = !(poly_exact(f.num()) && poly_exact(f.den()));
    // exactify so the Ostrogradsky system can be solved without pivoting noise
    Poly num = exactify_poly(f.num());
    Poly den = exactify_poly(f.den());
    RatFunc g(num, den);
    num = g.num();
    den = g.den();

    auto [quot, rem] = Poly::divmod(num, den);
    Poly head = quot.antiderivative();
    if (rem.is_zero()) {
        RatFunc r(head);
        return was_float ? RatFunc(floatify_poly(r.num()), floatify_poly(r.den())) : r;
    }

    // Ostrogradsky: rem/den = d/dx(B/D2) + C/D1 with D2 = gcd(den, den'),
    // D1 = den/D2; a rational antiderivative exists iff C = 0.
    Poly d2 = poly_gcd(den, den.derivative());
    Poly d1 = Poly::divmod(den, d2).first;
    int nb = std::max(d2.degree(), 0);  // deg B < deg D2
    int nc = std::max(d1.degree(), 0);  // deg C < deg D1
    // rem = D1*(B'*D2 - B*D2') / D2 + C*D2   (after clearing denominators)
    // Work with the cleared identity: rem * D2 = D1*(B'*D2 - B*D2') + C*D2^2.
    Poly lhs = rem * d2;
    int rows = std::max({lhs.degree(), d1.degree() + nb - 1 + d2.degree(),
                         2 * d2.degree() + nc - 1}) +
               1;
    rows = std::max(rows, 1);
    Mat<Scalar> A(rows, std::vector<Scalar>(nb + nc, Scalar(0)));
    std::vector<Scalar> rhs(rows, Scalar(0));
    for (int i = 0; i <= lhs.degree(); ++i) rhs[i] = lhs.coeff(i);
    for (int j = 0; j < nb; ++j) {
        // B = x^j contribution: D1*( (x^j)' * D2 - x^j * D2' )
        Poly bj = Poly::monomial(j, Scalar(1));
        Poly contrib = d1 * (bj.derivative() * d2 - bj * d2.derivative());
        for (int i = 0; i <= contrib.degree(); ++i) A[i][j] = contrib.coeff(i);
    }
    Poly d2sq = d2 * d2;
    for (int j = 0; j < nc; ++j) {
        Poly contrib = Poly::monomial(j, Scalar(1)) * d2sq;
        for (int i = 0; i <= contrib.degree(); ++i) A[i][nb + j] = contrib.coeff(i);
    }
    auto sol = solve_field(A, rhs);
    if (!sol) throw NotIntegrable("Ostrogradsky system inconsistent");
    std::vector<Scalar> bc(sol->begin(), sol->begin() + nb);
    for (int j = 0; j < nc; ++j)
        if (!(*sol)[nb + j].is_zero())
            throw NotIntegrable("antiderivative has a logarithmic part");
    Poly B(std::move(bc));
    RatFunc r = RatFunc(head) + RatFunc(B, d2);
    return was_float ? RatFunc(floatify_poly(r.num()), floatify_poly(r.den())) : r;
}

std::vector<std::complex<double>> rf_poles(const RatFunc& f) { return poly_roots(f.den()); }

namespace {

// square root of a nonnegative rational if it is a perfect square
std::optional<Rational> rational_sqrt(const Rational& q) {
    if (q < 0) return std::nullopt;
    if (q == 0) return Rational(0);
    using boost::multiprecision::cpp_int;
    cpp_int n = boost::multiprecision::numerator(q);
    cpp_int d = boost::multiprecision::denominator(q);
    cpp_int sn = boost::multiprecision::sqrt(n);
    cpp_int sd = boost::multiprecision::sqrt(d);
    if (sn * sn != n || sd * sd != d) return std::nullopt;
    return Rational(sn) / Rational(sd);
}

std::optional<Scalar> scalar_sqrt(const Scalar& s) {
    if (s.exact()) {
        if (s.im_exact() != 0) return std::nullopt; // stay in real rationals
        auto r = rational_sqrt(s.re_exact());
        if (!r) return std::nullopt;
        return Scalar(*r);
    }
    return Scalar(std::sqrt(s.to_complex()));
}

} // namespace

std::optional<Poly> poly_sqrt(const Poly& p) {
    if (p.is_zero()) return Poly();
    int d = p.degree();
    if (d % 2 != 0) return std::nullopt;
    int h = d / 2;
    auto lead = scalar_sqrt(p.lc());
    if (!lead || lead->is_zero()) return std::nullopt;
    std::vector<Scalar> s(h + 1, Scalar(0));
    s[h] = *lead;
    for (int j = h - 1; j >= 0; --j) {
        // coefficient of x^{j+h} in s^2 is 2 s_j s_h plus pairs of already
        // known coefficients
        Scalar conv(0);
        for (int a = j + 1; a <= h - 1; ++a) {
            int b = j + h - a;
            if (b < 0 || b > h) continue;
            conv += s[a] * s[b];
        }
        s[j] = (p.coeff(j + h) - conv) / (Scalar(2) * s[h]);
    }
    Poly cand(std::move(s));
    Poly diff = cand * cand - p;
    if (diff.is_zero()) return cand;
    bool exact_mode = true;
    for (const Scalar& c : p.coeffs())
        if (!c.exact()) exact_mode = false;
    if (exact_mode) return std::nullopt;
    double scale = 0;
    for (const Scalar& c : p.coeffs()) scale = std::max(scale, c.abs());
    for (const Scalar& c : diff.coeffs())
        if (c.abs() > 1e-9 * (1 + scale)) return std::nullopt;
    return cand;
}

std::optional<RatFunc> rf_sqrt(const RatFunc& f) {
    auto n = poly_sqrt(f.num());
    if (!n) return std::nullopt;
    auto d = poly_sqrt(f.den());
    if (!d) return std::nullopt;
    return RatFunc(*n, *d);
}

} // namespace wkbsq
