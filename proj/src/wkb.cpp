#include "wkbsq/stokes.hpp"

namespace wkbsq {

namespace {

// arithmetic in Q(x)[sqrt(Q)] / (sqrt(Q)^2 - Q)
SqrtExt ext_add(const SqrtExt& u, const SqrtExt& v) { return {u.a + v.a, u.b + v.b}; }
SqrtExt ext_neg(const SqrtExt& u) { return {-u.a, -u.b}; }
SqrtExt ext_mul(const SqrtExt& u, const SqrtExt& v, const RatFunc& Q) {
    return {u.a * v.a + u.b * v.b * Q, u.a * v.b + u.b * v.a};
}
// (a + b sqrt(Q))' = a' + (b' + b Q'/(2Q)) sqrt(Q)
SqrtExt ext_deriv(const SqrtExt& u, const RatFunc& Q) {
    return {u.a.derivative(),
            u.b.derivative() + u.b * Q.derivative() / (RatFunc(2) * Q)};
}
// (a + b sqrt(Q)) / (2 sqrt(Q)) = b/2 + (a / (2Q)) sqrt(Q)
SqrtExt ext_div_2s0(const SqrtExt& u, const RatFunc& Q) {
    return {u.b / RatFunc(2), u.a / (RatFunc(2) * Q)};
}

} // namespace

Potential Potential::schrodinger(RatFunc Q) {
    if (Q.is_zero()) throw Error("InvalidPotential", "Q vanishes identically");
    Potential p;
    p.order = 2;
    p.q = std::move(Q);
    return p;
}

Potential Potential::higher(std::vector<RatFunc> a) {
    Potential p;
    p.order = static_cast<int>(a.size());
    if (p.order < 2) throw Error("InvalidPotential", "order must be at least 2");
    p.coeffs = std::move(a);
    return p;
}

Polynomial<RatFunc> Potential::char_poly() const {
    if (order == 2 && coeffs.empty()) {
        std::vector<RatFunc> c = {-q, RatFunc(0), RatFunc(1)};
        return Polynomial<RatFunc>(std::move(c));
    }
    std::vector<RatFunc> c = coeffs;
    c.push_back(RatFunc(1));
    return Polynomial<RatFunc>(std::move(c));
}

WkbSeries wkb_recursion(const RatFunc& Q, int N) {
    if (Q.is_zero()) throw Error("InvalidPotential", "Q vanishes identically");
    WkbSeries s;
    s.Q = Q;
    s.terms.reserve(N + 1);
    s.terms.push_back({RatFunc(0), RatFunc(1)}); // S_0 = sqrt(Q)
    for (int n = 1; n <= N; ++n) {
        // 2 S_0 S_n = -(S_{n-1}' + sum_{i+j=n, 0<i,j<n} S_i S_j)
        SqrtExt rhs = ext_neg(ext_deriv(s.terms[n - 1], Q));
        for (int i = 1; i <= n - 1; ++i)
            rhs = ext_add(rhs, ext_neg(ext_mul(s.terms[i], s.terms[n - i], Q)));
        s.terms.push_back(ext_div_2s0(rhs, Q));
    }
    return s;
}

std::complex<double> wkb_term_eval(const WkbSeries& s, int n, std::complex<double> x,
                                   int branch) {
    std::complex<double> qv = s.Q.eval(x);
    if (std::abs(qv) < 1e-12)
        throw TurningPointEvaluation("WKB series evaluated at a turning point");
    std::complex<double> sq = std::sqrt(qv) * static_cast<double>(branch >= 0 ? 1 : -1);
    const SqrtExt& t = s.terms.at(n);
    return t.a.eval(x) + t.b.eval(x) * sq;
}

std::complex<double> wkb_term_deriv_eval(const WkbSeries& s, int n,
                                         std::complex<double> x, int branch) {
    std::complex<double> qv = s.Q.eval(x);
    if (std::abs(qv) < 1e-12)
        throw TurningPointEvaluation("WKB series evaluated at a turning point");
    std::complex<double> sq = std::sqrt(qv) * static_cast<double>(branch >= 0 ? 1 : -1);
    SqrtExt d = ext_deriv(s.terms.at(n), s.Q);
    return d.a.eval(x) + d.b.eval(x) * sq;
}

std::complex<double> wkb_series_eval(const WkbSeries& s, std::complex<double> x,
                                     std::complex<double> hbar, int branch) {
    std::complex<double> acc = 0, hp = 1;
    for (size_t n = 0; n < s.terms.size(); ++n) {
        acc += wkb_term_eval(s, static_cast<int>(n), x, branch) * hp;
        hp *= hbar;
    }
    return acc;
}

std::vector<std::complex<double>> turning_points(const Potential& p) {
    if (p.order == 2 && p.coeffs.empty()) {
        auto zs = poly_roots(p.q.num());
        std::vector<std::complex<double>> out;
        for (auto z : zs) {
            if (std::abs(p.q.den().eval_c(z)) < 1e-10) continue;
            bool seen = false;
            for (auto w : out)
                if (std::abs(w - z) < 1e-8) seen = true;
            if (!seen) out.push_back(z);
        }
        std::sort(out.begin(), out.end(), [](auto a, auto b) {
            if (a.real() != b.real()) return a.real() < b.real();
            return a.imag() < b.imag();
        });
        return out;
    }
    SpectralData sd = spectral_from_char_poly(p.char_poly(), 0.0);
    return sd.turning_points();
}

} // namespace wkbsq
