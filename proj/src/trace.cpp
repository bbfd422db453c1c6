#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "wkbsq/stokes.hpp"

namespace wkbsq {

namespace {

using C = std::complex<double>;
using XiPoly = Polynomial<RatFunc>;

std::vector<C> roots_at(const XiPoly& p, C x) {
    std::vector<C> c;
    for (const RatFunc& r : p.coeffs()) c.push_back(r.eval(x));
    return complex_poly_roots(std::move(c));
}

std::vector<C> match_to(const std::vector<C>& prev, std::vector<C> fresh) {
    std::vector<C> out(prev.size());
    std::vector<bool> used(fresh.size(), false);
    for (size_t i = 0; i < prev.size(); ++i) {
        double best = 1e300;
        size_t bi = 0;
        for (size_t j = 0; j < fresh.size(); ++j) {
            if (used[j]) continue;
            double d = std::abs(fresh[j] - prev[i]);
            if (d < best) {
                best = d;
                bi = j;
            }
        }
        used[bi] = true;
        out[i] = fresh[bi];
    }
    return out;
}

struct RkResult {
    C x_new;
    double err;
};

// Cash-Karp embedded Runge-Kutta step on dx/ds = f(x)
template <class F>
RkResult rk45_step(const F& f, C x, double h) {
    static const double b21 = 1.0 / 5;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                        b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594,
                        c6 = 512.0 / 1771;
    static const double d1 = 2825.0 / 27648, d3 = 18575.0 / 48384, d4 = 13525.0 / 55296,
                        d5 = 277.0 / 14336, d6 = 1.0 / 4;
    C k1 = f(x);
    C k2 = f(x + h * b21 * k1);
    C k3 = f(x + h * (b31 * k1 + b32 * k2));
    C k4 = f(x + h * (b41 * k1 + b42 * k2 + b43 * k3));
    C k5 = f(x + h * (b51 * k1 + b52 * k2 + b53 * k3 + b54 * k4));
    C k6 = f(x + h * (b61 * k1 + b62 * k2 + b63 * k3 + b64 * k4 + b65 * k5));
    C x5 = x + h * (c1 * k1 + c3 * k3 + c4 * k4 + c6 * k6);
    C x4 = x + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
    return {x5, std::abs(x5 - x4)};
}

void trace_curve(StokesCurve& cv, const XiPoly& cp, const StokesGraph& g,
                 const TracerOptions& opt, double c_max, std::vector<C> roots, int i,
                 int j) {
    C phase = std::polar(1.0, g.theta);
    C conj_phase = std::polar(1.0, -g.theta);
    double R = opt.disk_radius;
    double hmax = R / 100.0;
    double h = std::min(hmax, std::max(1e-6 * R, opt.launch_radius));
    C x = cv.points.back();
    double w = cv.weight.back();
    double im_drift = 0;

    int steps = 0;
    bool left_source = cv.source_tp < 0;
    while (true) {
        if (++steps > opt.max_steps) {
            cv.end = StokesCurve::End::max_steps;
            return;
        }
        auto f = [&](C z) {
            std::vector<C> rts = match_to(roots, roots_at(cp, z));
            C d = rts[i] - rts[j];
            if (std::abs(d) < 1e-14)
                throw TracerStalled("sheet pair collapsed while tracing");
            return phase / d;
        };
        RkResult rk{};
        bool ok = false;
        for (int tries = 0; tries < 60; ++tries) {
            rk = rk45_step(f, x, h);
            double tol = opt.step_tol * (1.0 + std::abs(x));
            if (rk.err <= tol) {
                ok = true;
                break;
            }
            h *= std::max(0.2, 0.9 * std::pow(tol / std::max(rk.err, 1e-300), 0.25));
            if (h < 1e-14 * (1.0 + std::abs(x)))
                throw TracerStalled("step size underflow");
        }
        if (!ok) throw TracerStalled("step control failed to converge");

        C x_new = rk.x_new;
        std::vector<C> roots_mid = match_to(roots, roots_at(cp, 0.5 * (x + x_new)));
        std::vector<C> roots_new = match_to(roots_mid, roots_at(cp, x_new));
        // Simpson increment of the phase functional along the chord
        C d0 = roots[i] - roots[j];
        C dm = roots_mid[i] - roots_mid[j];
        C d1 = roots_new[i] - roots_new[j];
        C phi_inc = conj_phase * (x_new - x) * (d0 + 4.0 * dm + d1) / 6.0;
        double w_new = w + phi_inc.real();
        im_drift += phi_inc.imag();

        // project back onto the level set
        C corr = C(0, -im_drift) * phase / d1;
        x_new += corr;
        im_drift += (conj_phase * d1 * corr).imag();
        roots_new = match_to(roots_new, roots_at(cp, x_new));

        x = x_new;
        roots = roots_new;
        w = w_new;
        cv.points.push_back(x);
        cv.weight.push_back(w);
        cv.lam_i.push_back(roots[i]);
        cv.lam_j.push_back(roots[j]);

        h = std::min(hmax, h * 1.5);

        int tp_hit = -1, pole_hit = -1;
        for (size_t t = 0; t < g.turning_points.size() && tp_hit < 0; ++t)
            if (std::abs(x - g.turning_points[t]) < opt.capture_radius)
                tp_hit = static_cast<int>(t);
        for (size_t t = 0; t < g.poles.size() && pole_hit < 0; ++t)
            if (std::abs(x - g.poles[t]) < opt.capture_radius)
                pole_hit = static_cast<int>(t);

        if (!left_source) {
            if (tp_hit != cv.source_tp) left_source = true;
            else if (std::abs(x - g.turning_points[cv.source_tp]) > 3 * opt.capture_radius)
                left_source = true;
        }
        if (tp_hit >= 0 && (left_source || tp_hit != cv.source_tp)) {
            cv.end = StokesCurve::End::turning_point;
            cv.end_tp = tp_hit;
            cv.points.push_back(g.turning_points[tp_hit]);
            cv.weight.push_back(w);
            cv.lam_i.push_back(roots[i]);
            cv.lam_j.push_back(roots[j]);
            return;
        }
        if (pole_hit >= 0) {
            cv.end = StokesCurve::End::pole;
            return;
        }
        if (std::abs(x) >= R) {
            C prev = cv.points[cv.points.size() - 2];
            double a = std::abs(prev), b = std::abs(x);
            double t = (R - a) / std::max(1e-300, b - a);
            t = std::clamp(t, 0.0, 1.0);
            cv.points.back() = prev + t * (x - prev);
            cv.end = StokesCurve::End::boundary;
            return;
        }
        if (w >= c_max) {
            cv.end = StokesCurve::End::weight_cutoff;
            return;
        }
    }
}

} // namespace

double StokesGraph::disk_radius() const { return options.disk_radius; }

StokesGraph trace_stokes_curves(const Potential& p, double theta, double c_max,
                                TracerOptions opts) {
    StokesGraph g;
    g.potential = p;
    g.theta = theta;
    g.c_max = c_max;
    g.turning_points = turning_points(p);

    XiPoly cp = p.char_poly();
    for (const RatFunc& r : cp.coeffs())
        for (auto z : rf_poles(r)) {
            bool seen = false;
            for (auto w : g.poles)
                if (std::abs(w - z) < 1e-9) seen = true;
            if (!seen) g.poles.push_back(z);
        }

    double scale = 1.0;
    for (auto t : g.turning_points) scale = std::max(scale, std::abs(t));
    if (opts.disk_radius <= 0) opts.disk_radius = 10.0 * scale;
    if (opts.capture_radius <= 0) opts.capture_radius = opts.disk_radius * 1e-3;
    if (opts.launch_radius <= 0) opts.launch_radius = opts.disk_radius * 1e-4;
    g.options = opts;

    C phase = std::polar(1.0, theta);
    C conj_phase = std::polar(1.0, -theta);

    for (size_t t = 0; t < g.turning_points.size(); ++t) {
        C x0 = g.turning_points[t];
        std::vector<C> r0 = roots_at(cp, x0);
        double coll_tol = 1e-5 * (1.0 + scale);
        std::vector<std::pair<size_t, size_t>> pairs;
        for (size_t a = 0; a < r0.size(); ++a)
            for (size_t b = a + 1; b < r0.size(); ++b)
                if (std::abs(r0[a] - r0[b]) < coll_tol) pairs.emplace_back(a, b);
        if (pairs.empty()) continue;
        if (pairs.size() > 1)
            throw NonSimpleTurningPoint("more than two sheets collide at " +
                                        format_double(x0.real()) + "+" +
                                        format_double(x0.imag()) + "i");

        // local model (lambda_a - lambda_b)^2 ~ c (x - x0); estimate c from
        // two probe radii and require stability
        double d1 = opts.launch_radius, d2 = opts.launch_radius / 2;
        auto pair_diff = [&](double dd) {
            std::vector<C> rr = match_to(r0, roots_at(cp, x0 + dd));
            return rr[pairs[0].first] - rr[pairs[0].second];
        };
        C q1 = pair_diff(d1), q2 = pair_diff(d2);
        C c_est = q1 * q1 / d1;
        C c_est2 = q2 * q2 / d2;
        if (std::abs(c_est) < 1e-10 || std::abs(c_est - c_est2) > 0.5 * std::abs(c_est))
            throw NonSimpleTurningPoint("pair collision is not of square-root type");

        double arg_c = std::arg(c_est) / 2.0;
        for (int k = 0; k < 3; ++k) {
            double dir = 2.0 / 3.0 * (theta - arg_c) + k * (4.0 * kPi / 3.0);
            StokesCurve cv;
            cv.id = static_cast<int>(g.curves.size());
            cv.generation = 0;
            cv.source_tp = static_cast<int>(t);
            C start = x0 + std::polar(opts.launch_radius, dir);
            std::vector<C> roots = match_to(r0, roots_at(cp, start));
            int i = static_cast<int>(pairs[0].first);
            int j = static_cast<int>(pairs[0].second);
            C v = phase / (roots[i] - roots[j]);
            if ((v * std::conj(start - x0)).real() < 0) std::swap(i, j);
            C diff = roots[i] - roots[j];
            double w0 = (conj_phase * (2.0 / 3.0) * diff * (start - x0)).real();
            cv.initial_weight = std::max(0.0, w0);
            // the polyline starts at the turning point itself (weight 0)
            cv.points = {x0, start};
            cv.weight = {0.0, cv.initial_weight};
            cv.lam_i = {r0[pairs[0].first], roots[i]};
            cv.lam_j = {r0[pairs[0].second], roots[j]};
            trace_curve(cv, cp, g, opts, c_max, roots, i, j);
            g.curves.push_back(std::move(cv));
        }
    }
    return g;
}

namespace {

bool seg_intersect(C a0, C a1, C b0, C b1, C* out, double* sin_angle) {
    C da = a1 - a0, db = b1 - b0;
    double den = da.real() * db.imag() - da.imag() * db.real();
    double la = std::abs(da), lb = std::abs(db);
    if (la < 1e-300 || lb < 1e-300) return false;
    *sin_angle = std::abs(den) / (la * lb);
    if (std::abs(den) < 1e-300) return false;
    C d0 = b0 - a0;
    double s = (d0.real() * db.imag() - d0.imag() * db.real()) / den;
    double u = (d0.real() * da.imag() - d0.imag() * da.real()) / den;
    if (s < -1e-12 || s > 1 + 1e-12 || u < -1e-12 || u > 1 + 1e-12) return false;
    *out = a0 + s * da;
    return true;
}

double interp_weight(const StokesCurve& cv, size_t seg, C p) {
    C a = cv.points[seg], b = cv.points[seg + 1];
    double t = std::abs(b - a) < 1e-300 ? 0.0 : std::abs(p - a) / std::abs(b - a);
    return cv.weight[seg] + t * (cv.weight[seg + 1] - cv.weight[seg]);
}

C interp_lam(const std::vector<C>& lam, size_t seg, const StokesCurve& cv, C p) {
    C a = cv.points[seg], b = cv.points[seg + 1];
    double t = std::abs(b - a) < 1e-300 ? 0.0 : std::abs(p - a) / std::abs(b - a);
    return lam[seg] + t * (lam[seg + 1] - lam[seg]);
}

} // namespace

void higher_order_scattering(StokesGraph& g, int max_depth) {
    XiPoly cp = g.potential.char_poly();
    double R = g.options.disk_radius;
    double lam_tol = 1e-4;
    std::set<std::tuple<long long, long long, long long, long long>> seen;
    auto key_of = [&](C p, C li, C lj) {
        auto q = [&](double v) {
            return static_cast<long long>(std::llround(v / (1e-6 * R)));
        };
        return std::make_tuple(q(p.real()), q(p.imag()),
                               q(li.real()) + q(li.imag()) * 1315423911LL,
                               q(lj.real()) + q(lj.imag()) * 1315423911LL);
    };

    size_t frontier = 0;
    for (int depth = 1; depth <= max_depth; ++depth) {
        size_t ncur = g.curves.size();
        std::vector<StokesCurve> born;
        for (size_t ca = 0; ca < ncur; ++ca)
            for (size_t cb = std::max(ca + 1, frontier); cb < ncur; ++cb) {
                const StokesCurve& A = g.curves[ca];
                const StokesCurve& B = g.curves[cb];
                for (size_t sa = 0; sa + 1 < A.points.size(); ++sa)
                    for (size_t sb = 0; sb + 1 < B.points.size(); ++sb) {
                        C p;
                        double sin_angle;
                        if (!seg_intersect(A.points[sa], A.points[sa + 1], B.points[sb],
                                           B.points[sb + 1], &p, &sin_angle))
                            continue;
                        if (A.source_tp >= 0 && B.source_tp >= 0 &&
                            A.source_tp == B.source_tp &&
                            std::abs(p - g.turning_points[A.source_tp]) <
                                3 * g.options.capture_radius)
                            continue;
                        if (sin_angle < std::sin(g.options.tangent_tol)) {
                            std::ostringstream os;
                            os << "tangential intersection of curves " << A.id << " and "
                               << B.id << " near (" << p.real() << ", " << p.imag()
                               << ")";
                            g.degeneracy_log.push_back(os.str());
                            continue;
                        }
                        // (a,b) x (c,d) composes to (a,d) when lambda_b matches
                        // lambda_c at the crossing
                        C l1i = interp_lam(A.lam_i, sa, A, p);
                        C l1j = interp_lam(A.lam_j, sa, A, p);
                        C l2i = interp_lam(B.lam_i, sb, B, p);
                        C l2j = interp_lam(B.lam_j, sb, B, p);
                        double w1 = interp_weight(A, sa, p);
                        double w2 = interp_weight(B, sb, p);
                        double scale = 1.0 + std::abs(l1i) + std::abs(l1j);
                        for (int f1 = 0; f1 < 2; ++f1)
                            for (int f2 = 0; f2 < 2; ++f2) {
                                C a = f1 ? l1j : l1i;
                                C b = f1 ? l1i : l1j;
                                C c = f2 ? l2j : l2i;
                                C d = f2 ? l2i : l2j;
                                if (std::abs(b - c) > lam_tol * scale) continue;
                                if (std::abs(a - d) < lam_tol * scale) continue;
                                double w0 = w1 + w2;
                                if (w0 >= g.c_max) continue;
                                auto key = key_of(p, a, d);
                                if (seen.count(key)) continue;
                                seen.insert(key);

                                std::vector<C> rts = roots_at(cp, p);
                                int bi = -1, bj = -1;
                                double e1 = 1e300, e2 = 1e300;
                                for (size_t r = 0; r < rts.size(); ++r)
                                    if (std::abs(rts[r] - a) < e1) {
                                        e1 = std::abs(rts[r] - a);
                                        bi = static_cast<int>(r);
                                    }
                                for (size_t r = 0; r < rts.size(); ++r) {
                                    if (static_cast<int>(r) == bi) continue;
                                    if (std::abs(rts[r] - d) < e2) {
                                        e2 = std::abs(rts[r] - d);
                                        bj = static_cast<int>(r);
                                    }
                                }
                                if (bi < 0 || bj < 0) continue;

                                StokesCurve cv;
                                cv.id = static_cast<int>(g.curves.size() + born.size());
                                cv.generation = std::max(A.generation, B.generation) + 1;
                                cv.parents = {A.id, B.id};
                                cv.initial_weight = w0;
                                cv.points = {p};
                                cv.weight = {w0};
                                cv.lam_i = {rts[bi]};
                                cv.lam_j = {rts[bj]};
                                trace_curve(cv, cp, g, g.options, g.c_max, rts, bi, bj);
                                born.push_back(std::move(cv));
                            }
                    }
            }
        frontier = ncur;
        if (born.empty()) break;
        for (auto& cv : born) g.curves.push_back(std::move(cv));
    }
}

GmnReport is_gmn_generic(const StokesGraph& g) {
    for (const StokesCurve& cv : g.curves) {
        if (cv.end == StokesCurve::End::turning_point && cv.end_tp != cv.source_tp) {
            GmnReport r;
            r.generic = false;
            std::ostringstream os;
            os << "curve " << cv.id << " from turning point " << cv.source_tp
               << " terminates at turning point " << cv.end_tp;
            r.witness = os.str();
            return r;
        }
    }
    return {};
}

} // namespace wkbsq
