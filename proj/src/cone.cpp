#include "wkbsq/cone.hpp"

#include <algorithm>

#include "wkbsq/errors.hpp"

namespace wkbsq {

namespace {

// Tolerance-aware comparison; exact when both angles are exact.
int cmp_tol(const Angle& a, const Angle& b, double tol) {
    if (a.exact() && b.exact()) {
        const Rational &x = a.pi_multiple(), &y = b.pi_multiple();
        if (x < y) return -1;
        if (y < x) return 1;
        return 0;
    }
    double x = a.rad(), y = b.rad();
    if (x < y - tol) return -1;
    if (y < x - tol) return 1;
    return 0;
}

Angle angle_max(const Angle& a, const Angle& b) { return cmp(a, b) >= 0 ? a : b; }

} // namespace

Sector::Sector(Angle t1, Angle t2, double eps) : theta1(t1), theta2(t2), epsilon(eps) {
    if (!(cmp(theta1, theta2) < 0))
        throw Error("InvalidSector", "theta1 must be strictly below theta2");
    if (cmp(theta2 - theta1, angle_two_pi()) > 0)
        throw Error("InvalidSector", "sector aperture exceeds 2*pi");
    if (!(eps > 0)) throw Error("InvalidSector", "epsilon must be positive");
}

ConicRegion::ConicRegion(std::vector<Arc> arcs, bool closed, bool includes_origin)
    : closed_(closed), includes_origin_(includes_origin) {
    std::vector<Arc> in;
    bool full = false;
    for (const Arc& a : arcs) {
        Angle ap = a.hi - a.lo;
        if (cmp(ap, Angle::pi_mult(0)) < 0)
            throw Error("InvalidArc", "arc with negative aperture");
        if (cmp(ap, angle_two_pi()) >= 0) {
            full = true;
            break;
        }
        if (!closed_ && cmp(ap, Angle::pi_mult(0)) == 0) continue; // empty half-open arc
        Angle lo = a.lo.normalized();
        in.push_back({lo, lo + ap});
    }
    if (full) {
        arcs_ = {Arc{Angle::pi_mult(0), angle_two_pi()}};
        includes_origin_ = true;
        direction_ = Scalar(1);
        return;
    }
    std::sort(in.begin(), in.end(),
              [](const Arc& x, const Arc& y) { return cmp(x.lo, y.lo) < 0; });
    // sweep merge; half-open and closed arcs both merge at touching endpoints
    for (const Arc& a : in) {
        if (!arcs_.empty() && cmp(a.lo, arcs_.back().hi) <= 0)
            arcs_.back().hi = angle_max(arcs_.back().hi, a.hi);
        else
            arcs_.push_back(a);
    }
    // wrap-around: last arc may reach past 2*pi into the first ones
    while (arcs_.size() > 1) {
        Angle overhang = arcs_.back().hi - angle_two_pi();
        if (cmp(overhang, arcs_.front().lo) < 0) break;
        arcs_.back().hi =
            angle_max(arcs_.back().hi, arcs_.front().hi + angle_two_pi());
        arcs_.erase(arcs_.begin());
    }
    if (arcs_.size() == 1 &&
        cmp(arcs_[0].hi - arcs_[0].lo, angle_two_pi()) >= 0) {
        arcs_ = {Arc{Angle::pi_mult(0), angle_two_pi()}};
        includes_origin_ = true;
    }
    if (auto cov = covering_arc())
        direction_ = cov->midpoint().unit();
    else
        direction_ = Scalar(1);
}

ConicRegion ConicRegion::full_plane() {
    return ConicRegion({Arc{Angle::pi_mult(0), angle_two_pi()}}, true, true);
}

ConicRegion ConicRegion::half_plane_re_ge0() {
    return arc(Angle::pi_frac(-1, 2), Angle::pi_frac(1, 2), true);
}

ConicRegion ConicRegion::ray_re_ge0() {
    return arc(Angle::pi_mult(0), Angle::pi_mult(0), true);
}

ConicRegion ConicRegion::arc(Angle lo, Angle hi, bool closed) {
    return ConicRegion({Arc{lo, hi}}, closed, true);
}

bool ConicRegion::is_full_plane() const {
    return arcs_.size() == 1 &&
           cmp(arcs_[0].hi - arcs_[0].lo, angle_two_pi()) >= 0;
}

double ConicRegion::total_aperture() const {
    double s = 0;
    for (const Arc& a : arcs_) s += (a.hi - a.lo).rad();
    return s;
}

std::optional<Arc> ConicRegion::covering_arc() const {
    if (arcs_.empty()) return std::nullopt;
    if (is_full_plane()) return arcs_[0];
    if (arcs_.size() == 1) return arcs_[0];
    // the covering arc is the complement of the largest cyclic gap
    size_t n = arcs_.size();
    size_t best = 0;
    Angle best_gap = Angle::pi_mult(-1);
    for (size_t i = 0; i < n; ++i) {
        Angle next_lo =
            (i + 1 < n) ? arcs_[i + 1].lo : arcs_[0].lo + angle_two_pi();
        Angle gap = next_lo - arcs_[i].hi;
        if (cmp(gap, best_gap) > 0) {
            best_gap = gap;
            best = i;
        }
    }
    Angle lo = (best + 1 < n) ? arcs_[best + 1].lo : arcs_[0].lo;
    Angle hi = arcs_[best].hi;
    while (cmp(hi, lo) < 0) hi = hi + angle_two_pi();
    return Arc{lo, hi};
}

bool ConicRegion::contains_direction(const Angle& theta, double tol) const {
    if (is_full_plane()) return true;
    Angle t = theta.normalized();
    for (const Arc& a : arcs_) {
        for (int wrap = 0; wrap < 2; ++wrap) {
            Angle tt = wrap ? t + angle_two_pi() : t;
            int d1 = cmp_tol(tt, a.lo, tol);
            int d2 = cmp_tol(tt, a.hi, tol);
            if (d1 >= 0 && (closed_ ? d2 <= 0 : d2 < 0)) return true;
        }
    }
    return false;
}

bool ConicRegion::contains_point(const Scalar& z, double tol) const {
    if (z.is_zero()) return includes_origin_;
    std::complex<double> w = z.to_complex();
    if (std::abs(w) == 0.0) return includes_origin_;
    return contains_direction(Angle::radians(std::arg(w)), tol);
}

bool ConicRegion::contains(const ConicRegion& other, double tol) const {
    if (other.is_empty()) return true;
    if (other.is_zero_cone()) return includes_origin_ || !other.includes_origin();
    if (is_full_plane()) return true;
    if (other.is_full_plane()) return false;
    for (const Arc& b : other.arcs_) {
        bool ok = false;
        for (const Arc& a : arcs_) {
            for (int wrap = -1; wrap <= 1 && !ok; ++wrap) {
                Angle lo = b.lo + Angle::pi_mult(2 * wrap);
                Angle hi = b.hi + Angle::pi_mult(2 * wrap);
                if (cmp_tol(lo, a.lo, tol) >= 0 && cmp_tol(hi, a.hi, tol) <= 0) ok = true;
            }
        }
        if (!ok) return false;
    }
    return true;
}

bool operator==(const ConicRegion& a, const ConicRegion& b) {
    if (a.arcs_.size() != b.arcs_.size()) return false;
    if (a.includes_origin_ != b.includes_origin_) return false;
    for (size_t i = 0; i < a.arcs_.size(); ++i) {
        if (!angle_eq(a.arcs_[i].lo, b.arcs_[i].lo)) return false;
        if (!angle_eq(a.arcs_[i].hi, b.arcs_[i].hi)) return false;
    }
    return true;
}

ConicRegion cone_of(const std::vector<Sector>& sectoroid) {
    if (sectoroid.empty())
        throw EmptySectoroid("cone_of requires at least one sector");
    std::vector<Arc> arcs;
    arcs.reserve(sectoroid.size());
    for (const Sector& s : sectoroid) arcs.push_back({s.theta1, s.theta2});
    return ConicRegion(std::move(arcs), /*closed=*/false, /*includes_origin=*/false);
}

ConicRegion hull(const ConicRegion& cone) {
    if (cone.arcs().empty() || cone.is_full_plane()) return cone;
    Arc cov = *cone.covering_arc();
    if (cmp(cov.hi - cov.lo, angle_pi()) > 0) return ConicRegion::full_plane();
    ConicRegion h({cov}, cone.closed_arcs(), cone.includes_origin());
    return h;
}

ConicRegion polar_dual(const ConicRegion& cone) {
    ConicRegion h = hull(cone);
    if (h.arcs().empty()) return ConicRegion::full_plane();
    if (h.is_full_plane()) return ConicRegion::zero_cone();
    Arc a = h.arcs()[0];
    Angle ap = a.hi - a.lo;
    if (cmp(ap, angle_pi()) > 0) return ConicRegion::zero_cone();
    ConicRegion dual =
        ConicRegion::arc(a.hi - angle_half_pi(), a.lo + angle_half_pi(), true);
    dual.set_canonical_direction(a.midpoint().unit());
    return dual;
}

bool is_acute(const ConicRegion& cone) {
    ConicRegion h = hull(cone);
    if (h.arcs().empty()) return true;
    if (h.is_full_plane()) return false;
    Arc a = h.arcs()[0];
    return cmp(a.hi - a.lo, angle_pi()) < 0;
}

bool is_gamma_finite(const std::vector<Scalar>& exponents, const ConicRegion& gamma) {
    if (exponents.size() <= 1) return true;
    if (gamma.is_empty()) return false;
    if (gamma.is_zero_cone()) {
        for (size_t i = 1; i < exponents.size(); ++i)
            if (!close(exponents[i], exponents[0], kAngularTol)) return false;
        return true;
    }
    ConicRegion h = hull(gamma);
    if (h.is_full_plane()) return true;
    Arc a = h.arcs()[0];
    if (cmp(a.hi - a.lo, Angle::pi_mult(0)) > 0) return true; // 2d cone: translate always exists
    // ray: all pairwise differences must be nonnegative multiples of the
    // ray direction
    Scalar u = a.lo.unit();
    size_t i0 = 0;
    for (size_t i = 1; i < exponents.size(); ++i)
        if (less_real(dot_re(exponents[i], u), dot_re(exponents[i0], u))) i0 = i;
    for (size_t i = 0; i < exponents.size(); ++i) {
        Scalar d = exponents[i] - exponents[i0];
        if (d.is_zero()) continue;
        std::complex<double> w = d.to_complex() * std::conj(u.to_complex());
        double scale = 1.0 + std::abs(w);
        if (std::abs(w.imag()) > kAngularTol * scale) return false;
        if (w.real() < -kAngularTol * scale) return false;
    }
    return true;
}

} // namespace wkbsq
