#ifndef WKBSQ_CONE_HPP
#define WKBSQ_CONE_HPP

#include <optional>
#include <vector>

#include "wkbsq/angle.hpp"
#include "wkbsq/scalar.hpp"

namespace wkbsq {

/// Open sector on the real blow-up of the hbar plane: angular window
/// (theta1, theta2) together with a radius. The radius is carried only here;
/// forming the cone forgets it.
struct Sector {
    Angle theta1;
    Angle theta2;
    double epsilon = 1.0;

    Sector(Angle t1, Angle t2, double eps = 1.0);
};

/// Angular arc with lo normalized into [0, 2*pi) and hi = lo + aperture,
/// aperture in [0, 2*pi]. lo == hi encodes a single ray.
struct Arc {
    Angle lo;
    Angle hi;

    Angle aperture() const { return hi - lo; }
    Angle midpoint() const { return (lo + hi) * Rational(1, 2); }
};

/// Cone in the hbar plane given by a finite union of angular arcs, in unique
/// normal form (arcs disjoint, sorted, merged). Doubles as the exponent cone
/// of a Novikov ring; canonical_direction is the reference hbar direction
/// used for directional real parts.
class ConicRegion {
public:
    ConicRegion() = default;

    /// Normalizes and merges the given arcs. closed=true marks regions whose
    /// arcs include their endpoints (hulls, duals); cone_of produces
    /// half-open arcs.
    ConicRegion(std::vector<Arc> arcs, bool closed, bool includes_origin);

    static ConicRegion zero_cone() { return ConicRegion({}, true, true); }
    static ConicRegion empty() { return ConicRegion({}, false, false); }
    static ConicRegion full_plane();
    /// Closed right half-plane {Re >= 0}; the exponent cone of the
    /// complexified Novikov ring.
    static ConicRegion half_plane_re_ge0();
    /// The ray of nonnegative reals; the exponent cone of the classical
    /// Novikov ring.
    static ConicRegion ray_re_ge0();
    static ConicRegion arc(Angle lo, Angle hi, bool closed = true);

    const std::vector<Arc>& arcs() const { return arcs_; }
    bool closed_arcs() const { return closed_; }
    bool includes_origin() const { return includes_origin_; }
    bool is_zero_cone() const { return arcs_.empty() && includes_origin_; }
    bool is_empty() const { return arcs_.empty() && !includes_origin_; }
    bool is_full_plane() const;

    /// Sum of arc apertures, in radians.
    double total_aperture() const;

    /// Smallest arc containing every stored arc, for nonempty regions.
    std::optional<Arc> covering_arc() const;

    bool contains_direction(const Angle& theta, double tol = kAngularTol) const;
    bool contains_point(const Scalar& z, double tol = kAngularTol) const;
    /// Containment of another region, decided arc-by-arc with tolerance.
    bool contains(const ConicRegion& other, double tol = kAngularTol) const;

    const Scalar& canonical_direction() const { return direction_; }
    void set_canonical_direction(const Scalar& d) { direction_ = d; }

    /// Structural equality of normal forms (exact on exact angles,
    /// tolerance 1e-12 otherwise).
    friend bool operator==(const ConicRegion& a, const ConicRegion& b);

private:
    std::vector<Arc> arcs_;
    bool closed_ = true;
    bool includes_origin_ = true;
    Scalar direction_ = Scalar(1);
};

/// Union of the angular arcs of the sectors, radii discarded.
ConicRegion cone_of(const std::vector<Sector>& sectoroid);

/// Smallest addition-closed cone containing the input: the covering arc when
/// its aperture is at most pi, the full plane otherwise.
ConicRegion hull(const ConicRegion& cone);

/// Polar dual {a : Re(a conj(b)) >= 0 for all b in the cone}. A hull arc
/// [t1, t2] of aperture <= pi dualizes to the closed arc
/// [t2 - pi/2, t1 + pi/2]; wider cones dualize to the zero cone.
ConicRegion polar_dual(const ConicRegion& cone);

/// Strict acuteness: hull aperture < pi. Aperture exactly pi counts as
/// non-acute although its dual is still a genuine ray.
bool is_acute(const ConicRegion& cone);

/// Whether some translate c + gamma contains all exponents. For finite sets
/// this fails only when gamma is degenerate (a ray or the zero cone).
bool is_gamma_finite(const std::vector<Scalar>& exponents, const ConicRegion& gamma);

/// Directional real part Re(c * conj(direction)) of an exponent with respect
/// to the cone's canonical direction.
inline Scalar directional_value(const Scalar& c, const ConicRegion& cone) {
    return dot_re(c, cone.canonical_direction());
}

} // namespace wkbsq

#endif
