#ifndef WKBSQ_STOKES_HPP
#define WKBSQ_STOKES_HPP

#include <string>

#include "wkbsq/connection.hpp"

namespace wkbsq {

/// Potential data: order 2 carries a Schrodinger Q(x); higher orders carry
/// the characteristic polynomial xi^m + a_{m-1} xi^{m-1} + ... + a_0 through
/// its coefficient list.
struct Potential {
    int order = 2;
    RatFunc q;                    // order 2 only
    std::vector<RatFunc> coeffs;  // a_0 .. a_{m-1} for higher order

    static Potential schrodinger(RatFunc Q);
    /// coeffs[k] multiplies xi^k; the leading coefficient is 1.
    static Potential higher(std::vector<RatFunc> a);

    Polynomial<RatFunc> char_poly() const;
};

/// Element of the quadratic extension Q(x)[sqrt(Q)]: a + b sqrt(Q).
struct SqrtExt {
    RatFunc a, b;
};

/// WKB series for hbar^2 psi'' = Q psi with S = hbar psi'/psi: the recursion
/// S^2 + hbar S' = Q solved order by order on the + sheet; terms[n] is S_n.
struct WkbSeries {
    RatFunc Q;
    std::vector<SqrtExt> terms;
};

WkbSeries wkb_recursion(const RatFunc& Q, int N);

/// Numeric value of S_n at x on the chosen branch (+1 or -1 of sqrt(Q)).
/// Throws TurningPointEvaluation at zeros of Q.
std::complex<double> wkb_term_eval(const WkbSeries& s, int n, std::complex<double> x,
                                   int branch);

/// Numeric value of dS_n/dx at x, from the symbolic derivative in the
/// quadratic extension.
std::complex<double> wkb_term_deriv_eval(const WkbSeries& s, int n,
                                         std::complex<double> x, int branch);

/// Partial sum sum_{n<=N} S_n hbar^n at (x, hbar).
std::complex<double> wkb_series_eval(const WkbSeries& s, std::complex<double> x,
                                     std::complex<double> hbar, int branch);

/// Roots of the discriminant of the characteristic polynomial (zeros of Q
/// for order 2), deduplicated.
std::vector<std::complex<double>> turning_points(const Potential& p);

struct TracerOptions {
    double step_tol = 1e-10;
    double disk_radius = 0;      // 0: 10x the largest turning point modulus
    double capture_radius = 0;   // 0: disk_radius * 1e-3
    double launch_radius = 0;    // 0: disk_radius * 1e-4
    double tangent_tol = 0.03;   // radians, for intersection transversality
    int max_steps = 20000;
    int max_depth = 6;
};

struct StokesCurve {
    int id = -1;
    int generation = 0;
    std::vector<int> parents;    // curve ids (empty for generation 0)
    int source_tp = -1;          // generation 0: the emitting turning point
    double initial_weight = 0;
    std::vector<std::complex<double>> points;
    std::vector<double> weight;                  // per sample
    std::vector<std::complex<double>> lam_i, lam_j; // sheet values per sample

    enum class End { boundary, pole, turning_point, weight_cutoff, max_steps };
    End end = End::boundary;
    int end_tp = -1;

    double weight_at(size_t k) const { return weight[k]; }
};

struct StokesRegion {
    int id = -1;
    std::vector<std::complex<double>> boundary; // closed polygon (CCW)
    std::complex<double> base_point;
};

/// Oriented adjacency of two regions across one curve.
struct RegionEdge {
    int id = -1;
    int region_a = -1, region_b = -1;
    int curve_id = -1;
    std::complex<double> crossing;
    double weight_at_crossing = 0;
};

/// Interior vertex of the arrangement with its cyclic environment, used for
/// cocycle checks. Rays are sorted counterclockwise; faces[k] is the region
/// in the wedge between edges[k] and edges[k+1], so crossing edges[k+1]
/// leads from faces[k] to faces[k+1] (indices cyclic).
struct ArrangementVertex {
    std::complex<double> pos;
    std::vector<int> edges;
    std::vector<int> faces;
    std::vector<double> edge_weights; // curve weight where the ray meets this vertex
    bool at_turning_point = false;
};

struct StokesGraph {
    Potential potential;
    double theta = 0;
    double c_max = 1e9;
    TracerOptions options;
    std::vector<std::complex<double>> turning_points;
    std::vector<std::complex<double>> poles;
    std::vector<StokesCurve> curves;

    // filled by detect_regions
    std::vector<StokesRegion> regions;
    std::vector<RegionEdge> edges;
    std::vector<ArrangementVertex> vertices;
    std::vector<std::string> degeneracy_log; // tangential or multiple intersections
    // raw arrangement counts (V, E, and F including the outer face)
    size_t arr_vertices = 0, arr_edges = 0, arr_faces = 0;

    double disk_radius() const;
};

/// Generation-0 geometry: three curves per simple turning point, traced on
/// the level set Im e^{-i theta} int (lambda_i - lambda_j) = 0 with weight
/// Re e^{-i theta} int (lambda_i - lambda_j).
StokesGraph trace_stokes_curves(const Potential& p, double theta, double c_max,
                                TracerOptions opts = {});

/// Iterated spectral scattering: new (i,k) curves from transversal
/// intersections of (i,j) and (j,k) curves, seeded with the parents' summed
/// weight, until the cutoff or depth bound.
void higher_order_scattering(StokesGraph& g, int max_depth);

/// Planar faces of the curve arrangement clipped to the bounding disk;
/// fills regions, edges and vertices.
void detect_regions(StokesGraph& g);

struct GmnReport {
    bool generic = true;
    std::string witness;
};

/// Fails exactly when some curve terminates at a turning point other than
/// its source (a saddle trajectory at this phase).
GmnReport is_gmn_generic(const StokesGraph& g);

} // namespace wkbsq

#endif
