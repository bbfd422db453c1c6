#ifndef WKBSQ_SQ_HPP
#define WKBSQ_SQ_HPP

#include <map>

#include "wkbsq/stokes.hpp"

namespace wkbsq {

using NvMat = Mat<NovikovElement>;

NvMat nv_mat_identity(int n, const ConicRegion& cone, double cutoff);
NvMat nv_mat_mul(const NvMat& a, const NvMat& b);
bool nv_mat_is_identity(const NvMat& a);
/// Inverse in the truncated ring (diagonal entries must be units).
NvMat nv_mat_inverse(const NvMat& a);
/// Valuation of a - 1 (+inf when a is the identity at cutoff).
double nv_mat_residual_valuation(const NvMat& a);

/// Free rank-(num sheets) module attached to one Stokes region: the sheet
/// labels with the primitive values at the region base point.
struct SQRegionModule {
    int region_id = 0;
    std::complex<double> base_point;
    std::vector<std::complex<double>> alphas;
    std::vector<int> multiplicities;
};

/// Oriented gluing across one curve: basis change from the a-frame to the
/// b-frame, an invertible Novikov matrix together with a sheet permutation
/// for branch bookkeeping.
struct SQEdge {
    int id = -1;
    int region_a = 0, region_b = 0;
    int curve_id = -1;
    NvMat matrix;
    std::vector<int> permutation;
};

struct GluingRules {
    /// Voros factor for entries produced at simple turning points.
    Scalar default_factor = Scalar(Rational(0), Rational(1)); // i
    std::map<int, Scalar> per_curve;                          // by curve id

    Scalar factor_for(int curve_id) const {
        auto it = per_curve.find(curve_id);
        return it == per_curve.end() ? default_factor : it->second;
    }
};

/// Combinatorial sheaf quantization: descent datum of free Novikov modules
/// over the Stokes regions with Voros-type gluings.
struct SheafQuantizationData {
    ConicRegion cone;
    double cutoff = 4.0;
    double theta = 0;
    int num_sheets = 1;
    std::vector<SQRegionModule> regions;
    std::vector<SQEdge> edges;
    std::vector<ArrangementVertex> vertices;
    size_t graph_fingerprint = 0;

    const SQEdge* edge_between(int ra, int rb) const;
};

/// Assembles the SQ from a generically traced graph with detected regions:
/// primitives per region base point, unipotent gluing a T^{w} across each
/// curve (w the crossing weight, a from the rules), identity permutations.
SheafQuantizationData build_sq(const StokesGraph& g, const SpectralData& sd,
                               const GluingRules& rules, const ConicRegion& cone,
                               double cutoff);

struct CocycleReport {
    struct Entry {
        int vertex = 0;
        double residual_valuation = 0; // +inf means exact identity
        bool at_turning_point = false;
        bool pass = false;
    };
    std::vector<Entry> entries;
    bool pass = true; // over the vertices away from turning-point fill-ins
};

/// Ordered product of the edge matrices around every interior vertex; the
/// residual valuation of (product - 1) is reported per vertex. Turning-point
/// vertices are logged, not asserted.
CocycleReport check_cocycle(const SheafQuantizationData& sq);

/// Ordered product of gluings along a closed region walk.
NvMat monodromy(const SheafQuantizationData& sq, const std::vector<int>& loop);

/// Basis of intertwiners E -> F over the truncated Novikov ring: per region
/// a matrix M_R with G^F_e M_{Ra} = M_{Rb} G^E_e for every edge, entries
/// supported on the exponent lattice below the cutoff with the directional
/// valuation floor from the primitive differences.
struct HomGenerator {
    std::vector<NvMat> per_region;
};
std::vector<HomGenerator> hom_module(const SheafQuantizationData& E,
                                     const SheafQuantizationData& F);

/// Duality: negates the primitives, replaces each gluing by its
/// inverse-transpose; an involution at the combinatorial level.
SheafQuantizationData dualize(const SheafQuantizationData& sq);

} // namespace wkbsq

#endif
