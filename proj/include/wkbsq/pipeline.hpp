#ifndef WKBSQ_PIPELINE_HPP
#define WKBSQ_PIPELINE_HPP

#include <json.hpp>

#include <set>
#include <string>

#include "wkbsq/sq.hpp"

namespace wkbsq {

using Json = nlohmann::ordered_json;

/// Parses a rational-function expression in x: numbers (integer, decimal or
/// p/q), + - * / ^ and parentheses. exact=true builds rational coefficients,
/// otherwise doubles.
RatFunc parse_ratfunc(const std::string& text, bool exact);

/// Problem document: everything a run needs, so artifacts are
/// self-describing.
struct ProblemSpec {
    int order = 2;
    std::string q_text = "x";              // order 2
    std::vector<std::string> coeff_texts;  // higher order, a_0 .. a_{m-1}
    double theta = 0;
    double cutoff = 4.0;
    int hbar_order = 8;
    int min_degree = -8;
    std::string cone_kind = "half_plane"; // "half_plane" | "ray" | "arc"
    double cone_lo = 0, cone_hi = 0;      // radians, for "arc"
    bool exact = true;
    TracerOptions tracer;
    double c_max = 20.0;
    int max_depth = 6;
    Scalar base_point = Scalar(2);
    Scalar voros_factor = Scalar(Rational(0), Rational(1));
    std::string out_dir = ".";
    std::string format = "both"; // json | svg | both
    uint64_t seed = 0;
    // optional connection section: matrix of entries, each either a
    // rational-function string (classical part) or a list of tagged terms
    // {"coeff": "...", "hbar_degree": k, "exponent": [re, im]}
    Json connection;

    Potential potential() const;
    ConicRegion cone() const;
    Truncation truncation() const;
    bool has_connection() const { return connection.is_array(); }
    HbarConnection build_connection() const;

    static ProblemSpec from_json(const Json& j);
    Json to_json() const;
};

// serialization helpers (schema_version carried at document level)
Json scalar_to_json(const Scalar& s);
Json cone_to_json(const ConicRegion& c);
Json novikov_to_json(const NovikovElement& a);
Json transseries_to_json(const TransseriesR& a);
Json graph_to_json(const StokesGraph& g);
Json sq_to_json(const SheafQuantizationData& sq);
Json cocycle_to_json(const CocycleReport& rep);

/// SVG rendering of the graph: one path per curve, one marker per turning
/// point, regions shaded.
std::string graph_to_svg(const StokesGraph& g);

/// Runs the requested stages in pipeline order (dependencies are executed
/// implicitly), writing one JSON artifact per stage into spec.out_dir.
/// Returns 0 on success.
int run_pipeline(const ProblemSpec& spec, const std::set<std::string>& stages);

} // namespace wkbsq

#endif
