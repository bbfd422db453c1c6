#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "wkbsq/pipeline.hpp"

using namespace wkbsq;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("rational function parsing") {
    Poly x = Poly::x();
    CHECK(parse_ratfunc("x^2 - 1", true) == RatFunc(x * x - Poly::one()));
    CHECK(parse_ratfunc("(x^2-1)/(x+2)", true) ==
          RatFunc(x * x - Poly::one(), x + Poly(Scalar(2))));
    CHECK(parse_ratfunc("3/2", true) == RatFunc(Scalar(Rational(3, 2))));
    CHECK(parse_ratfunc("2x", true) == RatFunc(x * Poly(Scalar(2))));
    CHECK(parse_ratfunc("0.5 x^2", true) ==
          RatFunc(x * x * Poly(Scalar(Rational(1, 2)))));
    CHECK(parse_ratfunc("-x", true) == RatFunc(-x));
    CHECK(parse_ratfunc("i x", true) ==
          RatFunc(x * Poly(Scalar(Rational(0), Rational(1)))));
    // decimals stay exact in exact mode
    RatFunc d = parse_ratfunc("0.1", true);
    CHECK(d == RatFunc(Scalar(Rational(1, 10))));

    CHECK_THROWS_AS(parse_ratfunc("x +* 2", true), ParseError);
    CHECK_THROWS_AS(parse_ratfunc("(x", true), ParseError);
    CHECK_THROWS_AS(parse_ratfunc("x^", true), ParseError);
}

TEST_CASE("problem spec round trip") {
    Json j = Json::parse(R"({
        "schema_version": 1,
        "potential": {"order": 2, "q": "x^2 - 1"},
        "theta": 0.25,
        "cutoff": 6.0,
        "hbar_order": 7,
        "mode": "float",
        "c_max": 11.0,
        "base_point": [2.0, 0.5],
        "seed": 42
    })");
    ProblemSpec s = ProblemSpec::from_json(j);
    CHECK(s.theta == 0.25);
    CHECK(s.cutoff == 6.0);
    CHECK(s.hbar_order == 7);
    CHECK_FALSE(s.exact);
    CHECK(s.c_max == 11.0);
    CHECK(s.seed == 42);

    // stable round trip
    ProblemSpec s2 = ProblemSpec::from_json(s.to_json());
    CHECK(s.to_json().dump() == s2.to_json().dump());

    CHECK_THROWS_AS(
        ProblemSpec::from_json(Json::parse(R"({"potential":{"q":"x"},"cutoff":-1})")),
        ParseError);
}

TEST_CASE("pipeline artifacts for the Airy problem") {
    ProblemSpec spec;
    spec.order = 2;
    spec.q_text = "x";
    spec.theta = 0.0;
    spec.cutoff = 40.0;
    spec.hbar_order = 5;
    spec.c_max = 1e6;
    spec.base_point = Scalar(2);
    spec.out_dir = (std::filesystem::temp_directory_path() / "wkbsq_test_airy").string();
    std::filesystem::remove_all(spec.out_dir);

    REQUIRE(run_pipeline(spec, {"trace", "regions", "sq", "verify"}) == 0);

    Json g = Json::parse(slurp(spec.out_dir + "/regions.json"));
    CHECK(g.at("curves").size() == 3);
    CHECK(g.at("regions").size() == 3);
    CHECK(g.at("schema_version") == 1);

    Json sq = Json::parse(slurp(spec.out_dir + "/sq.json"));
    CHECK(sq.at("regions").size() == 3);
    CHECK(sq.at("edges").size() == 3);

    Json verify = Json::parse(slurp(spec.out_dir + "/verify.json"));
    CHECK(verify.contains("pass"));
    CHECK(verify.at("vertices").size() == 1);

    // svg: one path per curve, one marker per turning point
    std::string svg = slurp(spec.out_dir + "/graph.svg");
    size_t paths = 0, markers = 0, pos = 0;
    while ((pos = svg.find("<path class=\"curve\"", pos)) != std::string::npos) {
        ++paths;
        ++pos;
    }
    pos = 0;
    while ((pos = svg.find("class=\"turning-point\"", pos)) != std::string::npos) {
        ++markers;
        ++pos;
    }
    CHECK(paths == 3);
    CHECK(markers == 1);

    // byte-identical rerun
    std::string before = slurp(spec.out_dir + "/trace.json");
    std::filesystem::remove_all(spec.out_dir);
    REQUIRE(run_pipeline(spec, {"trace", "regions", "sq", "verify"}) == 0);
    CHECK(slurp(spec.out_dir + "/trace.json") == before);
}

TEST_CASE("pipeline trivial and error cases") {
    ProblemSpec spec;
    spec.order = 2;
    spec.q_text = "1";
    spec.c_max = 10.0;
    spec.out_dir = (std::filesystem::temp_directory_path() / "wkbsq_test_flat").string();
    std::filesystem::remove_all(spec.out_dir);
    REQUIRE(run_pipeline(spec, {"trace"}) == 0);
    Json g = Json::parse(slurp(spec.out_dir + "/trace.json"));
    CHECK(g.at("curves").empty());

    ProblemSpec bad = spec;
    bad.q_text = "x +* 2";
    CHECK_THROWS_AS(run_pipeline(bad, {"trace"}), ParseError);

    // wkb stage rejects higher-order potentials
    ProblemSpec hi = spec;
    hi.order = 3;
    hi.q_text.clear();
    hi.coeff_texts = {"x", "-3", "0"};
    CHECK_THROWS_AS(run_pipeline(hi, {"wkb"}), StageError);
}

TEST_CASE("connection section drives the linear solver") {
    Json j = Json::parse(R"({
        "schema_version": 1,
        "potential": {"order": 2, "q": "x"},
        "cutoff": 4.0,
        "hbar_order": 5,
        "base_point": [0, 0],
        "connection": [
            ["x", "0"],
            ["0", [{"coeff": "1", "hbar_degree": 0, "exponent": [1, 0]}]]
        ]
    })");
    ProblemSpec spec = ProblemSpec::from_json(j);
    REQUIRE(spec.has_connection());
    HbarConnection conn = spec.build_connection();
    CHECK(conn.rank == 2);
    CHECK(conn.omega[0][0] ==
          TransseriesR::constant(spec.truncation(), RatFunc::x()));
    CHECK(conn.omega[1][1] ==
          TransseriesR::monomial(spec.truncation(), Scalar(1), 0, RatFunc(1)));

    spec.out_dir =
        (std::filesystem::temp_directory_path() / "wkbsq_test_conn").string();
    std::filesystem::remove_all(spec.out_dir);
    REQUIRE(run_pipeline(spec, {"solve"}) == 0);
    Json out = Json::parse(slurp(spec.out_dir + "/solve.json"));
    CHECK(out.at("residual_zero") == true);
    REQUIRE(out.at("components").size() == 2);
    CHECK(out.at("components")[0].at("prefactor_exponent").get<std::string>() !=
          "0");
}

TEST_CASE("novikov and transseries serialization shape") {
    ConicRegion cone = ConicRegion::ray_re_ge0();
    NovikovElement a = nv_add(NovikovElement::one(cone, 3.0),
                              NovikovElement::monomial(Scalar(1), Scalar(2), cone, 3.0));
    Json j = novikov_to_json(a);
    CHECK(j.at("cutoff") == 3.0);
    REQUIRE(j.at("terms").size() == 2);
    CHECK(j.at("terms")[0].at("re_exp") == 0.0);
    CHECK(j.at("terms")[1].at("re_exp") == 1.0);
    CHECK(j.at("terms")[1].at("re_coef") == 2.0);

    Truncation tr(ConicRegion::half_plane_re_ge0(), 4.0, 4, -4);
    TransseriesR t = TransseriesR::monomial(tr, Scalar(1), -1, RatFunc::x());
    Json tj = transseries_to_json(t);
    REQUIRE(tj.at("terms").size() == 1);
    CHECK(tj.at("terms")[0].at("poly")[0].at("degree") == -1);
}
