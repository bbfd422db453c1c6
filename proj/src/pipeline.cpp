#include "wkbsq/pipeline.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>

#include "wkbsq/connection.hpp"

namespace wkbsq {

// ---- rational function parser ---------------------------------------------

namespace {

struct Parser {
    const std::string& s;
    size_t pos = 0;
    bool exact;

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    char peek() {
        skip();
        return pos < s.size() ? s[pos] : '\0';
    }

    RatFunc parse_expr() {
        RatFunc v = parse_term();
        while (true) {
            if (eat('+'))
                v = v + parse_term();
            else if (eat('-'))
                v = v - parse_term();
            else
                return v;
        }
    }
    RatFunc parse_term() {
        RatFunc v = parse_factor();
        while (true) {
            if (eat('*'))
                v = v * parse_factor();
            else if (eat('/'))
                v = v / parse_factor();
            else {
                char c = peek();
                if (c == 'x' || c == '(' || std::isdigit(static_cast<unsigned char>(c)))
                    v = v * parse_factor(); // implicit multiplication
                else
                    return v;
            }
        }
    }
    RatFunc parse_factor() {
        RatFunc base = parse_atom();
        if (eat('^')) {
            skip();
            bool neg = eat('-');
            size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (start == pos) throw ParseError("exponent expected after '^'");
            int e = std::stoi(s.substr(start, pos - start));
            RatFunc r(1);
            for (int k = 0; k < e; ++k) r = r * base;
            return neg ? RatFunc(1) / r : r;
        }
        return base;
    }
    RatFunc parse_atom() {
        skip();
        if (eat('(')) {
            RatFunc v = parse_expr();
            if (!eat(')')) throw ParseError("missing ')'");
            return v;
        }
        if (eat('-')) return -parse_atom();
        if (eat('+')) return parse_atom();
        char c = peek();
        if (c == 'x') {
            ++pos;
            return RatFunc::x();
        }
        if (c == 'i' || c == 'I') {
            ++pos;
            return RatFunc(exact ? Scalar(Rational(0), Rational(1))
                                 : Scalar(std::complex<double>(0, 1)));
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
                ++pos;
            return RatFunc(number_from(s.substr(start, pos - start)));
        }
        throw ParseError("unexpected character '" + std::string(1, c) + "' at position " +
                         std::to_string(pos));
    }
    Scalar number_from(const std::string& num) {
        size_t dot = num.find('.');
        if (dot == std::string::npos) {
            if (exact) return Scalar(Rational(num));
            return Scalar(std::stod(num));
        }
        if (!exact) return Scalar(std::stod(num));
        std::string digits = num.substr(0, dot) + num.substr(dot + 1);
        size_t frac = num.size() - dot - 1;
        Rational den = 1;
        for (size_t k = 0; k < frac; ++k) den *= 10;
        if (digits.empty()) throw ParseError("malformed number '" + num + "'");
        return Scalar(Rational(digits) / den);
    }
};

} // namespace

RatFunc parse_ratfunc(const std::string& text, bool exact) {
    Parser p{text, 0, exact};
    try {
        RatFunc v = p.parse_expr();
        p.skip();
        if (p.pos != text.size())
            throw ParseError("trailing input after position " + std::to_string(p.pos));
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("cannot parse '") + text + "': " + e.what());
    }
}

// ---- problem spec -----------------------------------------------------------

Potential ProblemSpec::potential() const {
    if (order == 2 && coeff_texts.empty())
        return Potential::schrodinger(parse_ratfunc(q_text, exact));
    std::vector<RatFunc> a;
    for (const std::string& t : coeff_texts) a.push_back(parse_ratfunc(t, exact));
    return Potential::higher(std::move(a));
}

ConicRegion ProblemSpec::cone() const {
    if (cone_kind == "half_plane") return ConicRegion::half_plane_re_ge0();
    if (cone_kind == "ray") return ConicRegion::ray_re_ge0();
    if (cone_kind == "arc")
        return ConicRegion::arc(Angle::radians(cone_lo), Angle::radians(cone_hi), true);
    throw ParseError("unknown cone kind '" + cone_kind + "'");
}

Truncation ProblemSpec::truncation() const {
    return Truncation(cone(), cutoff, hbar_order, min_degree);
}

HbarConnection ProblemSpec::build_connection() const {
    if (!has_connection()) throw ParseError("problem file has no connection section");
    Truncation tr = truncation();
    TsMat omega;
    for (const Json& row : connection) {
        std::vector<TransseriesR> r;
        for (const Json& cell : row) {
            TransseriesR e(tr);
            if (cell.is_string()) {
                RatFunc f = parse_ratfunc(cell.get<std::string>(), exact);
                if (!f.is_zero()) e.add_term_raw(Scalar(0), 0, f);
            } else if (cell.is_array()) {
                for (const Json& term : cell) {
                    RatFunc f =
                        parse_ratfunc(term.at("coeff").get<std::string>(), exact);
                    int deg = term.value("hbar_degree", 0);
                    Scalar ex(0);
                    if (term.contains("exponent")) {
                        const Json& c = term.at("exponent");
                        ex = exact ? Scalar::exactify(c.at(0).get<double>(),
                                                      c.at(1).get<double>())
                                   : Scalar(std::complex<double>(c.at(0).get<double>(),
                                                                 c.at(1).get<double>()));
                    }
                    if (!f.is_zero()) e.add_term_raw(ex, deg, f);
                }
            } else {
                throw ParseError("connection entries are strings or term lists");
            }
            e.normalize();
            r.push_back(std::move(e));
        }
        omega.push_back(std::move(r));
    }
    if (omega.empty() || omega.size() != omega[0].size())
        throw ParseError("connection matrix must be square");
    return make_connection(std::move(omega), tr, base_point);
}

ProblemSpec ProblemSpec::from_json(const Json& j) {
    try {
        ProblemSpec s;
        const Json& pot = j.at("potential");
        s.order = pot.value("order", 2);
        if (pot.contains("q")) s.q_text = pot.at("q").get<std::string>();
        if (pot.contains("coeffs"))
            for (const auto& c : pot.at("coeffs"))
                s.coeff_texts.push_back(c.get<std::string>());
        s.theta = j.value("theta", 0.0);
        s.cutoff = j.value("cutoff", 4.0);
        s.hbar_order = j.value("hbar_order", 8);
        s.min_degree = j.value("min_degree", -8);
        s.exact = j.value("mode", std::string("exact")) == "exact";
        if (j.contains("cone")) {
            const Json& c = j.at("cone");
            s.cone_kind = c.value("kind", std::string("half_plane"));
            s.cone_lo = c.value("lo", 0.0);
            s.cone_hi = c.value("hi", 0.0);
        }
        if (j.contains("tracer")) {
            const Json& t = j.at("tracer");
            s.tracer.step_tol = t.value("step_tol", 1e-10);
            s.tracer.disk_radius = t.value("disk_radius", 0.0);
            s.tracer.tangent_tol = t.value("tangent_tol", 0.03);
            s.tracer.max_steps = t.value("max_steps", 20000);
        }
        s.c_max = j.value("c_max", 20.0);
        s.max_depth = j.value("max_depth", 6);
        if (j.contains("base_point")) {
            const Json& b = j.at("base_point");
            s.base_point = Scalar(
                std::complex<double>(b.at(0).get<double>(), b.at(1).get<double>()));
        }
        if (j.contains("rules")) {
            const Json& r = j.at("rules");
            if (r.contains("default_factor")) {
                const Json& f = r.at("default_factor");
                s.voros_factor = Scalar(
                    std::complex<double>(f.at(0).get<double>(), f.at(1).get<double>()));
            }
        }
        s.out_dir = j.value("out_dir", std::string("."));
        s.format = j.value("format", std::string("both"));
        s.seed = j.value("seed", static_cast<uint64_t>(0));
        if (j.contains("connection")) s.connection = j.at("connection");
        if (!(s.cutoff > 0)) throw ParseError("cutoff must be positive");
        if (!(s.tracer.step_tol > 0)) throw ParseError("step_tol must be positive");
        return s;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("problem file: ") + e.what());
    }
}

Json ProblemSpec::to_json() const {
    Json j;
    j["schema_version"] = 1;
    Json pot;
    pot["order"] = order;
    if (!q_text.empty() && coeff_texts.empty()) pot["q"] = q_text;
    if (!coeff_texts.empty()) pot["coeffs"] = coeff_texts;
    j["potential"] = pot;
    j["theta"] = theta;
    j["cutoff"] = cutoff;
    j["hbar_order"] = hbar_order;
    j["min_degree"] = min_degree;
    j["mode"] = exact ? "exact" : "float";
    j["cone"] = {{"kind", cone_kind}, {"lo", cone_lo}, {"hi", cone_hi}};
    j["tracer"] = {{"step_tol", tracer.step_tol},
                   {"disk_radius", tracer.disk_radius},
                   {"tangent_tol", tracer.tangent_tol},
                   {"max_steps", tracer.max_steps}};
    j["c_max"] = c_max;
    j["max_depth"] = max_depth;
    j["base_point"] = {base_point.re_double(), base_point.im_double()};
    j["rules"] = {
        {"default_factor", {voros_factor.re_double(), voros_factor.im_double()}}};
    j["out_dir"] = out_dir;
    j["format"] = format;
    j["seed"] = seed;
    if (has_connection()) j["connection"] = connection;
    return j;
}

// ---- serialization -----------------------------------------------------------

Json scalar_to_json(const Scalar& s) {
    Json j;
    j["re"] = s.re_double();
    j["im"] = s.im_double();
    if (s.exact()) {
        j["re_exact"] = s.re_exact().str();
        j["im_exact"] = s.im_exact().str();
    }
    return j;
}

Json cone_to_json(const ConicRegion& c) {
    Json j;
    Json arcs = Json::array();
    for (const Arc& a : c.arcs()) arcs.push_back({a.lo.rad(), a.hi.rad()});
    j["arcs"] = arcs;
    j["closed"] = c.closed_arcs();
    j["includes_origin"] = c.includes_origin();
    j["direction"] = {c.canonical_direction().re_double(),
                      c.canonical_direction().im_double()};
    return j;
}

Json novikov_to_json(const NovikovElement& a) {
    Json j;
    j["cutoff"] = a.cutoff();
    j["cone"] = cone_to_json(a.dual_cone());
    j["mode"] = a.exact() ? "exact" : "float";
    Json terms = Json::array();
    for (const NovikovTerm& t : a.terms()) {
        Json e;
        e["re_exp"] = t.exponent.re_double();
        e["im_exp"] = t.exponent.im_double();
        e["re_coef"] = t.coeff.re_double();
        e["im_coef"] = t.coeff.im_double();
        if (t.exponent.exact() && t.coeff.exact()) {
            e["exp_exact"] = t.exponent.str();
            e["coef_exact"] = t.coeff.str();
        }
        terms.push_back(e);
    }
    j["terms"] = terms;
    return j;
}

namespace {

Json ratfunc_to_json(const RatFunc& r) {
    Json j;
    Json num = Json::array(), den = Json::array();
    for (const Scalar& c : r.num().coeffs()) num.push_back(scalar_to_json(c));
    for (const Scalar& c : r.den().coeffs()) den.push_back(scalar_to_json(c));
    j["num"] = num;
    j["den"] = den;
    return j;
}

} // namespace

Json transseries_to_json(const TransseriesR& a) {
    Json j;
    j["cutoff"] = a.truncation().cutoff;
    j["hbar_order"] = a.truncation().hbar_order;
    j["min_degree"] = a.truncation().min_degree;
    j["cone"] = cone_to_json(a.truncation().cone);
    Json terms = Json::array();
    for (const auto& t : a.terms()) {
        Json e;
        e["exponent"] = scalar_to_json(t.exponent);
        Json poly = Json::array();
        for (const auto& [d, r] : t.poly) {
            Json p;
            p["degree"] = d;
            p["coeff"] = ratfunc_to_json(r);
            poly.push_back(p);
        }
        e["poly"] = poly;
        terms.push_back(e);
    }
    j["terms"] = terms;
    return j;
}

Json graph_to_json(const StokesGraph& g) {
    Json j;
    j["schema_version"] = 1;
    j["theta"] = g.theta;
    j["c_max"] = g.c_max;
    j["disk_radius"] = g.options.disk_radius;
    Json tps = Json::array();
    for (auto t : g.turning_points) tps.push_back({t.real(), t.imag()});
    j["turning_points"] = tps;
    Json poles = Json::array();
    for (auto p : g.poles) poles.push_back({p.real(), p.imag()});
    j["poles"] = poles;
    Json curves = Json::array();
    for (const StokesCurve& cv : g.curves) {
        Json c;
        c["id"] = cv.id;
        c["generation"] = cv.generation;
        c["parents"] = cv.parents;
        c["source_tp"] = cv.source_tp;
        c["initial_weight"] = cv.initial_weight;
        const char* ends[] = {"boundary", "pole", "turning_point", "weight_cutoff",
                              "max_steps"};
        c["end"] = ends[static_cast<int>(cv.end)];
        c["end_tp"] = cv.end_tp;
        Json pts = Json::array(), ws = Json::array();
        for (size_t k = 0; k < cv.points.size(); ++k) {
            pts.push_back({cv.points[k].real(), cv.points[k].imag()});
            ws.push_back(cv.weight[k]);
        }
        c["points"] = pts;
        c["weights"] = ws;
        if (!cv.lam_i.empty())
            c["sheet_pair_at_start"] = {
                {cv.lam_i.front().real(), cv.lam_i.front().imag()},
                {cv.lam_j.front().real(), cv.lam_j.front().imag()}};
        curves.push_back(c);
    }
    j["curves"] = curves;
    Json regions = Json::array();
    for (const StokesRegion& r : g.regions) {
        Json e;
        e["id"] = r.id;
        e["base_point"] = {r.base_point.real(), r.base_point.imag()};
        Json b = Json::array();
        for (auto p : r.boundary) b.push_back({p.real(), p.imag()});
        e["boundary"] = b;
        regions.push_back(e);
    }
    j["regions"] = regions;
    Json edges = Json::array();
    for (const RegionEdge& e : g.edges) {
        Json je;
        je["id"] = e.id;
        je["region_a"] = e.region_a;
        je["region_b"] = e.region_b;
        je["curve"] = e.curve_id;
        je["crossing"] = {e.crossing.real(), e.crossing.imag()};
        je["weight"] = e.weight_at_crossing;
        edges.push_back(je);
    }
    j["edges"] = edges;
    j["degeneracies"] = g.degeneracy_log;
    return j;
}

Json sq_to_json(const SheafQuantizationData& sq) {
    Json j;
    j["schema_version"] = 1;
    j["cutoff"] = sq.cutoff;
    j["theta"] = sq.theta;
    j["num_sheets"] = sq.num_sheets;
    j["cone"] = cone_to_json(sq.cone);
    Json regions = Json::array();
    for (const SQRegionModule& m : sq.regions) {
        Json r;
        r["id"] = m.region_id;
        r["base_point"] = {m.base_point.real(), m.base_point.imag()};
        Json al = Json::array();
        for (auto a : m.alphas) al.push_back({a.real(), a.imag()});
        r["alphas"] = al;
        r["multiplicities"] = m.multiplicities;
        regions.push_back(r);
    }
    j["regions"] = regions;
    Json edges = Json::array();
    for (const SQEdge& e : sq.edges) {
        Json je;
        je["id"] = e.id;
        je["region_a"] = e.region_a;
        je["region_b"] = e.region_b;
        je["curve"] = e.curve_id;
        Json m = Json::array();
        for (const auto& row : e.matrix) {
            Json jr = Json::array();
            for (const auto& el : row) jr.push_back(novikov_to_json(el));
            m.push_back(jr);
        }
        je["matrix"] = m;
        je["permutation"] = e.permutation;
        edges.push_back(je);
    }
    j["edges"] = edges;
    return j;
}

Json cocycle_to_json(const CocycleReport& rep) {
    Json j;
    j["schema_version"] = 1;
    j["pass"] = rep.pass;
    Json entries = Json::array();
    for (const auto& e : rep.entries) {
        Json je;
        je["vertex"] = e.vertex;
        je["residual_valuation"] =
            std::isfinite(e.residual_valuation) ? Json(e.residual_valuation) : Json("inf");
        je["at_turning_point"] = e.at_turning_point;
        je["pass"] = e.pass;
        entries.push_back(je);
    }
    j["vertices"] = entries;
    return j;
}

// ---- pipeline -----------------------------------------------------------------

namespace {

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw IoError("cannot write " + dir + "/" + name);
    out << text;
}

void write_json(const std::string& dir, const std::string& name, const Json& j) {
    write_file(dir, name, j.dump(2) + "\n");
}

} // namespace

int run_pipeline(const ProblemSpec& spec, const std::set<std::string>& stages_in) {
    std::set<std::string> stages = stages_in;
    bool best_effort_solve = false;
    if (stages.count("all")) {
        stages = {"trace", "scatter", "regions", "sq", "verify"};
        if (spec.order == 2) {
            stages.insert("wkb");
            stages.insert("solve");
            best_effort_solve = true; // skipped with a note when sqrt(Q) is irrational
        }
    }
    auto wants = [&](const std::string& s) { return stages.count(s) > 0; };
    bool need_graph = wants("trace") || wants("scatter") || wants("regions") ||
                      wants("sq") || wants("verify");
    bool need_regions = wants("regions") || wants("sq") || wants("verify");
    bool need_sq = wants("sq") || wants("verify");

    Json manifest;
    manifest["schema_version"] = 1;
    manifest["spec"] = spec.to_json();
    std::vector<std::string> artifacts;

    Potential pot = spec.potential();

    if (wants("wkb")) {
        if (spec.order != 2)
            throw StageError("the wkb stage applies to order-2 potentials");
        WkbSeries s =
            wkb_recursion(parse_ratfunc(spec.q_text, spec.exact), spec.hbar_order);
        Json j;
        j["schema_version"] = 1;
        j["hbar_order"] = spec.hbar_order;
        Json terms = Json::array();
        for (size_t n = 0; n < s.terms.size(); ++n) {
            Json t;
            t["n"] = n;
            t["rational_part"] = s.terms[n].a.str();
            t["sqrtq_part"] = s.terms[n].b.str();
            terms.push_back(t);
        }
        j["terms"] = terms;
        write_json(spec.out_dir, "wkb.json", j);
        artifacts.push_back("wkb.json");
    }

    StokesGraph g;
    if (need_graph) {
        g = trace_stokes_curves(pot, spec.theta, spec.c_max, spec.tracer);
        if (wants("trace")) {
            write_json(spec.out_dir, "trace.json", graph_to_json(g));
            artifacts.push_back("trace.json");
        }
    }
    if (wants("scatter")) {
        higher_order_scattering(g, spec.max_depth);
        write_json(spec.out_dir, "scatter.json", graph_to_json(g));
        artifacts.push_back("scatter.json");
    }
    if (need_regions) {
        detect_regions(g);
        if (wants("regions")) {
            write_json(spec.out_dir, "regions.json", graph_to_json(g));
            artifacts.push_back("regions.json");
        }
    }
    if (need_graph && (spec.format == "svg" || spec.format == "both")) {
        write_file(spec.out_dir, "graph.svg", graph_to_svg(g));
        artifacts.push_back("graph.svg");
    }

    SheafQuantizationData sq;
    if (need_sq) {
        SpectralData sd =
            spectral_from_char_poly(pot.char_poly(), spec.base_point.to_complex());
        GluingRules rules;
        rules.default_factor = spec.voros_factor;
        sq = build_sq(g, sd, rules, spec.cone(), spec.cutoff);
        if (wants("sq")) {
            write_json(spec.out_dir, "sq.json", sq_to_json(sq));
            artifacts.push_back("sq.json");
        }
    }
    if (wants("verify")) {
        CocycleReport rep = check_cocycle(sq);
        write_json(spec.out_dir, "verify.json", cocycle_to_json(rep));
        artifacts.push_back("verify.json");
    }

    if (wants("solve") && spec.has_connection()) {
        // linear solve of the connection section (rank 1 or diagonal)
        HbarConnection conn = spec.build_connection();
        Truncation tr = spec.truncation();
        auto sols = solve_linear_diagonal(conn, TransseriesR::one(tr), spec.base_point);
        Json j;
        j["schema_version"] = 1;
        j["equation"] = "hbar psi' + Omega psi = 0";
        Json comps = Json::array();
        bool all_zero = true;
        for (size_t k = 0; k < sols.size(); ++k) {
            Json s;
            s["component"] = k;
            s["prefactor_exponent"] = sols[k].prefactor_exponent.str();
            s["log_unit"] = sols[k].log_unit.str();
            s["subexp"] = transseries_to_json(sols[k].subexp);
            HbarConnection sub;
            sub.rank = 1;
            sub.tr = conn.tr;
            sub.omega = {{conn.omega[k][k]}};
            sub.base_point = conn.base_point;
            bool rz = sols[k].residual(sub).is_zero();
            s["residual_zero"] = rz;
            all_zero &= rz;
            comps.push_back(s);
        }
        j["components"] = comps;
        j["residual_zero"] = all_zero;
        write_json(spec.out_dir, "solve.json", j);
        artifacts.push_back("solve.json");
        stages.erase("solve");
    }
    if (wants("solve")) {
        if (spec.order != 2)
            throw StageError("the solve stage applies to order-2 potentials");
        RatFunc Q = parse_ratfunc(spec.q_text, spec.exact);
        auto sqrtq = rf_sqrt(Q);
        if (!sqrtq && best_effort_solve) {
            manifest["solve_skipped"] =
                "sqrt(Q) is not a rational function; no Riccati seed in the ring";
            stages.erase("solve");
        } else if (!sqrtq) {
            throw StageError(
                "solve needs sqrt(Q) rational; choose a perfect-square potential");
        }
    }
    if (wants("solve")) {
        RatFunc Q = parse_ratfunc(spec.q_text, spec.exact);
        auto sqrtq = rf_sqrt(Q);
        Truncation tr = spec.truncation();
        TransseriesR fq = TransseriesR::constant(tr, Q);
        TransseriesR f2 = TransseriesR::constant(tr, RatFunc(-1));
        TransseriesR u = graded_picard_solve({fq, TransseriesR::zero(tr), f2}, {*sqrtq},
                                             spec.base_point);
        Json j;
        j["schema_version"] = 1;
        j["equation"] = "hbar s' = Q - s^2";
        j["solution"] = transseries_to_json(u);
        TransseriesR resid = picard_residual({fq, TransseriesR::zero(tr), f2}, u);
        j["residual_zero"] = resid.is_zero();
        write_json(spec.out_dir, "solve.json", j);
        artifacts.push_back("solve.json");
    }

    manifest["artifacts"] = artifacts;
    write_json(spec.out_dir, "manifest.json", manifest);
    return 0;
}

} // namespace wkbsq
