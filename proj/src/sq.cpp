#include "wkbsq/sq.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace wkbsq {

namespace {
using C = std::complex<double>;
}

// ---- Novikov matrix helpers -------------------------------------------

NvMat nv_mat_identity(int n, const ConicRegion& cone, double cutoff) {
    NvMat m(n, std::vector<NovikovElement>(n, NovikovElement::zero(cone, cutoff)));
    for (int i = 0; i < n; ++i) m[i][i] = NovikovElement::one(cone, cutoff);
    return m;
}

NvMat nv_mat_mul(const NvMat& a, const NvMat& b) {
    size_t n = a.size(), p = b.size(), q = b[0].size();
    const ConicRegion& cone = a[0][0].dual_cone();
    double cutoff = a[0][0].cutoff();
    NvMat c(n, std::vector<NovikovElement>(q, NovikovElement::zero(cone, cutoff)));
    for (size_t i = 0; i < n; ++i)
        for (size_t k = 0; k < p; ++k) {
            if (a[i][k].is_zero()) continue;
            for (size_t j = 0; j < q; ++j) {
                if (b[k][j].is_zero()) continue;
                c[i][j] = nv_add(c[i][j], nv_mul(a[i][k], b[k][j]));
            }
        }
    return c;
}

bool nv_mat_is_identity(const NvMat& a) {
    const ConicRegion& cone = a[0][0].dual_cone();
    double cutoff = a[0][0].cutoff();
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) {
            const NovikovElement& want = (i == j)
                                             ? NovikovElement::one(cone, cutoff)
                                             : NovikovElement::zero(cone, cutoff);
            if (!(a[i][j] == want)) return false;
        }
    return true;
}

double nv_mat_residual_valuation(const NvMat& a) {
    const ConicRegion& cone = a[0][0].dual_cone();
    double cutoff = a[0][0].cutoff();
    double v = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) {
            NovikovElement d = (i == j)
                                   ? nv_sub(a[i][j], NovikovElement::one(cone, cutoff))
                                   : a[i][j];
            if (!d.is_zero()) v = std::min(v, nv_valuation(d));
        }
    return v;
}

NvMat nv_mat_inverse(const NvMat& a) {
    int n = static_cast<int>(a.size());
    const ConicRegion& cone = a[0][0].dual_cone();
    double cutoff = a[0][0].cutoff();
    // split A = D (I + U), D the diagonal-unit part
    NvMat dinv = nv_mat_identity(n, cone, cutoff);
    for (int i = 0; i < n; ++i) dinv[i][i] = nv_invert(a[i][i]);
    NvMat u = nv_mat_mul(dinv, a);
    for (int i = 0; i < n; ++i)
        u[i][i] = nv_sub(u[i][i], NovikovElement::one(cone, cutoff));
    NvMat acc = nv_mat_identity(n, cone, cutoff);
    NvMat pw = acc;
    const int cap = 512;
    int k = 0;
    for (; k < cap; ++k) {
        pw = nv_mat_mul(pw, u);
        bool zero = true;
        for (auto& row : pw)
            for (auto& e : row)
                if (!e.is_zero()) zero = false;
        if (zero) break;
        if (k % 2 == 0) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) acc[i][j] = nv_sub(acc[i][j], pw[i][j]);
        } else {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) acc[i][j] = nv_add(acc[i][j], pw[i][j]);
        }
    }
    if (k == cap) throw NotInvertible("gluing inverse series does not stabilize");
    return nv_mat_mul(acc, dinv);
}

// ---- construction -------------------------------------------------------

const SQEdge* SheafQuantizationData::edge_between(int ra, int rb) const {
    for (const SQEdge& e : edges)
        if (e.region_a == ra && e.region_b == rb) return &e;
    return nullptr;
}

SheafQuantizationData build_sq(const StokesGraph& g, const SpectralData& sd,
                               const GluingRules& rules, const ConicRegion& cone,
                               double cutoff) {
    GmnReport gmn = is_gmn_generic(g);
    if (!gmn.generic) throw NotGeneric(gmn.witness);
    if (g.regions.empty())
        throw Error("RegionsMissing", "detect_regions must run before build_sq");

    SheafQuantizationData sq;
    sq.cone = cone;
    sq.cutoff = cutoff;
    sq.theta = g.theta;
    sq.num_sheets = sd.num_sheets();
    sq.vertices = g.vertices;
    sq.graph_fingerprint = g.curves.size() * 1315423911u +
                           g.regions.size() * 2654435761u +
                           static_cast<size_t>(g.theta * 1e6);

    for (const StokesRegion& reg : g.regions) {
        SQRegionModule m;
        m.region_id = reg.id;
        m.base_point = reg.base_point;
        for (int s = 0; s < sd.num_sheets(); ++s) {
            m.alphas.push_back(sd.primitive(s, reg.base_point));
            m.multiplicities.push_back(sd.multiplicities()[s]);
        }
        sq.regions.push_back(std::move(m));
    }

    for (const RegionEdge& re : g.edges) {
        // identify the curve's sheet pair at the crossing with the global
        // sheet labels by value matching
        const StokesCurve& cv = g.curves[re.curve_id];
        size_t kbest = 0;
        double best = 1e300;
        for (size_t k = 0; k < cv.points.size(); ++k) {
            double d = std::abs(cv.points[k] - re.crossing);
            if (d < best) {
                best = d;
                kbest = k;
            }
        }
        auto sheets = sd.sheets_at(re.crossing);
        auto nearest = [&](C v, int exclude) {
            int bi = -1;
            double bd = 1e300;
            for (size_t s = 0; s < sheets.size(); ++s) {
                if (static_cast<int>(s) == exclude) continue;
                if (std::abs(sheets[s] - v) < bd) {
                    bd = std::abs(sheets[s] - v);
                    bi = static_cast<int>(s);
                }
            }
            return bi;
        };
        int si = nearest(cv.lam_i[kbest], -1);
        int sj = nearest(cv.lam_j[kbest], si);
        if (si < 0 || sj < 0 || si == sj)
            throw MissingRule("cannot classify the curve's sheet pair at the crossing");

        SQEdge e;
        e.id = re.id;
        e.region_a = re.region_a;
        e.region_b = re.region_b;
        e.curve_id = re.curve_id;
        double w = re.weight_at_crossing;
        // the full period along the curve is e^{i theta} w: the imaginary
        // part of the phase functional vanishes on the level set
        Scalar c_exp = Scalar(std::polar(w, g.theta));
        e.matrix = nv_mat_identity(sq.num_sheets, cone, cutoff);
        e.matrix[si][sj] =
            NovikovElement::monomial(c_exp, rules.factor_for(re.curve_id), cone, cutoff);
        for (int s = 0; s < sq.num_sheets; ++s) e.permutation.push_back(s);
        sq.edges.push_back(std::move(e));
    }
    return sq;
}

// ---- verification --------------------------------------------------------

CocycleReport check_cocycle(const SheafQuantizationData& sq) {
    CocycleReport rep;
    for (size_t v = 0; v < sq.vertices.size(); ++v) {
        const ArrangementVertex& av = sq.vertices[v];
        if (av.edges.empty()) continue;
        NvMat prod = nv_mat_identity(sq.num_sheets, sq.cone, sq.cutoff);
        bool complete = true;
        size_t d = av.edges.size();
        for (size_t k = 0; k < d; ++k) {
            // crossing edges[k+1] leads from faces[k] to faces[k+1]
            int eid = av.edges[(k + 1) % d];
            int from = av.faces[k];
            int to = av.faces[(k + 1) % d];
            if (eid < 0 || from < 0 || to < 0) {
                complete = false;
                break;
            }
            const SQEdge& e = sq.edges[eid];
            if (e.region_a == from && e.region_b == to)
                prod = nv_mat_mul(e.matrix, prod);
            else if (e.region_a == to && e.region_b == from)
                prod = nv_mat_mul(nv_mat_inverse(e.matrix), prod);
            else {
                complete = false;
                break;
            }
        }
        CocycleReport::Entry entry;
        entry.vertex = static_cast<int>(v);
        entry.at_turning_point = av.at_turning_point;
        if (!complete) {
            entry.residual_valuation = 0;
            entry.pass = false;
        } else {
            entry.residual_valuation = nv_mat_residual_valuation(prod);
            entry.pass = !std::isfinite(entry.residual_valuation) ||
                         entry.residual_valuation >= sq.cutoff;
        }
        if (!entry.pass && !entry.at_turning_point) rep.pass = false;
        rep.entries.push_back(entry);
    }
    return rep;
}

NvMat monodromy(const SheafQuantizationData& sq, const std::vector<int>& loop) {
    if (loop.empty() || loop.front() != loop.back())
        throw NotClosed("loop must return to its starting region");
    NvMat prod = nv_mat_identity(sq.num_sheets, sq.cone, sq.cutoff);
    for (size_t k = 0; k + 1 < loop.size(); ++k) {
        int a = loop[k], b = loop[k + 1];
        if (const SQEdge* e = sq.edge_between(a, b)) {
            prod = nv_mat_mul(e->matrix, prod);
        } else if (const SQEdge* r = sq.edge_between(b, a)) {
            prod = nv_mat_mul(nv_mat_inverse(r->matrix), prod);
        } else {
            throw NotClosed("consecutive regions are not adjacent");
        }
    }
    return prod;
}

// ---- hom modules -----------------------------------------------------------

std::vector<HomGenerator> hom_module(const SheafQuantizationData& E,
                                     const SheafQuantizationData& F) {
    if (E.graph_fingerprint != F.graph_fingerprint ||
        E.regions.size() != F.regions.size())
        throw GraphMismatch("hom_module requires a shared Stokes graph");
    const ConicRegion& cone = E.cone;
    double cutoff = E.cutoff;
    C dir = cone.canonical_direction().to_complex();
    C phase = std::conj(dir) / std::abs(dir);

    int nE = E.num_sheets, nF = F.num_sheets;
    size_t nreg = E.regions.size();

    // exponent lattice generators: every gluing exponent of both sides
    std::vector<Scalar> gens;
    auto add_gen = [&](const Scalar& c) {
        if (c.is_zero()) return;
        for (const Scalar& g : gens)
            if (close(g, c, 1e-9)) return;
        gens.push_back(c);
    };
    for (const auto& e : E.edges)
        for (const auto& row : e.matrix)
            for (const auto& el : row)
                for (const auto& t : el.terms()) add_gen(t.exponent);
    for (const auto& e : F.edges)
        for (const auto& row : e.matrix)
            for (const auto& el : row)
                for (const auto& t : el.terms()) add_gen(t.exponent);

    struct Slot {
        std::vector<Scalar> exps;
        size_t first_var = 0;
    };
    std::vector<Slot> slots((nreg * nF) * nE);
    size_t nvars = 0;
    for (size_t r = 0; r < nreg; ++r)
        for (int fi = 0; fi < nF; ++fi)
            for (int ej = 0; ej < nE; ++ej) {
                C delta = E.regions[r].alphas[ej] - F.regions[r].alphas[fi];
                double dval = (phase * delta).real();
                Scalar base = dval > 1e-12 ? Scalar(delta) : Scalar(0);
                std::vector<Scalar> exps = {base};
                size_t head = 0;
                while (head < exps.size() && exps.size() < 4000) {
                    Scalar cur = exps[head++];
                    for (const Scalar& g : gens) {
                        Scalar cand = cur + g;
                        double dv = (phase * cand.to_complex()).real();
                        if (dv >= cutoff - 1e-12) continue;
                        bool seen = false;
                        for (const Scalar& ee : exps)
                            if (close(ee, cand, 1e-9)) seen = true;
                        if (!seen) exps.push_back(cand);
                    }
                }
                Slot& s = slots[(r * nF + fi) * nE + ej];
                s.exps = std::move(exps);
                s.first_var = nvars;
                nvars += s.exps.size();
            }

    auto slot_of = [&](size_t r, int fi, int ej) -> const Slot& {
        return slots[(r * nF + fi) * nE + ej];
    };
    auto var_for = [&](const Slot& s, const Scalar& c) -> int {
        for (size_t k = 0; k < s.exps.size(); ++k)
            if (close(s.exps[k], c, 1e-9)) return static_cast<int>(s.first_var + k);
        return -1;
    };

    // equations per edge, matrix slot, and exponent below the cutoff:
    //   (G^F_e M_{Ra} - M_{Rb} G^E_e)[fi][ej] = 0
    std::vector<std::map<int, Scalar>> eqs;
    bool exact_mode = true;
    for (size_t ei = 0; ei < E.edges.size(); ++ei) {
        const SQEdge& ge = E.edges[ei];
        const SQEdge& gf = F.edges[ei];
        size_t ra = ge.region_a, rb = ge.region_b;
        for (int fi = 0; fi < nF; ++fi)
            for (int ej = 0; ej < nE; ++ej) {
                std::vector<Scalar> support;
                auto add_support = [&](const Scalar& c) {
                    double dv = (phase * c.to_complex()).real();
                    if (dv >= cutoff - 1e-12) return;
                    for (const Scalar& s : support)
                        if (close(s, c, 1e-9)) return;
                    support.push_back(c);
                };
                for (int k = 0; k < nF; ++k)
                    for (const auto& t : gf.matrix[fi][k].terms())
                        for (const Scalar& me : slot_of(ra, k, ej).exps)
                            add_support(t.exponent + me);
                for (int k = 0; k < nE; ++k)
                    for (const Scalar& me : slot_of(rb, fi, k).exps)
                        for (const auto& t : ge.matrix[k][ej].terms())
                            add_support(me + t.exponent);
                for (const Scalar& c : support) {
                    std::map<int, Scalar> row;
                    auto add_term = [&](int var, const Scalar& coef) {
                        if (var < 0) return;
                        auto [it, fresh] = row.emplace(var, coef);
                        if (!fresh) it->second += coef;
                    };
                    for (int k = 0; k < nF; ++k)
                        for (const auto& t : gf.matrix[fi][k].terms()) {
                            Scalar need = c - t.exponent;
                            add_term(var_for(slot_of(ra, k, ej), need), t.coeff);
                            if (!t.coeff.exact()) exact_mode = false;
                        }
                    for (int k = 0; k < nE; ++k)
                        for (const auto& t : ge.matrix[k][ej].terms()) {
                            Scalar need = c - t.exponent;
                            add_term(var_for(slot_of(rb, fi, k), need), -t.coeff);
                            if (!t.coeff.exact()) exact_mode = false;
                        }
                    bool nonzero = false;
                    for (auto& [v, cf] : row)
                        if (!cf.is_zero()) nonzero = true;
                    if (nonzero) eqs.push_back(std::move(row));
                }
            }
    }

    Mat<Scalar> A(eqs.size(), std::vector<Scalar>(nvars, Scalar(0)));
    for (size_t i = 0; i < eqs.size(); ++i)
        for (auto& [v, cf] : eqs[i]) A[i][v] += cf;

    auto basis = exact_mode
                     ? nullspace_field(A, [](const Scalar& s) { return !s.is_zero(); })
                     : nullspace_field(A, [](const Scalar& s) { return s.abs() > 1e-9; });

    std::vector<HomGenerator> out;
    for (const auto& v : basis) {
        HomGenerator gen;
        for (size_t r = 0; r < nreg; ++r) {
            NvMat m(nF,
                    std::vector<NovikovElement>(nE, NovikovElement::zero(cone, cutoff)));
            for (int fi = 0; fi < nF; ++fi)
                for (int ej = 0; ej < nE; ++ej) {
                    const Slot& s = slot_of(r, fi, ej);
                    std::vector<NovikovTerm> terms;
                    for (size_t k = 0; k < s.exps.size(); ++k) {
                        const Scalar& cf = v[s.first_var + k];
                        if (cf.is_zero()) continue;
                        terms.push_back({s.exps[k], cf});
                    }
                    m[fi][ej] = NovikovElement(cone, cutoff, terms);
                }
            gen.per_region.push_back(std::move(m));
        }
        out.push_back(std::move(gen));
    }
    return out;
}

// ---- duality ---------------------------------------------------------------

SheafQuantizationData dualize(const SheafQuantizationData& sq) {
    SheafQuantizationData d = sq;
    for (auto& reg : d.regions)
        for (auto& a : reg.alphas) a = -a;
    for (auto& e : d.edges) {
        NvMat inv = nv_mat_inverse(e.matrix);
        NvMat tr(inv[0].size(),
                 std::vector<NovikovElement>(inv.size(),
                                             NovikovElement::zero(d.cone, d.cutoff)));
        for (size_t i = 0; i < inv.size(); ++i)
            for (size_t j = 0; j < inv[i].size(); ++j) tr[j][i] = inv[i][j];
        e.matrix = tr;
        std::vector<int> pinv(e.permutation.size());
        for (size_t k = 0; k < e.permutation.size(); ++k)
            pinv[e.permutation[k]] = static_cast<int>(k);
        e.permutation = pinv;
    }
    return d;
}

} // namespace wkbsq
