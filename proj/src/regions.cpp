#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "wkbsq/stokes.hpp"

namespace wkbsq {

namespace {

using C = std::complex<double>;

struct Seg {
    C a, b;
    int curve = -1; // -1: bounding circle
    double wa = 0, wb = 0;
};

double cross(C u, C v) { return u.real() * v.imag() - u.imag() * v.real(); }

// intersection of [a0,a1] and [b0,b1] with parameters; tolerant at endpoints
bool seg_inter(C a0, C a1, C b0, C b1, double* s, double* u) {
    C da = a1 - a0, db = b1 - b0;
    double den = cross(da, db);
    double la = std::abs(da), lb = std::abs(db);
    if (la < 1e-300 || lb < 1e-300) return false;
    if (std::abs(den) < 1e-12 * la * lb) return false;
    C d0 = b0 - a0;
    *s = cross(d0, db) / den;
    *u = cross(d0, da) / den;
    double tol = 1e-9;
    return *s > -tol && *s < 1 + tol && *u > -tol && *u < 1 + tol;
}

bool overlapping_collinear(const Seg& p, const Seg& q, double eps) {
    C da = p.b - p.a, db = q.b - q.a;
    double la = std::abs(da), lb = std::abs(db);
    if (la < eps || lb < eps) return false;
    if (std::abs(cross(da, db)) > 1e-7 * la * lb) return false;
    auto dist_line = [&](C z) { return std::abs(cross(da / la, z - p.a)); };
    if (dist_line(q.a) > eps || dist_line(q.b) > eps) return false;
    auto t_of = [&](C z) { return ((z - p.a) / da).real(); };
    double t0 = t_of(q.a), t1 = t_of(q.b);
    double lo = std::min(t0, t1), hi = std::max(t0, t1);
    double ov = std::min(hi, 1.0) - std::max(lo, 0.0);
    return ov * la > 10 * eps;
}

struct NodeStore {
    std::vector<C> pos;
    double eps;
    int find_or_add(C p) {
        for (size_t i = 0; i < pos.size(); ++i)
            if (std::abs(pos[i] - p) < eps) return static_cast<int>(i);
        pos.push_back(p);
        return static_cast<int>(pos.size()) - 1;
    }
};

struct FinalSeg {
    int u, v;       // node ids
    int curve;      // -1 circle
    double wu, wv;  // curve weight at the endpoints
};

// winding-number point-in-polygon
bool point_in_polygon(C p, const std::vector<C>& poly) {
    int wn = 0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        C a = poly[i], b = poly[(i + 1) % n];
        if (a.imag() <= p.imag()) {
            if (b.imag() > p.imag() && cross(b - a, p - a) > 0) ++wn;
        } else {
            if (b.imag() <= p.imag() && cross(b - a, p - a) < 0) --wn;
        }
    }
    return wn != 0;
}

} // namespace

void detect_regions(StokesGraph& g) {
    double R = g.options.disk_radius;
    double eps = 1e-7 * R;

    // ---- collect raw segments: clipped curve polylines + the circle
    std::vector<Seg> raw;
    for (const StokesCurve& cv : g.curves) {
        for (size_t k = 0; k + 1 < cv.points.size(); ++k) {
            C a = cv.points[k], b = cv.points[k + 1];
            if (std::abs(a - b) < eps) continue;
            // drop pieces fully outside the disk
            if (std::abs(a) > R + eps && std::abs(b) > R + eps) continue;
            raw.push_back({a, b, cv.id, cv.weight[k], cv.weight[k + 1]});
        }
    }
    const int M = 256;
    for (int k = 0; k < M; ++k) {
        C a = std::polar(R, 2 * kPi * k / M);
        C b = std::polar(R, 2 * kPi * (k + 1) / M);
        raw.push_back({a, b, -1, 0, 0});
    }

    // ---- split at pairwise intersections
    std::vector<std::vector<double>> cuts(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
        for (size_t j = i + 1; j < raw.size(); ++j) {
            if (raw[i].curve == raw[j].curve && raw[i].curve >= 0) {
                // consecutive pieces of one curve share endpoints only
                if (std::abs(raw[i].b - raw[j].a) < eps ||
                    std::abs(raw[i].a - raw[j].b) < eps)
                    continue;
            }
            if (overlapping_collinear(raw[i], raw[j], eps))
                throw ArrangementDegeneracy("overlapping collinear segments in the arrangement");
            double s, u;
            if (seg_inter(raw[i].a, raw[i].b, raw[j].a, raw[j].b, &s, &u)) {
                cuts[i].push_back(std::clamp(s, 0.0, 1.0));
                cuts[j].push_back(std::clamp(u, 0.0, 1.0));
            }
        }

    NodeStore nodes{{}, eps};
    std::vector<FinalSeg> segs;
    for (size_t i = 0; i < raw.size(); ++i) {
        std::vector<double> ts = cuts[i];
        ts.push_back(0.0);
        ts.push_back(1.0);
        std::sort(ts.begin(), ts.end());
        C d = raw[i].b - raw[i].a;
        for (size_t k = 0; k + 1 < ts.size(); ++k) {
            double t0 = ts[k], t1 = ts[k + 1];
            if ((t1 - t0) * std::abs(d) < eps) continue;
            C p0 = raw[i].a + t0 * d;
            C p1 = raw[i].a + t1 * d;
            int u = nodes.find_or_add(p0);
            int v = nodes.find_or_add(p1);
            if (u == v) continue;
            double w0 = raw[i].wa + t0 * (raw[i].wb - raw[i].wa);
            double w1 = raw[i].wa + t1 * (raw[i].wb - raw[i].wa);
            segs.push_back({u, v, raw[i].curve, w0, w1});
        }
    }

    // dedup identical segments (same node pair)
    {
        std::set<std::pair<int, int>> seen;
        std::vector<FinalSeg> uniq;
        for (const auto& s : segs) {
            auto key = std::minmax(s.u, s.v);
            if (seen.count({key.first, key.second})) continue;
            seen.insert({key.first, key.second});
            uniq.push_back(s);
        }
        segs = std::move(uniq);
    }

    // ---- half-edge structure
    struct Half {
        int seg;      // index into segs
        int from, to; // node ids
        int face = -1;
    };
    std::vector<Half> halves;
    for (size_t s = 0; s < segs.size(); ++s) {
        halves.push_back({static_cast<int>(s), segs[s].u, segs[s].v, -1});
        halves.push_back({static_cast<int>(s), segs[s].v, segs[s].u, -1});
    }
    auto twin = [](int h) { return h ^ 1; };

    // outgoing halves per node, sorted by angle
    std::vector<std::vector<int>> out(nodes.pos.size());
    for (size_t h = 0; h < halves.size(); ++h) out[halves[h].from].push_back(static_cast<int>(h));
    std::vector<std::vector<double>> out_angle(nodes.pos.size());
    for (size_t n = 0; n < nodes.pos.size(); ++n) {
        auto& lst = out[n];
        std::sort(lst.begin(), lst.end(), [&](int ha, int hb) {
            C va = nodes.pos[halves[ha].to] - nodes.pos[halves[ha].from];
            C vb = nodes.pos[halves[hb].to] - nodes.pos[halves[hb].from];
            return std::arg(va) < std::arg(vb);
        });
        for (int h : lst)
            out_angle[n].push_back(
                std::arg(nodes.pos[halves[h].to] - nodes.pos[halves[h].from]));
    }
    // position of a half-edge in its source node's rotation
    std::map<int, int> slot;
    for (size_t n = 0; n < nodes.pos.size(); ++n)
        for (size_t k = 0; k < out[n].size(); ++k) slot[out[n][k]] = static_cast<int>(k);

    // next half-edge in face traversal (interior on the left):
    // from h = (u -> v), take the twin (v -> u) and rotate clockwise one slot
    auto next_half = [&](int h) {
        int t = twin(h);
        int v = halves[t].from;
        int k = slot[t];
        int d = static_cast<int>(out[v].size());
        return out[v][(k - 1 + d) % d];
    };

    // ---- faces
    struct Face {
        std::vector<int> walk; // half-edge ids
        double area = 0;
        std::vector<C> poly;
    };
    std::vector<Face> faces;
    for (size_t h0 = 0; h0 < halves.size(); ++h0) {
        if (halves[h0].face >= 0) continue;
        Face f;
        int h = static_cast<int>(h0);
        int guard = 0;
        while (halves[h].face < 0) {
            halves[h].face = static_cast<int>(faces.size());
            f.walk.push_back(h);
            h = next_half(h);
            if (++guard > static_cast<int>(halves.size()) + 4)
                throw ArrangementDegeneracy("face walk did not close");
        }
        for (int hw : f.walk) f.poly.push_back(nodes.pos[halves[hw].from]);
        double area = 0;
        for (size_t k = 0; k < f.poly.size(); ++k) {
            C a = f.poly[k], b = f.poly[(k + 1) % f.poly.size()];
            area += cross(a, b) / 2;
        }
        f.area = area;
        faces.push_back(std::move(f));
    }

    g.arr_vertices = nodes.pos.size();
    g.arr_edges = segs.size();
    g.arr_faces = faces.size();

    // interior faces have positive area (counterclockwise walks)
    std::vector<int> face_to_region(faces.size(), -1);
    std::vector<int> keep;
    for (size_t f = 0; f < faces.size(); ++f)
        if (faces[f].area > eps * eps) keep.push_back(static_cast<int>(f));
    std::sort(keep.begin(), keep.end(), [&](int a, int b) {
        C ca = 0, cb = 0;
        for (C p : faces[a].poly) ca += p;
        for (C p : faces[b].poly) cb += p;
        ca /= static_cast<double>(faces[a].poly.size());
        cb /= static_cast<double>(faces[b].poly.size());
        if (std::abs(ca.real() - cb.real()) > 1e-9) return ca.real() < cb.real();
        return ca.imag() < cb.imag();
    });

    g.regions.clear();
    for (size_t r = 0; r < keep.size(); ++r) {
        face_to_region[keep[r]] = static_cast<int>(r);
        StokesRegion reg;
        reg.id = static_cast<int>(r);
        // boundary without immediate backtracks
        for (int hw : faces[keep[r]].walk) {
            C p = nodes.pos[halves[hw].from];
            if (!reg.boundary.empty() && std::abs(reg.boundary.back() - p) < eps) continue;
            reg.boundary.push_back(p);
        }
        // interior base point: centroid, then inward offsets as fallback
        C centroid = 0;
        for (C p : reg.boundary) centroid += p;
        centroid /= static_cast<double>(reg.boundary.size());
        C base = centroid;
        if (!point_in_polygon(base, faces[keep[r]].poly)) {
            bool found = false;
            double off = std::sqrt(std::abs(faces[keep[r]].area)) / 20;
            for (int hw : faces[keep[r]].walk) {
                C a = nodes.pos[halves[hw].from], b = nodes.pos[halves[hw].to];
                C mid = 0.5 * (a + b);
                C nrm = (b - a) / std::abs(b - a) * C(0, 1);
                for (double sgn : {1.0, -1.0}) {
                    C cand = mid + sgn * off * nrm;
                    if (point_in_polygon(cand, faces[keep[r]].poly)) {
                        base = cand;
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
        }
        reg.base_point = base;
        g.regions.push_back(std::move(reg));
    }

    // ---- adjacency edges: one per (region pair, curve)
    g.edges.clear();
    std::map<std::tuple<int, int, int>, int> edge_lookup;
    std::vector<std::vector<std::pair<C, double>>> edge_samples;
    for (size_t s = 0; s < segs.size(); ++s) {
        if (segs[s].curve < 0) continue;
        int hf = static_cast<int>(2 * s);
        int fa = face_to_region[halves[hf].face];
        int fb = face_to_region[halves[twin(hf)].face];
        if (fa < 0 || fb < 0 || fa == fb) continue;
        int lo = std::min(fa, fb), hi = std::max(fa, fb);
        auto key = std::make_tuple(lo, hi, segs[s].curve);
        C mid = 0.5 * (nodes.pos[segs[s].u] + nodes.pos[segs[s].v]);
        double wmid = 0.5 * (segs[s].wu + segs[s].wv);
        auto it = edge_lookup.find(key);
        if (it == edge_lookup.end()) {
            RegionEdge e;
            e.id = static_cast<int>(g.edges.size());
            e.region_a = lo;
            e.region_b = hi;
            e.curve_id = segs[s].curve;
            e.crossing = mid;
            e.weight_at_crossing = wmid;
            edge_lookup[key] = e.id;
            g.edges.push_back(e);
            edge_samples.push_back({{mid, wmid}});
        } else {
            edge_samples[it->second].push_back({mid, wmid});
        }
    }
    // representative crossing: sample closest to the average position
    for (size_t e = 0; e < g.edges.size(); ++e) {
        C avg = 0;
        for (auto& [p, w] : edge_samples[e]) avg += p;
        avg /= static_cast<double>(edge_samples[e].size());
        double best = 1e300;
        for (auto& [p, w] : edge_samples[e])
            if (std::abs(p - avg) < best) {
                best = std::abs(p - avg);
                g.edges[e].crossing = p;
                g.edges[e].weight_at_crossing = w;
            }
    }

    // ---- interior vertices with their cyclic environment
    g.vertices.clear();
    for (size_t n = 0; n < nodes.pos.size(); ++n) {
        if (std::abs(std::abs(nodes.pos[n]) - R) < 1e-5 * R) continue; // boundary
        int curve_deg = 0;
        for (int h : out[n])
            if (segs[halves[h].seg].curve >= 0) ++curve_deg;
        if (curve_deg < 3) continue;
        ArrangementVertex v;
        v.pos = nodes.pos[n];
        for (auto t : g.turning_points)
            if (std::abs(t - v.pos) < g.options.capture_radius * 3) v.at_turning_point = true;
        size_t d = out[n].size();
        for (size_t k = 0; k < d; ++k) {
            int h = out[n][k];
            const FinalSeg& fs = segs[halves[h].seg];
            if (fs.curve < 0) continue;
            int fa = face_to_region[halves[h].face];
            int fb = face_to_region[halves[twin(h)].face];
            int lo = std::min(fa, fb), hi = std::max(fa, fb);
            auto it = edge_lookup.find(std::make_tuple(lo, hi, fs.curve));
            v.edges.push_back(it == edge_lookup.end() ? -1 : it->second);
            double w_here = (halves[h].from == fs.u) ? fs.wu : fs.wv;
            v.edge_weights.push_back(w_here);
            // wedge face after this ray, counterclockwise
            size_t k2 = (k + 1) % d;
            double a1 = out_angle[n][k], a2 = out_angle[n][k2];
            if (k2 == 0) a2 += 2 * kPi;
            double amid = 0.5 * (a1 + a2);
            C probe = v.pos + std::polar(10 * eps, amid);
            int wedge = -1;
            int hface = halves[h].face;
            int tface = halves[twin(out[n][k2])].face;
            // the wedge between ray k and ray k+1 is the left face of the
            // half-edge leaving along ray k... resolve by probing
            (void)hface;
            (void)tface;
            for (size_t rr = 0; rr < g.regions.size(); ++rr)
                if (point_in_polygon(probe, faces[keep[rr]].poly)) {
                    wedge = static_cast<int>(rr);
                    break;
                }
            v.faces.push_back(wedge);
        }
        g.vertices.push_back(std::move(v));
    }
}

} // namespace wkbsq
