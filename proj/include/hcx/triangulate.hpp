#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hcx/mesh.hpp"

namespace hcx {

/// Domain plus inclusion outlines.  The domain polygon must be convex; the
/// inclusion polygons must be simple, pairwise disjoint and strictly inside.
struct GeometrySpec {
    Polygon domain;
    std::vector<Polygon> inclusions;
};

namespace detail {

class Delaunay {
 public:
    explicit Delaunay(std::vector<Point2> points) : pts_(std::move(points)) {
        n_real_ = (int)pts_.size();
        double x0 = pts_[0].x, x1 = x0, y0 = pts_[0].y, y1 = y0;
        for (const auto& p : pts_) {
            x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
        }
        const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
        const double r = std::max(x1 - x0, y1 - y0) + 1.0;
        pts_.push_back({cx - 8 * r, cy - 4 * r});
        pts_.push_back({cx + 8 * r, cy - 4 * r});
        pts_.push_back({cx, cy + 8 * r});
        tris_.push_back({{n_real_, n_real_ + 1, n_real_ + 2}, {-1, -1, -1}});
        alive_.push_back(1);
        for (int i = 0; i < n_real_; ++i)
            insert(i);
    }

    /// Triangles of the final Delaunay triangulation (super-triangle removed).
    std::vector<std::array<int, 3>> triangles() const {
        std::vector<std::array<int, 3>> out;
        for (std::size_t t = 0; t < tris_.size(); ++t) {
            if (!alive_[t])
                continue;
            const auto& v = tris_[t].v;
            if (v[0] < n_real_ && v[1] < n_real_ && v[2] < n_real_)
                out.push_back(v);
        }
        return out;
    }

 private:
    struct Tri {
        std::array<int, 3> v;   // CCW
        std::array<int, 3> n;   // n[k] faces edge (v[(k+1)%3], v[(k+2)%3])
    };

    int locate(Point2 p) const {
        int t = last_;
        if (!alive_[(std::size_t)t])
            t = first_alive();
        const int cap = 4 * (int)tris_.size() + 16;
        for (int steps = 0; steps < cap; ++steps) {
            bool moved = false;
            for (int k = 0; k < 3 && !moved; ++k) {
                const Point2 a = pts_[(std::size_t)tris_[(std::size_t)t].v[(k + 1) % 3]];
                const Point2 b = pts_[(std::size_t)tris_[(std::size_t)t].v[(k + 2) % 3]];
                if (orient2d(a, b, p) < 0.0) {
                    const int nb = tris_[(std::size_t)t].n[k];
                    if (nb < 0)
                        throw DegenerateGeometry("triangulation walk left the domain");
                    t = nb;
                    moved = true;
                }
            }
            if (!moved)
                return t;
        }
        // fall back to an exhaustive scan (exact-tie walks can cycle)
        for (std::size_t t2 = 0; t2 < tris_.size(); ++t2) {
            if (!alive_[t2])
                continue;
            bool inside = true;
            for (int k = 0; k < 3; ++k) {
                const Point2 a = pts_[(std::size_t)tris_[t2].v[(k + 1) % 3]];
                const Point2 b = pts_[(std::size_t)tris_[t2].v[(k + 2) % 3]];
                if (orient2d(a, b, p) < 0.0) { inside = false; break; }
            }
            if (inside)
                return (int)t2;
        }
        throw DegenerateGeometry("point location failed");
    }

    int first_alive() const {
        for (std::size_t t = 0; t < tris_.size(); ++t)
            if (alive_[t])
                return (int)t;
        throw DegenerateGeometry("empty triangulation");
    }

    bool in_circle(int t, Point2 p) const {
        const auto& v = tris_[(std::size_t)t].v;
        return incircle(pts_[(std::size_t)v[0]], pts_[(std::size_t)v[1]], pts_[(std::size_t)v[2]], p) > 0.0;
    }

    void insert(int pi) {
        const Point2 p = pts_[(std::size_t)pi];
        const int seed = locate(p);

        // grow the cavity of circumcircle-violating triangles
        std::vector<int> cavity;
        std::vector<char> in_cavity(tris_.size(), 0);
        std::vector<int> stack{seed};
        in_cavity[(std::size_t)seed] = 1;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            cavity.push_back(t);
            for (int k = 0; k < 3; ++k) {
                const int nb = tris_[(std::size_t)t].n[k];
                if (nb >= 0 && !in_cavity[(std::size_t)nb] && in_circle(nb, p)) {
                    in_cavity[(std::size_t)nb] = 1;
                    stack.push_back(nb);
                }
            }
        }

        // boundary edges of the cavity, oriented as they appear in cavity triangles
        struct Rim { int u, v, outer, outer_k; };
        std::vector<Rim> rim;
        for (int t : cavity) {
            for (int k = 0; k < 3; ++k) {
                const int nb = tris_[(std::size_t)t].n[k];
                if (nb < 0 || !in_cavity[(std::size_t)nb]) {
                    const int u = tris_[(std::size_t)t].v[(k + 1) % 3];
                    const int v = tris_[(std::size_t)t].v[(k + 2) % 3];
                    int outer_k = -1;
                    if (nb >= 0) {
                        for (int j = 0; j < 3; ++j)
                            if (tris_[(std::size_t)nb].n[j] == t)
                                outer_k = j;
                    }
                    rim.push_back({u, v, nb, outer_k});
                }
            }
        }

        for (int t : cavity)
            alive_[(std::size_t)t] = 0;
        free_.insert(free_.end(), cavity.begin(), cavity.end());

        // fan the rim to the new point
        std::unordered_map<int, int> tri_starting_at; // rim edge start vertex -> new tri
        std::vector<int> created;
        created.reserve(rim.size());
        for (const auto& e : rim) {
            const int t = alloc();
            tris_[(std::size_t)t] = {{e.u, e.v, pi}, {-1, -1, -1}};
            tris_[(std::size_t)t].n[2] = e.outer; // across (u, v)
            if (e.outer >= 0 && e.outer_k >= 0)
                tris_[(std::size_t)e.outer].n[(std::size_t)e.outer_k] = t;
            tri_starting_at[e.u] = t;
            created.push_back(t);
        }
        for (const auto& e : rim) {
            const int t = tri_starting_at[e.u];
            const int succ = tri_starting_at[e.v]; // shares edge (v, pi)
            tris_[(std::size_t)t].n[0] = succ;      // across (v[1], v[2]) = (v, pi)
            tris_[(std::size_t)succ].n[1] = t;      // across (v[2], v[0]) = (pi, u_succ=v)
        }
        last_ = created.empty() ? first_alive() : created.back();
    }

    int alloc() {
        if (!free_.empty()) {
            const int t = free_.back();
            free_.pop_back();
            alive_[(std::size_t)t] = 1;
            return t;
        }
        tris_.push_back({});
        alive_.push_back(1);
        return (int)tris_.size() - 1;
    }

    std::vector<Point2> pts_;
    std::vector<Tri> tris_;
    std::vector<char> alive_;
    std::vector<int> free_;
    int n_real_ = 0;
    int last_ = 0;
};

/// One Lawson pass over all unlocked interior edges; returns the flip count.
inline int lawson_pass(const std::vector<Point2>& pts, std::vector<std::array<int, 3>>& tris,
                       const std::set<std::uint64_t>& locked) {
    std::map<std::uint64_t, std::array<int, 2>> edge_tris;
    for (int t = 0; t < (int)tris.size(); ++t)
        for (int k = 0; k < 3; ++k) {
            auto& e = edge_tris[edge_key(tris[(std::size_t)t][(std::size_t)k],
                                         tris[(std::size_t)t][(std::size_t)((k + 1) % 3)])];
            if (e[0] == 0 && e[1] == 0) e[0] = t + 1;
            else e[1] = t + 1;
        }
    int flips = 0;
    std::vector<char> touched(tris.size(), 0);
    for (const auto& [key, e] : edge_tris) {
        if (e[1] == 0 || locked.count(key))
            continue;
        const int t1 = e[0] - 1, t2 = e[1] - 1;
        if (touched[(std::size_t)t1] || touched[(std::size_t)t2])
            continue;
        const int a = (int)(key & 0xffffffffu);
        const int b = (int)(key >> 32);
        auto apex = [&](int t) {
            for (int k = 0; k < 3; ++k) {
                const int v = tris[(std::size_t)t][(std::size_t)k];
                if (v != a && v != b)
                    return v;
            }
            return -1;
        };
        const int c = apex(t1);
        const int d = apex(t2);
        if (c < 0 || d < 0 || c == d)
            continue;
        if (incircle(pts[(std::size_t)a], pts[(std::size_t)b], pts[(std::size_t)c], pts[(std::size_t)d]) *
                orient2d(pts[(std::size_t)a], pts[(std::size_t)b], pts[(std::size_t)c]) <= 0.0)
            continue;
        // flip diagonal (a,b) -> (c,d), keeping both triangles CCW
        auto ccw = [&](int u, int v, int w) {
            return orient2d(pts[(std::size_t)u], pts[(std::size_t)v], pts[(std::size_t)w]) > 0.0;
        };
        std::array<int, 3> n1{}, n2{};
        if (ccw(a, d, c) && ccw(d, b, c)) {
            n1 = {a, d, c};
            n2 = {d, b, c};
        } else if (ccw(a, c, d) && ccw(c, b, d)) {
            n1 = {a, c, d};
            n2 = {c, b, d};
        } else {
            continue; // non-convex quad
        }
        tris[(std::size_t)t1] = n1;
        tris[(std::size_t)t2] = n2;
        touched[(std::size_t)t1] = touched[(std::size_t)t2] = 1;
        ++flips;
    }
    return flips;
}

/// Jacobi smoothing of the movable vertices towards their neighbor centroid.
/// Moves that would invert or collapse an incident triangle are reverted.
inline void smooth_pass(std::vector<Point2>& pts, const std::vector<std::array<int, 3>>& tris,
                        const std::vector<char>& movable) {
    const std::size_t n = pts.size();
    std::vector<Point2> acc(n, {0.0, 0.0});
    std::vector<int> cnt(n, 0);
    for (const auto& t : tris)
        for (int k = 0; k < 3; ++k) {
            const int u = t[(std::size_t)k];
            const int v = t[(std::size_t)((k + 1) % 3)];
            acc[(std::size_t)u] = acc[(std::size_t)u] + pts[(std::size_t)v];
            cnt[(std::size_t)u]++;
            acc[(std::size_t)v] = acc[(std::size_t)v] + pts[(std::size_t)u];
            cnt[(std::size_t)v]++;
        }
    std::vector<Point2> old = pts;
    for (std::size_t i = 0; i < n; ++i)
        if (movable[i] && cnt[i] > 0)
            pts[i] = (1.0 / cnt[i]) * acc[i];
    // revert vertices of any triangle that degenerated
    for (int pass = 0; pass < 8; ++pass) {
        bool bad = false;
        for (const auto& t : tris) {
            const double a2 = orient2d(pts[(std::size_t)t[0]], pts[(std::size_t)t[1]], pts[(std::size_t)t[2]]);
            const double a2_old =
                orient2d(old[(std::size_t)t[0]], old[(std::size_t)t[1]], old[(std::size_t)t[2]]);
            if (a2 < 0.25 * a2_old) {
                for (int k = 0; k < 3; ++k)
                    if (movable[(std::size_t)t[(std::size_t)k]])
                        pts[(std::size_t)t[(std::size_t)k]] = old[(std::size_t)t[(std::size_t)k]];
                bad = true;
            }
        }
        if (!bad)
            break;
    }
}

struct ChainData {
    std::vector<Point2> points;                       // chain points of all polygons
    std::vector<std::array<int, 3>> segments;         // (a, b, boundary tag)
    std::vector<std::array<Point2, 2>> segment_geom;  // for distance queries
};

inline ChainData build_chains(const GeometrySpec& geo, double h) {
    ChainData out;
    // split edges into pieces of at most 1.1h; the grid clearance of 0.6h then
    // strictly covers every diametral half-length (<= 0.55h), which is what
    // keeps each subsegment an edge of the Delaunay triangulation.  Chains of
    // a sharply-turning polygon that end up finer than 0.5h would leave
    // sliver "ear" triangles along the ring, so they are rejected; gently
    // turning chains (turn <= 20 degrees per corner) have no empty ear
    // circumcircles and may be arbitrarily fine.
    auto add_polygon = [&](const Polygon& poly, int tag) {
        double max_turn_deg = 0.0;
        for (std::size_t i = 0; i < poly.pts.size(); ++i) {
            const Point2 u = poly.pts[(i + 1) % poly.pts.size()] - poly.pts[i];
            const Point2 v = poly.pts[(i + 2) % poly.pts.size()] - poly.pts[(i + 1) % poly.pts.size()];
            const double c = dot(u, v) / (norm(u) * norm(v));
            max_turn_deg = std::max(max_turn_deg,
                                    std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI);
        }
        std::vector<int> loop;
        for (std::size_t i = 0; i < poly.pts.size(); ++i) {
            const Point2 p = poly.pts[i];
            const Point2 q = poly.pts[(i + 1) % poly.pts.size()];
            const double len = distance(p, q);
            const int pieces = std::max(1, (int)std::ceil(len / (1.1 * h) - 1e-12));
            if (len / pieces < 0.5 * h && max_turn_deg > 20.0)
                throw DegenerateGeometry(
                    "polygon resolution is finer than half the mesh spacing; coarsen the "
                    "polygon or reduce mesh.h");
            loop.push_back((int)out.points.size());
            out.points.push_back(p);
            for (int j = 1; j < pieces; ++j) {
                const double s = (double)j / pieces;
                loop.push_back((int)out.points.size());
                out.points.push_back({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)});
            }
        }
        const int n = (int)loop.size();
        for (int i = 0; i < n; ++i) {
            const int a = loop[(std::size_t)i];
            const int b = loop[(std::size_t)((i + 1) % n)];
            out.segments.push_back({a, b, tag});
            out.segment_geom.push_back({out.points[(std::size_t)a], out.points[(std::size_t)b]});
        }
    };
    add_polygon(geo.domain, kOuterBoundaryTag);
    for (std::size_t m = 0; m < geo.inclusions.size(); ++m)
        add_polygon(geo.inclusions[m], (int)m + 1);
    return out;
}

inline void validate_geometry(const GeometrySpec& geo, double h) {
    if (!(h > 0.0))
        throw DegenerateGeometry("target_h must be positive");
    auto check_polygon = [](const Polygon& poly, const char* what) {
        if (poly.pts.size() < 3)
            throw DegenerateGeometry(std::string(what) + ": fewer than 3 vertices");
        for (const auto& p : poly.pts)
            if (!std::isfinite(p.x) || !std::isfinite(p.y))
                throw DegenerateGeometry(std::string(what) + ": non-finite coordinate");
        if (!poly.is_simple())
            throw DegenerateGeometry(std::string(what) + ": self-intersecting polygon");
        if (std::abs(poly.signed_area()) < 1e-12)
            throw DegenerateGeometry(std::string(what) + ": near-zero area");
        if (poly.min_corner_angle_deg() < 70.0)
            throw DegenerateGeometry(std::string(what) +
                                     ": corner angle below 70 degrees is not supported");
    };
    check_polygon(geo.domain, "domain");
    // convexity of the (CCW) domain
    {
        const auto& pts = geo.domain.pts;
        const std::size_t n = pts.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (orient2d(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) < 0.0)
                throw DegenerateGeometry("domain polygon must be convex");
        }
    }
    for (std::size_t m = 0; m < geo.inclusions.size(); ++m) {
        check_polygon(geo.inclusions[m], ("inclusion " + std::to_string(m + 1)).c_str());
        for (const auto& p : geo.inclusions[m].pts)
            if (!geo.domain.contains(p))
                throw InclusionOverlap("inclusion " + std::to_string(m + 1) +
                                       " is not strictly inside the domain");
    }
    // pairwise disjoint closures, nothing touching the outer boundary
    auto edges_of = [](const Polygon& poly) {
        std::vector<std::array<Point2, 2>> es;
        for (std::size_t i = 0; i < poly.pts.size(); ++i)
            es.push_back({poly.pts[i], poly.pts[(i + 1) % poly.pts.size()]});
        return es;
    };
    const auto dom_edges = edges_of(geo.domain);
    std::vector<std::vector<std::array<Point2, 2>>> incl_edges;
    for (const auto& inc : geo.inclusions)
        incl_edges.push_back(edges_of(inc));
    for (std::size_t i = 0; i < geo.inclusions.size(); ++i) {
        for (const auto& e : incl_edges[i])
            for (const auto& d : dom_edges)
                if (segments_intersect(e[0], e[1], d[0], d[1]))
                    throw InclusionOverlap("inclusion " + std::to_string(i + 1) +
                                           " touches the outer boundary");
        for (std::size_t j = i + 1; j < geo.inclusions.size(); ++j) {
            for (const auto& e : incl_edges[i])
                for (const auto& f : incl_edges[j])
                    if (segments_intersect(e[0], e[1], f[0], f[1]))
                        throw InclusionOverlap("inclusions " + std::to_string(i + 1) + " and " +
                                               std::to_string(j + 1) + " intersect");
            if (geo.inclusions[j].contains(geo.inclusions[i].pts[0]) ||
                geo.inclusions[i].contains(geo.inclusions[j].pts[0]))
                throw InclusionOverlap("inclusion nested inside another inclusion");
        }
    }
    // all boundary curves must be resolvable at this h: segments of different
    // chains, and same-chain segments separated by a real turn, need clearance
    // for the conforming point layout
    struct Seg { Point2 a, b; int poly; int idx; int npoly; };
    std::vector<Seg> segs;
    std::vector<std::vector<double>> turn_deg; // per polygon, |exterior angle| per corner
    auto push_edges = [&](const Polygon& poly, int pid) {
        const int n = (int)poly.pts.size();
        std::vector<double> turns((std::size_t)n, 0.0);
        for (int i = 0; i < n; ++i) {
            segs.push_back({poly.pts[(std::size_t)i], poly.pts[(std::size_t)((i + 1) % n)], pid, i, n});
            const Point2 u = poly.pts[(std::size_t)((i + 1) % n)] - poly.pts[(std::size_t)i];
            const Point2 v = poly.pts[(std::size_t)((i + 2) % n)] - poly.pts[(std::size_t)((i + 1) % n)];
            const double c = dot(u, v) / (norm(u) * norm(v));
            turns[(std::size_t)((i + 1) % n)] = std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / M_PI;
        }
        turn_deg.push_back(std::move(turns));
    };
    push_edges(geo.domain, 0);
    for (std::size_t m = 0; m < geo.inclusions.size(); ++m)
        push_edges(geo.inclusions[m], (int)m + 1);
    // same-chain pair is "locally flat" if the boundary turns at most ~60
    // degrees along one of the two arcs between the segments (66 covers the
    // exact-60 turn of regular 12-gons against rounding; safety of the skip
    // only needs the turn to stay below 90)
    auto locally_flat = [&](const Seg& s1, const Seg& s2) {
        const auto& turns = turn_deg[(std::size_t)s1.poly];
        const int n = s1.npoly;
        int lo = s1.idx, hi = s2.idx;
        if (lo > hi)
            std::swap(lo, hi);
        double fwd = 0.0, bwd = 0.0;
        for (int k = lo + 1; k <= hi; ++k)
            fwd += turns[(std::size_t)(k % n)];
        for (int k = hi + 1; k <= lo + n; ++k)
            bwd += turns[(std::size_t)(k % n)];
        return std::min(fwd, bwd) <= 66.0;
    };
    const double min_gap = 0.8 * h;
    for (std::size_t i = 0; i < segs.size(); ++i)
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            if (segs[i].poly == segs[j].poly) {
                const int n = segs[i].npoly;
                const int diff = std::abs(segs[i].idx - segs[j].idx);
                if (std::min(diff, n - diff) <= 1) // edges sharing a corner
                    continue;
                if (locally_flat(segs[i], segs[j]))
                    continue;
            }
            if (segment_segment_distance(segs[i].a, segs[i].b, segs[j].a, segs[j].b) < min_gap)
                throw DegenerateGeometry(
                    "target_h too coarse for the gap between boundary curves; reduce mesh.h "
                    "or coarsen the polygon resolution");
        }
}

} // namespace detail

/// Builds a conforming triangulation of the geometry at spacing `target_h`.
/// Every inclusion polygon edge becomes a union of mesh edges, triangles carry
/// subdomain tags and the mesh satisfies a 20-degree minimum angle floor.
inline Mesh generate_mesh(const GeometrySpec& input, double target_h) {
    GeometrySpec geo = input;
    geo.domain.make_ccw();
    for (auto& inc : geo.inclusions)
        inc.make_ccw();
    detail::validate_geometry(geo, target_h);

    const double h = target_h;
    detail::ChainData chains = detail::build_chains(geo, h);

    // interior seed points: offset rows centered on the bounding box so that
    // axis-aligned reflection symmetries of the input survive exactly
    double x0 = geo.domain.pts[0].x, x1 = x0, y0 = geo.domain.pts[0].y, y1 = y0;
    for (const auto& p : geo.domain.pts) {
        x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
    }
    const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
    const double dy = h * std::sqrt(3.0) / 2.0;
    const double clearance = 0.6 * h;
    std::vector<Point2> points = chains.points;
    const int n_chain = (int)points.size();
    const int imax = (int)std::ceil((y1 - y0) / (2.0 * dy)) + 1;
    const int jmax = (int)std::ceil((x1 - x0) / (2.0 * h)) + 2;
    for (int i = -imax; i <= imax; ++i) {
        const double y = cy + i * dy;
        if (y < y0 || y > y1)
            continue;
        const double off = (i % 2 == 0) ? 0.0 : 0.5 * h;
        for (int j = -jmax; j <= jmax; ++j) {
            const double x = (j >= 0) ? cx + (j * h + off) : cx - (-(double)j * h - off);
            if (x < x0 || x > x1)
                continue;
            const Point2 p{x, y};
            if (!geo.domain.contains(p))
                continue;
            bool clear = true;
            for (const auto& s : chains.segment_geom)
                if (segment_point_distance(s[0], s[1], p) <= clearance) {
                    clear = false;
                    break;
                }
            if (clear)
                points.push_back(p);
        }
    }
    // seed each inclusion centroid so that small inclusions (whose cleared
    // interior may miss every grid point) still get an interior vertex
    for (const auto& inc : geo.inclusions) {
        Point2 c{0.0, 0.0};
        for (const auto& p : inc.pts)
            c = c + p;
        c = (1.0 / (double)inc.pts.size()) * c;
        bool clear = inc.contains(c);
        for (const auto& s : chains.segment_geom)
            if (clear && segment_point_distance(s[0], s[1], c) <= clearance)
                clear = false;
        for (const auto& p : points)
            if (clear && distance(p, c) <= 0.4 * h)
                clear = false;
        if (clear)
            points.push_back(c);
    }

    detail::Delaunay dt(points);
    std::vector<std::array<int, 3>> tris = dt.triangles();

    std::set<std::uint64_t> locked;
    for (const auto& s : chains.segments)
        locked.insert(detail::edge_key(s[0], s[1]));
    {
        std::set<std::uint64_t> present;
        for (const auto& t : tris)
            for (int k = 0; k < 3; ++k)
                present.insert(detail::edge_key(t[(std::size_t)k], t[(std::size_t)((k + 1) % 3)]));
        for (const auto& s : chains.segments)
            if (!present.count(detail::edge_key(s[0], s[1])))
                throw DegenerateGeometry(
                    "conforming triangulation failed: a boundary segment was not recovered");
    }

    std::vector<char> movable(points.size(), 0);
    for (std::size_t i = (std::size_t)n_chain; i < points.size(); ++i)
        movable[i] = 1;
    for (int round = 0; round < 3; ++round) {
        detail::smooth_pass(points, tris, movable);
        for (int pass = 0; pass < 50; ++pass)
            if (detail::lawson_pass(points, tris, locked) == 0)
                break;
    }

    Mesh mesh;
    mesh.vertices = points;
    mesh.triangles.reserve(tris.size());
    for (const auto& t : tris) {
        MeshTriangle mt;
        mt.v = t;
        if (orient2d(points[(std::size_t)t[0]], points[(std::size_t)t[1]], points[(std::size_t)t[2]]) < 0.0)
            std::swap(mt.v[1], mt.v[2]);
        const Point2 centroid = (1.0 / 3.0) * (points[(std::size_t)mt.v[0]] +
                                               points[(std::size_t)mt.v[1]] +
                                               points[(std::size_t)mt.v[2]]);
        mt.tag = 0;
        for (std::size_t m = 0; m < geo.inclusions.size(); ++m)
            if (geo.inclusions[m].contains(centroid)) {
                mt.tag = (int)m + 1;
                break;
            }
        mesh.triangles.push_back(mt);
    }
    for (const auto& s : chains.segments)
        mesh.boundary_edges.push_back({s[0], s[1], s[2]});

    const double min_angle = mesh.min_angle_deg();
    if (min_angle < 20.0)
        throw DegenerateGeometry("mesh quality floor violated: minimum angle " +
                                 std::to_string(min_angle) + " degrees");
    // circumradius bound: diameter of every circumcircle stays below 2*target_h
    for (const auto& t : mesh.triangles) {
        const Point2 a = points[(std::size_t)t.v[0]];
        const Point2 b = points[(std::size_t)t.v[1]];
        const Point2 c = points[(std::size_t)t.v[2]];
        const double area2 = orient2d(a, b, c);
        const double rr = distance(a, b) * distance(b, c) * distance(c, a) / (2.0 * area2);
        if (rr > h * (1.0 + 1e-9))
            throw DegenerateGeometry("mesh size floor violated: circumradius exceeds target_h");
    }
    validate_mesh(mesh);
    return mesh;
}

} // namespace hcx
