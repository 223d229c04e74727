#pragma once

#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hcx/geometry.hpp"

namespace hcx {

constexpr int kOuterBoundaryTag = -1;

struct MeshTriangle {
    std::array<int, 3> v{};
    int tag = 0; // 0 = background, m >= 1 = inclusion m
};

struct MeshBoundaryEdge {
    int a = 0;
    int b = 0;
    int tag = kOuterBoundaryTag; // -1 = outer boundary, m >= 1 = interface of inclusion m
};

/// Conforming triangulation with per-triangle subdomain tags.  Triangles are
/// counterclockwise; every inclusion boundary is resolved by mesh edges and
/// recorded in `boundary_edges` together with the outer boundary.
struct Mesh {
    std::vector<Point2> vertices;
    std::vector<MeshTriangle> triangles;
    std::vector<MeshBoundaryEdge> boundary_edges;

    int num_inclusions() const {
        int m = 0;
        for (const auto& t : triangles)
            m = std::max(m, t.tag);
        return m;
    }

    double triangle_area(int t) const {
        const auto& tri = triangles[static_cast<std::size_t>(t)];
        return 0.5 * orient2d(vertices[(std::size_t)tri.v[0]], vertices[(std::size_t)tri.v[1]],
                              vertices[(std::size_t)tri.v[2]]);
    }

    double total_area() const {
        double a = 0.0;
        for (int t = 0; t < (int)triangles.size(); ++t)
            a += triangle_area(t);
        return a;
    }

    double subdomain_area(int tag) const {
        double a = 0.0;
        for (int t = 0; t < (int)triangles.size(); ++t)
            if (triangles[(std::size_t)t].tag == tag)
                a += triangle_area(t);
        return a;
    }

    /// Smallest triangle corner angle in degrees.
    double min_angle_deg() const {
        double best = 180.0;
        for (const auto& t : triangles) {
            for (int k = 0; k < 3; ++k) {
                const Point2 a = vertices[(std::size_t)t.v[k]];
                const Point2 b = vertices[(std::size_t)t.v[(k + 1) % 3]];
                const Point2 c = vertices[(std::size_t)t.v[(k + 2) % 3]];
                const Point2 u = b - a;
                const Point2 w = c - a;
                const double cosv = dot(u, w) / (norm(u) * norm(w));
                best = std::min(best, std::acos(std::clamp(cosv, -1.0, 1.0)) * 180.0 / M_PI);
            }
        }
        return best;
    }

    double max_edge_length() const {
        double best = 0.0;
        for (const auto& t : triangles)
            for (int k = 0; k < 3; ++k)
                best = std::max(best, distance(vertices[(std::size_t)t.v[k]],
                                               vertices[(std::size_t)t.v[(k + 1) % 3]]));
        return best;
    }
};

namespace detail {

inline std::uint64_t edge_key(int a, int b) {
    const std::uint64_t lo = (std::uint64_t)std::min(a, b);
    const std::uint64_t hi = (std::uint64_t)std::max(a, b);
    return (hi << 32) | lo;
}

} // namespace detail

/// Checks every structural invariant of a Mesh; throws InvalidTopology with a
/// description of the first violation found.
inline void validate_mesh(const Mesh& mesh) {
    const int nv = (int)mesh.vertices.size();
    if (nv < 3 || mesh.triangles.empty())
        throw InvalidTopology("mesh has too few vertices or no triangles");
    for (const auto& p : mesh.vertices)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw InvalidTopology("non-finite vertex coordinate");

    const int M = mesh.num_inclusions();
    std::vector<char> tag_seen((std::size_t)M + 1, 0);

    // edge -> (count, tags of incident triangles)
    std::map<std::uint64_t, std::array<int, 3>> edges; // {count, tag0, tag1}
    for (const auto& t : mesh.triangles) {
        if (t.v[0] == t.v[1] || t.v[1] == t.v[2] || t.v[0] == t.v[2])
            throw InvalidTopology("triangle with repeated vertex");
        for (int k = 0; k < 3; ++k)
            if (t.v[k] < 0 || t.v[k] >= nv)
                throw InvalidTopology("triangle references missing vertex");
        if (t.tag < 0 || t.tag > M)
            throw InvalidTopology("triangle tag out of range");
        tag_seen[(std::size_t)t.tag] = 1;
        if (orient2d(mesh.vertices[(std::size_t)t.v[0]], mesh.vertices[(std::size_t)t.v[1]],
                     mesh.vertices[(std::size_t)t.v[2]]) <= 0.0)
            throw InvalidTopology("triangle not counterclockwise or degenerate");
        for (int k = 0; k < 3; ++k) {
            auto& e = edges[detail::edge_key(t.v[k], t.v[(k + 1) % 3])];
            if (e[0] == 2)
                throw InvalidTopology("edge shared by more than two triangles");
            e[(std::size_t)(1 + e[0])] = t.tag;
            e[0]++;
        }
    }
    for (int m = 0; m <= M; ++m)
        if (!tag_seen[(std::size_t)m])
            throw InvalidTopology("subdomain tags are not contiguous");

    std::map<std::uint64_t, int> recorded; // edge -> boundary tag
    for (const auto& be : mesh.boundary_edges) {
        if (be.a < 0 || be.a >= nv || be.b < 0 || be.b >= nv || be.a == be.b)
            throw InvalidTopology("boundary edge references invalid vertex");
        if (be.tag != kOuterBoundaryTag && (be.tag < 1 || be.tag > M))
            throw InvalidTopology("boundary edge tag out of range");
        if (!recorded.emplace(detail::edge_key(be.a, be.b), be.tag).second)
            throw InvalidTopology("duplicate boundary edge record");
    }

    for (const auto& [key, info] : edges) {
        auto rec = recorded.find(key);
        if (info[0] == 1) {
            // topological boundary: must be an outer boundary edge
            if (rec == recorded.end() || rec->second != kOuterBoundaryTag)
                throw InvalidTopology("boundary edge of the triangulation not tagged as outer");
            if (info[1] != 0)
                throw InvalidTopology("inclusion triangle touches the outer boundary");
        } else {
            const int ta = info[1], tb = info[2];
            if (ta == tb) {
                if (rec != recorded.end())
                    throw InvalidTopology("interior edge wrongly recorded as boundary");
            } else {
                if (ta != 0 && tb != 0)
                    throw InvalidTopology("two inclusions share an edge");
                const int m = std::max(ta, tb);
                if (rec == recorded.end() || rec->second != m)
                    throw InvalidTopology("interface edge missing or mistagged");
            }
        }
    }
    for (const auto& [key, tag] : recorded)
        if (edges.find(key) == edges.end())
            throw InvalidTopology("boundary edge record does not match any mesh edge");

    // connectivity: background and each inclusion must be edge-connected
    const int nt = (int)mesh.triangles.size();
    std::map<std::uint64_t, std::array<int, 2>> edge_tris;
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k) {
            auto& et = edge_tris[detail::edge_key(mesh.triangles[(std::size_t)t].v[k],
                                                  mesh.triangles[(std::size_t)t].v[(k + 1) % 3])];
            if (et[0] == 0 && et[1] == 0) { et[0] = t + 1; }
            else { et[1] = t + 1; }
        }
    std::vector<std::vector<int>> tri_nbrs((std::size_t)nt);
    for (const auto& [key, et] : edge_tris)
        if (et[1] != 0) {
            tri_nbrs[(std::size_t)et[0] - 1].push_back(et[1] - 1);
            tri_nbrs[(std::size_t)et[1] - 1].push_back(et[0] - 1);
        }
    std::vector<int> comp((std::size_t)nt, -1);
    for (int tag = 0; tag <= M; ++tag) {
        int seed = -1;
        for (int t = 0; t < nt && seed < 0; ++t)
            if (mesh.triangles[(std::size_t)t].tag == tag)
                seed = t;
        std::vector<int> stack{seed};
        comp[(std::size_t)seed] = tag;
        std::size_t visited = 1;
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            for (int u : tri_nbrs[(std::size_t)t])
                if (comp[(std::size_t)u] < 0 && mesh.triangles[(std::size_t)u].tag == tag) {
                    comp[(std::size_t)u] = tag;
                    stack.push_back(u);
                    ++visited;
                }
        }
        std::size_t expected = 0;
        for (const auto& t : mesh.triangles)
            if (t.tag == tag)
                ++expected;
        if (visited != expected)
            throw InvalidTopology(tag == 0 ? "background is not edge-connected"
                                           : "inclusion is not edge-connected");
    }
}

// ---------------------------------------------------------------------------
// Text format, one record per line:
//   v <x> <y>
//   t <i> <j> <k> <tag>
//   be <i> <j> <tag>
// `#` starts a comment.  Coordinates use full-precision decimals so that
// load(save(m)) is bit-exact.
// ---------------------------------------------------------------------------

inline std::string save_mesh(const Mesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 48 + mesh.triangles.size() * 24);
    char buf[128];
    for (const auto& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", p.x, p.y);
        out += buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "t %d %d %d %d\n", t.v[0], t.v[1], t.v[2], t.tag);
        out += buf;
    }
    for (const auto& e : mesh.boundary_edges) {
        std::snprintf(buf, sizeof buf, "be %d %d %d\n", e.a, e.b, e.tag);
        out += buf;
    }
    return out;
}

inline Mesh load_mesh(const std::string& text) {
    Mesh mesh;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("mesh parse error at line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind))
            continue;
        if (kind == "v") {
            Point2 p;
            if (!(ls >> p.x >> p.y))
                fail("expected `v <x> <y>`");
            mesh.vertices.push_back(p);
        } else if (kind == "t") {
            MeshTriangle t;
            if (!(ls >> t.v[0] >> t.v[1] >> t.v[2] >> t.tag))
                fail("expected `t <i> <j> <k> <tag>`");
            mesh.triangles.push_back(t);
        } else if (kind == "be") {
            MeshBoundaryEdge e;
            if (!(ls >> e.a >> e.b >> e.tag))
                fail("expected `be <i> <j> <tag>`");
            mesh.boundary_edges.push_back(e);
        } else {
            fail("unknown record `" + kind + "`");
        }
        std::string rest;
        if (ls >> rest)
            fail("trailing tokens");
    }
    if (mesh.vertices.empty() && mesh.triangles.empty())
        throw ParseError("mesh parse error: empty input");
    try {
        validate_mesh(mesh);
    } catch (const InvalidTopology& e) {
        throw ParseError(std::string("mesh parse error: ") + e.what());
    }
    return mesh;
}

inline void save_mesh_file(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << save_mesh(mesh);
    if (!out)
        throw IoError("write failed: " + path);
}

inline Mesh load_mesh_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_mesh(ss.str());
}

/// Red refinement: every triangle splits into four via edge midpoints.  Tags
/// and boundary edge records are inherited; angles are preserved exactly.
inline Mesh refine_uniform(const Mesh& mesh) {
    Mesh out;
    out.vertices = mesh.vertices;
    std::map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto key = detail::edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end())
            return it->second;
        const Point2 pa = mesh.vertices[(std::size_t)a];
        const Point2 pb = mesh.vertices[(std::size_t)b];
        out.vertices.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
        const int idx = (int)out.vertices.size() - 1;
        midpoint.emplace(key, idx);
        return idx;
    };
    for (const auto& t : mesh.triangles) {
        const int a = t.v[0], b = t.v[1], c = t.v[2];
        const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        out.triangles.push_back({{a, ab, ca}, t.tag});
        out.triangles.push_back({{ab, b, bc}, t.tag});
        out.triangles.push_back({{ca, bc, c}, t.tag});
        out.triangles.push_back({{ab, bc, ca}, t.tag});
    }
    for (const auto& e : mesh.boundary_edges) {
        const int m = mid(e.a, e.b);
        out.boundary_edges.push_back({e.a, m, e.tag});
        out.boundary_edges.push_back({m, e.b, e.tag});
    }
    return out;
}

/// Merges inclusion `m` into the background: its triangles become tag 0, its
/// interface records disappear and higher inclusion indices shift down by one.
inline Mesh retag_as_background(const Mesh& mesh, int m) {
    Mesh out = mesh;
    out.boundary_edges.clear();
    for (auto& t : out.triangles) {
        if (t.tag == m)
            t.tag = 0;
        else if (t.tag > m)
            --t.tag;
    }
    for (const auto& e : mesh.boundary_edges) {
        if (e.tag == m)
            continue;
        MeshBoundaryEdge ne = e;
        if (ne.tag > m)
            --ne.tag;
        out.boundary_edges.push_back(ne);
    }
    return out;
}

} // namespace hcx
