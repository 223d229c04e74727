#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hcx/mesh.hpp"
#include "hcx/sparse.hpp"
#include "hcx/subdomain.hpp"

namespace hcx {

/// Nodal coefficient vector over a mesh.
struct FEFunction {
    const Mesh* mesh = nullptr;
    std::vector<double> values;

    double& operator[](int i) { return values[(std::size_t)i]; }
    double operator[](int i) const { return values[(std::size_t)i]; }
    int size() const { return (int)values.size(); }
};

inline FEFunction zero_function(const Mesh& mesh) {
    return FEFunction{&mesh, std::vector<double>(mesh.vertices.size(), 0.0)};
}

inline bool same_mesh(const FEFunction& a, const FEFunction& b) {
    if (a.mesh == b.mesh)
        return true;
    if (!a.mesh || !b.mesh)
        return false;
    return a.mesh->vertices.size() == b.mesh->vertices.size() &&
           a.mesh->triangles.size() == b.mesh->triangles.size();
}

/// Piecewise-constant forcing per subdomain plus an affine boundary datum
/// g(x, y) = g0 + g1 x + g2 y.
struct PiecewiseData {
    std::vector<double> forcing; // [tag] for tag = 0..M; missing entries are 0
    double g0 = 0.0, g1 = 0.0, g2 = 0.0;

    double forcing_value(int tag) const {
        return (tag >= 0 && tag < (int)forcing.size()) ? forcing[(std::size_t)tag] : 0.0;
    }
    double g(Point2 p) const { return g0 + g1 * p.x + g2 * p.y; }
    bool has_forcing() const {
        for (double f : forcing)
            if (f != 0.0)
                return true;
        return false;
    }
};

namespace detail {

struct ElementGeometry {
    std::array<Point2, 3> grad; // hat-function gradients
    double area;
};

inline ElementGeometry element_geometry(const Mesh& mesh, const MeshTriangle& t) {
    const Point2 a = mesh.vertices[(std::size_t)t.v[0]];
    const Point2 b = mesh.vertices[(std::size_t)t.v[1]];
    const Point2 c = mesh.vertices[(std::size_t)t.v[2]];
    const double twoA = orient2d(a, b, c);
    ElementGeometry g;
    g.area = 0.5 * twoA;
    const auto perp = [](Point2 v) { return Point2{-v.y, v.x}; };
    g.grad[0] = (1.0 / twoA) * perp(c - b);
    g.grad[1] = (1.0 / twoA) * perp(a - c);
    g.grad[2] = (1.0 / twoA) * perp(b - a);
    return g;
}

} // namespace detail

/// Stiffness matrix with one coefficient value per subdomain tag; a zero
/// weight skips that subdomain entirely, giving subdomain-local forms.
inline SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> weights) {
    std::vector<Triplet> trips;
    trips.reserve(mesh.triangles.size() * 9);
    for (const auto& t : mesh.triangles) {
        const double w =
            (t.tag < (int)weights.size()) ? weights[(std::size_t)t.tag] : 0.0;
        if (w == 0.0)
            continue;
        const auto eg = detail::element_geometry(mesh, t);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.push_back({t.v[(std::size_t)i], t.v[(std::size_t)j],
                                 w * eg.area * dot(eg.grad[(std::size_t)i], eg.grad[(std::size_t)j])});
    }
    return SparseMatrix::from_triplets((int)mesh.vertices.size(), std::move(trips));
}

inline SparseMatrix assemble_stiffness_region(const Mesh& mesh, std::span<const int> tags) {
    std::vector<double> w((std::size_t)mesh.num_inclusions() + 1, 0.0);
    for (int tag : tags)
        w[(std::size_t)tag] = 1.0;
    return assemble_stiffness(mesh, w);
}

/// Exact P1 mass matrix.
inline SparseMatrix assemble_mass(const Mesh& mesh) {
    std::vector<Triplet> trips;
    trips.reserve(mesh.triangles.size() * 9);
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        const double a = mesh.triangle_area((int)ti);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.push_back({t.v[(std::size_t)i], t.v[(std::size_t)j],
                                 (i == j ? 2.0 : 1.0) * a / 12.0});
    }
    return SparseMatrix::from_triplets((int)mesh.vertices.size(), std::move(trips));
}

/// Load vector for piecewise-constant forcing, restricted to the subdomains in
/// `tags`; exact for P1 (each triangle spreads f * area / 3 onto its corners).
inline std::vector<double> assemble_load(const Mesh& mesh, const PiecewiseData& f,
                                         std::span<const int> tags) {
    std::vector<char> use((std::size_t)mesh.num_inclusions() + 1, 0);
    for (int tag : tags)
        use[(std::size_t)tag] = 1;
    std::vector<double> b(mesh.vertices.size(), 0.0);
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        if (!use[(std::size_t)t.tag])
            continue;
        const double fv = f.forcing_value(t.tag);
        if (fv == 0.0)
            continue;
        const double contrib = fv * mesh.triangle_area((int)ti) / 3.0;
        for (int k = 0; k < 3; ++k)
            b[(std::size_t)t.v[(std::size_t)k]] += contrib;
    }
    return b;
}

/// Per-node masses over one inclusion: w_p = integral of the hat function of p
/// over D_m.  Used as the zero-mean weights of the singular Neumann solves.
inline std::vector<double> inclusion_node_masses(const Mesh& mesh, int m) {
    std::vector<double> w(mesh.vertices.size(), 0.0);
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        if (t.tag != m)
            continue;
        const double contrib = mesh.triangle_area((int)ti) / 3.0;
        for (int k = 0; k < 3; ++k)
            w[(std::size_t)t.v[(std::size_t)k]] += contrib;
    }
    return w;
}

/// Per-mesh finite element workspace: node partition and the recurring
/// contrast-independent matrices, assembled once and shared by every solver
/// built on this mesh.
class FemSystem {
 public:
    explicit FemSystem(Mesh mesh)
        : mesh_(std::move(mesh)), index_(classify(mesh_)) {
        const int M = index_.num_inclusions;
        std::vector<double> w((std::size_t)M + 1, 1.0);
        stiffness_unit_ = assemble_stiffness(mesh_, w);
        mass_ = assemble_mass(mesh_);
        std::vector<double> w0((std::size_t)M + 1, 0.0);
        w0[0] = 1.0;
        stiffness_background_ = assemble_stiffness(mesh_, w0);
        stiffness_inclusion_.resize((std::size_t)M);
        for (int m = 1; m <= M; ++m) {
            std::vector<double> wm((std::size_t)M + 1, 0.0);
            wm[(std::size_t)m] = 1.0;
            stiffness_inclusion_[(std::size_t)m - 1] = assemble_stiffness(mesh_, wm);
        }
    }

    FemSystem(const FemSystem&) = delete;
    FemSystem& operator=(const FemSystem&) = delete;

    const Mesh& mesh() const { return mesh_; }
    const SubdomainIndex& index() const { return index_; }
    int num_inclusions() const { return index_.num_inclusions; }
    int num_nodes() const { return (int)mesh_.vertices.size(); }

    const SparseMatrix& stiffness_unit() const { return stiffness_unit_; }
    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness_background() const { return stiffness_background_; }
    const SparseMatrix& stiffness_inclusion(int m) const {
        return stiffness_inclusion_[(std::size_t)m - 1];
    }

    FEFunction zero() const { return zero_function(mesh_); }

    double h1_seminorm(const FEFunction& u) const {
        return std::sqrt(std::max(0.0, stiffness_unit_.quadratic(u.values, u.values)));
    }
    double l2_norm(const FEFunction& u) const {
        return std::sqrt(std::max(0.0, mass_.quadratic(u.values, u.values)));
    }
    double h1_norm(const FEFunction& u) const {
        const double s = stiffness_unit_.quadratic(u.values, u.values);
        const double m = mass_.quadratic(u.values, u.values);
        return std::sqrt(std::max(0.0, s + m));
    }

    /// P1 interpolation at an arbitrary point inside the domain.
    double evaluate_at(const FEFunction& u, Point2 p) const {
        const double scale = 1e-12;
        for (const auto& t : mesh_.triangles) {
            const Point2 a = mesh_.vertices[(std::size_t)t.v[0]];
            const Point2 b = mesh_.vertices[(std::size_t)t.v[1]];
            const Point2 c = mesh_.vertices[(std::size_t)t.v[2]];
            const double full = orient2d(a, b, c);
            const double la = orient2d(b, c, p) / full;
            const double lb = orient2d(c, a, p) / full;
            const double lc = orient2d(a, b, p) / full;
            if (la >= -scale && lb >= -scale && lc >= -scale)
                return la * u[t.v[0]] + lb * u[t.v[1]] + lc * u[t.v[2]];
        }
        throw Error("evaluate_at: point outside the mesh");
    }

 private:
    Mesh mesh_;
    SubdomainIndex index_;
    SparseMatrix stiffness_unit_;
    SparseMatrix mass_;
    SparseMatrix stiffness_background_;
    std::vector<SparseMatrix> stiffness_inclusion_;
};

// --- FEFunction text serialization: `<node_index> <value>` per line ---------

inline std::string save_fefunction(const FEFunction& u) {
    std::string out;
    out.reserve(u.values.size() * 26);
    char buf[64];
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu %.17g\n", i, u.values[i]);
        out += buf;
    }
    return out;
}

inline FEFunction load_fefunction(const std::string& text, const Mesh& mesh) {
    FEFunction u = zero_function(mesh);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        long idx;
        double v;
        if (!(ls >> idx))
            continue;
        if (!(ls >> v) || idx < 0 || idx >= (long)u.values.size())
            throw ParseError("bad nodal value record at line " + std::to_string(lineno));
        u.values[(std::size_t)idx] = v;
    }
    return u;
}

inline void save_fefunction_file(const FEFunction& u, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open for writing: " + path);
    out << save_fefunction(u);
    if (!out)
        throw IoError("write failed: " + path);
}

inline FEFunction load_fefunction_file(const std::string& path, const Mesh& mesh) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_fefunction(ss.str(), mesh);
}

} // namespace hcx
