#pragma once

#include <algorithm>
#include <vector>

#include "hcx/mesh.hpp"

namespace hcx {

enum class NodeClass : unsigned char {
    BackgroundInterior, // strictly inside D0
    OuterBoundary,      // on the outer boundary
    Interface,          // on some inclusion boundary
    InclusionInterior,  // strictly inside some inclusion
};

/// Node partition derived from the triangle tags.  All node lists are sorted
/// ascending, so downstream assembly and accumulation orders are reproducible.
struct SubdomainIndex {
    int num_inclusions = 0;
    std::vector<int> background_interior;
    std::vector<int> outer_boundary;
    std::vector<std::vector<int>> inclusion_interior; // [m-1]
    std::vector<std::vector<int>> interface_nodes;    // [m-1]
    std::vector<NodeClass> node_class;                // per node
    std::vector<int> node_inclusion;                  // m for interface/interior nodes, 0 otherwise

    /// Interior plus interface nodes of inclusion m, ascending.
    std::vector<int> closure_nodes(int m) const {
        std::vector<int> out;
        const auto& a = inclusion_interior[(std::size_t)m - 1];
        const auto& b = interface_nodes[(std::size_t)m - 1];
        out.reserve(a.size() + b.size());
        std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }
};

/// Partitions mesh nodes into background interior, outer boundary, inclusion
/// interface and inclusion interior sets.
inline SubdomainIndex classify(const Mesh& mesh) {
    validate_mesh(mesh);
    const int nv = (int)mesh.vertices.size();
    const int M = mesh.num_inclusions();

    std::vector<unsigned char> touches_bg((std::size_t)nv, 0);
    std::vector<int> incl_of((std::size_t)nv, 0); // inclusion whose triangles touch this node
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            const int v = t.v[(std::size_t)k];
            if (t.tag == 0) {
                touches_bg[(std::size_t)v] = 1;
            } else {
                if (incl_of[(std::size_t)v] != 0 && incl_of[(std::size_t)v] != t.tag)
                    throw InvalidTopology("node belongs to two different inclusions");
                incl_of[(std::size_t)v] = t.tag;
            }
        }
    std::vector<unsigned char> on_outer((std::size_t)nv, 0);
    for (const auto& e : mesh.boundary_edges)
        if (e.tag == kOuterBoundaryTag) {
            on_outer[(std::size_t)e.a] = 1;
            on_outer[(std::size_t)e.b] = 1;
        }

    SubdomainIndex idx;
    idx.num_inclusions = M;
    idx.inclusion_interior.resize((std::size_t)M);
    idx.interface_nodes.resize((std::size_t)M);
    idx.node_class.resize((std::size_t)nv);
    idx.node_inclusion.assign((std::size_t)nv, 0);
    for (int v = 0; v < nv; ++v) {
        const int m = incl_of[(std::size_t)v];
        if (m != 0 && on_outer[(std::size_t)v])
            throw InvalidTopology("inclusion node on the outer boundary");
        if (m != 0 && touches_bg[(std::size_t)v]) {
            idx.interface_nodes[(std::size_t)m - 1].push_back(v);
            idx.node_class[(std::size_t)v] = NodeClass::Interface;
            idx.node_inclusion[(std::size_t)v] = m;
        } else if (m != 0) {
            idx.inclusion_interior[(std::size_t)m - 1].push_back(v);
            idx.node_class[(std::size_t)v] = NodeClass::InclusionInterior;
            idx.node_inclusion[(std::size_t)v] = m;
        } else if (on_outer[(std::size_t)v]) {
            idx.outer_boundary.push_back(v);
            idx.node_class[(std::size_t)v] = NodeClass::OuterBoundary;
        } else {
            idx.background_interior.push_back(v);
            idx.node_class[(std::size_t)v] = NodeClass::BackgroundInterior;
        }
    }
    return idx;
}

} // namespace hcx
