#pragma once

#include <string>
#include <vector>

#include "hcx/expansion.hpp"
#include "hcx/solvers.hpp"

namespace hcx {

/// Per-subdomain conductivity values (background first).
struct ContrastCoefficient {
    std::vector<double> kappa; // [tag], tag = 0..M

    static ContrastCoefficient uniform(int num_inclusions, double value = 1.0) {
        return {std::vector<double>((std::size_t)num_inclusions + 1, value)};
    }
    static ContrastCoefficient high(int num_inclusions, double eta) {
        ContrastCoefficient c = uniform(num_inclusions, eta);
        c.kappa[0] = 1.0;
        return c;
    }
    static ContrastCoefficient low(int num_inclusions, double eps) {
        ContrastCoefficient c = uniform(num_inclusions, eps);
        c.kappa[0] = 1.0;
        return c;
    }
    static ContrastCoefficient mixed(int num_inclusions, double eta, int high_m, int low_m) {
        ContrastCoefficient c = uniform(num_inclusions, 1.0);
        c.kappa[(std::size_t)high_m] = eta;
        if (low_m != 0)
            c.kappa[(std::size_t)low_m] = 1.0 / eta;
        return c;
    }
};

/// Direct discrete solve of the full weighted problem on the same mesh; the
/// ground truth every partial sum is measured against.  Factored per contrast
/// value (this is exactly the cost the expansion amortizes away).
inline std::pair<FEFunction, SolveReport>
solve_direct(const FemSystem& fem, const ContrastCoefficient& coeff, const PiecewiseData& data,
             double tol = 1e-12) {
    if ((int)coeff.kappa.size() != fem.num_inclusions() + 1)
        throw ConfigError("contrast coefficient needs one value per subdomain");
    for (double k : coeff.kappa)
        if (!(k > 0.0))
            throw ConfigError("contrast coefficient values must be positive");
    const SparseMatrix K = assemble_stiffness(fem.mesh(), coeff.kappa);
    std::vector<int> free_nodes;
    free_nodes.reserve(fem.mesh().vertices.size());
    const auto& idx = fem.index();
    for (int p = 0; p < fem.num_nodes(); ++p)
        if (idx.node_class[(std::size_t)p] != NodeClass::OuterBoundary)
            free_nodes.push_back(p);
    FEFunction u = fem.zero();
    for (int p : idx.outer_boundary)
        u[p] = data.g(fem.mesh().vertices[(std::size_t)p]);
    std::vector<int> all_tags;
    for (int t = 0; t <= fem.num_inclusions(); ++t)
        all_tags.push_back(t);
    const std::vector<double> load = assemble_load(fem.mesh(), data, all_tags);
    ConstrainedSolver solver(K, std::move(free_nodes), tol);
    const SolveReport report = solver.solve(load, u.values);
    return {std::move(u), report};
}

struct ErrorPair {
    double h1 = 0.0;
    double l2 = 0.0;
};

/// H1 and L2 norms of the difference between two nodal functions on one mesh.
inline ErrorPair expansion_error(const FemSystem& fem, const FEFunction& reference,
                                 const FEFunction& approximation) {
    if (!same_mesh(reference, approximation) ||
        reference.values.size() != approximation.values.size())
        throw MeshMismatch("expansion_error: functions live on different meshes");
    FEFunction diff = fem.zero();
    for (std::size_t p = 0; p < diff.values.size(); ++p)
        diff.values[p] = reference.values[p] - approximation.values[p];
    return {fem.h1_norm(diff), fem.l2_norm(diff)};
}

} // namespace hcx
