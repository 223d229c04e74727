#pragma once

#include <vector>

#include "hcx/expansion.hpp"
#include "hcx/parallel.hpp"
#include "hcx/solvers.hpp"

namespace hcx {

/// Expansion engine for low-conductivity inclusions.  The background problem
/// keeps every interface node free (natural interface conditions) and the
/// inclusion parts follow by harmonic Dirichlet extension, so no compatibility
/// condition arises anywhere.
class LowContrastExpander {
 public:
    explicit LowContrastExpander(const FemSystem& fem, int threads = 1, double tol = 1e-12)
        : fem_(fem), threads_(threads),
          background_(make_background_with_free_interfaces(fem, all_inclusions(fem), tol)),
          inclusion_stiffness_(assemble_stiffness_region(fem.mesh(), all_inclusions(fem))) {
        for (int m = 1; m <= fem.num_inclusions(); ++m)
            extensions_.emplace_back(make_inclusion_extension(fem, m, tol));
    }

    const FemSystem& fem() const { return fem_; }

    /// Dirichlet problem with forcing inside each inclusion, zero data on the
    /// interfaces; vanishes identically on the background.
    FEFunction compute_u_minus1(const PiecewiseData& data) const {
        FEFunction u = fem_.zero();
        const std::vector<double> load = assemble_load(fem_.mesh(), data, inclusion_tags());
        parallel_for((int)extensions_.size(), threads_,
                     [&](int j) { extensions_[(std::size_t)j].solve(load, u.values); });
        return u;
    }

    /// Mixed background problem (Dirichlet g outside, interface Neumann data
    /// from u_{-1}) followed by harmonic extension into every inclusion.
    FEFunction compute_u0(const PiecewiseData& data, const FEFunction& u_minus1) const {
        FEFunction u = fem_.zero();
        for (int p : fem_.index().outer_boundary)
            u[p] = data.g(fem_.mesh().vertices[(std::size_t)p]);
        std::vector<double> load = assemble_load(fem_.mesh(), data, background_tags());
        if (data.has_forcing()) {
            const std::vector<double> incl_load = assemble_load(fem_.mesh(), data, inclusion_tags());
            const std::vector<double> flux =
                residual_functional(inclusion_stiffness_, u_minus1, incl_load);
            for (std::size_t p = 0; p < load.size(); ++p)
                load[p] -= flux[p];
        }
        background_.solve(load, u.values);
        extend_into_inclusions(u);
        return u;
    }

    /// u_i from u_{i-1}: background problem with zero outer data driven by the
    /// inclusion-side fluxes of u_{i-1}, then harmonic extension.
    FEFunction step(const FEFunction& u_prev) const {
        FEFunction u = fem_.zero();
        const std::vector<double> flux = residual_functional(inclusion_stiffness_, u_prev);
        std::vector<double> load(flux.size(), 0.0);
        for (std::size_t p = 0; p < flux.size(); ++p)
            load[p] = -flux[p];
        background_.solve(load, u.values);
        extend_into_inclusions(u);
        return u;
    }

    Expansion expand(const PiecewiseData& data, int order, const std::string& scenario_id = "") const {
        if (order < 0)
            throw Error("expansion order must be non-negative");
        Expansion e;
        e.mode = ExpansionMode::Low;
        e.first_index = -1;
        e.mesh_id = mesh_fingerprint(fem_.mesh());
        e.scenario_id = scenario_id;
        e.terms.push_back(compute_u_minus1(data));
        e.constants.push_back({});
        e.terms.push_back(compute_u0(data, e.terms.front()));
        e.constants.push_back({});
        for (int i = 1; i <= order; ++i) {
            e.terms.push_back(step(e.terms.back()));
            e.constants.push_back({});
        }
        return e;
    }

 private:
    static std::vector<int> all_inclusions(const FemSystem& fem) {
        std::vector<int> tags;
        for (int m = 1; m <= fem.num_inclusions(); ++m)
            tags.push_back(m);
        return tags;
    }
    std::vector<int> background_tags() const { return {0}; }
    std::vector<int> inclusion_tags() const { return all_inclusions(fem_); }

    void extend_into_inclusions(FEFunction& u) const {
        const std::vector<double> no_load(u.values.size(), 0.0);
        parallel_for((int)extensions_.size(), threads_,
                     [&](int j) { extensions_[(std::size_t)j].solve(no_load, u.values); });
    }

    const FemSystem& fem_;
    int threads_;
    ConstrainedSolver background_;
    SparseMatrix inclusion_stiffness_;
    std::vector<ConstrainedSolver> extensions_;
};

inline Expansion expand_low(const FemSystem& fem, const PiecewiseData& data, int order,
                            int threads = 1, const std::string& scenario_id = "",
                            double tol = 1e-12) {
    return LowContrastExpander(fem, threads, tol).expand(data, order, scenario_id);
}

} // namespace hcx
