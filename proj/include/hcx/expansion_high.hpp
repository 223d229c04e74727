#pragma once

#include <cmath>
#include <vector>

#include "hcx/expansion.hpp"
#include "hcx/harmonic_basis.hpp"
#include "hcx/parallel.hpp"
#include "hcx/solvers.hpp"

namespace hcx {

/// Expansion engine for high-conductivity inclusions.  All factorizations and
/// the characteristic-function basis are built once per mesh; the terms of the
/// series follow from back-substitutions only, independent of the contrast.
class HighContrastExpander {
 public:
    explicit HighContrastExpander(const FemSystem& fem, int threads = 1, double tol = 1e-12)
        : fem_(fem), threads_(threads),
          background_(make_background_dirichlet(fem, tol)),
          basis_(build_harmonic_basis(fem, background_, threads)) {
        const int M = fem.num_inclusions();
        neumann_.reserve((std::size_t)M);
        for (int m = 1; m <= M; ++m)
            neumann_.emplace_back(fem.stiffness_inclusion(m), fem.index().closure_nodes(m),
                                  inclusion_node_masses(fem.mesh(), m), tol);
    }

    const HarmonicBasis& basis() const { return basis_; }
    const ConstrainedSolver& background() const { return background_; }
    const FemSystem& fem() const { return fem_; }

    /// Background part of the limit: Dirichlet data g on the outer boundary,
    /// zero on every interface, zero inside the inclusions.
    FEFunction compute_u00(const PiecewiseData& data) const {
        FEFunction u = fem_.zero();
        for (int p : fem_.index().outer_boundary)
            u[p] = data.g(fem_.mesh().vertices[(std::size_t)p]);
        const std::vector<double> load = assemble_load(fem_.mesh(), data, background_tags());
        background_.solve(load, u.values);
        return u;
    }

    /// Asymptotic limit u_0 = u_00 + sum_m c_m chi_m; the constants solve the
    /// Gram system with b_j = (f, chi_j)_D - (grad u_00, grad chi_j)_D0.
    std::pair<FEFunction, std::vector<double>> compute_u0(const PiecewiseData& data) const {
        FEFunction u00 = compute_u00(data);
        const int M = basis_.size();
        std::vector<double> b((std::size_t)M, 0.0);
        const std::vector<double> full_load = assemble_load(fem_.mesh(), data, all_tags());
        for (int j = 0; j < M; ++j) {
            const auto& chi = basis_.chis[(std::size_t)j].values;
            double s = 0.0;
            for (std::size_t p = 0; p < chi.size(); ++p)
                s += chi[p] * full_load[p];
            b[(std::size_t)j] = s - fem_.stiffness_background().quadratic(chi, u00.values);
        }
        std::vector<double> c = solve_constants(basis_, b);
        FEFunction u0 = std::move(u00);
        add_basis_combination(u0, c);
        return {std::move(u0), std::move(c)};
    }

    struct StepResult {
        FEFunction next;
        std::vector<double> constants;
        double max_defect = 0.0;
    };

    /// One Dirichlet-to-Neumann step: inclusion Neumann solves driven by the
    /// background flux of u_i, harmonic background extension, then the
    /// Gram-system correction that restores the next compatibility condition.
    StepResult step(const PiecewiseData& data, const FEFunction& u_i, int i) const {
        const int M = basis_.size();
        std::vector<double> r;
        if (i == 0) {
            const std::vector<double> b0 = assemble_load(fem_.mesh(), data, background_tags());
            r = residual_functional(fem_.stiffness_background(), u_i, b0);
        } else {
            r = residual_functional(fem_.stiffness_background(), u_i);
        }

        StepResult out;
        out.next = fem_.zero();
        const double floor = defect_floor(data);
        std::vector<double> defects((std::size_t)M, 0.0);
        std::vector<double> f_load;
        if (i == 0 && data.has_forcing())
            f_load = assemble_load(fem_.mesh(), data, inclusion_tags());
        parallel_for(M, threads_, [&](int j) {
            const int m = j + 1;
            std::vector<double> load(out.next.values.size(), 0.0);
            for (int p : fem_.index().closure_nodes(m))
                load[(std::size_t)p] =
                    (f_load.empty() ? 0.0 : f_load[(std::size_t)p]) - r[(std::size_t)p];
            const SolveReport rep =
                neumann_[(std::size_t)j].solve(load, out.next.values, 1e-10, floor);
            defects[(std::size_t)j] = rep.compatibility_defect;
        });
        for (double d : defects)
            out.max_defect = std::max(out.max_defect, d);

        // harmonic background extension of the new inclusion traces
        const std::vector<double> no_load(out.next.values.size(), 0.0);
        background_.solve(no_load, out.next.values);

        // constants from the weak fluxes of the zero-mean part
        const std::vector<double> rt = residual_functional(fem_.stiffness_background(), out.next);
        std::vector<double> u_flux((std::size_t)M, 0.0);
        for (int j = 0; j < M; ++j) {
            double s = 0.0;
            for (int p : fem_.index().interface_nodes[(std::size_t)j])
                s += rt[(std::size_t)p];
            u_flux[(std::size_t)j] = -s;
        }
        out.constants = solve_constants(basis_, u_flux);
        add_basis_combination(out.next, out.constants);
        return out;
    }

    Expansion expand(const PiecewiseData& data, int order, const std::string& scenario_id = "") const {
        if (order < 0)
            throw Error("expansion order must be non-negative");
        Expansion e;
        e.mode = ExpansionMode::High;
        e.first_index = 0;
        e.mesh_id = mesh_fingerprint(fem_.mesh());
        e.scenario_id = scenario_id;
        auto [u0, c0] = compute_u0(data);
        e.terms.push_back(std::move(u0));
        e.constants.push_back(std::move(c0));
        for (int i = 0; i < order; ++i) {
            StepResult s = step(data, e.terms.back(), i);
            e.max_compatibility_defect = std::max(e.max_compatibility_defect, s.max_defect);
            e.terms.push_back(std::move(s.next));
            e.constants.push_back(std::move(s.constants));
        }
        return e;
    }

    double defect_floor(const PiecewiseData& data) const {
        double mag = std::max({std::abs(data.g0), std::abs(data.g1), std::abs(data.g2)});
        for (double f : data.forcing)
            mag = std::max(mag, std::abs(f));
        return 1e-4 * basis_.flux_scale() * mag;
    }

 private:
    std::vector<int> background_tags() const { return {0}; }
    std::vector<int> inclusion_tags() const {
        std::vector<int> tags;
        for (int m = 1; m <= fem_.num_inclusions(); ++m)
            tags.push_back(m);
        return tags;
    }
    std::vector<int> all_tags() const {
        std::vector<int> tags{0};
        for (int m = 1; m <= fem_.num_inclusions(); ++m)
            tags.push_back(m);
        return tags;
    }
    void add_basis_combination(FEFunction& u, const std::vector<double>& c) const {
        for (std::size_t m = 0; m < c.size(); ++m) {
            const auto& chi = basis_.chis[m].values;
            for (std::size_t p = 0; p < chi.size(); ++p)
                u.values[p] += c[m] * chi[p];
        }
    }

    const FemSystem& fem_;
    int threads_;
    ConstrainedSolver background_;
    HarmonicBasis basis_;
    std::vector<NeumannMeanZeroSolver> neumann_;
};

inline Expansion expand_high(const FemSystem& fem, const PiecewiseData& data, int order,
                             int threads = 1, const std::string& scenario_id = "",
                             double tol = 1e-12) {
    return HighContrastExpander(fem, threads, tol).expand(data, order, scenario_id);
}

} // namespace hcx
