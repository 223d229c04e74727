#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "hcx/expansion.hpp"
#include "hcx/solvers.hpp"

namespace hcx {

/// Inclusion roles of the mixed configuration: one inclusion carries the high
/// conductivity, optionally one carries the low conductivity.  With no low
/// inclusion the pipeline degenerates to the pure high-contrast recursion,
/// which is what the cross-mode consistency checks exercise.
struct MixedRoles {
    int high = 1;
    int low = 0; // 0 = absent
};

/// Expansion engine for the mixed configuration kappa = eta on D_high,
/// 1/eta on D_low, 1 in the background:
///   u_eta = eta u_{-1} + u_0 + eta^{-1} u_1 + ...
/// The background solve carries Dirichlet data on the high interface and
/// natural (Neumann) data on the low interface; the high-inclusion constants
/// come from a one-dimensional flux balance with the characteristic function
/// built on the same mixed background operator.
class MixedContrastExpander {
 public:
    MixedContrastExpander(const FemSystem& fem, MixedRoles roles, int threads = 1,
                          double tol = 1e-12)
        : fem_(fem), roles_(roles), threads_(threads),
          background_(make_mixed_background(fem, roles, tol)) {
        neumann_high_ = std::make_unique<NeumannMeanZeroSolver>(
            fem.stiffness_inclusion(roles_.high), fem.index().closure_nodes(roles_.high),
            inclusion_node_masses(fem.mesh(), roles_.high), tol);
        if (roles_.low != 0)
            ext_low_ = std::make_unique<ConstrainedSolver>(make_inclusion_extension(fem, roles_.low, tol));

        // characteristic function of the high inclusion on the mixed operator
        chi_ = fem_.zero();
        for (int p : fem_.index().interface_nodes[(std::size_t)roles_.high - 1])
            chi_[p] = 1.0;
        for (int p : fem_.index().inclusion_interior[(std::size_t)roles_.high - 1])
            chi_[p] = 1.0;
        const std::vector<double> no_load(chi_.values.size(), 0.0);
        background_.solve(no_load, chi_.values);
        extend_into_low(chi_);
        const auto r = residual_functional(fem_.stiffness_background(), chi_);
        chi_flux_ = 0.0;
        for (int p : high_interface())
            chi_flux_ += r[(std::size_t)p];
        chi_energy_ = fem_.stiffness_background().quadratic(chi_.values, chi_.values);
    }

    const FEFunction& characteristic() const { return chi_; }
    double characteristic_flux() const { return chi_flux_; }
    double characteristic_energy() const { return chi_energy_; }
    const FemSystem& fem() const { return fem_; }

    /// Zero on the background and the high inclusion; Dirichlet problem with
    /// forcing inside the low inclusion.
    FEFunction compute_u_minus1(const PiecewiseData& data) const {
        FEFunction u = fem_.zero();
        if (roles_.low != 0 && data.has_forcing()) {
            const std::vector<int> tags{roles_.low};
            const std::vector<double> load = assemble_load(fem_.mesh(), data, tags);
            ext_low_->solve(load, u.values);
        }
        return u;
    }

    /// The limit term: constant on the high inclusion, mixed background solve
    /// with the u_{-1} fluxes as natural data on the low interface, harmonic
    /// extension into the low inclusion.
    std::pair<FEFunction, double> compute_u0(const PiecewiseData& data,
                                             const FEFunction& u_minus1) const {
        FEFunction u = fem_.zero();
        for (int p : fem_.index().outer_boundary)
            u[p] = data.g(fem_.mesh().vertices[(std::size_t)p]);
        std::vector<double> load = assemble_load(fem_.mesh(), data, background_tags());
        add_low_flux_load(load, u_minus1, data, true);
        background_.solve(load, u.values);
        extend_into_low(u);

        // flux balance across the high interface fixes the inclusion constant
        const std::vector<double> b0 = assemble_load(fem_.mesh(), data, background_tags());
        const auto r = residual_functional(fem_.stiffness_background(), u, b0);
        double num = 0.0;
        if (data.has_forcing()) {
            const std::vector<int> tags{roles_.high};
            const std::vector<double> bh = assemble_load(fem_.mesh(), data, tags);
            for (int p : fem_.index().closure_nodes(roles_.high))
                num += bh[(std::size_t)p];
        }
        for (int p : high_interface())
            num -= r[(std::size_t)p];
        const double c0 = num / chi_flux_;
        axpy_chi(u, c0);
        return {std::move(u), c0};
    }

    struct StepResult {
        FEFunction next;
        double constant = 0.0;
        double defect = 0.0;
    };

    /// u_{i+1} from u_i: Neumann solve in the high inclusion driven by the
    /// background flux of u_i, mixed background solve with Dirichlet data from
    /// the new high trace and natural data from the low part of u_i, harmonic
    /// extension into the low inclusion, then the flux-balancing constant.
    StepResult step(const PiecewiseData& data, const FEFunction& u_i, int i) const {
        StepResult out;
        out.next = fem_.zero();

        std::vector<double> r;
        if (i == 0) {
            const std::vector<double> b0 = assemble_load(fem_.mesh(), data, background_tags());
            r = residual_functional(fem_.stiffness_background(), u_i, b0);
        } else {
            r = residual_functional(fem_.stiffness_background(), u_i);
        }
        std::vector<double> load(out.next.values.size(), 0.0);
        if (i == 0 && data.has_forcing()) {
            const std::vector<int> tags{roles_.high};
            const std::vector<double> bh = assemble_load(fem_.mesh(), data, tags);
            for (int p : fem_.index().closure_nodes(roles_.high))
                load[(std::size_t)p] = bh[(std::size_t)p];
        }
        for (int p : fem_.index().closure_nodes(roles_.high))
            load[(std::size_t)p] -= r[(std::size_t)p];
        const SolveReport rep =
            neumann_high_->solve(load, out.next.values, 1e-10, defect_floor(data));
        out.defect = rep.compatibility_defect;

        // background: Dirichlet from the new high trace, natural data on the
        // low interface from the low part of u_i
        std::vector<double> bg_load(out.next.values.size(), 0.0);
        add_low_flux_load(bg_load, u_i, data, false);
        background_.solve(bg_load, out.next.values);
        extend_into_low(out.next);

        const auto rt = residual_functional(fem_.stiffness_background(), out.next);
        double num = 0.0;
        for (int p : high_interface())
            num -= rt[(std::size_t)p];
        out.constant = num / chi_flux_;
        axpy_chi(out.next, out.constant);
        return out;
    }

    Expansion expand(const PiecewiseData& data, int order, const std::string& scenario_id = "") const {
        if (order < 0)
            throw Error("expansion order must be non-negative");
        Expansion e;
        e.mode = ExpansionMode::Mixed;
        e.first_index = -1;
        e.mesh_id = mesh_fingerprint(fem_.mesh());
        e.scenario_id = scenario_id;
        e.terms.push_back(compute_u_minus1(data));
        e.constants.push_back({});
        auto [u0, c0] = compute_u0(data, e.terms.front());
        e.terms.push_back(std::move(u0));
        e.constants.push_back({c0});
        for (int i = 0; i < order; ++i) {
            StepResult s = step(data, e.terms.back(), i);
            e.max_compatibility_defect = std::max(e.max_compatibility_defect, s.defect);
            e.terms.push_back(std::move(s.next));
            e.constants.push_back({s.constant});
        }
        return e;
    }

    double defect_floor(const PiecewiseData& data) const {
        double mag = std::max({std::abs(data.g0), std::abs(data.g1), std::abs(data.g2)});
        for (double f : data.forcing)
            mag = std::max(mag, std::abs(f));
        return 1e-4 * chi_energy_ * mag;
    }

 private:
    static ConstrainedSolver make_mixed_background(const FemSystem& fem, MixedRoles roles,
                                                   double tol) {
        const int M = fem.num_inclusions();
        if (roles.high < 1 || roles.high > M)
            throw ConfigError("mixed roles: high inclusion index out of range");
        if (roles.low != 0 && (roles.low < 1 || roles.low > M || roles.low == roles.high))
            throw ConfigError("mixed roles: low inclusion index invalid");
        std::vector<int> neumann_ifaces;
        if (roles.low != 0)
            neumann_ifaces.push_back(roles.low);
        return make_background_with_free_interfaces(fem, neumann_ifaces, tol);
    }

    const std::vector<int>& high_interface() const {
        return fem_.index().interface_nodes[(std::size_t)roles_.high - 1];
    }
    std::vector<int> background_tags() const { return {0}; }

    /// Adds the natural interface data coming from the low part of `source`:
    /// minus its inclusion-side weak flux (with the forcing correction for the
    /// u_{-1} -> u_0 transition only).
    void add_low_flux_load(std::vector<double>& load, const FEFunction& source,
                           const PiecewiseData& data, bool with_forcing) const {
        if (roles_.low == 0)
            return;
        const std::vector<int> tags{roles_.low};
        std::vector<double> b_low;
        if (with_forcing && data.has_forcing())
            b_low = assemble_load(fem_.mesh(), data, tags);
        const auto flux =
            residual_functional(fem_.stiffness_inclusion(roles_.low), source, b_low);
        for (int p : fem_.index().interface_nodes[(std::size_t)roles_.low - 1])
            load[(std::size_t)p] -= flux[(std::size_t)p];
    }

    void extend_into_low(FEFunction& u) const {
        if (roles_.low == 0)
            return;
        const std::vector<double> no_load(u.values.size(), 0.0);
        ext_low_->solve(no_load, u.values);
    }

    void axpy_chi(FEFunction& u, double c) const {
        for (std::size_t p = 0; p < u.values.size(); ++p)
            u.values[p] += c * chi_.values[p];
    }

    const FemSystem& fem_;
    MixedRoles roles_;
    int threads_;
    ConstrainedSolver background_;
    std::unique_ptr<NeumannMeanZeroSolver> neumann_high_;
    std::unique_ptr<ConstrainedSolver> ext_low_;
    FEFunction chi_;
    double chi_flux_ = 0.0;
    double chi_energy_ = 0.0;
};

inline Expansion expand_mixed(const FemSystem& fem, MixedRoles roles, const PiecewiseData& data,
                              int order, int threads = 1, const std::string& scenario_id = "",
                              double tol = 1e-12) {
    return MixedContrastExpander(fem, roles, threads, tol).expand(data, order, scenario_id);
}

} // namespace hcx
