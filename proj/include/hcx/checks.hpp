#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hcx/expansion_high.hpp"
#include "hcx/expansion_low.hpp"
#include "hcx/expansion_mixed.hpp"
#include "hcx/harmonic_basis.hpp"
#include "hcx/reference.hpp"
#include "hcx/scenario.hpp"

namespace hcx {

struct CheckItem {
    std::string name;
    bool pass = false;
    double value = 0.0; // measured quantity
    double limit = 0.0; // threshold it is compared against
};

inline CheckItem make_check(std::string name, double value, double limit) {
    return {std::move(name), value <= limit, value, limit};
}

/// RMS deviation from the nodal mean over the closure of inclusion m.
inline double inclusion_rms_deviation(const FemSystem& fem, const FEFunction& u, int m) {
    const std::vector<int> nodes = fem.index().closure_nodes(m);
    if (nodes.empty())
        return 0.0;
    double mean = 0.0;
    for (int p : nodes)
        mean += u[p];
    mean /= (double)nodes.size();
    double dev = 0.0;
    for (int p : nodes)
        dev += (u[p] - mean) * (u[p] - mean);
    return std::sqrt(dev / (double)nodes.size());
}

/// max over i >= 1 and m of |chi_m' K u_i| / ||u_i||_H1.
inline double max_orthogonality_defect(const FemSystem& fem, const HarmonicBasis& basis,
                                       const Expansion& e) {
    double worst = 0.0;
    for (int i = std::max(1, e.first_index); i <= e.order(); ++i) {
        const FEFunction& u = e.term(i);
        const double scale = std::max(fem.h1_norm(u), 1e-300);
        for (const auto& chi : basis.chis) {
            const double v = std::abs(fem.stiffness_unit().quadratic(chi.values, u.values));
            worst = std::max(worst, v / scale);
        }
    }
    return worst;
}

/// max interior background residual of the terms, relative to the term norm.
/// Every stored term with index >= 1 must be discrete-harmonic in D0.
inline double max_background_harmonicity(const FemSystem& fem, const Expansion& e) {
    double worst = 0.0;
    for (int i = 1; i <= e.order(); ++i) {
        const FEFunction& u = e.term(i);
        const auto r = residual_functional(fem.stiffness_background(), u);
        const double scale = std::max(fem.h1_norm(u), 1e-300);
        for (int p : fem.index().background_interior)
            worst = std::max(worst, std::abs(r[(std::size_t)p]) / scale);
    }
    return worst;
}

/// max inclusion-interior residual for terms that must be harmonic inside the
/// inclusions (high: i >= 2; low/mixed handled by their drivers' extensions).
inline double max_inclusion_harmonicity(const FemSystem& fem, const Expansion& e,
                                        int first_harmonic_index) {
    double worst = 0.0;
    for (int i = first_harmonic_index; i <= e.order(); ++i) {
        const FEFunction& u = e.term(i);
        const double scale = std::max(fem.h1_norm(u), 1e-300);
        for (int m = 1; m <= fem.num_inclusions(); ++m) {
            const auto r = residual_functional(fem.stiffness_inclusion(m), u);
            for (int p : fem.index().inclusion_interior[(std::size_t)m - 1])
                worst = std::max(worst, std::abs(r[(std::size_t)p]) / scale);
        }
    }
    return worst;
}

/// Nodewise transmission check of the high-contrast recursion: the inside flux
/// of u_{i+1} must cancel the outside flux of u_i on every interface node.
inline double max_flux_mismatch_high(const FemSystem& fem, const PiecewiseData& data,
                                     const Expansion& e) {
    double worst = 0.0;
    const std::vector<int> bg_tags{0};
    std::vector<int> incl_tags;
    for (int m = 1; m <= fem.num_inclusions(); ++m)
        incl_tags.push_back(m);
    for (int i = 0; i < e.order(); ++i) {
        std::vector<double> r_out;
        if (i == 0 && data.has_forcing()) {
            const auto b0 = assemble_load(fem.mesh(), data, bg_tags);
            r_out = residual_functional(fem.stiffness_background(), e.term(i), b0);
        } else {
            r_out = residual_functional(fem.stiffness_background(), e.term(i));
        }
        double scale = 1e-300;
        for (int m = 1; m <= fem.num_inclusions(); ++m)
            for (int p : fem.index().interface_nodes[(std::size_t)m - 1])
                scale = std::max(scale, std::abs(r_out[(std::size_t)p]));
        scale = std::max(scale, 1e-6 * std::max(fem.h1_norm(e.term(i)), 1e-300));
        for (int m = 1; m <= fem.num_inclusions(); ++m) {
            std::vector<double> r_in;
            if (i == 0 && data.has_forcing()) {
                const std::vector<int> mt{m};
                const auto bm = assemble_load(fem.mesh(), data, mt);
                r_in = residual_functional(fem.stiffness_inclusion(m), e.term(i + 1), bm);
            } else {
                r_in = residual_functional(fem.stiffness_inclusion(m), e.term(i + 1));
            }
            for (int p : fem.index().interface_nodes[(std::size_t)m - 1])
                worst = std::max(worst,
                                 std::abs(r_in[(std::size_t)p] + r_out[(std::size_t)p]) / scale);
        }
    }
    return worst;
}

/// Flux reciprocity of the low-contrast recursion: the background problem of
/// u_i uses minus the inclusion-side flux of u_{i-1}, nodewise.
inline double max_flux_mismatch_low(const FemSystem& fem, const Expansion& e) {
    double worst = 0.0;
    std::vector<int> incl_tags;
    for (int m = 1; m <= fem.num_inclusions(); ++m)
        incl_tags.push_back(m);
    const SparseMatrix K_in = assemble_stiffness_region(fem.mesh(), incl_tags);
    for (int i = 1; i <= e.order(); ++i) {
        const auto r_in = residual_functional(K_in, e.term(i - 1));
        const auto r_out = residual_functional(fem.stiffness_background(), e.term(i));
        double scale = 1e-300;
        for (int m = 1; m <= fem.num_inclusions(); ++m)
            for (int p : fem.index().interface_nodes[(std::size_t)m - 1])
                scale = std::max(scale, std::abs(r_in[(std::size_t)p]));
        scale = std::max(scale, 1e-6 * std::max(fem.h1_norm(e.term(i - 1)), 1e-300));
        for (int m = 1; m <= fem.num_inclusions(); ++m)
            for (int p : fem.index().interface_nodes[(std::size_t)m - 1])
                worst = std::max(worst,
                                 std::abs(r_out[(std::size_t)p] + r_in[(std::size_t)p]) / scale);
    }
    return worst;
}

/// Invariant battery for one scenario; shared by the `check` subcommand and
/// the acceptance suite.
inline std::vector<CheckItem> run_invariant_checks(const Scenario& sc, int threads = 1) {
    std::vector<CheckItem> items;
    const FemSystem fem(build_mesh(sc));
    const int M = fem.num_inclusions();

    items.push_back(make_check("mesh.min_angle_deg>=20", 20.0 - fem.mesh().min_angle_deg(), 0.0));
    items.push_back(make_check(
        "mesh.area_matches_domain",
        std::abs(fem.mesh().total_area() - std::abs(sc.geometry.domain.signed_area())) /
            std::abs(sc.geometry.domain.signed_area()),
        1e-12));

    if (M > 0 && sc.mode != ExpansionMode::Low) {
        const ConstrainedSolver bg = make_background_dirichlet(fem);
        const HarmonicBasis basis = build_harmonic_basis(fem, bg, threads);
        double bound_violation = 0.0;
        std::vector<double> chi_sum(fem.mesh().vertices.size(), 0.0);
        for (const auto& chi : basis.chis)
            for (std::size_t p = 0; p < chi_sum.size(); ++p) {
                chi_sum[p] += chi.values[p];
                bound_violation = std::max(bound_violation,
                                           std::max(-chi.values[p], chi.values[p] - 1.0));
            }
        double partition_violation = 0.0;
        for (double s : chi_sum)
            partition_violation = std::max(partition_violation, s - 1.0);
        items.push_back(make_check("basis.chi_bounds", bound_violation, 1e-10));
        items.push_back(make_check("basis.chi_partition", partition_violation, 1e-10));

        double sym = 0.0, flux_vs_energy = 0.0;
        for (int i = 0; i < M; ++i) {
            const auto r = residual_functional(fem.stiffness_background(), basis.chis[(std::size_t)i]);
            for (int j = 0; j < M; ++j) {
                sym = std::max(sym, std::abs(basis.a_geom[(std::size_t)i][(std::size_t)j] -
                                             basis.a_geom[(std::size_t)j][(std::size_t)i]));
                double f = 0.0;
                for (int p : fem.index().interface_nodes[(std::size_t)j])
                    f += r[(std::size_t)p];
                flux_vs_energy = std::max(
                    flux_vs_energy, std::abs(f - basis.a_geom[(std::size_t)j][(std::size_t)i]));
            }
        }
        const double a_scale = std::max(basis.flux_scale(), 1e-300);
        items.push_back(make_check("basis.a_geom_symmetry", sym / a_scale, 1e-12));
        items.push_back(make_check("basis.a_geom_flux_identity", flux_vs_energy / a_scale, 1e-10));
    }

    Expansion e;
    switch (sc.mode) {
    case ExpansionMode::High:
        e = expand_high(fem, sc.data, sc.order, threads, sc.name);
        break;
    case ExpansionMode::Low:
        e = expand_low(fem, sc.data, sc.order, threads, sc.name);
        break;
    case ExpansionMode::Mixed:
        e = expand_mixed(fem, sc.mixed_roles(), sc.data, sc.order, threads, sc.name);
        break;
    }

    items.push_back(make_check("expansion.compatibility_defect", e.max_compatibility_defect, 1e-10));

    // boundary data of the terms
    double bdata = 0.0;
    const double u0_scale = std::max(fem.h1_norm(e.term(0)), 1.0);
    for (int p : fem.index().outer_boundary) {
        const Point2 xy = fem.mesh().vertices[(std::size_t)p];
        bdata = std::max(bdata, std::abs(e.term(0)[p] - sc.data.g(xy)));
        for (int i = std::max(1, e.first_index); i <= e.order(); ++i)
            bdata = std::max(bdata, std::abs(e.term(i)[p]));
        if (e.first_index == -1)
            bdata = std::max(bdata, std::abs(e.term(-1)[p]));
    }
    items.push_back(make_check("expansion.boundary_data", bdata / u0_scale, 1e-14));

    items.push_back(make_check("expansion.background_harmonicity",
                               max_background_harmonicity(fem, e), 1e-10));

    if (sc.mode == ExpansionMode::High && M > 0) {
        const ConstrainedSolver bg = make_background_dirichlet(fem);
        const HarmonicBasis basis = build_harmonic_basis(fem, bg, threads);
        double constancy = 0.0;
        for (int m = 1; m <= M; ++m)
            constancy = std::max(constancy, inclusion_rms_deviation(fem, e.term(0), m));
        items.push_back(make_check("expansion.u0_constancy", constancy / u0_scale, 1e-12));
        items.push_back(
            make_check("expansion.orthogonality", max_orthogonality_defect(fem, basis, e), 1e-10));
        items.push_back(
            make_check("expansion.flux_matching", max_flux_mismatch_high(fem, sc.data, e), 1e-10));
        items.push_back(
            make_check("expansion.inclusion_harmonicity", max_inclusion_harmonicity(fem, e, 2), 1e-10));
    }
    if (sc.mode == ExpansionMode::Low) {
        items.push_back(make_check("expansion.flux_reciprocity", max_flux_mismatch_low(fem, e), 1e-10));
        items.push_back(
            make_check("expansion.inclusion_harmonicity", max_inclusion_harmonicity(fem, e, 0), 1e-10));
        bool zero_forcing_inside = true;
        for (int m = 1; m <= M; ++m)
            if (sc.data.forcing_value(m) != 0.0)
                zero_forcing_inside = false;
        if (zero_forcing_inside)
            items.push_back(make_check("expansion.u_minus1_vanishes", fem.h1_norm(e.term(-1)), 1e-12));
    }

    // emergent constancy of the direct solve at the stiffest contrast
    if (sc.mode == ExpansionMode::High && M > 0 && !sc.sweep.empty()) {
        const double contrast = sc.sweep.back();
        const auto [udir, rep] = solve_direct(
            fem, ContrastCoefficient::high(M, std::max(contrast, 1e6)), sc.data);
        double dev = 0.0;
        for (int m = 1; m <= M; ++m)
            dev = std::max(dev, inclusion_rms_deviation(fem, udir, m));
        items.push_back(
            make_check("direct.inclusion_constancy", dev / std::max(fem.h1_norm(udir), 1e-300), 1e-4));
    }
    return items;
}

} // namespace hcx
