#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hcx/parallel.hpp"
#include "hcx/solvers.hpp"

namespace hcx {

/// Harmonic characteristic function of inclusion m: one on the closure of
/// D_m, zero on the other inclusions and on the outer boundary, discrete
/// harmonic in the background.
inline FEFunction compute_chi(const FemSystem& fem, const ConstrainedSolver& background, int m) {
    FEFunction chi = fem.zero();
    for (int p : fem.index().interface_nodes[(std::size_t)m - 1])
        chi[p] = 1.0;
    for (int p : fem.index().inclusion_interior[(std::size_t)m - 1])
        chi[p] = 1.0;
    const std::vector<double> no_load(chi.values.size(), 0.0);
    background.solve(no_load, chi.values);
    return chi;
}

/// Energy Gram matrix of the characteristic functions over the background,
/// a_ij = chi_i' K0 chi_j.  Contrast never enters.
inline std::vector<std::vector<double>> assemble_a_geom(const FemSystem& fem,
                                                        const std::vector<FEFunction>& chis) {
    const int M = (int)chis.size();
    std::vector<std::vector<double>> a((std::size_t)M, std::vector<double>((std::size_t)M, 0.0));
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            a[(std::size_t)i][(std::size_t)j] = fem.stiffness_background().quadratic(
                chis[(std::size_t)i].values, chis[(std::size_t)j].values);
    return a;
}

/// The contrast-independent geometry data of a mesh: the characteristic
/// function family and the factored Gram matrix that determines the inclusion
/// constants of every expansion term.
struct HarmonicBasis {
    std::vector<FEFunction> chis;
    std::vector<std::vector<double>> a_geom;
    DenseSPD factor;

    int size() const { return (int)chis.size(); }

    /// Largest diagonal energy; the natural magnitude of interface fluxes on
    /// this geometry (used to floor the compatibility defect of no-op steps).
    double flux_scale() const {
        double s = 0.0;
        for (std::size_t m = 0; m < a_geom.size(); ++m)
            s = std::max(s, a_geom[m][m]);
        return s;
    }
};

inline HarmonicBasis build_harmonic_basis(const FemSystem& fem, const ConstrainedSolver& background,
                                          int threads = 1) {
    HarmonicBasis basis;
    const int M = fem.num_inclusions();
    basis.chis.resize((std::size_t)M);
    parallel_for(M, threads,
                 [&](int i) { basis.chis[(std::size_t)i] = compute_chi(fem, background, i + 1); });
    basis.a_geom = assemble_a_geom(fem, basis.chis);
    basis.factor = DenseSPD(basis.a_geom);
    return basis;
}

inline HarmonicBasis build_harmonic_basis(const FemSystem& fem, int threads = 1) {
    const ConstrainedSolver background = make_background_dirichlet(fem);
    return build_harmonic_basis(fem, background, threads);
}

/// X = A_geom^{-1} rhs with a residual guard.
inline std::vector<double> solve_constants(const HarmonicBasis& basis, std::vector<double> rhs) {
    const int M = basis.size();
    if ((int)rhs.size() != M)
        throw Error("solve_constants: rhs size does not match the basis");
    double rhs_norm = 0.0;
    for (double v : rhs)
        rhs_norm += v * v;
    rhs_norm = std::sqrt(rhs_norm);
    std::vector<double> x = basis.factor.solve(rhs);
    double res = 0.0;
    for (int i = 0; i < M; ++i) {
        double r = -rhs[(std::size_t)i];
        for (int j = 0; j < M; ++j)
            r += basis.a_geom[(std::size_t)i][(std::size_t)j] * x[(std::size_t)j];
        res += r * r;
    }
    if (rhs_norm > 0.0 && std::sqrt(res) > 1e-12 * rhs_norm)
        throw SolverDiverged("constant system residual above 1e-12 relative");
    return x;
}

/// Full-precision CSV dump of the Gram matrix, one row per line.
inline std::string a_geom_csv(const HarmonicBasis& basis) {
    std::string out;
    char buf[64];
    for (const auto& row : basis.a_geom) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            std::snprintf(buf, sizeof buf, j + 1 < row.size() ? "%.17g," : "%.17g", row[j]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

} // namespace hcx
