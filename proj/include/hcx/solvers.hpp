#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hcx/fem.hpp"

namespace hcx {

struct SolveReport {
    int iterations = 0;                // 0 for direct factorizations
    double residual = 0.0;             // relative residual of the linear solve
    double compatibility_defect = 0.0; // Neumann solves only
};

/// SPD solve with Dirichlet elimination.  The operator (a subdomain stiffness
/// in full mesh indexing) is factored once over the free nodes and reused for
/// every right-hand side; the factorization is contrast-independent.
class ConstrainedSolver {
 public:
    ConstrainedSolver(const SparseMatrix& K, std::vector<int> free_nodes, double tol = 1e-12)
        : K_(&K), free_(std::move(free_nodes)), tol_(tol), chol_(K, free_) {
        for (int p : free_)
            diag_scale_ = std::max(diag_scale_, K.row_value(p, p));
    }

    const std::vector<int>& free_nodes() const { return free_; }

    /// `x` carries the Dirichlet values on the constrained nodes on entry and
    /// receives the solution on the free nodes; `b` is the full-length load.
    SolveReport solve(std::span<const double> b, std::vector<double>& x) const {
        const std::size_t nf = free_.size();
        std::vector<double> x_lift(x.begin(), x.end());
        for (int p : free_)
            x_lift[(std::size_t)p] = 0.0;
        std::vector<double> coupled((std::size_t)K_->n, 0.0);
        K_->multiply(x_lift, coupled);
        std::vector<double> rhs(nf);
        for (std::size_t i = 0; i < nf; ++i) {
            const int p = free_[i];
            rhs[i] = b[(std::size_t)p] - coupled[(std::size_t)p];
        }
        const double rhs_norm = std::sqrt(std::inner_product(rhs.begin(), rhs.end(), rhs.begin(), 0.0));
        std::vector<double> sol = rhs;
        chol_.solve_inplace(sol);
        for (std::size_t i = 0; i < nf; ++i)
            x[(std::size_t)free_[i]] = sol[i];

        K_->multiply(x, coupled);
        double res2 = 0.0, sol2 = 0.0;
        for (int p : free_) {
            const double r = coupled[(std::size_t)p] - b[(std::size_t)p];
            res2 += r * r;
            sol2 += x[(std::size_t)p] * x[(std::size_t)p];
        }
        SolveReport report;
        // backward-error normalization ||Kx-b|| / (||K|| ||x|| + ||b||)
        const double denom = diag_scale_ * std::sqrt(sol2) + rhs_norm;
        report.residual = (denom > 0.0) ? std::sqrt(res2) / denom : std::sqrt(res2);
        if (!std::isfinite(denom) || !std::isfinite(res2) || !std::isfinite(sol2))
            throw SolverDiverged("non-finite values in the Dirichlet solve");
        if (!(report.residual <= tol_) && denom > 0.0) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "Dirichlet solve residual %.3e above tolerance %.3e "
                          "(pivot-ratio condition estimate %.3e)",
                          report.residual, tol_, chol_.condition_estimate());
            throw SolverDiverged(msg);
        }
        return report;
    }

 private:
    const SparseMatrix* K_;
    std::vector<int> free_;
    double tol_;
    SkylineCholesky chol_;
    double diag_scale_ = 0.0;
};

/// Singular Neumann solve on one inclusion with the mass-weighted zero-mean
/// constraint imposed through a Lagrange multiplier.  The saddle system is
/// reduced by block elimination onto a grounded SPD block, so one contrast-free
/// Cholesky factorization serves every step of the expansion recursion.
class NeumannMeanZeroSolver {
 public:
    NeumannMeanZeroSolver(const SparseMatrix& K, std::vector<int> nodes,
                          const std::vector<double>& node_masses, double tol = 1e-12)
        : K_(&K), nodes_(std::move(nodes)), tol_(tol) {
        if (nodes_.size() < 2)
            throw InvalidTopology("Neumann region needs at least two nodes");
        ground_ = nodes_.front();
        rest_.assign(nodes_.begin() + 1, nodes_.end());
        chol_.factor(K, rest_);
        const std::size_t nr = rest_.size();
        w_rest_.resize(nr);
        k_ground_.resize(nr);
        for (std::size_t i = 0; i < nr; ++i) {
            w_rest_[i] = node_masses[(std::size_t)rest_[i]];
            k_ground_[i] = K.row_value(rest_[i], ground_);
        }
        w_ground_ = node_masses[(std::size_t)ground_];
        k_gg_ = K.row_value(ground_, ground_);
        yk_ = k_ground_;
        chol_.solve_inplace(yk_);
        yw_ = w_rest_;
        chol_.solve_inplace(yw_);
        s11_ = k_gg_ - dotv(k_ground_, yk_);
        s12_ = w_ground_ - dotv(k_ground_, yw_);
        s21_ = w_ground_ - dotv(w_rest_, yk_);
        s22_ = -dotv(w_rest_, yw_);
    }

    const std::vector<int>& nodes() const { return nodes_; }

    /// Solves K u + lambda w = load with w'u = 0.  Only the entries of `out`
    /// at the region nodes are written.  `defect_floor` is an absolute load
    /// scale below which the compatibility check treats the step as a no-op.
    SolveReport solve(std::span<const double> load, std::vector<double>& out,
                      double defect_threshold = 1e-10, double defect_floor = 0.0) const {
        const std::size_t nr = rest_.size();
        double sum = load[(std::size_t)ground_];
        double nrm2 = load[(std::size_t)ground_] * load[(std::size_t)ground_];
        std::vector<double> b(nr);
        for (std::size_t i = 0; i < nr; ++i) {
            b[i] = load[(std::size_t)rest_[i]];
            sum += b[i];
            nrm2 += b[i] * b[i];
        }
        const double load_norm = std::sqrt(nrm2);
        SolveReport report;
        const double denom = std::max(load_norm, defect_floor);
        report.compatibility_defect = (denom > 0.0) ? std::abs(sum) / denom : 0.0;
        if (report.compatibility_defect > defect_threshold)
            throw IncompatibleData("Neumann compatibility defect " +
                                   std::to_string(report.compatibility_defect) +
                                   " above threshold");

        std::vector<double> yb = b;
        chol_.solve_inplace(yb);
        const double r1 = load[(std::size_t)ground_] - dotv(k_ground_, yb);
        const double r2 = -dotv(w_rest_, yb);
        // 2x2 elimination with partial pivoting; s11 is a numerically zero
        // Schur complement of the singular block
        double u0, lambda;
        if (std::abs(s11_) >= std::abs(s21_)) {
            const double f = s21_ / s11_;
            lambda = (r2 - f * r1) / (s22_ - f * s12_);
            u0 = (r1 - s12_ * lambda) / s11_;
        } else {
            const double f = s11_ / s21_;
            lambda = (r1 - f * r2) / (s12_ - f * s22_);
            u0 = (r2 - s22_ * lambda) / s21_;
        }
        out[(std::size_t)ground_] = u0;
        for (std::size_t i = 0; i < nr; ++i)
            out[(std::size_t)rest_[i]] = yb[i] - u0 * yk_[i] - lambda * yw_[i];

        // residual of the augmented system, restricted to the region
        std::vector<double> ku((std::size_t)K_->n, 0.0);
        K_->multiply(out, ku);
        double res2 = 0.0, sol2 = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const int p = nodes_[i];
            const double w = (p == ground_) ? w_ground_ : w_rest_[i - 1];
            const double r = ku[(std::size_t)p] + lambda * w - load[(std::size_t)p];
            res2 += r * r;
            sol2 += out[(std::size_t)p] * out[(std::size_t)p];
        }
        const double res_denom = k_gg_ * std::sqrt(sol2) + load_norm;
        report.residual = (res_denom > 0.0) ? std::sqrt(res2) / res_denom : std::sqrt(res2);
        if (!std::isfinite(res_denom) || !std::isfinite(res2) || !std::isfinite(sol2))
            throw SolverDiverged("non-finite values in the Neumann solve");
        if (load_norm > defect_floor && !(report.residual <= tol_)) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "Neumann solve residual %.3e above tolerance %.3e",
                          report.residual, tol_);
            throw SolverDiverged(msg);
        }
        return report;
    }

 private:
    static double dotv(const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            s += a[i] * b[i];
        return s;
    }

    const SparseMatrix* K_;
    std::vector<int> nodes_;
    int ground_ = 0;
    std::vector<int> rest_;
    double tol_;
    SkylineCholesky chol_;
    std::vector<double> w_rest_, k_ground_, yk_, yw_;
    double w_ground_ = 0.0, k_gg_ = 0.0;
    double s11_ = 0.0, s12_ = 0.0, s21_ = 0.0, s22_ = 0.0;
};

// --- weak (variational) interface fluxes ------------------------------------

/// Residual functional r = K_source u - b_source over the whole node range.
/// Restricted to the nodes of an interface it is the discrete flux functional
/// of u across that interface, outward from the source region.
inline std::vector<double> residual_functional(const SparseMatrix& K_source, const FEFunction& u,
                                               std::span<const double> b_source = {}) {
    std::vector<double> r((std::size_t)K_source.n, 0.0);
    K_source.multiply(u.values, r);
    if (!b_source.empty())
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= b_source[i];
    return r;
}

struct WeakFlux {
    std::vector<int> nodes;     // interface nodes, ascending
    std::vector<double> values; // functional entry per node
    double total = 0.0;
};

inline WeakFlux extract_flux(const SubdomainIndex& idx, std::span<const double> residual, int m) {
    WeakFlux flux;
    flux.nodes = idx.interface_nodes[(std::size_t)m - 1];
    flux.values.reserve(flux.nodes.size());
    for (int p : flux.nodes) {
        flux.values.push_back(residual[(std::size_t)p]);
        flux.total += residual[(std::size_t)p];
    }
    return flux;
}

/// Weak flux of u across the boundary of inclusion `target_m`, computed from
/// the residual of the variational problem on `source_tags`.
inline WeakFlux weak_flux(const FemSystem& fem, const FEFunction& u,
                          std::span<const int> source_tags, int target_m,
                          const PiecewiseData& f = {}) {
    const SparseMatrix K = assemble_stiffness_region(fem.mesh(), source_tags);
    std::vector<double> b;
    if (f.has_forcing())
        b = assemble_load(fem.mesh(), f, source_tags);
    const auto r = residual_functional(K, u, b);
    return extract_flux(fem.index(), r, target_m);
}

// --- one-shot solver entry points -------------------------------------------

/// Dirichlet solve of `K u = load` with the given boundary values; every node
/// carried by K must be either free or constrained.
inline std::pair<FEFunction, SolveReport>
solve_dirichlet(const FemSystem& fem, const SparseMatrix& K, const std::vector<int>& free_nodes,
                std::span<const double> load, const std::vector<std::pair<int, double>>& dirichlet,
                double tol = 1e-12) {
    std::vector<char> covered((std::size_t)K.n, 0);
    for (int p : free_nodes)
        covered[(std::size_t)p] = 1;
    FEFunction x = fem.zero();
    for (const auto& [p, v] : dirichlet) {
        x[p] = v;
        covered[(std::size_t)p] = 1;
    }
    for (int p = 0; p < K.n; ++p)
        if (!covered[(std::size_t)p] && K.row_value(p, p) != 0.0)
            throw MissingBoundaryData("node " + std::to_string(p) +
                                      " of the region has no boundary value and is not free");
    ConstrainedSolver solver(K, free_nodes, tol);
    const SolveReport report = solver.solve(load, x.values);
    return {std::move(x), report};
}

/// Mean-zero Neumann solve on inclusion m of the mesh.
inline std::pair<FEFunction, SolveReport>
solve_neumann_mean_zero(const FemSystem& fem, int m, std::span<const double> load,
                        double defect_threshold = 1e-10, double defect_floor = 0.0) {
    NeumannMeanZeroSolver solver(fem.stiffness_inclusion(m), fem.index().closure_nodes(m),
                                 inclusion_node_masses(fem.mesh(), m));
    FEFunction u = fem.zero();
    const SolveReport report = solver.solve(load, u.values, defect_threshold, defect_floor);
    return {std::move(u), report};
}

// --- the recurring subdomain operators ---------------------------------------

/// Background Dirichlet operator: free on the interior of D0, constrained on
/// the outer boundary and every interface.  Shared by the characteristic
/// functions and all high-contrast recursion terms.
inline ConstrainedSolver make_background_dirichlet(const FemSystem& fem, double tol = 1e-12) {
    return ConstrainedSolver(fem.stiffness_background(), fem.index().background_interior, tol);
}

/// Background operator with natural (Neumann) interface conditions on the
/// listed inclusions: their interface nodes stay free.
inline ConstrainedSolver make_background_with_free_interfaces(const FemSystem& fem,
                                                              std::span<const int> neumann_inclusions,
                                                              double tol = 1e-12) {
    std::vector<int> free_nodes = fem.index().background_interior;
    for (int m : neumann_inclusions) {
        const auto& iface = fem.index().interface_nodes[(std::size_t)m - 1];
        free_nodes.insert(free_nodes.end(), iface.begin(), iface.end());
    }
    std::sort(free_nodes.begin(), free_nodes.end());
    return ConstrainedSolver(fem.stiffness_background(), std::move(free_nodes), tol);
}

/// Dirichlet extension operator into inclusion m (free on its interior).
inline ConstrainedSolver make_inclusion_extension(const FemSystem& fem, int m, double tol = 1e-12) {
    return ConstrainedSolver(fem.stiffness_inclusion(m),
                             fem.index().inclusion_interior[(std::size_t)m - 1], tol);
}

} // namespace hcx
