#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hcx/errors.hpp"

namespace hcx {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Symmetric sparse matrix in compressed-row form (both halves stored).
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> cols;
    std::vector<double> vals;

    static SparseMatrix from_triplets(int n, std::vector<Triplet> triplets) {
        std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        SparseMatrix A;
        A.n = n;
        A.row_ptr.assign((std::size_t)n + 1, 0);
        for (std::size_t i = 0; i < triplets.size();) {
            std::size_t j = i;
            double sum = 0.0;
            while (j < triplets.size() && triplets[j].row == triplets[i].row &&
                   triplets[j].col == triplets[i].col) {
                sum += triplets[j].value;
                ++j;
            }
            A.cols.push_back(triplets[i].col);
            A.vals.push_back(sum);
            A.row_ptr[(std::size_t)triplets[i].row + 1]++;
            i = j;
        }
        for (int r = 0; r < n; ++r)
            A.row_ptr[(std::size_t)r + 1] += A.row_ptr[(std::size_t)r];
        return A;
    }

    void multiply(std::span<const double> x, std::span<double> y) const {
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int k = row_ptr[(std::size_t)r]; k < row_ptr[(std::size_t)r + 1]; ++k)
                s += vals[(std::size_t)k] * x[(std::size_t)cols[(std::size_t)k]];
            y[(std::size_t)r] = s;
        }
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> y((std::size_t)n, 0.0);
        multiply(x, y);
        return y;
    }

    /// u' A v
    double quadratic(std::span<const double> u, std::span<const double> v) const {
        double s = 0.0;
        for (int r = 0; r < n; ++r) {
            double row = 0.0;
            for (int k = row_ptr[(std::size_t)r]; k < row_ptr[(std::size_t)r + 1]; ++k)
                row += vals[(std::size_t)k] * v[(std::size_t)cols[(std::size_t)k]];
            s += u[(std::size_t)r] * row;
        }
        return s;
    }

    double row_value(int r, int c) const {
        for (int k = row_ptr[(std::size_t)r]; k < row_ptr[(std::size_t)r + 1]; ++k)
            if (cols[(std::size_t)k] == c)
                return vals[(std::size_t)k];
        return 0.0;
    }
};

namespace detail {

/// Reverse Cuthill-McKee over the adjacency of a node subset; returns the new
/// order as a list of local indices (positions in `keep`).
inline std::vector<int> rcm_order(const SparseMatrix& A, const std::vector<int>& keep) {
    const int nloc = (int)keep.size();
    std::vector<int> global_to_local((std::size_t)A.n, -1);
    for (int i = 0; i < nloc; ++i)
        global_to_local[(std::size_t)keep[(std::size_t)i]] = i;
    std::vector<std::vector<int>> adj((std::size_t)nloc);
    for (int i = 0; i < nloc; ++i) {
        const int g = keep[(std::size_t)i];
        for (int k = A.row_ptr[(std::size_t)g]; k < A.row_ptr[(std::size_t)g + 1]; ++k) {
            const int lj = global_to_local[(std::size_t)A.cols[(std::size_t)k]];
            if (lj >= 0 && lj != i)
                adj[(std::size_t)i].push_back(lj);
        }
        std::sort(adj[(std::size_t)i].begin(), adj[(std::size_t)i].end());
        adj[(std::size_t)i].erase(std::unique(adj[(std::size_t)i].begin(), adj[(std::size_t)i].end()),
                                  adj[(std::size_t)i].end());
    }
    std::vector<int> order;
    order.reserve((std::size_t)nloc);
    std::vector<char> visited((std::size_t)nloc, 0);
    auto degree_less = [&](int a, int b) {
        const auto da = adj[(std::size_t)a].size(), db = adj[(std::size_t)b].size();
        return da != db ? da < db : a < b;
    };
    for (int start_scan = 0; (int)order.size() < nloc; ++start_scan) {
        int start = -1;
        for (int i = 0; i < nloc; ++i)
            if (!visited[(std::size_t)i] && (start < 0 || degree_less(i, start)))
                start = i;
        std::vector<int> queue{start};
        visited[(std::size_t)start] = 1;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int u = queue[qi];
            order.push_back(u);
            std::vector<int> next;
            for (int v : adj[(std::size_t)u])
                if (!visited[(std::size_t)v]) {
                    visited[(std::size_t)v] = 1;
                    next.push_back(v);
                }
            std::sort(next.begin(), next.end(), degree_less);
            queue.insert(queue.end(), next.begin(), next.end());
        }
    }
    std::reverse(order.begin(), order.end());
    return order;
}

} // namespace detail

/// Envelope Cholesky factorization of a symmetric positive definite submatrix,
/// with reverse Cuthill-McKee reordering to keep the envelope small.  Factored
/// once and reused across right-hand sides.
class SkylineCholesky {
 public:
    SkylineCholesky() = default;

    /// Factors A restricted to the (sorted, global-index) node set `keep`.
    SkylineCholesky(const SparseMatrix& A, const std::vector<int>& keep) { factor(A, keep); }

    void factor(const SparseMatrix& A, const std::vector<int>& keep) {
        nloc_ = (int)keep.size();
        if (nloc_ == 0)
            return;
        const std::vector<int> order = detail::rcm_order(A, keep); // position -> local index
        perm_.assign((std::size_t)nloc_, 0);                       // local index -> position
        for (int p = 0; p < nloc_; ++p)
            perm_[(std::size_t)order[(std::size_t)p]] = p;

        std::vector<int> global_to_local((std::size_t)A.n, -1);
        for (int i = 0; i < nloc_; ++i)
            global_to_local[(std::size_t)keep[(std::size_t)i]] = i;

        first_.assign((std::size_t)nloc_, 0);
        for (int i = 0; i < nloc_; ++i)
            first_[(std::size_t)i] = i;
        for (int i = 0; i < nloc_; ++i) {
            const int g = keep[(std::size_t)i];
            const int pi = perm_[(std::size_t)i];
            for (int k = A.row_ptr[(std::size_t)g]; k < A.row_ptr[(std::size_t)g + 1]; ++k) {
                const int lj = global_to_local[(std::size_t)A.cols[(std::size_t)k]];
                if (lj < 0)
                    continue;
                const int pj = perm_[(std::size_t)lj];
                if (pj < pi)
                    first_[(std::size_t)pi] = std::min(first_[(std::size_t)pi], pj);
                else if (pi < pj)
                    first_[(std::size_t)pj] = std::min(first_[(std::size_t)pj], pi);
            }
        }
        start_.assign((std::size_t)nloc_ + 1, 0);
        for (int i = 0; i < nloc_; ++i)
            start_[(std::size_t)i + 1] =
                start_[(std::size_t)i] + (i - first_[(std::size_t)i] + 1);
        env_.assign((std::size_t)start_[(std::size_t)nloc_], 0.0);

        for (int i = 0; i < nloc_; ++i) {
            const int g = keep[(std::size_t)i];
            const int pi = perm_[(std::size_t)i];
            for (int k = A.row_ptr[(std::size_t)g]; k < A.row_ptr[(std::size_t)g + 1]; ++k) {
                const int lj = global_to_local[(std::size_t)A.cols[(std::size_t)k]];
                if (lj < 0)
                    continue;
                const int pj = perm_[(std::size_t)lj];
                if (pj <= pi)
                    at(pi, pj) = A.vals[(std::size_t)k];
            }
        }

        // in-place LL^T restricted to the envelope
        min_pivot_ = std::numeric_limits<double>::infinity();
        max_pivot_ = 0.0;
        for (int i = 0; i < nloc_; ++i) {
            for (int j = first_[(std::size_t)i]; j < i; ++j) {
                double s = at(i, j);
                const int lo = std::max(first_[(std::size_t)i], first_[(std::size_t)j]);
                for (int k = lo; k < j; ++k)
                    s -= at(i, k) * at(j, k);
                at(i, j) = s / at(j, j);
            }
            double d = at(i, i);
            for (int k = first_[(std::size_t)i]; k < i; ++k)
                d -= at(i, k) * at(i, k);
            if (!(d > 0.0))
                throw SolverDiverged("sparse Cholesky pivot " + std::to_string(i) +
                                     " not positive: matrix is not SPD");
            at(i, i) = std::sqrt(d);
            min_pivot_ = std::min(min_pivot_, d);
            max_pivot_ = std::max(max_pivot_, d);
        }
    }

    /// Ratio of the extreme squared pivots; a cheap conditioning proxy.
    double condition_estimate() const {
        return (min_pivot_ > 0.0) ? max_pivot_ / min_pivot_ : 0.0;
    }

    int size() const { return nloc_; }

    /// Solves in the local ordering of `keep`: b holds the right-hand side on
    /// entry and the solution on return.
    void solve_inplace(std::vector<double>& b) const {
        std::vector<double> y((std::size_t)nloc_);
        for (int i = 0; i < nloc_; ++i)
            y[(std::size_t)perm_[(std::size_t)i]] = b[(std::size_t)i];
        for (int i = 0; i < nloc_; ++i) {
            double s = y[(std::size_t)i];
            for (int k = first_[(std::size_t)i]; k < i; ++k)
                s -= at(i, k) * y[(std::size_t)k];
            y[(std::size_t)i] = s / at(i, i);
        }
        for (int i = nloc_ - 1; i >= 0; --i) {
            const double xi = y[(std::size_t)i] / at(i, i);
            y[(std::size_t)i] = xi;
            for (int k = first_[(std::size_t)i]; k < i; ++k)
                y[(std::size_t)k] -= at(i, k) * xi;
        }
        for (int i = 0; i < nloc_; ++i)
            b[(std::size_t)i] = y[(std::size_t)perm_[(std::size_t)i]];
    }

 private:
    double& at(int i, int j) {
        return env_[(std::size_t)(start_[(std::size_t)i] + (j - first_[(std::size_t)i]))];
    }
    double at(int i, int j) const {
        return env_[(std::size_t)(start_[(std::size_t)i] + (j - first_[(std::size_t)i]))];
    }

    int nloc_ = 0;
    std::vector<int> perm_;  // local index -> permuted position
    std::vector<int> first_; // first stored column per permuted row
    std::vector<int> start_; // row offsets into env_
    std::vector<double> env_;
    double min_pivot_ = 0.0;
    double max_pivot_ = 0.0;
};

/// Dense symmetric positive definite solver for the small inclusion-count
/// systems; throws NotSPD when a pivot fails.
class DenseSPD {
 public:
    DenseSPD() = default;
    explicit DenseSPD(std::vector<std::vector<double>> a) : a_(std::move(a)) {
        const int n = (int)a_.size();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (std::abs(a_[(std::size_t)i][(std::size_t)j] - a_[(std::size_t)j][(std::size_t)i]) >
                    1e-12 * (1.0 + std::abs(a_[(std::size_t)i][(std::size_t)j])))
                    throw NotSPD("matrix is not symmetric");
        l_ = a_;
        for (int j = 0; j < n; ++j) {
            double d = l_[(std::size_t)j][(std::size_t)j];
            for (int k = 0; k < j; ++k)
                d -= l_[(std::size_t)j][(std::size_t)k] * l_[(std::size_t)j][(std::size_t)k];
            if (!(d > 0.0))
                throw NotSPD("matrix is not positive definite");
            l_[(std::size_t)j][(std::size_t)j] = std::sqrt(d);
            for (int i = j + 1; i < n; ++i) {
                double s = l_[(std::size_t)i][(std::size_t)j];
                for (int k = 0; k < j; ++k)
                    s -= l_[(std::size_t)i][(std::size_t)k] * l_[(std::size_t)j][(std::size_t)k];
                l_[(std::size_t)i][(std::size_t)j] = s / l_[(std::size_t)j][(std::size_t)j];
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        const int n = (int)b.size();
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < i; ++k)
                b[(std::size_t)i] -= l_[(std::size_t)i][(std::size_t)k] * b[(std::size_t)k];
            b[(std::size_t)i] /= l_[(std::size_t)i][(std::size_t)i];
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int k = i + 1; k < n; ++k)
                b[(std::size_t)i] -= l_[(std::size_t)k][(std::size_t)i] * b[(std::size_t)k];
            b[(std::size_t)i] /= l_[(std::size_t)i][(std::size_t)i];
        }
        return b;
    }

    const std::vector<std::vector<double>>& matrix() const { return a_; }

 private:
    std::vector<std::vector<double>> a_;
    std::vector<std::vector<double>> l_;
};

} // namespace hcx
