// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "encost/errors.hpp"

namespace encost {

// Solves A x = b (row-major n*n) by Gaussian elimination with partial
// pivoting. Returns false when the matrix is numerically singular.
inline bool solve_linear(std::vector<double> a, std::vector<double> b, int n,
                         std::vector<double>& x) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::fabs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            double v = std::fabs(a[static_cast<std::size_t>(r) * n + col]);
            if (v > best) { best = v; pivot = r; }
        }
        if (best < 1e-300) return false;
        if (pivot != col) {
            for (int c = col; c < n; ++c)
                std::swap(a[static_cast<std::size_t>(pivot) * n + c],
                          a[static_cast<std::size_t>(col) * n + c]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = a[static_cast<std::size_t>(r) * n + col] * inv;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c)
                a[static_cast<std::size_t>(r) * n + c] -=
                    f * a[static_cast<std::size_t>(col) * n + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c)
            s -= a[static_cast<std::size_t>(r) * n + c] * x[c];
        x[r] = s / a[static_cast<std::size_t>(r) * n + r];
    }
    return true;
}

// Inverts a small dense matrix; throws RankDeficiencyError when singular.
inline std::vector<double> invert_matrix(const std::vector<double>& a, int n) {
    std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> e(n, 0.0), col;
    for (int j = 0; j < n; ++j) {
        e.assign(n, 0.0);
        e[j] = 1.0;
        if (!solve_linear(a, e, n, col))
            throw RankDeficiencyError("matrix inversion: singular matrix");
        for (int i = 0; i < n; ++i)
            inv[static_cast<std::size_t>(i) * n + j] = col[i];
    }
    return inv;
}

struct LeastSquaresResult {
    std::vector<double> coefficients;  // zero for dropped columns
    std::vector<int> dropped_columns;
};

// Ordinary least squares via the normal equations. Columns whose pivot
// collapses during the (diagonal-pivot) elimination are linearly dependent on
// earlier ones; their coefficient is fixed at zero and the column index is
// reported. Callers order columns so that the intercept comes first.
inline LeastSquaresResult solve_least_squares(const std::vector<double>& x,
                                              const std::vector<double>& y,
                                              int m, int k) {
    if (m < k)
        throw RankDeficiencyError("least squares: fewer rows than columns");
    std::vector<double> n(static_cast<std::size_t>(k) * k, 0.0);
    std::vector<double> rhs(k, 0.0);
    for (int i = 0; i < m; ++i) {
        const double* row = &x[static_cast<std::size_t>(i) * k];
        for (int a = 0; a < k; ++a) {
            rhs[a] += row[a] * y[i];
            for (int b = a; b < k; ++b)
                n[static_cast<std::size_t>(a) * k + b] += row[a] * row[b];
        }
    }
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < a; ++b)
            n[static_cast<std::size_t>(a) * k + b] = n[static_cast<std::size_t>(b) * k + a];

    double max_diag = 0.0;
    for (int a = 0; a < k; ++a)
        max_diag = std::max(max_diag, n[static_cast<std::size_t>(a) * k + a]);
    const double tol = std::max(1e-12 * max_diag, 1e-300);

    LeastSquaresResult result;
    // Symmetric elimination in column order; no row swaps so that a dependent
    // column surfaces at its own pivot and can be dropped deterministically.
    std::vector<char> live(k, 1);
    for (int col = 0; col < k; ++col) {
        double piv = n[static_cast<std::size_t>(col) * k + col];
        if (piv < tol) {
            live[col] = 0;
            result.dropped_columns.push_back(col);
            for (int c = 0; c < k; ++c) {
                n[static_cast<std::size_t>(col) * k + c] = 0.0;
                n[static_cast<std::size_t>(c) * k + col] = 0.0;
            }
            rhs[col] = 0.0;
            continue;
        }
        for (int r = col + 1; r < k; ++r) {
            double f = n[static_cast<std::size_t>(r) * k + col] / piv;
            if (f == 0.0) continue;
            for (int c = col; c < k; ++c)
                n[static_cast<std::size_t>(r) * k + c] -=
                    f * n[static_cast<std::size_t>(col) * k + c];
            rhs[r] -= f * rhs[col];
        }
    }
    result.coefficients.assign(k, 0.0);
    for (int r = k - 1; r >= 0; --r) {
        if (!live[r]) continue;
        double s = rhs[r];
        for (int c = r + 1; c < k; ++c)
            s -= n[static_cast<std::size_t>(r) * k + c] * result.coefficients[c];
        result.coefficients[r] = s / n[static_cast<std::size_t>(r) * k + r];
    }
    return result;
}

}  // namespace encost
