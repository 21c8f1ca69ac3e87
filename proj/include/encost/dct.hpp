// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "encost/errors.hpp"

namespace encost {

// Orthonormal 2-D DCT-II over square blocks, Y = M X M^T with
// M[k][n] = c_k cos(pi (2n+1) k / (2N)), c_0 = sqrt(1/N), c_k = sqrt(2/N).
// For a constant block of value v the DC coefficient is N*v and every other
// coefficient is zero.
class Dct2d {
public:
    explicit Dct2d(int size) : n_(size) {
        if (size < 1) throw DomainError("dct: block size must be positive");
        basis_.resize(static_cast<std::size_t>(n_) * n_);
        const double c0 = std::sqrt(1.0 / n_);
        const double ck = std::sqrt(2.0 / n_);
        for (int k = 0; k < n_; ++k)
            for (int x = 0; x < n_; ++x)
                basis_[static_cast<std::size_t>(k) * n_ + x] =
                    (k == 0 ? c0 : ck) *
                    std::cos(M_PI * (2.0 * x + 1.0) * k / (2.0 * n_));
    }

    int size() const { return n_; }

    // block and coeffs are row-major size*size; they may not alias.
    void forward(const double* block, double* coeffs) const {
        const std::size_t n = static_cast<std::size_t>(n_);
        std::vector<double> tmp(n * n);
        // rows: tmp = block * M^T
        for (std::size_t y = 0; y < n; ++y) {
            const double* row = block + y * n;
            for (std::size_t k = 0; k < n; ++k) {
                const double* bk = &basis_[k * n];
                double s = 0.0;
                for (std::size_t x = 0; x < n; ++x) s += row[x] * bk[x];
                tmp[y * n + k] = s;
            }
        }
        // columns: coeffs = M * tmp
        for (std::size_t k = 0; k < n; ++k) {
            const double* bk = &basis_[k * n];
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t y = 0; y < n; ++y) s += bk[y] * tmp[y * n + j];
                coeffs[k * n + j] = s;
            }
        }
    }

private:
    int n_;
    std::vector<double> basis_;
};

}  // namespace encost
