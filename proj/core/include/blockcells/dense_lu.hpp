#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "blockcells/csr.hpp"

namespace blockcells {

/// Matrix is exactly singular: a zero pivot survived partial pivoting.
struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Row-major dense square matrix for the direct reference path.
struct DenseMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  // n*n, row-major

    double& at(std::size_t i, std::size_t j) { return entries[i * n + j]; }
    double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }

    static DenseMatrix zero(std::size_t n) { return {n, std::vector<double>(n * n, 0.0)}; }
};

/// Entrywise copy of a CSR matrix; absent entries are zero.
DenseMatrix densify(const CsrMatrix& a);

/// Dense LU with partial pivoting (max column magnitude, ties to the lowest
/// row index). Accuracy and fallback oracle; never the benchmarked hot path.
DenseVector lu_solve(const DenseMatrix& a, const DenseVector& b);
DenseVector lu_solve(const CsrMatrix& a, const DenseVector& b);

}  // namespace blockcells
