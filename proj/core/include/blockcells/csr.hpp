#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace blockcells {

using DenseVector = std::vector<double>;

/// Sparse matrix in compressed-row form. Per-cell Jacobian systems and the
/// block-diagonal batched systems all use this one format.
struct CsrMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::size_t> row_ptr;  // length n_rows + 1, non-decreasing
    std::vector<std::size_t> col_idx;  // strictly increasing within a row
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }

    /// Build from coordinate triplets (row, col, value). Duplicate entries
    /// are summed; the result satisfies all CSR invariants.
    static CsrMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<std::size_t> rows,
                                   std::vector<std::size_t> cols,
                                   std::vector<double> vals);

    static CsrMatrix identity(std::size_t n);

    /// Throws std::invalid_argument if any CSR invariant is violated.
    void check_invariants() const;
};

/// y = A x, each row accumulated sequentially in storage order.
DenseVector spmv(const CsrMatrix& a, const DenseVector& x);
void spmv(const CsrMatrix& a, const DenseVector& x, DenseVector& y);

/// y = A^T x, bit-identical to spmv(transpose(A), x).
DenseVector spmv_transpose(const CsrMatrix& a, const DenseVector& x);
void spmv_transpose(const CsrMatrix& a, const DenseVector& x, DenseVector& y);

/// Explicit transpose with sorted rows.
CsrMatrix transpose(const CsrMatrix& a);

/// z = a*x + b*y elementwise.
DenseVector axpby(double a, const DenseVector& x, double b, const DenseVector& y);
void axpby(double a, const DenseVector& x, double b, const DenseVector& y,
           DenseVector& z);

/// Matrix Market coordinate dump ("%%MatrixMarket matrix coordinate real
/// general"), 1-based indices. Debugging aid.
void write_matrix_market(const CsrMatrix& a, std::ostream& out);
void write_matrix_market(const CsrMatrix& a, const std::string& path);

}  // namespace blockcells
