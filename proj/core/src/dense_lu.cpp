#include "blockcells/dense_lu.hpp"

#include <cmath>
#include <numeric>

namespace blockcells {

DenseMatrix densify(const CsrMatrix& a) {
    if (a.n_rows != a.n_cols)
        throw std::invalid_argument("densify: matrix must be square");
    DenseMatrix d = DenseMatrix::zero(a.n_rows);
    for (std::size_t i = 0; i < a.n_rows; ++i)
        for (std::size_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
            d.at(i, a.col_idx[j]) = a.values[j];
    return d;
}

DenseVector lu_solve(const DenseMatrix& a, const DenseVector& b) {
    const std::size_t n = a.n;
    if (a.entries.size() != n * n)
        throw std::invalid_argument("lu_solve: malformed matrix");
    if (b.size() != n) throw std::invalid_argument("lu_solve: dimension mismatch");

    std::vector<double> lu = a.entries;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    for (std::size_t k = 0; k < n; ++k) {
        // Partial pivot: largest magnitude in column k, ties to the lowest row.
        std::size_t pivot = k;
        double best = std::abs(lu[perm[k] * n + k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double mag = std::abs(lu[perm[i] * n + k]);
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        if (best == 0.0) throw SingularMatrix("lu_solve: exactly singular matrix");
        std::swap(perm[k], perm[pivot]);
        const double pivot_value = lu[perm[k] * n + k];
        for (std::size_t i = k + 1; i < n; ++i) {
            double& lik = lu[perm[i] * n + k];
            lik /= pivot_value;
            const double factor = lik;
            for (std::size_t j = k + 1; j < n; ++j)
                lu[perm[i] * n + j] -= factor * lu[perm[k] * n + j];
        }
    }

    DenseVector x(n);
    for (std::size_t i = 0; i < n; ++i) {  // forward: L y = P b
        double sum = b[perm[i]];
        for (std::size_t j = 0; j < i; ++j) sum -= lu[perm[i] * n + j] * x[j];
        x[i] = sum;
    }
    for (std::size_t ii = n; ii-- > 0;) {  // backward: U x = y
        double sum = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) sum -= lu[perm[ii] * n + j] * x[j];
        x[ii] = sum / lu[perm[ii] * n + ii];
    }
    return x;
}

DenseVector lu_solve(const CsrMatrix& a, const DenseVector& b) {
    return lu_solve(densify(a), b);
}

}  // namespace blockcells
