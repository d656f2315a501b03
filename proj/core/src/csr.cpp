#include "blockcells/csr.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "blockcells/format.hpp"

namespace blockcells {

namespace {

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace

CsrMatrix CsrMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                   std::vector<std::size_t> rows,
                                   std::vector<std::size_t> cols,
                                   std::vector<double> vals) {
    require(rows.size() == cols.size() && cols.size() == vals.size(),
            "from_triplets: triplet arrays differ in length");
    const std::size_t nnz_in = vals.size();
    std::vector<std::size_t> order(nnz_in);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a] != rows[b]) return rows[a] < rows[b];
        return cols[a] < cols[b];
    });

    CsrMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.row_ptr.assign(n_rows + 1, 0);
    m.col_idx.reserve(nnz_in);
    m.values.reserve(nnz_in);
    for (std::size_t k : order) {
        require(rows[k] < n_rows && cols[k] < n_cols,
                "from_triplets: index out of range");
        if (!m.values.empty() && !m.col_idx.empty() &&
            m.row_ptr[rows[k] + 1] != 0 &&  // already started this row
            m.col_idx.back() == cols[k] &&
            // back() belongs to rows[k] iff no later row has been opened
            m.row_ptr[rows[k] + 1] == m.values.size()) {
            m.values.back() += vals[k];  // duplicate entry: accumulate
            continue;
        }
        m.col_idx.push_back(cols[k]);
        m.values.push_back(vals[k]);
        m.row_ptr[rows[k] + 1] = m.values.size();
    }
    // row_ptr[i+1] currently holds the end offset only for non-empty rows.
    for (std::size_t i = 0; i < n_rows; ++i)
        m.row_ptr[i + 1] = std::max(m.row_ptr[i + 1], m.row_ptr[i]);
    m.check_invariants();
    return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    CsrMatrix m;
    m.n_rows = m.n_cols = n;
    m.row_ptr.resize(n + 1);
    m.col_idx.resize(n);
    m.values.assign(n, 1.0);
    std::iota(m.row_ptr.begin(), m.row_ptr.end(), 0);
    std::iota(m.col_idx.begin(), m.col_idx.end(), 0);
    return m;
}

void CsrMatrix::check_invariants() const {
    require(row_ptr.size() == n_rows + 1, "csr: row_ptr length != n_rows + 1");
    require(row_ptr.front() == 0, "csr: row_ptr[0] != 0");
    require(row_ptr.back() == values.size() && values.size() == col_idx.size(),
            "csr: row_ptr[n_rows] != nnz");
    for (std::size_t i = 0; i < n_rows; ++i) {
        require(row_ptr[i] <= row_ptr[i + 1], "csr: row_ptr decreasing");
        for (std::size_t j = row_ptr[i]; j < row_ptr[i + 1]; ++j) {
            require(col_idx[j] < n_cols, "csr: column index out of range");
            if (j > row_ptr[i])
                require(col_idx[j - 1] < col_idx[j],
                        "csr: columns not strictly increasing within a row");
        }
    }
}

void spmv(const CsrMatrix& a, const DenseVector& x, DenseVector& y) {
    if (a.n_cols != x.size())
        throw std::invalid_argument("spmv: dimension mismatch");
    y.resize(a.n_rows);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        double sum = 0.0;
        const std::size_t end = a.row_ptr[i + 1];
        for (std::size_t j = a.row_ptr[i]; j < end; ++j)
            sum += a.values[j] * x[a.col_idx[j]];
        y[i] = sum;
    }
}

DenseVector spmv(const CsrMatrix& a, const DenseVector& x) {
    DenseVector y;
    spmv(a, x, y);
    return y;
}

CsrMatrix transpose(const CsrMatrix& a) {
    CsrMatrix t;
    t.n_rows = a.n_cols;
    t.n_cols = a.n_rows;
    t.row_ptr.assign(a.n_cols + 1, 0);
    t.col_idx.resize(a.nnz());
    t.values.resize(a.nnz());
    for (std::size_t j : a.col_idx) ++t.row_ptr[j + 1];
    for (std::size_t j = 0; j < a.n_cols; ++j) t.row_ptr[j + 1] += t.row_ptr[j];
    std::vector<std::size_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        for (std::size_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j) {
            const std::size_t pos = next[a.col_idx[j]]++;
            t.col_idx[pos] = i;  // rows visited in order, so columns stay sorted
            t.values[pos] = a.values[j];
        }
    }
    return t;
}

void spmv_transpose(const CsrMatrix& a, const DenseVector& x, DenseVector& y) {
    if (a.n_rows != x.size())
        throw std::invalid_argument("spmv_transpose: dimension mismatch");
    // Accumulation must be bit-identical to spmv on the explicit transpose:
    // there y[i] sums A[j,i]*x[j] over j ascending, which is exactly a
    // column-ordered scatter. Scattering row by row adds to y[col] in the
    // same ascending-j order, so the two paths round identically.
    y.assign(a.n_cols, 0.0);
    for (std::size_t i = 0; i < a.n_rows; ++i) {
        const double xi = x[i];
        for (std::size_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
            y[a.col_idx[j]] += a.values[j] * xi;
    }
}

DenseVector spmv_transpose(const CsrMatrix& a, const DenseVector& x) {
    DenseVector y;
    spmv_transpose(a, x, y);
    return y;
}

void axpby(double a, const DenseVector& x, double b, const DenseVector& y,
           DenseVector& z) {
    if (x.size() != y.size())
        throw std::invalid_argument("axpby: dimension mismatch");
    z.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + b * y[i];
}

DenseVector axpby(double a, const DenseVector& x, double b, const DenseVector& y) {
    DenseVector z;
    axpby(a, x, b, y, z);
    return z;
}

void write_matrix_market(const CsrMatrix& a, std::ostream& out) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n_rows << " " << a.n_cols << " " << a.nnz() << "\n";
    for (std::size_t i = 0; i < a.n_rows; ++i)
        for (std::size_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
            out << i + 1 << " " << a.col_idx[j] + 1 << " "
                << format_double(a.values[j]) << "\n";
}

void write_matrix_market(const CsrMatrix& a, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_matrix_market(a, out);
}

}  // namespace blockcells
