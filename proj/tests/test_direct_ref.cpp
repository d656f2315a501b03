#include <doctest.h>

#include <random>

#include "blockcells/dense_lu.hpp"
#include "test_util.hpp"

using namespace blockcells;
using namespace testutil;

namespace {

double residual_inf(const DenseMatrix& a, const DenseVector& x,
                    const DenseVector& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < a.n; ++j) sum += a.at(i, j) * x[j];
        worst = std::max(worst, std::abs(sum - b[i]));
    }
    return worst;
}

double norm_inf_matrix(const DenseMatrix& a) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a.n; ++j) row += std::abs(a.at(i, j));
        worst = std::max(worst, row);
    }
    return worst;
}

double norm_inf(const DenseVector& v) {
    double worst = 0.0;
    for (double x : v) worst = std::max(worst, std::abs(x));
    return worst;
}

}  // namespace

TEST_CASE("lu_solve identity and pivoting permutation") {
    DenseMatrix eye = DenseMatrix::zero(3);
    for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
    const DenseVector b = {1.0, -2.0, 3.0};
    CHECK(lu_solve(eye, b) == b);

    // [[0,1],[1,0]] forces a pivot swap.
    DenseMatrix swap = DenseMatrix::zero(2);
    swap.at(0, 1) = 1.0;
    swap.at(1, 0) = 1.0;
    CHECK(lu_solve(swap, {2.0, 3.0}) == DenseVector{3.0, 2.0});
}

TEST_CASE("lu_solve rejects singular systems") {
    DenseMatrix sing = DenseMatrix::zero(2);
    sing.at(0, 0) = 1.0;
    sing.at(0, 1) = 2.0;
    sing.at(1, 0) = 2.0;
    sing.at(1, 1) = 4.0;
    CHECK_THROWS_AS(lu_solve(sing, {1.0, 2.0}), SingularMatrix);
}

TEST_CASE("lu_solve residual bound on a 156x156 densified system") {
    std::mt19937_64 rng(123);
    const CsrMatrix sparse = random_diag_dominant(rng, 156, 0.05);
    const DenseMatrix a = densify(sparse);
    const DenseVector b = random_vector(rng, 156, -10.0, 10.0);
    const DenseVector x = lu_solve(a, b);
    const double bound =
        1e-10 * (norm_inf_matrix(a) * norm_inf(x) + norm_inf(b));
    CHECK(residual_inf(a, x, b) <= bound);
}

TEST_CASE("lu_solve pivot choice is deterministic") {
    std::mt19937_64 rng(77);
    const CsrMatrix a = random_diag_dominant(rng, 24, 0.3);
    const DenseVector b = random_vector(rng, 24);
    const DenseVector first = lu_solve(densify(a), b);
    for (int rep = 0; rep < 3; ++rep)
        CHECK(bitwise_equal(lu_solve(densify(a), b), first));
}

TEST_CASE("densify copies entries exactly") {
    const CsrMatrix eye = CsrMatrix::identity(4);
    const DenseMatrix d = densify(eye);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            CHECK(d.at(i, j) == (i == j ? 1.0 : 0.0));

    // Round-trip: every stored value appears unchanged at its coordinates.
    std::mt19937_64 rng(5);
    const CsrMatrix a = random_diag_dominant(rng, 12, 0.4);
    const DenseMatrix da = densify(a);
    std::size_t seen = 0;
    for (std::size_t i = 0; i < a.n_rows; ++i)
        for (std::size_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j) {
            CHECK(da.at(i, a.col_idx[j]) == a.values[j]);
            ++seen;
        }
    CHECK(seen == a.nnz());
}

TEST_CASE("densify of block-diagonal CSR leaves off-blocks zero") {
    // diag(2x2 block, 1x1 block) with an explicit pattern
    const CsrMatrix a = CsrMatrix::from_triplets(
        3, 3, {0, 0, 1, 1, 2}, {0, 1, 0, 1, 2}, {1.0, 2.0, 3.0, 4.0, 5.0});
    const DenseMatrix d = densify(a);
    CHECK(d.at(0, 2) == 0.0);
    CHECK(d.at(1, 2) == 0.0);
    CHECK(d.at(2, 0) == 0.0);
    CHECK(d.at(2, 1) == 0.0);
    CHECK(d.at(2, 2) == 5.0);
}
