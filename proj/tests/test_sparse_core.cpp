#include <doctest.h>

#include <random>
#include <sstream>

#include "blockcells/csr.hpp"
#include "blockcells/reduction.hpp"
#include "test_util.hpp"

using namespace blockcells;
using namespace testutil;

TEST_CASE("spmv identity returns the input bitwise") {
    const CsrMatrix eye = CsrMatrix::identity(3);
    const DenseVector x = {1.0, 2.0, 3.0};
    CHECK(bitwise_equal(spmv(eye, x), x));

    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const auto v = random_vector(rng, 17, -1e6, 1e6);
        CHECK(bitwise_equal(spmv(CsrMatrix::identity(17), v), v));
    }
}

TEST_CASE("spmv hand-computed 2x2 and zero vector") {
    // [[2,0],[1,3]]
    const CsrMatrix a =
        CsrMatrix::from_triplets(2, 2, {0, 1, 1}, {0, 0, 1}, {2.0, 1.0, 3.0});
    CHECK(spmv(a, {1.0, 1.0}) == DenseVector{2.0, 4.0});
    CHECK(spmv(a, {0.0, 0.0}) == DenseVector{0.0, 0.0});
    CHECK_THROWS_AS(spmv(a, {1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("spmv_transpose examples") {
    const CsrMatrix eye = CsrMatrix::identity(4);
    const DenseVector x = {4.0, 3.0, 2.0, 1.0};
    CHECK(bitwise_equal(spmv_transpose(eye, x), x));

    const CsrMatrix a =
        CsrMatrix::from_triplets(2, 2, {0, 1, 1}, {0, 0, 1}, {2.0, 1.0, 3.0});
    CHECK(spmv_transpose(a, {1.0, 1.0}) == DenseVector{3.0, 3.0});
    CHECK_THROWS_AS(spmv_transpose(a, {1.0}), std::invalid_argument);
}

TEST_CASE("spmv_transpose on a symmetric matrix equals spmv bitwise") {
    // Symmetric pattern and values, stored in the same order both ways.
    const CsrMatrix s = CsrMatrix::from_triplets(
        3, 3, {0, 0, 1, 1, 1, 2, 2}, {0, 1, 0, 1, 2, 1, 2},
        {2.0, 0.5, 0.5, 3.0, 0.25, 0.25, 4.0});
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const auto x = random_vector(rng, 3);
        CHECK(bitwise_equal(spmv_transpose(s, x), spmv(s, x)));
    }
}

TEST_CASE("spmv_transpose matches spmv on the explicit transpose bitwise") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + uniform_index(rng, 16);
        const CsrMatrix a = random_diag_dominant(rng, n, 0.4);
        const CsrMatrix at = transpose(a);
        const auto x = random_vector(rng, n);
        CHECK(bitwise_equal(spmv_transpose(a, x), spmv(at, x)));
    }
}

TEST_CASE("axpby") {
    const DenseVector x = {1.0, 1.0};
    const DenseVector y = {1.0, 2.0};
    CHECK(bitwise_equal(axpby(1.0, x, 0.0, y), x));
    CHECK(bitwise_equal(axpby(0.0, x, 1.0, y), y));
    CHECK(axpby(2.0, x, 3.0, y) == DenseVector{5.0, 8.0});
    CHECK_THROWS_AS(axpby(1.0, x, 1.0, {1.0}), std::invalid_argument);
}

TEST_CASE("tree_reduce pairwise-halving semantics") {
    // [1,2,3] padded to 4: stride 2 gives (1+3, 2+0), stride 1 sums those.
    CHECK(tree_reduce(std::vector<double>{1.0, 2.0, 3.0}, 4) == 6.0);

    // Same bracketing with values where association order shows up in the
    // low bits: result must equal ((a+c)+(b+0)) exactly.
    const double a = 0.1, b = 0.2, c = 0.3;
    CHECK(tree_reduce(std::vector<double>{a, b, c}, 4) == (a + c) + (b + 0.0));

    CHECK(tree_reduce(std::vector<double>{42.5}, 1) == 42.5);
    CHECK(tree_reduce(std::vector<double>(13, 0.0), 16) == 0.0);
    CHECK_THROWS_AS(tree_reduce(std::vector<double>{1.0, 2.0}, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(tree_reduce(std::vector<double>{1.0, 2.0}, 1),
                    std::invalid_argument);
}

TEST_CASE("tree_reduce repeated calls are bit-identical") {
    std::mt19937_64 rng(5);
    const auto v = random_vector(rng, 1000, -1e3, 1e3);
    const double first = tree_reduce(v, 1024);
    for (int rep = 0; rep < 5; ++rep) CHECK(tree_reduce(v, 1024) == first);
}

TEST_CASE("tree_reduce is exact for small integers") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 1 + uniform_index(rng, 300);
        DenseVector v(n);
        double seq = 0.0;
        for (double& x : v) {
            x = std::floor(uniform(rng, -1e6, 1e6));
            seq += x;
        }
        CHECK(tree_reduce(v, detail::padded_block_len(n)) == seq);
    }
}

TEST_CASE("dot through reduction plans") {
    const auto plan2 = ReductionPlan::single_block(2);
    CHECK(dot({1.0, 0.0}, {1.0, 0.0}, plan2) == 1.0);
    CHECK(dot({1.0, 2.0}, {3.0, 4.0}, plan2) == 11.0);
    CHECK(dot({1.0, 0.0}, {0.0, 1.0}, plan2) == 0.0);
    CHECK_THROWS_AS(dot({1.0}, {1.0, 2.0}, plan2), std::invalid_argument);
}

TEST_CASE("reduction plan must partition the range") {
    ReductionPlan gap;
    gap.block_ranges = {{0, 2}, {3, 4}};
    CHECK_THROWS_AS(gap.check_partition(4), std::invalid_argument);

    ReductionPlan short_plan;
    short_plan.block_ranges = {{0, 2}};
    CHECK_THROWS_AS(short_plan.check_partition(4), std::invalid_argument);

    ReductionPlan ok;
    ok.block_ranges = {{0, 2}, {2, 4}};
    CHECK_NOTHROW(ok.check_partition(4));
}

TEST_CASE("plan_reduce exposes per-block partials and host-stage combine") {
    ReductionPlan plan;
    plan.block_ranges = {{0, 2}, {2, 4}};
    plan.host_stage = true;
    const DenseVector v = {1.0, 2.0, 3.0, 4.0};
    std::vector<double> scratch;
    std::vector<double> partials(2);
    const double total = plan_reduce(v, plan, scratch, partials);
    CHECK(partials[0] == 3.0);
    CHECK(partials[1] == 7.0);
    CHECK(total == 10.0);
}

TEST_CASE("matrix market dump format") {
    const CsrMatrix a =
        CsrMatrix::from_triplets(2, 3, {0, 1}, {2, 0}, {1.5, -2.0});
    std::ostringstream out;
    write_matrix_market(a, out);
    CHECK(out.str() ==
          "%%MatrixMarket matrix coordinate real general\n"
          "2 3 2\n"
          "1 3 1.5\n"
          "2 1 -2\n");
}

TEST_CASE("csr invariants catch malformed matrices") {
    CsrMatrix bad;
    bad.n_rows = bad.n_cols = 2;
    bad.row_ptr = {0, 2, 1};  // decreasing
    bad.col_idx = {0, 1};
    bad.values = {1.0, 1.0};
    CHECK_THROWS_AS(bad.check_invariants(), std::invalid_argument);

    bad.row_ptr = {0, 2, 2};
    bad.col_idx = {1, 1};  // not strictly increasing
    CHECK_THROWS_AS(bad.check_invariants(), std::invalid_argument);

    bad.col_idx = {0, 5};  // out of range
    CHECK_THROWS_AS(bad.check_invariants(), std::invalid_argument);
}

TEST_CASE("from_triplets sums duplicates and sorts") {
    const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {1, 0, 1, 1}, {1, 0, 0, 1},
                                                 {2.0, 1.0, 5.0, 3.0});
    CHECK(a.nnz() == 3);
    CHECK(a.row_ptr == std::vector<std::size_t>{0, 1, 3});
    CHECK(a.col_idx == std::vector<std::size_t>{0, 0, 1});
    CHECK(a.values == std::vector<double>{1.0, 5.0, 5.0});
}
