#include <doctest.h>

#include <cmath>
#include <random>

#include "blockcells/bicg.hpp"
#include "blockcells/dense_lu.hpp"
#include "blockcells/exec_model.hpp"
#include "test_util.hpp"

using namespace blockcells;
using namespace testutil;

namespace {

DenseVector unit_rms(DenseVector v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double rms = std::sqrt(sq / static_cast<double>(v.size()));
    for (double& x : v) x /= rms;
    return v;
}

}  // namespace

TEST_CASE("identity system converges in one iteration") {
    const CsrMatrix eye = CsrMatrix::identity(5);
    const DenseVector b = {1.0, -2.0, 3.0, 0.5, 4.0};
    const auto plan = ReductionPlan::single_block(5);
    const SolveOutcome out = bicg_solve(eye, b, DenseVector(5, 0.0), 1e-30, 100, plan);
    CHECK(out.converged);
    CHECK(out.iterations == 1);
    CHECK(bitwise_equal(out.x, b));
    CHECK(out.final_residual_rms == 0.0);
}

TEST_CASE("diagonal system solves to the analytic answer") {
    const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {0, 1}, {0, 1}, {2.0, 4.0});
    const auto plan = ReductionPlan::single_block(2);
    const SolveOutcome out =
        bicg_solve(a, {2.0, 8.0}, DenseVector(2, 0.0), 1e-14, 50, plan);
    CHECK(out.converged);
    CHECK(out.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.x[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("zero rhs is converged at zero iterations") {
    const CsrMatrix eye = CsrMatrix::identity(3);
    const auto plan = ReductionPlan::single_block(3);
    const SolveOutcome out =
        bicg_solve(eye, DenseVector(3, 0.0), DenseVector(3, 0.0), 1e-30, 10, plan);
    CHECK(out.converged);
    CHECK(out.iterations == 0);
    CHECK(!out.breakdown);
}

TEST_CASE("matches the dense-LU oracle on diagonally dominant systems") {
    std::mt19937_64 rng(2024);
    const auto x10 = [&] {
        const CsrMatrix a = random_diag_dominant(rng, 10, 0.4);
        const DenseVector b = random_vector(rng, 10);
        const auto plan = ReductionPlan::single_block(10);
        const SolveOutcome out =
            bicg_solve(a, b, DenseVector(10, 0.0), 1e-14, 100, plan);
        CHECK(out.converged);
        CHECK(rel_err_inf(out.x, lu_solve(a, b)) < 1e-10);
    };
    x10();

    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 2 + uniform_index(rng, 63);
        const CsrMatrix a = random_diag_dominant(rng, n, 0.3);
        const DenseVector b = random_vector(rng, n);
        const auto plan = ReductionPlan::single_block(n);
        const SolveOutcome out =
            bicg_solve(a, b, DenseVector(n, 0.0), 1e-14, 4 * n + 20, plan);
        CHECK(out.converged);
        CHECK(rel_err_inf(out.x, lu_solve(a, b)) < 1e-8);
    }
}

TEST_CASE("converges within 4n iterations at tol 1e-12 on unit-scaled rhs") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + uniform_index(rng, 31);
        const CsrMatrix a = random_diag_dominant(rng, n, 0.35);
        const DenseVector b = unit_rms(random_vector(rng, n));
        const auto plan = ReductionPlan::single_block(n);
        const SolveOutcome out =
            bicg_solve(a, b, DenseVector(n, 0.0), 1e-12, 4 * n, plan);
        CHECK(out.converged);
        CHECK(out.iterations <= 4 * n);
    }
}

TEST_CASE("reported residual matches a from-scratch recomputation") {
    std::mt19937_64 rng(555);
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t n = 4 + uniform_index(rng, 28);
        const CsrMatrix a = random_diag_dominant(rng, n, 0.3);
        const DenseVector b = random_vector(rng, n);
        const auto plan = ReductionPlan::single_block(n);
        const SolveOutcome out =
            bicg_solve(a, b, DenseVector(n, 0.0), 1e-12, 200, plan);

        const DenseVector ax = spmv(a, out.x);
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = b[i] - ax[i];
            sq += r * r;
        }
        const double norm = std::sqrt(sq);
        const double reported = out.final_residual_rms * std::sqrt(double(n));
        if (norm == 0.0) {
            CHECK(reported == 0.0);
        } else {
            CHECK(std::abs(norm - reported) / norm < 1e-8);
        }
    }
}

TEST_CASE("two runs are bit-identical") {
    std::mt19937_64 rng(7);
    const CsrMatrix a = random_diag_dominant(rng, 32, 0.3);
    const DenseVector b = random_vector(rng, 32);
    ReductionPlan plan;
    plan.block_ranges = {{0, 16}, {16, 32}};
    plan.host_stage = true;
    const SolveOutcome first = bicg_solve(a, b, DenseVector(32, 0.0), 1e-13, 200, plan);
    for (int rep = 0; rep < 3; ++rep) {
        const SolveOutcome again =
            bicg_solve(a, b, DenseVector(32, 0.0), 1e-13, 200, plan);
        CHECK(bitwise_equal(again.x, first.x));
        CHECK(again.iterations == first.iterations);
        CHECK(again.final_residual_rms == first.final_residual_rms);
    }
}

TEST_CASE("block-diagonal solve agrees with isolated per-block solves") {
    std::mt19937_64 rng(404);
    const std::size_t block_n = 8;
    const CsrMatrix a1 = random_diag_dominant(rng, block_n, 0.4);
    const CsrMatrix a2 = random_diag_dominant(rng, block_n, 0.4);
    const DenseVector b1 = random_vector(rng, block_n);
    const DenseVector b2 = random_vector(rng, block_n);

    // Assemble diag(a1, a2) by shifting the second block.
    std::vector<std::size_t> rows, cols;
    std::vector<double> vals;
    auto add = [&](const CsrMatrix& m, std::size_t shift) {
        for (std::size_t i = 0; i < m.n_rows; ++i)
            for (std::size_t j = m.row_ptr[i]; j < m.row_ptr[i + 1]; ++j) {
                rows.push_back(i + shift);
                cols.push_back(m.col_idx[j] + shift);
                vals.push_back(m.values[j]);
            }
    };
    add(a1, 0);
    add(a2, block_n);
    const CsrMatrix big = CsrMatrix::from_triplets(2 * block_n, 2 * block_n,
                                                   rows, cols, vals);
    DenseVector big_b = b1;
    big_b.insert(big_b.end(), b2.begin(), b2.end());

    ReductionPlan scoped;
    scoped.block_ranges = {{0, block_n}, {block_n, 2 * block_n}};
    scoped.host_stage = true;
    const SolveOutcome coupled =
        bicg_solve(big, big_b, DenseVector(2 * block_n, 0.0), 1e-13, 400, scoped);
    CHECK(coupled.converged);

    const auto single = ReductionPlan::single_block(block_n);
    const SolveOutcome lone1 =
        bicg_solve(a1, b1, DenseVector(block_n, 0.0), 1e-13, 400, single);
    const SolveOutcome lone2 =
        bicg_solve(a2, b2, DenseVector(block_n, 0.0), 1e-13, 400, single);

    const DenseVector coupled_x1(coupled.x.begin(), coupled.x.begin() + block_n);
    const DenseVector coupled_x2(coupled.x.begin() + block_n, coupled.x.end());
    CHECK(rel_err_inf(coupled_x1, lone1.x) < 1e-12);
    CHECK(rel_err_inf(coupled_x2, lone2.x) < 1e-12);
}

TEST_CASE("breakdown is flagged, not thrown") {
    // A singular matrix with b in its column space stalls the recurrences:
    // the zero row forces <r~, r> toward the breakdown floor.
    const CsrMatrix a = CsrMatrix::from_triplets(2, 2, {0, 0}, {0, 1}, {1.0, 1.0});
    CsrMatrix padded = a;
    padded.row_ptr = {0, 2, 2};  // second row empty
    padded.check_invariants();
    const auto plan = ReductionPlan::single_block(2);
    const SolveOutcome out =
        bicg_solve(padded, {1.0, 1.0}, DenseVector(2, 0.0), 1e-14, 50, plan);
    CHECK(out.breakdown);
    CHECK(!out.converged);
}

TEST_CASE("block_converged_mask") {
    CHECK(block_converged_mask({0.0, 0.0}, {4, 9}, 1e-10) ==
          std::vector<bool>{true, true});

    // error = tol^2 * n exactly sits on the <= boundary.
    const double tol = 1e-3;
    CHECK(block_converged_mask({tol * tol * 16.0}, {16}, tol) ==
          std::vector<bool>{true});

    std::mt19937_64 rng(8);
    std::vector<double> errors;
    std::vector<std::size_t> sizes;
    for (int b = 0; b < 10; ++b) {
        errors.push_back(uniform(rng, 0.0, 1e-4));
        sizes.push_back(1 + uniform_index(rng, 64));
    }
    const auto mask = block_converged_mask(errors, sizes, 1e-3);
    for (std::size_t b = 0; b < errors.size(); ++b)
        CHECK(mask[b] == (std::sqrt(errors[b] / double(sizes[b])) <= 1e-3));

    CHECK_THROWS_AS(block_converged_mask({1.0}, {1, 2}, 1.0),
                    std::invalid_argument);
}
