#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "blockcells/csr.hpp"

namespace blockcells {

/// Half-open index interval [begin, end).
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

/// Deterministic summation topology: one in-block tree per interval plus an
/// optional sequential host stage over the block partials. Fixing this
/// topology fixes the floating-point semantics of every reduction, so results
/// cannot depend on scheduling or worker count.
struct ReductionPlan {
    std::vector<IndexRange> block_ranges;  // partition of [0, n)
    bool host_stage = false;

    std::size_t n_blocks() const { return block_ranges.size(); }
    std::size_t total_length() const;

    /// Single block covering [0, n), no host stage.
    static ReductionPlan single_block(std::size_t n);

    /// Throws std::invalid_argument unless the ranges partition [0, n).
    void check_partition(std::size_t n) const;
};

/// Pairwise halving tree sum over `slots` conceptually padded with zeros to
/// `padded_len` (a power of two >= slots.size()). At each stage
/// slot[i] += slot[i + stride] with the stride halving from padded_len/2.
/// Bit-deterministic for a fixed input.
double tree_reduce(std::span<const double> slots, std::size_t padded_len);

/// In-place variant; `slots.size()` must be a power of two. Returns slots[0].
double tree_reduce_in_place(std::span<double> slots);

namespace detail {

std::size_t padded_block_len(std::size_t n);

}  // namespace detail

/// Reduces value(i) for i in [0, n) through the plan: a tree sum per block
/// interval, then the sequential left-to-right combine over the block
/// partials (the host stage, when the plan has one). Values are produced on
/// the fly, mirroring threads writing their contribution straight into the
/// shared-memory slots. `block_partials`, when non-empty, receives one
/// partial per block. `scratch` is reused between calls.
template <class ValueFn>
double plan_reduce_map(std::size_t n, ValueFn&& value, const ReductionPlan& plan,
                       std::vector<double>& scratch,
                       std::span<double> block_partials = {}) {
    plan.check_partition(n);
    if (!block_partials.empty() && block_partials.size() != plan.n_blocks())
        throw std::invalid_argument("plan_reduce: block_partials size mismatch");
    double total = 0.0;
    for (std::size_t b = 0; b < plan.n_blocks(); ++b) {
        const IndexRange range = plan.block_ranges[b];
        const std::size_t padded = detail::padded_block_len(range.size());
        scratch.assign(padded, 0.0);
        for (std::size_t i = range.begin; i < range.end; ++i)
            scratch[i - range.begin] = value(i);
        const double partial = tree_reduce_in_place(scratch);
        if (!block_partials.empty()) block_partials[b] = partial;
        total = (b == 0) ? partial : total + partial;
    }
    return total;
}

/// Array form of plan_reduce_map.
double plan_reduce(std::span<const double> values, const ReductionPlan& plan,
                   std::vector<double>& scratch,
                   std::span<double> block_partials = {});
double plan_reduce(std::span<const double> values, const ReductionPlan& plan);

/// Dot product x.y with the summation order fixed by the plan.
double dot(const DenseVector& x, const DenseVector& y, const ReductionPlan& plan);

}  // namespace blockcells
