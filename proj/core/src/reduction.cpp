#include "blockcells/reduction.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace blockcells {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

std::size_t ReductionPlan::total_length() const {
    return block_ranges.empty() ? 0 : block_ranges.back().end;
}

ReductionPlan ReductionPlan::single_block(std::size_t n) {
    return {{IndexRange{0, n}}, false};
}

void ReductionPlan::check_partition(std::size_t n) const {
    std::size_t expect = 0;
    for (const IndexRange& r : block_ranges) {
        if (r.begin != expect || r.end <= r.begin)
            throw std::invalid_argument("reduction plan does not partition [0, n)");
        expect = r.end;
    }
    if (expect != n)
        throw std::invalid_argument("reduction plan does not cover [0, n)");
}

std::size_t detail::padded_block_len(std::size_t n) {
    return n <= 1 ? 1 : std::bit_ceil(n);
}

double tree_reduce_in_place(std::span<double> slots) {
    if (!is_pow2(slots.size()))
        throw std::invalid_argument("tree_reduce: padded length not a power of two");
    for (std::size_t stride = slots.size() / 2; stride >= 1; stride /= 2)
        for (std::size_t i = 0; i < stride; ++i) slots[i] += slots[i + stride];
    return slots[0];
}

double tree_reduce(std::span<const double> slots, std::size_t padded_len) {
    if (!is_pow2(padded_len) || padded_len < slots.size())
        throw std::invalid_argument("tree_reduce: padded length not a power of two >= len");
    std::vector<double> buf(padded_len, 0.0);
    std::copy(slots.begin(), slots.end(), buf.begin());
    return tree_reduce_in_place(buf);
}

double plan_reduce(std::span<const double> values, const ReductionPlan& plan,
                   std::vector<double>& scratch, std::span<double> block_partials) {
    return plan_reduce_map(
        values.size(), [&](std::size_t i) { return values[i]; }, plan, scratch,
        block_partials);
}

double plan_reduce(std::span<const double> values, const ReductionPlan& plan) {
    std::vector<double> scratch;
    return plan_reduce(values, plan, scratch);
}

double dot(const DenseVector& x, const DenseVector& y, const ReductionPlan& plan) {
    if (x.size() != y.size()) throw std::invalid_argument("dot: dimension mismatch");
    std::vector<double> scratch;
    return plan_reduce_map(
        x.size(), [&](std::size_t i) { return x[i] * y[i]; }, plan, scratch);
}

}  // namespace blockcells
