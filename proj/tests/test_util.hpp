#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "blockcells/csr.hpp"

namespace testutil {

// Hand-rolled uniforms on the bit-exact mt19937_64 stream, so expected
// values frozen here never move between standard libraries.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return std::min(static_cast<std::size_t>(uniform01(rng) * n), n - 1);
}

inline blockcells::DenseVector random_vector(std::mt19937_64& rng, std::size_t n,
                                             double lo = -1.0, double hi = 1.0) {
    blockcells::DenseVector v(n);
    for (double& x : v) x = uniform(rng, lo, hi);
    return v;
}

/// Strictly diagonally dominant sparse matrix: random off-diagonal entries,
/// diagonal = sum of row magnitudes plus a positive margin.
inline blockcells::CsrMatrix random_diag_dominant(std::mt19937_64& rng,
                                                  std::size_t n,
                                                  double density = 0.3) {
    std::vector<std::size_t> rows, cols;
    std::vector<double> vals;
    std::vector<double> row_abs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (uniform01(rng) < density) {
                const double v = uniform(rng, -1.0, 1.0);
                rows.push_back(i);
                cols.push_back(j);
                vals.push_back(v);
                row_abs[i] += std::abs(v);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(i);
        cols.push_back(i);
        const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
        vals.push_back(sign * (row_abs[i] + 1.0 + uniform01(rng)));
    }
    return blockcells::CsrMatrix::from_triplets(n, n, rows, cols, vals);
}

inline bool bitwise_equal(const blockcells::DenseVector& a,
                          const blockcells::DenseVector& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
    return true;
}

inline double rel_err_inf(const blockcells::DenseVector& got,
                          const blockcells::DenseVector& want) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num = std::max(num, std::abs(got[i] - want[i]));
        den = std::max(den, std::abs(want[i]));
    }
    return den == 0.0 ? num : num / den;
}

}  // namespace testutil
