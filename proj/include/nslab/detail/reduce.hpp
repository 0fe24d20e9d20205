#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nslab::detail {

// Pairwise tree reduction. Summation order is fixed by the recursion, so
// results are reproducible and the rounding error grows like O(log n).
inline double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 32) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& x) {
    return pairwise_sum(std::span<const double>(x));
}

} // namespace nslab::detail
