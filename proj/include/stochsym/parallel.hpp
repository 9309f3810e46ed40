#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace stochsym {

// Worker count: STOCHSYM_THREADS when set, hardware concurrency otherwise.
int worker_count();

// Runs body(begin, end) over static contiguous chunks of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Pairwise summation in a fixed order; the result depends only on the values.
double pairwise_sum(std::span<const double> v);

}  // namespace stochsym
