#pragma once

#include <cstddef>
#include <functional>

namespace rotlim {

// Global switch between the OpenMP kernels and the serial reference path.
// Default: parallel when compiled with OpenMP. Tests flip this to compare
// both paths bitwise; reductions are deterministic either way.
void set_parallel(bool on);
bool parallel_enabled();

namespace detail {
void parallel_for_impl(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);
}

// Runs body(begin, end) over a partition of [0, n). Chunks are fixed-size so
// the work decomposition does not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    detail::parallel_for_impl(n, std::function<void(std::size_t, std::size_t)>(body));
}

// Deterministic sum of f(i) over [0, n): fixed 4096-element blocks reduced
// serially within each block, block results combined in index order.
double block_sum(std::size_t n, const std::function<double(std::size_t)>& f);

}  // namespace rotlim
