#include "rotlim/parallel.hpp"

#include <atomic>
#include <vector>

namespace rotlim {

namespace {
std::atomic<bool> g_parallel{true};
constexpr std::size_t kChunk = 4096;
}  // namespace

void set_parallel(bool on) { g_parallel.store(on); }
bool parallel_enabled() { return g_parallel.load(); }

namespace detail {

void parallel_for_impl(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    if (n == 0) return;
    const std::size_t nchunk = (n + kChunk - 1) / kChunk;
    if (!parallel_enabled() || nchunk == 1) {
        body(0, n);
        return;
    }
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(nchunk); ++c) {
        const std::size_t b = static_cast<std::size_t>(c) * kChunk;
        const std::size_t e = b + kChunk < n ? b + kChunk : n;
        body(b, e);
    }
}

}  // namespace detail

double block_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
    if (n == 0) return 0.0;
    const std::size_t nchunk = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(nchunk, 0.0);
    detail::parallel_for_impl(n, [&](std::size_t b, std::size_t e) {
        // [b, e) may span several chunks on the serial path
        while (b < e) {
            const std::size_t c = b / kChunk;
            const std::size_t ce = (c + 1) * kChunk < e ? (c + 1) * kChunk : e;
            double s = 0.0;
            for (std::size_t i = b; i < ce; ++i) s += f(i);
            partial[c] += s;
            b = ce;
        }
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

}  // namespace rotlim
