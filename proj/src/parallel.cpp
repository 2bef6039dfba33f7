#include "sdmp/parallel.hpp"

#include <omp.h>

#include <atomic>

namespace sdmp::parallel {

namespace {
std::atomic<int> g_workers{1};
}

void set_workers(int n) { g_workers.store(std::max(1, n)); }

int workers() { return g_workers.load(); }

void for_each_block(std::size_t n_blocks, const std::function<void(std::size_t)>& fn) {
    if (n_blocks == 0) return;
    const int threads = std::min<int>(workers(), static_cast<int>(n_blocks));
    if (threads <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }

    std::vector<std::exception_ptr> errors(n_blocks);
    const auto n = static_cast<long long>(n_blocks);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long long b = 0; b < n; ++b) {
        try {
            fn(static_cast<std::size_t>(b));
        } catch (...) {
            errors[static_cast<std::size_t>(b)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace sdmp::parallel
