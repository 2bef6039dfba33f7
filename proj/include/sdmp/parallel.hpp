#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace sdmp::parallel {

// Number of worker threads used by path-parallel loops. Results never depend
// on this value: work is split into fixed-size blocks and merged in block order.
void set_workers(int n);
int workers();

// Calls fn(b) for every b in [0, n_blocks). Blocks may run concurrently. If any
// block throws, the exception from the lowest failing block index is rethrown.
void for_each_block(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

struct BlockRange {
    std::size_t begin;
    std::size_t end;
};

inline std::size_t block_count(std::size_t n, std::size_t block_size) {
    return (n + block_size - 1) / block_size;
}

inline BlockRange block_range(std::size_t block, std::size_t n, std::size_t block_size) {
    const std::size_t b = block * block_size;
    return {b, std::min(n, b + block_size)};
}

// Fixed-tree reduction over [0, n). Each block is processed into a fresh
// accumulator; accumulators are merged strictly in block order, one wave of
// `workers()` blocks at a time, so peak memory is bounded by the worker count.
template <class Acc, class Make, class Process, class Merge>
Acc blocked_reduce(std::size_t n, std::size_t block_size, Make make, Process process, Merge merge) {
    Acc total = make();
    const std::size_t n_blocks = block_count(n, block_size);
    const std::size_t wave = static_cast<std::size_t>(std::max(1, workers()));
    for (std::size_t first = 0; first < n_blocks; first += wave) {
        const std::size_t count = std::min(wave, n_blocks - first);
        std::vector<Acc> partial;
        partial.reserve(count);
        for (std::size_t j = 0; j < count; ++j) partial.push_back(make());
        for_each_block(count, [&](std::size_t j) {
            process(block_range(first + j, n, block_size), partial[j]);
        });
        for (std::size_t j = 0; j < count; ++j) merge(total, partial[j]);
    }
    return total;
}

}  // namespace sdmp::parallel
