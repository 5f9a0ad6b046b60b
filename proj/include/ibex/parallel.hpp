#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace ibex {

struct ParallelConfig {
    int workers = 1;
    std::uint64_t chunk_size = 4096;
};

// Splits [0, count) into fixed chunks, evaluates `body(first, last, slot)`
// per chunk on a worker pool, then folds the slots in chunk order with
// `merge`.  The chunk layout depends only on chunk_size, and the fold order
// only on the chunk index, so results are identical for any worker count.
namespace detail {

template <class RunChunk>
void run_chunks(std::uint64_t n_chunks, int workers, RunChunk&& run_chunk) {
    if (workers <= 1 || n_chunks <= 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) run_chunk(c);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    const int n_threads = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(workers), n_chunks));
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::uint64_t c = next.fetch_add(1);
                if (c >= n_chunks) break;
                run_chunk(c);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Runs body(first, last) over the chunked index range; chunks touch disjoint
// indices, so bodies writing to disjoint slots need no synchronization.
template <class Body>
void chunked_for(std::uint64_t count, const ParallelConfig& cfg, Body&& body) {
    const std::uint64_t chunk = cfg.chunk_size > 0 ? cfg.chunk_size : 1;
    const std::uint64_t n_chunks = count == 0 ? 0 : (count + chunk - 1) / chunk;
    detail::run_chunks(n_chunks, cfg.workers, [&](std::uint64_t c) {
        const std::uint64_t first = c * chunk;
        const std::uint64_t last = std::min(count, first + chunk);
        body(first, last);
    });
}

template <class State, class Body, class Merge>
State chunked_reduce(std::uint64_t count, const ParallelConfig& cfg,
                     Body&& body, Merge&& merge) {
    const std::uint64_t chunk = cfg.chunk_size > 0 ? cfg.chunk_size : 1;
    const std::uint64_t n_chunks = count == 0 ? 0 : (count + chunk - 1) / chunk;
    std::vector<State> slots(n_chunks);

    detail::run_chunks(n_chunks, cfg.workers, [&](std::uint64_t c) {
        const std::uint64_t first = c * chunk;
        const std::uint64_t last = std::min(count, first + chunk);
        body(first, last, slots[c]);
    });

    State total{};
    for (auto& s : slots) merge(total, s);
    return total;
}

}  // namespace ibex
