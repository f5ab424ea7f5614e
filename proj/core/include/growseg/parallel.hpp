#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace growseg {

/// Splits [0, count) into at most `threads` contiguous chunks and runs
/// `fn(begin, end, chunk_index)` on each. Chunk boundaries depend only on
/// `count` and `threads`, so callers that merge per-chunk results in chunk
/// order get schedule-independent output.
template <typename Fn>
void parallel_chunks(std::size_t count, unsigned threads, Fn&& fn) {
    if (count == 0) {
        return;
    }
    const std::size_t chunks = std::clamp<std::size_t>(threads, 1, count);
    if (chunks == 1) {
        fn(std::size_t{0}, count, std::size_t{0});
        return;
    }
    const std::size_t base = count / chunks;
    const std::size_t extra = count % chunks;
    std::vector<std::exception_ptr> errors(chunks);
    {
        std::vector<std::jthread> workers;
        workers.reserve(chunks);
        std::size_t begin = 0;
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t end = begin + base + (c < extra ? 1 : 0);
            workers.emplace_back([&fn, &errors, begin, end, c] {
                try {
                    fn(begin, end, c);
                } catch (...) {
                    errors[c] = std::current_exception();
                }
            });
            begin = end;
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/// Number of chunks parallel_chunks will use for the given arguments.
inline std::size_t chunk_count(std::size_t count, unsigned threads) {
    return count == 0 ? 0 : std::clamp<std::size_t>(threads, 1, count);
}

}  // namespace growseg
