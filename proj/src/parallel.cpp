#include "germforge/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace germforge {

int thread_count() {
    if (const char* env = std::getenv("GERMFORGE_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (const std::exception&) {
            // fall through to the hardware default on unparsable values
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const int workers = thread_count();
    constexpr std::size_t kChunk = 64;
    if (workers == 1 || n <= kChunk) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next_chunk{0};
    const std::size_t chunk_count = (n + kChunk - 1) / kChunk;
    auto worker = [&] {
        while (true) {
            const std::size_t c = next_chunk.fetch_add(1);
            if (c >= chunk_count) return;
            const std::size_t begin = c * kChunk;
            const std::size_t end = std::min(n, begin + kChunk);
            for (std::size_t i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int spawned = std::min<std::size_t>(workers, chunk_count) - 1;
    pool.reserve(spawned);
    for (int t = 0; t < spawned; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace germforge
