#include "spatiofd/parallel.hpp"

#include <cstdlib>
#include <string>
#include <vector>

#include <omp.h>

namespace spatiofd {

Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * (ids.size() + 1));
    auto push = [&words](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto id : ids) {
        push(id);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

int configure_threads_from_env() {
    const char* raw = std::getenv("SPATIOFD_THREADS");
    if (raw == nullptr) {
        return 0;
    }
    try {
        const int threads = std::stoi(raw);
        if (threads > 0) {
            omp_set_num_threads(threads);
            return threads;
        }
    } catch (const std::exception&) {
    }
    return 0;
}

void set_thread_count(int threads) {
    if (threads > 0) {
        omp_set_num_threads(threads);
    }
}

int max_threads() { return omp_get_max_threads(); }

} // namespace spatiofd
