#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace spatiofd {

using Rng = std::mt19937_64;

/// Independent stream for a (seed, id...) tuple. Same tuple, same stream,
/// whichever thread asks for it.
Rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

/// Reads SPATIOFD_THREADS and caps the OpenMP team size. Returns the cap in
/// effect (0 when the variable is unset or invalid).
int configure_threads_from_env();

void set_thread_count(int threads);
int max_threads();

} // namespace spatiofd
