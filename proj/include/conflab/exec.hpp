#pragma once

#include <cstdint>

namespace conflab {

// Kernels that loop over independent work items (grid nodes, samples,
// Jacobian columns, family members) come in two flavours. The serial one is
// the reference; the OpenMP one must agree with it bit for bit.
enum class Exec { serial, parallel };

inline constexpr Exec kDefaultExec = Exec::parallel;

// splitmix64 finalizer: turns (seed, index) into an independent stream seed
// so sharded campaigns do not depend on the thread schedule.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace conflab
