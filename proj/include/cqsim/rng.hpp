#pragma once

#include <cstdint>
#include <random>

namespace cqsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stream seed for one path or realization. Depends only on the master seed and
// the index, so results are independent of scheduling and worker count.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15ull);
}

inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t index) {
    return std::mt19937_64(stream_seed(master_seed, index));
}

}  // namespace cqsim
