#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace regsel {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based stream: the sequence for (seed, stream) depends on nothing
/// else, so replication i draws the same numbers regardless of which worker
/// runs it or in what order.
class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL) ^ mix64(stream + 0x9e3779b97f4a7c15ULL)) {}

    std::uint64_t next() {
        counter_ += 0x9e3779b97f4a7c15ULL;
        return mix64(key_ + counter_);
    }

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            const std::uint64_t r = next();
            const unsigned __int128 m = static_cast<unsigned __int128>(r) * bound;
            if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Uniform random subset of size k from {0, ..., n-1}, returned sorted.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, StreamRng& rng);

}  // namespace regsel
