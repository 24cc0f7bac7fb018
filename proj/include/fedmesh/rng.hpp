#pragma once

#include <atomic>
#include <cstdint>

namespace fedmesh {

/// SplitMix64 generator. Small state, full 64-bit output, and good enough
/// statistics for latency jitter and fixture synthesis. The state advances
/// with a single fetch_add, so one instance may be shared across threads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z =
            state_.fetch_add(0x9e3779b97f4a7c15ull, std::memory_order_relaxed) +
            0x9e3779b97f4a7c15ull;
        return finalize(z);
    }

    /// Uniform in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Deterministic substream derivation: combines two values through the
    /// output finalizer so (seed, index) pairs yield decorrelated seeds.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        return finalize(a + 0x9e3779b97f4a7c15ull * (b + 0x632be59bd9b4e019ull));
    }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::atomic<std::uint64_t> state_;
};

}  // namespace fedmesh
