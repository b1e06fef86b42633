#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace anchorda {

// 64-bit FNV-1a. Used for seed derivation and content fingerprints.
std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text);

// Stable per-module seed: every random stream in the toolkit is keyed by
// derive_seed(user_seed, "<module>").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream_name);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// Counter-based generator: draw i is a pure function of (key, i), so a
// stream can be replayed from any position and never depends on call order
// elsewhere in the program.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), counter_(counter) {}

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    // Standard normal via Box-Muller (one value per call, no caching).
    double normal();

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace anchorda
