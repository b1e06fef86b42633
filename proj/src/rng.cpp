#include "anchorda/rng.hpp"

#include <cmath>
#include <numbers>

namespace anchorda {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view text) {
    return fnv1a64(std::as_bytes(std::span(text.data(), text.size())));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream_name) {
    return mix64(seed ^ mix64(fnv1a64(stream_name)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(index * kGolden + 0x632be59bd9b4e019ULL));
}

std::uint64_t CounterRng::next_u64() {
    const std::uint64_t value = mix64(mix64(key_) + (counter_ + 1) * kGolden);
    ++counter_;
    return value;
}

double CounterRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) {
    if (n <= 1) {
        ++counter_;
        return 0;
    }
    // Lemire-style rejection keeps the result exactly uniform.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= threshold) return r % n;
    }
}

double CounterRng::normal() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace anchorda
