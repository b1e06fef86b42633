#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "anchorda/tensor_io.hpp"

namespace anchorda {

// Label value for pixels excluded from every loss and aggregate.
inline constexpr std::uint16_t kIgnoreLabel = 65535;

// Channel-major (C x H x W) dense map.
template <typename T>
struct PlanarMap {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<T> values;

    PlanarMap() = default;
    PlanarMap(std::size_t c, std::size_t h, std::size_t w, T fill = T{})
        : channels(c), height(h), width(w), values(c * h * w, fill) {}

    std::size_t pixels() const noexcept { return height * width; }
    T& at(std::size_t c, std::size_t pixel) { return values[c * pixels() + pixel]; }
    T at(std::size_t c, std::size_t pixel) const { return values[c * pixels() + pixel]; }
    T& at(std::size_t c, std::size_t y, std::size_t x) { return at(c, y * width + x); }
    T at(std::size_t c, std::size_t y, std::size_t x) const { return at(c, y * width + x); }

    bool operator==(const PlanarMap&) const = default;
};

using FeatureMap = PlanarMap<float>;
using ProbabilityMap = PlanarMap<double>;

// H x W category map; kIgnoreLabel marks excluded pixels.
struct LabelMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint16_t> values;

    LabelMap() = default;
    LabelMap(std::size_t h, std::size_t w, std::uint16_t fill = 0)
        : height(h), width(w), values(h * w, fill) {}

    std::size_t pixels() const noexcept { return height * width; }
    std::uint16_t& at(std::size_t y, std::size_t x) { return values[y * width + x]; }
    std::uint16_t at(std::size_t y, std::size_t x) const { return values[y * width + x]; }

    bool operator==(const LabelMap&) const = default;
};

// Rank-3 f32 tensors map to C x H x W; rank-2 tensors are read as one channel.
FeatureMap feature_map_from(const Tensor& tensor);
ProbabilityMap probability_map_from(const Tensor& tensor);
// Rank-2 u16 tensor.
LabelMap label_map_from(const Tensor& tensor);

Tensor to_tensor(const FeatureMap& map);
Tensor to_tensor(const LabelMap& map);

// Per-pixel argmax over channels (ties to the lowest channel).
LabelMap argmax_labels(const ProbabilityMap& probabilities);

}  // namespace anchorda
