#include "anchorda/maps.hpp"

#include <string>

#include "anchorda/error.hpp"

namespace anchorda {
namespace {

template <typename T>
PlanarMap<T> planar_from(const Tensor& tensor) {
    const auto& src = tensor.as_f32();
    PlanarMap<T> map;
    if (tensor.dims.size() == 3) {
        map.channels = tensor.dims[0];
        map.height = tensor.dims[1];
        map.width = tensor.dims[2];
    } else if (tensor.dims.size() == 2) {
        map.channels = 1;
        map.height = tensor.dims[0];
        map.width = tensor.dims[1];
    } else {
        fail(ErrorKind::ShapeMismatch,
             "dense map needs rank 2 or 3, got rank " + std::to_string(tensor.dims.size()));
    }
    map.values.assign(src.begin(), src.end());
    return map;
}

}  // namespace

FeatureMap feature_map_from(const Tensor& tensor) { return planar_from<float>(tensor); }

ProbabilityMap probability_map_from(const Tensor& tensor) { return planar_from<double>(tensor); }

LabelMap label_map_from(const Tensor& tensor) {
    if (tensor.dims.size() != 2)
        fail(ErrorKind::ShapeMismatch,
             "label map needs rank 2, got rank " + std::to_string(tensor.dims.size()));
    LabelMap map;
    map.height = tensor.dims[0];
    map.width = tensor.dims[1];
    map.values = tensor.as_u16();
    return map;
}

Tensor to_tensor(const FeatureMap& map) {
    return Tensor::f32({static_cast<std::uint32_t>(map.channels),
                        static_cast<std::uint32_t>(map.height),
                        static_cast<std::uint32_t>(map.width)},
                       map.values);
}

Tensor to_tensor(const LabelMap& map) {
    return Tensor::u16(
        {static_cast<std::uint32_t>(map.height), static_cast<std::uint32_t>(map.width)},
        map.values);
}

LabelMap argmax_labels(const ProbabilityMap& probabilities) {
    LabelMap labels(probabilities.height, probabilities.width);
    for (std::size_t i = 0; i < probabilities.pixels(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probabilities.channels; ++c)
            if (probabilities.at(c, i) > probabilities.at(best, i)) best = c;
        labels.values[i] = static_cast<std::uint16_t>(best);
    }
    return labels;
}

}  // namespace anchorda
