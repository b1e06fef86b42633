#include "anchorda/vector_set.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "anchorda/error.hpp"
#include "anchorda/tensor_io.hpp"

namespace anchorda {

std::filesystem::path sidecar_path(const std::filesystem::path& tensor_path) {
    auto p = tensor_path;
    p.replace_extension(".json");
    return p;
}

void save_vector_set(const std::filesystem::path& tensor_path, const std::vector<ImageVector>& vectors,
                     const VectorSetInfo& info) {
    nlohmann::json side;
    side["count"] = vectors.size();
    side["num_categories"] = info.num_categories;
    side["feature_channels"] = info.feature_channels;
    side["which_map"] = info.which_map;
    nlohmann::json ids = nlohmann::json::array();
    nlohmann::json presence = nlohmann::json::array();
    for (const auto& v : vectors) {
        ids.push_back(v.source_id);
        std::vector<int> flags(v.presence.begin(), v.presence.end());
        presence.push_back(flags);
    }
    side["ids"] = std::move(ids);
    side["presence"] = std::move(presence);

    if (!vectors.empty()) {
        const std::size_t dim = vectors.front().values.size();
        require(dim >= 1, "image vectors are empty");
        std::vector<float> flat;
        flat.reserve(vectors.size() * dim);
        for (const auto& v : vectors) {
            if (v.values.size() != dim)
                fail(ErrorKind::ShapeMismatch, "image vectors differ in length");
            for (double x : v.values) flat.push_back(static_cast<float>(x));
        }
        write_tensor(tensor_path, Tensor::f32({static_cast<std::uint32_t>(vectors.size()),
                                               static_cast<std::uint32_t>(dim)},
                                              std::move(flat)));
    } else {
        std::filesystem::remove(tensor_path);
    }
    std::ofstream out(sidecar_path(tensor_path));
    if (!out) fail(ErrorKind::IoFailure, "cannot write " + sidecar_path(tensor_path).string());
    out << side.dump(2) << "\n";
}

std::vector<ImageVector> load_vector_set(const std::filesystem::path& tensor_path,
                                         VectorSetInfo* info) {
    nlohmann::json side;
    const auto side_path = sidecar_path(tensor_path);
    const bool has_sidecar = std::filesystem::exists(side_path);
    if (has_sidecar) {
        std::ifstream in(side_path);
        try {
            side = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            fail(ErrorKind::InvalidArgument, side_path.string() + " is not JSON: " + e.what());
        }
    }
    try {
        if (info && has_sidecar) {
            info->num_categories = side.value("num_categories", std::size_t{0});
            info->feature_channels = side.value("feature_channels", std::size_t{0});
            info->which_map = side.value("which_map", std::string{});
        }
        if (has_sidecar && side.value("count", std::size_t{1}) == 0) return {};

        const Tensor t = read_tensor(tensor_path);
        if (t.dims.size() != 2)
            fail(ErrorKind::ShapeMismatch, tensor_path.string() + " is not an N x D tensor");
        const auto& flat = t.as_f32();
        const std::size_t n = t.dims[0], dim = t.dims[1];
        std::vector<ImageVector> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i].values.assign(flat.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                 flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
            if (has_sidecar) {
                out[i].source_id = side.at("ids").at(i).get<std::string>();
                if (side.contains("presence"))
                    for (int flag : side.at("presence").at(i).get<std::vector<int>>())
                        out[i].presence.push_back(flag != 0);
            } else {
                out[i].source_id = std::to_string(i);
            }
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::MissingField, side_path.string() + ": " + e.what());
    }
}

}  // namespace anchorda
