#include "fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "anchorda/rng.hpp"
#include "anchorda/tensor_io.hpp"

#ifndef ANCHORDA_CLI_PATH
#error "ANCHORDA_CLI_PATH must point at the CLI binary"
#endif

namespace fs = std::filesystem;

namespace anchorda::testing {

ProbabilityMap probabilities_towards(const LabelMap& labels, std::size_t num_categories,
                                     double sharpness, std::uint64_t seed) {
    CounterRng rng(derive_seed(seed, "probabilities"));
    ProbabilityMap p(num_categories, labels.height, labels.width);
    const std::size_t n = labels.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> logits(num_categories);
        double max_logit = -1e300;
        for (std::size_t c = 0; c < num_categories; ++c) {
            logits[c] = rng.normal() + (labels.values[i] == c ? sharpness : 0.0);
            max_logit = std::max(max_logit, logits[c]);
        }
        double z = 0.0;
        for (double& l : logits) z += (l = std::exp(l - max_logit));
        for (std::size_t c = 0; c < num_categories; ++c) p.values[c * n + i] = logits[c] / z;
    }
    return p;
}

namespace {

// f32 storage rounds each probability; renormalize in float so per-pixel
// sums stay within the 1e-4 tolerance after decoding.
Tensor probability_tensor(const ProbabilityMap& p) {
    const std::size_t n = p.height * p.width;
    std::vector<float> v(p.values.size());
    for (std::size_t i = 0; i < n; ++i) {
        float z = 0.0f;
        for (std::size_t c = 0; c < p.channels; ++c) z += static_cast<float>(p.values[c * n + i]);
        for (std::size_t c = 0; c < p.channels; ++c)
            v[c * n + i] = static_cast<float>(p.values[c * n + i]) / z;
    }
    return Tensor::f32({static_cast<std::uint32_t>(p.channels), static_cast<std::uint32_t>(p.height),
                        static_cast<std::uint32_t>(p.width)},
                       std::move(v));
}

}  // namespace

fs::path write_synthetic_manifest(const fs::path& dir, const ManifestShape& shape, std::uint64_t seed) {
    fs::create_directories(dir / "maps");
    CounterRng rng(derive_seed(seed, "manifest"));
    const std::size_t n = shape.height * shape.width;
    const auto h = static_cast<std::uint32_t>(shape.height);
    const auto w = static_cast<std::uint32_t>(shape.width);

    nlohmann::json samples = nlohmann::json::array();
    for (std::size_t s = 0; s < shape.samples; ++s) {
        char id[16];
        std::snprintf(id, sizeof(id), "img%04zu", s);
        const std::string stem = std::string("maps/") + id;

        // Blocky labels so every image has a few large regions, plus some
        // ignored pixels.
        LabelMap labels(shape.height, shape.width);
        const std::size_t offset = rng.below(shape.num_categories);
        for (std::size_t y = 0; y < shape.height; ++y)
            for (std::size_t x = 0; x < shape.width; ++x) {
                const std::size_t block = (y * 2 / shape.height) * 2 + (x * 2 / shape.width);
                labels.values[y * shape.width + x] =
                    static_cast<std::uint16_t>((block + offset) % shape.num_categories);
            }
        for (std::size_t k = 0; k < n / 16; ++k) labels.values[rng.below(n)] = kIgnoreLabel;

        std::vector<float> features(shape.feature_channels * n);
        for (std::size_t c = 0; c < shape.feature_channels; ++c)
            for (std::size_t i = 0; i < n; ++i) {
                const double centre = labels.values[i] == kIgnoreLabel
                                          ? 0.0
                                          : static_cast<double>((labels.values[i] + c) % 3) - 1.0;
                features[c * n + i] = static_cast<float>(centre + 0.3 * rng.normal());
            }
        write_tensor(dir / (stem + ".features.tnsr"),
                     Tensor::f32({static_cast<std::uint32_t>(shape.feature_channels), h, w},
                                 std::move(features)));

        LabelMap clean = labels;
        for (auto& v : clean.values)
            if (v == kIgnoreLabel) v = 0;
        const ProbabilityMap probs = probabilities_towards(clean, shape.num_categories, 3.0, seed + s);
        nlohmann::json entry = {{"id", id}, {"feature_path", stem + ".features.tnsr"}};
        if (shape.with_labels) {
            write_tensor(dir / (stem + ".labels.tnsr"), to_tensor(labels));
            entry["label_path"] = stem + ".labels.tnsr";
        }
        if (shape.with_predictions) {
            write_tensor(dir / (stem + ".pred.tnsr"), to_tensor(argmax_labels(probs)));
            entry["prediction_path"] = stem + ".pred.tnsr";
        }
        if (shape.with_probabilities) {
            write_tensor(dir / (stem + ".probs.tnsr"), probability_tensor(probs));
            entry["probability_path"] = stem + ".probs.tnsr";
        }
        if (shape.with_discriminator) entry["discriminator_score"] = 0.05 + 0.9 * rng.uniform();
        samples.push_back(std::move(entry));
    }

    const nlohmann::json manifest = {{"schema_version", 1},
                                     {"num_categories", shape.num_categories},
                                     {"feature_channels", shape.feature_channels},
                                     {"samples", samples}};
    const fs::path path = dir / "manifest.json";
    std::ofstream(path) << manifest.dump(2) << "\n";
    return path;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("anchorda-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string sink = log.empty() ? "/dev/null" : log.string();
    const std::string cmd = std::string(ANCHORDA_CLI_PATH) + " " + args + " >" + sink + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (status == -1) return -1;
    return WEXITSTATUS(status);
}

}  // namespace anchorda::testing
