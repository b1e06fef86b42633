#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "anchorda/maps.hpp"

namespace anchorda::testing {

struct ManifestShape {
    std::size_t samples = 20;
    std::size_t num_categories = 4;
    std::size_t feature_channels = 3;
    std::size_t height = 8;
    std::size_t width = 8;
    bool with_labels = true;
    bool with_predictions = true;
    bool with_probabilities = true;
    bool with_discriminator = true;
};

// Writes tensors and manifest.json under `dir` (created). Sample i is named
// "img000i"-style; paths in the manifest are relative. Returns the manifest path.
std::filesystem::path write_synthetic_manifest(const std::filesystem::path& dir,
                                               const ManifestShape& shape, std::uint64_t seed);

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

// Runs the CLI binary with `args`; returns the exit status. Output is
// discarded unless `log` is given.
int run_cli(const std::string& args, const std::filesystem::path& log = {});

// Softmax-normalized probabilities leaning towards `labels`.
ProbabilityMap probabilities_towards(const LabelMap& labels, std::size_t num_categories,
                                     double sharpness, std::uint64_t seed);

}  // namespace anchorda::testing
