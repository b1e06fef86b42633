#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace anchorda {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr std::uint32_t kDefaultNumCategories = 19;

struct ManifestSample {
    std::string id;
    // Resolved (manifest-relative paths are joined onto the manifest directory).
    std::filesystem::path feature_path;
    std::optional<std::filesystem::path> label_path;
    std::optional<std::filesystem::path> prediction_path;
    std::optional<std::filesystem::path> probability_path;
    std::optional<double> discriminator_score;

    bool operator==(const ManifestSample&) const = default;
};

struct Manifest {
    int schema_version = kManifestSchemaVersion;
    std::uint32_t num_categories = kDefaultNumCategories;
    std::uint32_t feature_channels = 0;
    std::vector<ManifestSample> samples;

    const ManifestSample* find(const std::string& id) const;

    bool operator==(const Manifest&) const = default;
};

// Parses and validates a JSON manifest. Every referenced path must exist.
// Errors: MissingField, DuplicateId, UnresolvablePath, InvalidArgument.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace anchorda
