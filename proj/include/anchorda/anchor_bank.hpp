#pragma once

// Persistent anchor memory with EMA refinement of the closest anchor.
//
// File layout (little-endian):
//   magic "ANCHBANK" | version u16 | domain_tag u8 | alpha f32 | V u32 | D u32
//   | anchors f32[V*D] row-major | counters u32[V]
//   | provenance: seed u64, K u32, tol f64

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "anchorda/kmeans.hpp"
#include "anchorda/matrix.hpp"

namespace anchorda {

inline constexpr std::uint16_t kBankVersion = 1;
inline constexpr double kDefaultEmaAlpha = 0.999;
inline constexpr std::size_t kBankHeaderSize = 23;
inline constexpr std::size_t kBankProvenanceSize = 20;

enum class DomainTag : std::uint8_t { source = 0, target_warmup = 1, target = 2 };

DomainTag parse_domain_tag(const std::string& name);
std::string to_string(DomainTag tag);

struct BankProvenance {
    std::uint64_t seed = 0;
    std::uint32_t k = 0;
    double tol = 0.0;

    bool operator==(const BankProvenance&) const = default;
};

struct AnchorBank {
    DomainTag domain_tag = DomainTag::source;
    Matrix anchors;  // V x D
    double alpha = kDefaultEmaAlpha;
    std::vector<std::uint32_t> update_counts;
    BankProvenance created_from;

    std::size_t size() const noexcept { return anchors.rows(); }
    std::size_t dim() const noexcept { return anchors.cols(); }

    bool operator==(const AnchorBank&) const = default;
};

AnchorBank init_from_clustering(const Clustering& clustering, DomainTag tag,
                                double alpha = kDefaultEmaAlpha);

struct NearestAnchor {
    std::size_t index = 0;
    double squared_distance = 0.0;
};

// Ties go to the lowest index.
NearestAnchor nearest(const AnchorBank& bank, std::span<const double> feature);

// Moves only the closest anchor: A <- alpha * A + (1 - alpha) * feature.
// Returns the index of the updated anchor.
std::size_t ema_update(AnchorBank& bank, std::span<const double> feature);

std::vector<std::byte> encode_bank(const AnchorBank& bank);
AnchorBank decode_bank(std::span<const std::byte> bytes);
void save_bank(const AnchorBank& bank, const std::filesystem::path& path);
AnchorBank load_bank(const std::filesystem::path& path);

// FNV-1a over the encoded bank, as 16 hex digits.
std::string fingerprint(const AnchorBank& bank);

}  // namespace anchorda
