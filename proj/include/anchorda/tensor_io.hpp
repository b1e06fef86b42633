#pragma once

// Binary tensor files.
//
// Layout (all integers little-endian):
//   bytes 0..7    magic "ANCHTNSR"
//   byte  8       dtype (0 = f32, 1 = u16)
//   byte  9       rank (1..4)
//   bytes 10..    rank x u32 dims
//   payload       row-major values, little-endian
//
// The payload offset depends only on the rank: 10 + 4 * rank.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace anchorda {

enum class DType : std::uint8_t { f32 = 0, u16 = 1 };

inline constexpr std::size_t kMaxTensorRank = 4;
inline constexpr char kTensorMagic[8] = {'A', 'N', 'C', 'H', 'T', 'N', 'S', 'R'};

std::size_t dtype_size(DType dtype);
std::size_t tensor_header_size(std::size_t rank);

struct Tensor {
    std::vector<std::uint32_t> dims;
    std::variant<std::vector<float>, std::vector<std::uint16_t>> values;

    static Tensor f32(std::vector<std::uint32_t> dims, std::vector<float> values);
    static Tensor u16(std::vector<std::uint32_t> dims, std::vector<std::uint16_t> values);

    DType dtype() const noexcept;
    std::size_t element_count() const noexcept;

    // Typed views; throw UnsupportedDtype when the stored dtype differs.
    const std::vector<float>& as_f32() const;
    const std::vector<std::uint16_t>& as_u16() const;

    bool operator==(const Tensor&) const = default;
};

std::vector<std::byte> encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::span<const std::byte> bytes);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

// Whole-file helpers shared by the other on-disk formats.
std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

}  // namespace anchorda
