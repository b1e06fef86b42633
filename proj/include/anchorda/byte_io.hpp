#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "anchorda/error.hpp"

namespace anchorda::detail {

// Little-endian append/consume helpers for the binary formats.
class ByteWriter {
public:
    void put_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::byte*>(data);
        out_.insert(out_.end(), p, p + n);
    }
    void put_u8(std::uint8_t v) { out_.push_back(std::byte{v}); }
    void put_u16(std::uint16_t v) { put_le(v, 2); }
    void put_u32(std::uint32_t v) { put_le(v, 4); }
    void put_u64(std::uint64_t v) { put_le(v, 8); }
    void put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }
    void put_f64(double v) { put_u64(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::byte> take() { return std::move(out_); }
    std::size_t size() const noexcept { return out_.size(); }

private:
    void put_le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(std::byte((v >> (8 * i)) & 0xffu));
    }
    std::vector<std::byte> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }

    // `field` names what was being read, for the error message.
    void need(std::size_t n, const char* field) const {
        if (remaining() < n)
            fail(ErrorKind::TruncatedPayload, std::string("file ends inside field '") + field +
                                                  "' (need " + std::to_string(n) +
                                                  " bytes, have " + std::to_string(remaining()) +
                                                  ")");
    }
    std::span<const std::byte> take(std::size_t n, const char* field) {
        need(n, field);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8(const char* field) { return static_cast<std::uint8_t>(take(1, field)[0]); }
    std::uint16_t u16(const char* field) { return static_cast<std::uint16_t>(le(2, field)); }
    std::uint32_t u32(const char* field) { return static_cast<std::uint32_t>(le(4, field)); }
    std::uint64_t u64(const char* field) { return le(8, field); }
    float f32(const char* field) { return std::bit_cast<float>(u32(field)); }
    double f64(const char* field) { return std::bit_cast<double>(u64(field)); }

private:
    std::uint64_t le(int n, const char* field) {
        auto s = take(static_cast<std::size_t>(n), field);
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
        return v;
    }

    std::span<const std::byte> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace anchorda::detail
