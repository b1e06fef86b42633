#include "anchorda/tensor_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>

#include "anchorda/byte_io.hpp"
#include "anchorda/error.hpp"

namespace anchorda {
namespace {

std::size_t checked_product(const std::vector<std::uint32_t>& dims) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] == 0)
            fail(ErrorKind::DimOverflow, "dims[" + std::to_string(i) + "] is zero");
        if (n > std::numeric_limits<std::size_t>::max() / 4 / dims[i])
            fail(ErrorKind::DimOverflow, "dims[" + std::to_string(i) + "] overflows element count");
        n *= dims[i];
    }
    return n;
}

void validate_dims(const std::vector<std::uint32_t>& dims) {
    if (dims.empty() || dims.size() > kMaxTensorRank)
        fail(ErrorKind::DimOverflow,
             "rank " + std::to_string(dims.size()) + " outside [1, " +
                 std::to_string(kMaxTensorRank) + "]");
    checked_product(dims);
}

}  // namespace

std::size_t dtype_size(DType dtype) {
    switch (dtype) {
        case DType::f32: return 4;
        case DType::u16: return 2;
    }
    fail(ErrorKind::UnsupportedDtype, "unknown dtype");
}

std::size_t tensor_header_size(std::size_t rank) { return sizeof(kTensorMagic) + 2 + 4 * rank; }

Tensor Tensor::f32(std::vector<std::uint32_t> dims, std::vector<float> values) {
    return Tensor{std::move(dims), std::move(values)};
}

Tensor Tensor::u16(std::vector<std::uint32_t> dims, std::vector<std::uint16_t> values) {
    return Tensor{std::move(dims), std::move(values)};
}

DType Tensor::dtype() const noexcept {
    return std::holds_alternative<std::vector<float>>(values) ? DType::f32 : DType::u16;
}

std::size_t Tensor::element_count() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, values);
}

const std::vector<float>& Tensor::as_f32() const {
    if (const auto* v = std::get_if<std::vector<float>>(&values)) return *v;
    fail(ErrorKind::UnsupportedDtype, "expected f32 tensor, found u16");
}

const std::vector<std::uint16_t>& Tensor::as_u16() const {
    if (const auto* v = std::get_if<std::vector<std::uint16_t>>(&values)) return *v;
    fail(ErrorKind::UnsupportedDtype, "expected u16 tensor, found f32");
}

std::vector<std::byte> encode_tensor(const Tensor& tensor) {
    if (tensor.dims.empty() || tensor.dims.size() > kMaxTensorRank)
        fail(ErrorKind::InvalidArgument,
             "tensor rank must be in [1, 4], got " + std::to_string(tensor.dims.size()));
    for (std::size_t i = 0; i < tensor.dims.size(); ++i)
        if (tensor.dims[i] == 0)
            fail(ErrorKind::InvalidArgument, "dims[" + std::to_string(i) + "] must be >= 1");
    const std::size_t n = checked_product(tensor.dims);
    if (n != tensor.element_count())
        fail(ErrorKind::ShapeMismatch, "dims describe " + std::to_string(n) +
                                           " elements but tensor holds " +
                                           std::to_string(tensor.element_count()));

    detail::ByteWriter w;
    w.put_bytes(kTensorMagic, sizeof(kTensorMagic));
    w.put_u8(static_cast<std::uint8_t>(tensor.dtype()));
    w.put_u8(static_cast<std::uint8_t>(tensor.dims.size()));
    for (std::uint32_t d : tensor.dims) w.put_u32(d);
    if (tensor.dtype() == DType::f32) {
        for (float v : tensor.as_f32()) w.put_f32(v);
    } else {
        for (std::uint16_t v : tensor.as_u16()) w.put_u16(v);
    }
    return w.take();
}

Tensor decode_tensor(std::span<const std::byte> bytes) {
    detail::ByteReader r(bytes);
    const auto magic = r.take(sizeof(kTensorMagic), "magic");
    for (std::size_t i = 0; i < sizeof(kTensorMagic); ++i)
        if (magic[i] != static_cast<std::byte>(kTensorMagic[i]))
            fail(ErrorKind::BadMagic, "magic byte " + std::to_string(i) + " does not match ANCHTNSR");

    const std::uint8_t dtype_byte = r.u8("dtype");
    if (dtype_byte > 1)
        fail(ErrorKind::UnsupportedDtype, "dtype byte " + std::to_string(dtype_byte));
    const auto dtype = static_cast<DType>(dtype_byte);

    const std::uint8_t rank = r.u8("rank");
    if (rank == 0 || rank > kMaxTensorRank)
        fail(ErrorKind::DimOverflow, "rank " + std::to_string(rank) + " outside [1, 4]");
    std::vector<std::uint32_t> dims(rank);
    for (auto& d : dims) d = r.u32("dims");
    validate_dims(dims);
    const std::size_t n = checked_product(dims);

    r.need(n * dtype_size(dtype), "payload");
    Tensor t;
    t.dims = std::move(dims);
    if (dtype == DType::f32) {
        std::vector<float> values(n);
        for (auto& v : values) v = r.f32("payload");
        t.values = std::move(values);
    } else {
        std::vector<std::uint16_t> values(n);
        for (auto& v : values) v = r.u16("payload");
        t.values = std::move(values);
    }
    if (r.remaining() != 0)
        fail(ErrorKind::TrailingData,
             std::to_string(r.remaining()) + " bytes after the declared payload");
    return t;
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::UnresolvablePath, "cannot open " + path.string());
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    if (size < 0) fail(ErrorKind::IoFailure, "cannot size " + path.string());
    in.seekg(0, std::ios::beg);
    std::vector<std::byte> bytes(static_cast<std::size_t>(size));
    if (!bytes.empty() && !in.read(reinterpret_cast<char*>(bytes.data()), size))
        fail(ErrorKind::IoFailure, "short read on " + path.string());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::IoFailure, "write failed on " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file_bytes(path)); }

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    const auto bytes = encode_tensor(tensor);
    write_file_bytes(path, bytes);
}

}  // namespace anchorda
