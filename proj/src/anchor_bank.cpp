#include "anchorda/anchor_bank.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "anchorda/byte_io.hpp"
#include "anchorda/error.hpp"
#include "anchorda/rng.hpp"
#include "anchorda/tensor_io.hpp"

namespace anchorda {
namespace {

constexpr char kBankMagic[8] = {'A', 'N', 'C', 'H', 'B', 'A', 'N', 'K'};

void check_alpha(double alpha) {
    require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1], got " + std::to_string(alpha));
}

}  // namespace

DomainTag parse_domain_tag(const std::string& name) {
    if (name == "source") return DomainTag::source;
    if (name == "target_warmup") return DomainTag::target_warmup;
    if (name == "target") return DomainTag::target;
    fail(ErrorKind::InvalidArgument, "unknown domain tag '" + name + "'");
}

std::string to_string(DomainTag tag) {
    switch (tag) {
        case DomainTag::source: return "source";
        case DomainTag::target_warmup: return "target_warmup";
        case DomainTag::target: return "target";
    }
    return "unknown";
}

AnchorBank init_from_clustering(const Clustering& clustering, DomainTag tag, double alpha) {
    check_alpha(alpha);
    require(clustering.anchors.rows() >= 1, "clustering has no anchors");
    AnchorBank bank;
    bank.domain_tag = tag;
    bank.anchors = clustering.anchors;
    bank.alpha = alpha;
    bank.update_counts.assign(clustering.anchors.rows(), 0);
    bank.created_from = {clustering.config.seed, static_cast<std::uint32_t>(clustering.config.k),
                         clustering.config.tol};
    return bank;
}

NearestAnchor nearest(const AnchorBank& bank, std::span<const double> feature) {
    if (feature.size() != bank.dim())
        fail(ErrorKind::ShapeMismatch, "feature has " + std::to_string(feature.size()) +
                                           " dims, bank has " + std::to_string(bank.dim()));
    NearestAnchor best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t v = 0; v < bank.size(); ++v) {
        const double d = squared_distance(feature, bank.anchors.row(v));
        if (d < best.squared_distance) best = {v, d};
    }
    return best;
}

std::size_t ema_update(AnchorBank& bank, std::span<const double> feature) {
    const std::size_t v = nearest(bank, feature).index;
    auto anchor = bank.anchors.row(v);
    for (std::size_t d = 0; d < anchor.size(); ++d)
        anchor[d] = bank.alpha * anchor[d] + (1.0 - bank.alpha) * feature[d];
    ++bank.update_counts[v];
    return v;
}

std::vector<std::byte> encode_bank(const AnchorBank& bank) {
    check_alpha(bank.alpha);
    require(bank.size() >= 1 && bank.dim() >= 1, "bank must hold at least one anchor");
    require(bank.update_counts.size() == bank.size(), "update_counts length differs from V");
    detail::ByteWriter w;
    w.put_bytes(kBankMagic, sizeof(kBankMagic));
    w.put_u16(kBankVersion);
    w.put_u8(static_cast<std::uint8_t>(bank.domain_tag));
    w.put_f32(static_cast<float>(bank.alpha));
    w.put_u32(static_cast<std::uint32_t>(bank.size()));
    w.put_u32(static_cast<std::uint32_t>(bank.dim()));
    for (double x : bank.anchors.data()) {
        if (!std::isfinite(x)) fail(ErrorKind::InvalidArgument, "bank holds a non-finite anchor entry");
        w.put_f32(static_cast<float>(x));
    }
    for (std::uint32_t c : bank.update_counts) w.put_u32(c);
    w.put_u64(bank.created_from.seed);
    w.put_u32(bank.created_from.k);
    w.put_f64(bank.created_from.tol);
    return w.take();
}

AnchorBank decode_bank(std::span<const std::byte> bytes) {
    detail::ByteReader r(bytes);
    const auto magic = r.take(sizeof(kBankMagic), "magic");
    for (std::size_t i = 0; i < sizeof(kBankMagic); ++i)
        if (magic[i] != static_cast<std::byte>(kBankMagic[i]))
            fail(ErrorKind::BadMagic, "magic byte " + std::to_string(i) + " does not match ANCHBANK");
    const std::uint16_t version = r.u16("version");
    if (version != kBankVersion)
        fail(ErrorKind::VersionMismatch, "bank version " + std::to_string(version) +
                                             ", expected " + std::to_string(kBankVersion));
    const std::uint8_t tag = r.u8("domain_tag");
    if (tag > 2) fail(ErrorKind::InvalidArgument, "domain_tag " + std::to_string(tag));

    AnchorBank bank;
    bank.domain_tag = static_cast<DomainTag>(tag);
    bank.alpha = r.f32("alpha");
    check_alpha(bank.alpha);
    const std::uint32_t v = r.u32("V");
    const std::uint32_t d = r.u32("D");
    if (v == 0 || d == 0) fail(ErrorKind::DimOverflow, "bank V and D must be >= 1");
    const std::uint64_t cells = static_cast<std::uint64_t>(v) * d;
    r.need(cells * 4 + static_cast<std::uint64_t>(v) * 4, "anchors");
    bank.anchors = Matrix(v, d);
    for (double& x : bank.anchors.data()) x = r.f32("anchors");
    bank.update_counts.resize(v);
    for (auto& c : bank.update_counts) c = r.u32("counters");
    bank.created_from.seed = r.u64("provenance.seed");
    bank.created_from.k = r.u32("provenance.k");
    bank.created_from.tol = r.f64("provenance.tol");
    if (r.remaining() != 0)
        fail(ErrorKind::TrailingData, std::to_string(r.remaining()) + " bytes after bank payload");
    return bank;
}

void save_bank(const AnchorBank& bank, const std::filesystem::path& path) {
    write_file_bytes(path, encode_bank(bank));
}

AnchorBank load_bank(const std::filesystem::path& path) { return decode_bank(read_file_bytes(path)); }

std::string fingerprint(const AnchorBank& bank) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(encode_bank(bank))));
    return buf;
}

}  // namespace anchorda
