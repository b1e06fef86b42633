#include "anchorda/manifest.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "anchorda/error.hpp"

namespace anchorda {
namespace {

using nlohmann::json;

const json& required(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        fail(ErrorKind::MissingField, where + " lacks required field '" + key + "'");
    return *it;
}

std::filesystem::path resolve(const std::filesystem::path& base, const json& value,
                              const std::string& field, const std::string& sample_id) {
    if (!value.is_string())
        fail(ErrorKind::InvalidArgument, "sample '" + sample_id + "' field " + field +
                                             " must be a string");
    std::filesystem::path p = value.get<std::string>();
    if (p.is_relative()) p = base / p;
    if (!std::filesystem::exists(p))
        fail(ErrorKind::UnresolvablePath,
             "sample '" + sample_id + "' " + field + " not found: " + p.string());
    return p;
}

std::optional<std::filesystem::path> optional_path(const std::filesystem::path& base,
                                                   const json& sample, const char* key,
                                                   const std::string& sample_id) {
    auto it = sample.find(key);
    if (it == sample.end() || it->is_null()) return std::nullopt;
    return resolve(base, *it, key, sample_id);
}

}  // namespace

const ManifestSample* Manifest::find(const std::string& id) const {
    for (const auto& s : samples)
        if (s.id == id) return &s;
    return nullptr;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::UnresolvablePath, "cannot open manifest " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::InvalidArgument, "manifest " + path.string() + " is not JSON: " + e.what());
    }
    if (!doc.is_object()) fail(ErrorKind::InvalidArgument, "manifest root must be an object");

    const auto base = path.parent_path();
    Manifest m;
    try {
        m.schema_version = required(doc, "schema_version", "manifest").get<int>();
        if (m.schema_version != kManifestSchemaVersion)
            fail(ErrorKind::VersionMismatch,
                 "manifest schema_version " + std::to_string(m.schema_version) + " unsupported");
        m.feature_channels = required(doc, "feature_channels", "manifest").get<std::uint32_t>();
        if (auto it = doc.find("num_categories"); it != doc.end() && !it->is_null())
            m.num_categories = it->get<std::uint32_t>();
        if (m.num_categories < 2)
            fail(ErrorKind::InvalidArgument, "num_categories must be >= 2");
        if (m.feature_channels < 1)
            fail(ErrorKind::InvalidArgument, "feature_channels must be >= 1");

        const json& samples = required(doc, "samples", "manifest");
        if (!samples.is_array()) fail(ErrorKind::InvalidArgument, "samples must be an array");

        std::set<std::string> seen;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const json& s = samples[i];
            const std::string where = "samples[" + std::to_string(i) + "]";
            ManifestSample out;
            out.id = required(s, "id", where).get<std::string>();
            if (!seen.insert(out.id).second)
                fail(ErrorKind::DuplicateId, "sample id '" + out.id + "' appears more than once");
            out.feature_path = resolve(base, required(s, "feature_path", where), "feature_path", out.id);
            out.label_path = optional_path(base, s, "label_path", out.id);
            out.prediction_path = optional_path(base, s, "prediction_path", out.id);
            out.probability_path = optional_path(base, s, "probability_path", out.id);
            if (auto it = s.find("discriminator_score"); it != s.end() && !it->is_null()) {
                const double score = it->get<double>();
                if (!(score >= 0.0 && score <= 1.0))
                    fail(ErrorKind::InvalidArgument,
                         "sample '" + out.id + "' discriminator_score outside [0, 1]");
                out.discriminator_score = score;
            }
            m.samples.push_back(std::move(out));
        }
    } catch (const json::type_error& e) {
        fail(ErrorKind::InvalidArgument, std::string("manifest field has wrong type: ") + e.what());
    }
    return m;
}

}  // namespace anchorda
