#include <httplib.h>

#include <algorithm>
#include <array>
#include <regex>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"
#include "eyas/segmenter.hpp"

namespace eyas {

void validate_descriptor(const BackendDescriptor& desc) {
    static const std::regex name_re(R"([A-Za-z0-9][A-Za-z0-9._-]*)");
    static const std::regex semver_re(
        R"((0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)(-[0-9A-Za-z.-]+)?(\+[0-9A-Za-z.-]+)?)");
    if (!std::regex_match(desc.name, name_re)) fail(ErrorCode::invalid_argument, "invalid backend name '" + desc.name + "'");
    if (!std::regex_match(desc.version, semver_re)) {
        fail(ErrorCode::invalid_argument, "backend version '" + desc.version + "' is not semver");
    }
    if (desc.kind == BackendKind::remote) {
        if (desc.endpoint.rfind("http://", 0) != 0 && desc.endpoint.rfind("https://", 0) != 0) {
            fail(ErrorCode::invalid_argument, "remote backend needs an http(s) endpoint");
        }
    } else if (!desc.endpoint.empty()) {
        fail(ErrorCode::invalid_argument, "builtin backend cannot have an endpoint");
    }
}

std::pair<std::string, std::string> parse_backend_label(std::string_view label) {
    const auto at = label.rfind('@');
    if (at == std::string_view::npos || at == 0 || at + 1 == label.size()) {
        fail(ErrorCode::invalid_argument, "backend must be given as name@version");
    }
    return {std::string(label.substr(0, at)), std::string(label.substr(at + 1))};
}

namespace {

// Numeric major.minor.patch order; a pre-release sorts before its release.
bool semver_less(const std::string& a, const std::string& b) {
    auto parse = [](const std::string& v) {
        std::array<long, 3> parts{};
        std::size_t pos = 0;
        for (int i = 0; i < 3; ++i) {
            std::size_t used = 0;
            parts[i] = std::stol(v.substr(pos), &used);
            pos += used + 1;
        }
        std::string rest = pos - 1 < v.size() ? v.substr(pos - 1) : "";
        const auto plus = rest.find('+');
        if (plus != std::string::npos) rest.erase(plus);
        return std::pair{parts, rest};
    };
    const auto [pa, ra] = parse(a);
    const auto [pb, rb] = parse(b);
    if (pa != pb) return pa < pb;
    if (ra.empty() != rb.empty()) return !ra.empty();
    if (ra != rb) return ra < rb;
    return a < b;
}

}  // namespace

BinaryMask SegmentationBackend::segment_region(const FundusImage&, const RoiBox&) const {
    fail(ErrorCode::invalid_argument, descriptor().label() + " does not segment regions");
}

VesselMask SegmentationBackend::segment_vessels(const FundusImage&) const {
    fail(ErrorCode::invalid_argument, descriptor().label() + " does not segment vessels");
}

BackendDescriptor classical_descriptor(Structure structure) {
    return {kClassicalBackendName, kClassicalBackendVersion, structure, BackendKind::builtin, ""};
}

ClassicalBackend::ClassicalBackend(Structure structure, SegmenterConfig config)
    : descriptor_(classical_descriptor(structure)), config_(std::move(config)) {}

BinaryMask ClassicalBackend::segment_region(const FundusImage& image, const RoiBox& roi) const {
    switch (descriptor_.structure) {
        case Structure::onh: return segment_region_classical(image, roi, config_.onh, true);
        case Structure::macula: return segment_region_classical(image, roi, config_.macula, false);
        case Structure::vessels: break;
    }
    return SegmentationBackend::segment_region(image, roi);
}

VesselMask ClassicalBackend::segment_vessels(const FundusImage& image) const {
    if (descriptor_.structure != Structure::vessels) return SegmentationBackend::segment_vessels(image);
    return segment_vessels_classical(image, config_.vessels);
}

RemoteBackend::RemoteBackend(BackendDescriptor descriptor, const SegmenterConfig& config, double timeout_seconds)
    : descriptor_(std::move(descriptor)), config_(config), timeout_seconds_(timeout_seconds) {
    validate_descriptor(descriptor_);
    if (descriptor_.kind != BackendKind::remote) fail(ErrorCode::invalid_argument, "descriptor is not remote");
}

std::vector<std::uint8_t> RemoteBackend::post(const FundusImage& image) const {
    static const std::regex url_re(R"((https?://[^/]+)(/.*)?)");
    std::smatch m;
    if (!std::regex_match(descriptor_.endpoint, m, url_re)) {
        fail(ErrorCode::invalid_argument, "bad endpoint " + descriptor_.endpoint);
    }
    std::string path = m[2].matched ? m[2].str() : "";
    while (!path.empty() && path.back() == '/') path.pop_back();
    path += "/segment";

    httplib::Client client(m[1].str());
    const auto secs = static_cast<time_t>(timeout_seconds_);
    const auto usecs = static_cast<time_t>((timeout_seconds_ - double(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    const Bytes png = encode_png(image);
    httplib::Headers headers{{"X-Structure", std::string(to_string(descriptor_.structure))},
                             {"X-Image-Id", image.image_id()}};
    auto res = client.Post(path, headers, reinterpret_cast<const char*>(png.data()), png.size(), "image/png");
    if (!res) {
        fail(ErrorCode::backend_failure,
             descriptor_.label() + ": request failed (" + httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        fail(ErrorCode::backend_failure, descriptor_.label() + ": status " + std::to_string(res->status));
    }
    return {res->body.begin(), res->body.end()};
}

BinaryMask RemoteBackend::segment_region(const FundusImage& image, const RoiBox&) const {
    if (descriptor_.structure == Structure::vessels) return SegmentationBackend::segment_region(image, {});
    BinaryMask mask;
    try {
        mask = decode_mask_png(post(image));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::backend_failure) throw;
        fail(ErrorCode::backend_failure, descriptor_.label() + ": bad mask (" + e.what() + ")");
    }
    if (mask.width() != image.width() || mask.height() != image.height()) {
        fail(ErrorCode::backend_failure, descriptor_.label() + ": mask dimensions differ from the image");
    }
    return mask;
}

VesselMask RemoteBackend::segment_vessels(const FundusImage& image) const {
    if (descriptor_.structure != Structure::vessels) return SegmentationBackend::segment_vessels(image);
    BinaryMask bits;
    try {
        bits = decode_mask_png(post(image));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::backend_failure) throw;
        fail(ErrorCode::backend_failure, descriptor_.label() + ": bad mask (" + e.what() + ")");
    }
    if (bits.width() != image.width() || bits.height() != image.height()) {
        fail(ErrorCode::backend_failure, descriptor_.label() + ": mask dimensions differ from the image");
    }
    // Remote models return vessel bits only; stage 2 runs locally.
    return label_arteries_veins(weighted_gray(image, config_.vessels.green_weighted), bits);
}

BackendRegistry::BackendRegistry() : entries_(std::make_shared<const std::vector<BackendDescriptor>>()) {
    for (auto s : {Structure::onh, Structure::macula, Structure::vessels}) register_backend(classical_descriptor(s));
    add_builtin_factory(kClassicalBackendName, [](const BackendDescriptor& d, const SegmenterConfig& c) {
        return std::make_unique<ClassicalBackend>(d.structure, c);
    });
}

BackendRegistry::Snapshot BackendRegistry::snapshot() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

void BackendRegistry::register_backend(const BackendDescriptor& desc) {
    validate_descriptor(desc);
    std::lock_guard lock(mutex_);
    for (const auto& e : *entries_) {
        if (e.name == desc.name && e.version == desc.version && e.structure == desc.structure) {
            if (e == desc) return;
            fail(ErrorCode::conflict, "backend " + desc.label() + " for " + std::string(to_string(desc.structure)) +
                                          " is already registered with different fields");
        }
    }
    auto next = std::make_shared<std::vector<BackendDescriptor>>(*entries_);
    next->push_back(desc);
    std::stable_sort(next->begin(), next->end(), [](const BackendDescriptor& a, const BackendDescriptor& b) {
        if (a.name != b.name) return a.name < b.name;
        if (a.version != b.version) return semver_less(a.version, b.version);
        return a.structure < b.structure;
    });
    entries_ = std::move(next);
}

std::vector<BackendDescriptor> BackendRegistry::list_backends(Structure structure) const {
    std::vector<BackendDescriptor> out;
    for (const auto& e : *snapshot())
        if (e.structure == structure) out.push_back(e);
    return out;
}

std::vector<BackendDescriptor> BackendRegistry::list_all() const { return *snapshot(); }

std::optional<BackendDescriptor> BackendRegistry::find(std::string_view name, std::string_view version,
                                                       Structure structure) const {
    for (const auto& e : *snapshot())
        if (e.name == name && e.version == version && e.structure == structure) return e;
    return std::nullopt;
}

void BackendRegistry::add_builtin_factory(const std::string& name, Factory factory) {
    std::lock_guard lock(mutex_);
    for (auto& [n, f] : factories_) {
        if (n == name) {
            f = std::move(factory);
            return;
        }
    }
    factories_.emplace_back(name, std::move(factory));
}

std::unique_ptr<SegmentationBackend> BackendRegistry::instantiate(const BackendDescriptor& desc,
                                                                  const SegmenterConfig& config) const {
    if (desc.kind == BackendKind::remote) return std::make_unique<RemoteBackend>(desc, config);
    Factory factory;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [n, f] : factories_)
            if (n == desc.name) factory = f;
    }
    if (!factory) fail(ErrorCode::not_found, "no builtin implementation named '" + desc.name + "'");
    return factory(desc, config);
}

}  // namespace eyas
