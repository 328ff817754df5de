#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "eyas/config.hpp"
#include "eyas/image.hpp"

namespace eyas {

enum class BackendKind { builtin, remote };

struct BackendDescriptor {
    std::string name;
    std::string version;  // semver
    Structure structure = Structure::onh;
    BackendKind kind = BackendKind::builtin;
    std::string endpoint;  // remote only

    std::string label() const { return name + "@" + version; }
    friend bool operator==(const BackendDescriptor&, const BackendDescriptor&) = default;
};

/// Throws invalid_argument unless the descriptor is well formed.
void validate_descriptor(const BackendDescriptor& desc);

/// Splits "name@version".
std::pair<std::string, std::string> parse_backend_label(std::string_view label);

/// A segmentation implementation for one structure. ONH and macula backends
/// implement segment_region, vessel backends segment_vessels.
class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;
    virtual const BackendDescriptor& descriptor() const = 0;
    virtual BinaryMask segment_region(const FundusImage& image, const RoiBox& roi) const;
    virtual VesselMask segment_vessels(const FundusImage& image) const;
};

/// The reference classical backend ("classical@1.0.0").
class ClassicalBackend final : public SegmentationBackend {
public:
    ClassicalBackend(Structure structure, SegmenterConfig config = {});
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    BinaryMask segment_region(const FundusImage& image, const RoiBox& roi) const override;
    VesselMask segment_vessels(const FundusImage& image) const override;

private:
    BackendDescriptor descriptor_;
    SegmenterConfig config_;
};

/// Talks to an out-of-process segmentation model:
/// POST {endpoint}/segment, body PNG, headers X-Structure and X-Image-Id;
/// 200 answers with a PNG mask of the same dimensions.
class RemoteBackend final : public SegmentationBackend {
public:
    RemoteBackend(BackendDescriptor descriptor, const SegmenterConfig& config = {},
                  double timeout_seconds = 60.0);
    const BackendDescriptor& descriptor() const override { return descriptor_; }
    BinaryMask segment_region(const FundusImage& image, const RoiBox& roi) const override;
    VesselMask segment_vessels(const FundusImage& image) const override;

private:
    std::vector<std::uint8_t> post(const FundusImage& image) const;

    BackendDescriptor descriptor_;
    SegmenterConfig config_;
    double timeout_seconds_;
};

inline constexpr const char* kClassicalBackendName = "classical";
inline constexpr const char* kClassicalBackendVersion = "1.0.0";
BackendDescriptor classical_descriptor(Structure structure);

/// Runtime list of known backends. Writers are serialized; readers take an
/// immutable snapshot, so a listing never observes a half-applied update.
class BackendRegistry {
public:
    using Factory = std::function<std::unique_ptr<SegmentationBackend>(const BackendDescriptor&,
                                                                       const SegmenterConfig&)>;

    /// Pre-registers the classical backend for every structure.
    BackendRegistry();

    /// Idempotent for identical descriptors; a different descriptor under an
    /// existing (name, version, structure) key is a conflict.
    void register_backend(const BackendDescriptor& desc);
    std::vector<BackendDescriptor> list_backends(Structure structure) const;
    std::vector<BackendDescriptor> list_all() const;
    std::optional<BackendDescriptor> find(std::string_view name, std::string_view version,
                                          Structure structure) const;

    /// Implementation for builtin descriptors with this name.
    void add_builtin_factory(const std::string& name, Factory factory);

    std::unique_ptr<SegmentationBackend> instantiate(const BackendDescriptor& desc,
                                                     const SegmenterConfig& config = {}) const;

private:
    using Snapshot = std::shared_ptr<const std::vector<BackendDescriptor>>;
    Snapshot snapshot() const;

    mutable std::mutex mutex_;
    Snapshot entries_;
    std::vector<std::pair<std::string, Factory>> factories_;
};

/// Post-conditions shared by every backend: mask has image dims and its
/// foreground is confined to the ROI grown by `roi_dilation`.
BinaryMask segment_onh(const FundusImage& image, const RoiBox& roi, const SegmentationBackend& backend,
                       const SegmenterConfig& config = {});
BinaryMask segment_macula(const FundusImage& image, const RoiBox& roi,
                          const SegmentationBackend& backend, const SegmenterConfig& config = {});
VesselMask segment_vessels(const FundusImage& image, const SegmentationBackend& backend);

/// ROI grown by `fraction` of its side (half on each side), clipped to the image.
RoiBox dilate_roi(const RoiBox& roi, double fraction, int width, int height);

/// Classical region path: threshold, close, largest component, fill holes.
/// `bright` selects the polarity.
BinaryMask segment_region_classical(const FundusImage& image, const RoiBox& roi,
                                    const RegionSegmentation& config, bool bright);

/// Top-hat response of the inverted green-weighted image, max over line
/// orientations.
ScoreMap vessel_response(const FundusImage& image, const VesselSegmentation& config);
VesselMask segment_vessels_classical(const FundusImage& image, const VesselSegmentation& config);

/// Stage 2: per 8-connected component, a mean centreline intensity above the
/// median of all components marks an artery, otherwise a vein.
VesselMask label_arteries_veins(const GrayImage& intensity, const BinaryMask& vessels);

/// Moment-based ellipse: centroid, axes 2*sqrt(eigenvalues of covariance).
EllipseFit fit_ellipse(const BinaryMask& mask);

}  // namespace eyas
