#include "eyas/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"

namespace eyas {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::bounds: return "bounds";
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::unsupported_format: return "unsupported_format";
        case ErrorCode::decode: return "decode_error";
        case ErrorCode::io: return "io_error";
        case ErrorCode::degenerate_template: return "degenerate_template";
        case ErrorCode::out_of_view: return "out_of_view";
        case ErrorCode::segmentation_empty: return "segmentation_empty";
        case ErrorCode::degenerate_mask: return "degenerate_mask";
        case ErrorCode::classification_failed: return "classification_failed";
        case ErrorCode::insufficient_vessels: return "insufficient_vessels";
        case ErrorCode::roi_too_small: return "roi_too_small";
        case ErrorCode::format: return "format_error";
        case ErrorCode::undefined_metric: return "undefined_metric";
        case ErrorCode::unknown_label: return "unknown_label";
        case ErrorCode::length_mismatch: return "length_mismatch";
        case ErrorCode::empty_report: return "empty_report";
        case ErrorCode::state: return "state_error";
        case ErrorCode::conflict: return "conflict";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::pending: return "pending";
        case ErrorCode::payload_too_large: return "payload_too_large";
        case ErrorCode::backend_failure: return "backend_failure";
        case ErrorCode::missing_labels: return "missing_labels";
        case ErrorCode::timeout: return "timeout";
        case ErrorCode::internal: return "internal";
    }
    return "internal";
}

FundusImage::FundusImage(int width, int height, std::vector<std::uint8_t> rgb,
                         Laterality laterality)
    : width_(width), height_(height), laterality_(laterality) {
    if (width <= 0 || height <= 0) {
        fail(ErrorCode::invalid_argument, "image dimensions must be positive");
    }
    if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
        fail(ErrorCode::invalid_argument, "RGB buffer length does not match width*height*3");
    }
    image_id_ = sha256_hex(rgb);
    pixels_ = std::make_shared<const std::vector<std::uint8_t>>(std::move(rgb));
}

FundusImage FundusImage::with_laterality(Laterality laterality) const {
    FundusImage copy = *this;
    copy.laterality_ = laterality;
    return copy;
}

void validate_ingest_limits(const FundusImage& image) {
    auto in_range = [](int v) { return v >= kMinImageSide && v <= kMaxImageSide; };
    if (!in_range(image.width()) || !in_range(image.height())) {
        fail(ErrorCode::invalid_argument,
             "image sides must be within [" + std::to_string(kMinImageSide) + ", " +
                 std::to_string(kMaxImageSide) + "], got " + std::to_string(image.width()) + "x" +
                 std::to_string(image.height()));
    }
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {
    if (width <= 0 || height <= 0) fail(ErrorCode::invalid_argument, "gray image dimensions must be positive");
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0) fail(ErrorCode::invalid_argument, "gray image dimensions must be positive");
    if (pixels_.size() != static_cast<std::size_t>(width) * height) {
        fail(ErrorCode::invalid_argument, "gray buffer length does not match width*height");
    }
}

ScoreMap::ScoreMap(int width, int height, double fill)
    : width_(width), height_(height),
      scores_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {}

BinaryMask::BinaryMask(int width, int height)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), 0) {
    if (width <= 0 || height <= 0) fail(ErrorCode::invalid_argument, "mask dimensions must be positive");
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
    if (width <= 0 || height <= 0) fail(ErrorCode::invalid_argument, "mask dimensions must be positive");
    if (bits_.size() != static_cast<std::size_t>(width) * height) {
        fail(ErrorCode::invalid_argument, "mask buffer length does not match width*height");
    }
    for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

VesselMask::VesselMask(BinaryMask vessel_bits, std::vector<AvLabel> labels)
    : vessel(std::move(vessel_bits)), av(std::move(labels)) {
    if (av.size() != vessel.size()) {
        fail(ErrorCode::dimension_mismatch, "A/V label buffer does not match vessel mask");
    }
    const auto bits = vessel.bits();
    for (std::size_t i = 0; i < av.size(); ++i) {
        if (av[i] != AvLabel::none && bits[i] == 0) {
            fail(ErrorCode::invalid_argument, "A/V label set on a non-vessel pixel");
        }
    }
}

VesselMask::VesselMask(BinaryMask vessel_bits)
    : vessel(std::move(vessel_bits)), av(vessel.size(), AvLabel::none) {}

EllipseFit make_ellipse(double cx, double cy, double a, double b, double theta) {
    if (b > a) {
        std::swap(a, b);
        theta += std::numbers::pi / 2.0;
    }
    theta = std::fmod(theta, std::numbers::pi);
    if (theta < 0.0) theta += std::numbers::pi;
    if (theta >= std::numbers::pi) theta = 0.0;
    const double ratio = a > 0.0 ? b / a : 1.0;
    const double ecc = std::sqrt(std::max(0.0, 1.0 - ratio * ratio));
    return {cx, cy, a, b, theta, ecc};
}

namespace {

std::uint8_t round_byte(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

GrayImage to_gray(const FundusImage& image, ChannelMix mix) {
    switch (mix) {
        case ChannelMix::luma: return weighted_gray(image, {0.299, 0.587, 0.114});
        case ChannelMix::red: return weighted_gray(image, {1.0, 0.0, 0.0});
        case ChannelMix::green: return weighted_gray(image, {0.0, 1.0, 0.0});
    }
    return weighted_gray(image, {});
}

GrayImage weighted_gray(const FundusImage& image, const ChannelWeights& w) {
    const auto src = image.pixels();
    std::vector<std::uint8_t> out(static_cast<std::size_t>(image.width()) * image.height());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = w.r * src[3 * i] + w.g * src[3 * i + 1] + w.b * src[3 * i + 2];
        out[i] = round_byte(v);
    }
    return GrayImage(image.width(), image.height(), std::move(out));
}

namespace {

void check_roi(const RoiBox& roi, int width, int height) {
    if (!roi.fits(width, height)) {
        fail(ErrorCode::bounds, "ROI (" + std::to_string(roi.x) + "," + std::to_string(roi.y) + "," +
                                    std::to_string(roi.w) + "," + std::to_string(roi.h) +
                                    ") exceeds " + std::to_string(width) + "x" +
                                    std::to_string(height));
    }
}

}  // namespace

FundusImage crop(const FundusImage& image, const RoiBox& roi) {
    check_roi(roi, image.width(), image.height());
    std::vector<std::uint8_t> out(static_cast<std::size_t>(roi.w) * roi.h * 3);
    const auto src = image.pixels();
    for (int y = 0; y < roi.h; ++y) {
        const auto* row = src.data() + (static_cast<std::size_t>(roi.y + y) * image.width() + roi.x) * 3;
        std::copy(row, row + static_cast<std::size_t>(roi.w) * 3,
                  out.begin() + static_cast<std::ptrdiff_t>(y) * roi.w * 3);
    }
    return FundusImage(roi.w, roi.h, std::move(out), image.laterality());
}

GrayImage crop(const GrayImage& image, const RoiBox& roi) {
    check_roi(roi, image.width(), image.height());
    GrayImage out(roi.w, roi.h);
    for (int y = 0; y < roi.h; ++y)
        for (int x = 0; x < roi.w; ++x) out.at(x, y) = image.at(roi.x + x, roi.y + y);
    return out;
}

BinaryMask crop(const BinaryMask& mask, const RoiBox& roi) {
    check_roi(roi, mask.width(), mask.height());
    BinaryMask out(roi.w, roi.h);
    for (int y = 0; y < roi.h; ++y)
        for (int x = 0; x < roi.w; ++x) out.set(x, y, mask.at(roi.x + x, roi.y + y));
    return out;
}

FundusImage overlay(const FundusImage& image, const BinaryMask& mask, Rgb color, double alpha) {
    if (mask.width() != image.width() || mask.height() != image.height()) {
        fail(ErrorCode::dimension_mismatch, "overlay mask does not match image dimensions");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::invalid_argument, "alpha must be in [0,1]");
    const auto src = image.pixels();
    std::vector<std::uint8_t> out(src.begin(), src.end());
    const auto bits = mask.bits();
    const double c[3] = {double(color.r), double(color.g), double(color.b)};
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (!bits[i]) continue;
        for (int k = 0; k < 3; ++k) {
            out[3 * i + k] = round_byte((1.0 - alpha) * src[3 * i + k] + alpha * c[k]);
        }
    }
    return FundusImage(image.width(), image.height(), std::move(out), image.laterality());
}

std::string_view to_string(Laterality laterality) noexcept {
    switch (laterality) {
        case Laterality::left: return "left";
        case Laterality::right: return "right";
        case Laterality::unknown: return "unknown";
    }
    return "unknown";
}

std::string_view to_string(Structure structure) noexcept {
    switch (structure) {
        case Structure::onh: return "onh";
        case Structure::macula: return "macula";
        case Structure::vessels: return "vessels";
    }
    return "onh";
}

std::string_view to_string(AvLabel label) noexcept {
    switch (label) {
        case AvLabel::none: return "none";
        case AvLabel::artery: return "artery";
        case AvLabel::vein: return "vein";
    }
    return "none";
}

Laterality parse_laterality(std::string_view text) {
    if (text == "left" || text == "OS" || text == "os") return Laterality::left;
    if (text == "right" || text == "OD" || text == "od") return Laterality::right;
    if (text == "unknown" || text.empty()) return Laterality::unknown;
    fail(ErrorCode::invalid_argument, "unknown laterality '" + std::string(text) + "'");
}

Structure parse_structure(std::string_view text) {
    if (text == "onh") return Structure::onh;
    if (text == "macula") return Structure::macula;
    if (text == "vessels") return Structure::vessels;
    fail(ErrorCode::invalid_argument, "unknown structure '" + std::string(text) + "'");
}

}  // namespace eyas
