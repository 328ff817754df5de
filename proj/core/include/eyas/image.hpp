#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eyas {

enum class Laterality { left, right, unknown };
enum class Structure { onh, macula, vessels };
enum class ChannelMix { luma, red, green };

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Linear channel weights for building a single-channel working image.
struct ChannelWeights {
    double r = 0.299;
    double g = 0.587;
    double b = 0.114;
};

inline constexpr int kMinImageSide = 64;
inline constexpr int kMaxImageSide = 8192;

/// Immutable 8-bit RGB raster. Carries no patient metadata; its id is the
/// SHA-256 of the pixel buffer, so identical pixels always share an id.
class FundusImage {
public:
    FundusImage(int width, int height, std::vector<std::uint8_t> rgb,
                Laterality laterality = Laterality::unknown);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    Laterality laterality() const noexcept { return laterality_; }
    const std::string& image_id() const noexcept { return image_id_; }
    std::span<const std::uint8_t> pixels() const noexcept { return *pixels_; }

    Rgb at(int x, int y) const noexcept {
        const auto* p = pixels_->data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
        return {p[0], p[1], p[2]};
    }

    /// Same pixels (and id) with a different laterality tag.
    FundusImage with_laterality(Laterality laterality) const;

    friend bool operator==(const FundusImage& a, const FundusImage& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && *a.pixels_ == *b.pixels_ &&
               a.laterality_ == b.laterality_;
    }

private:
    int width_;
    int height_;
    Laterality laterality_;
    std::shared_ptr<const std::vector<std::uint8_t>> pixels_;
    std::string image_id_;
};

/// Rejects images outside the accepted ingest range (64..8192 px per side).
void validate_ingest_limits(const FundusImage& image);

class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::uint8_t at(int x, int y) const noexcept {
        return pixels_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::uint8_t& at(int x, int y) noexcept {
        return pixels_[static_cast<std::size_t>(y) * width_ + x];
    }
    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
};

/// Real-valued per-pixel map (template scores, gradient magnitudes, ...).
class ScoreMap {
public:
    ScoreMap() = default;
    ScoreMap(int width, int height, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double at(int x, int y) const noexcept { return scores_[static_cast<std::size_t>(y) * width_ + x]; }
    double& at(int x, int y) noexcept { return scores_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const double> scores() const noexcept { return scores_; }
    std::span<double> scores() noexcept { return scores_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> scores_;
};

class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height);
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return bits_.size(); }

    bool at(int x, int y) const noexcept { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
    void set(int x, int y, bool on) noexcept {
        bits_[static_cast<std::size_t>(y) * width_ + x] = on ? 1 : 0;
    }
    /// One byte per pixel holding 0 or 1.
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::span<std::uint8_t> bits() noexcept { return bits_; }

    std::size_t count() const noexcept;
    bool empty_foreground() const noexcept { return count() == 0; }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

enum class AvLabel : std::uint8_t { none = 0, artery = 1, vein = 2 };

/// Vessel bits plus per-pixel artery/vein labels; labels are only set on
/// vessel pixels.
struct VesselMask {
    BinaryMask vessel;
    std::vector<AvLabel> av;

    VesselMask() = default;
    VesselMask(BinaryMask vessel_bits, std::vector<AvLabel> labels);
    explicit VesselMask(BinaryMask vessel_bits);

    int width() const noexcept { return vessel.width(); }
    int height() const noexcept { return vessel.height(); }
    AvLabel label_at(int x, int y) const noexcept {
        return av[static_cast<std::size_t>(y) * vessel.width() + x];
    }

    friend bool operator==(const VesselMask&, const VesselMask&) = default;
};

struct RoiBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    Structure structure = Structure::onh;
    double confidence = 0.0;

    double center_x() const noexcept { return x + w / 2.0; }
    double center_y() const noexcept { return y + h / 2.0; }
    bool fits(int width, int height) const noexcept {
        return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= width && y + h <= height;
    }

    friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

struct EllipseFit {
    double cx = 0.0;
    double cy = 0.0;
    double a = 0.0;      // semi-major, px
    double b = 0.0;      // semi-minor, px
    double theta = 0.0;  // major-axis angle in [0, pi), y down
    double eccentricity = 0.0;

    friend bool operator==(const EllipseFit&, const EllipseFit&) = default;
};

/// Builds an EllipseFit with the derived eccentricity, folding theta into [0, pi)
/// and swapping axes if b > a.
EllipseFit make_ellipse(double cx, double cy, double a, double b, double theta);

GrayImage to_gray(const FundusImage& image, ChannelMix mix);
GrayImage weighted_gray(const FundusImage& image, const ChannelWeights& weights);

FundusImage crop(const FundusImage& image, const RoiBox& roi);
GrayImage crop(const GrayImage& image, const RoiBox& roi);
BinaryMask crop(const BinaryMask& mask, const RoiBox& roi);

FundusImage overlay(const FundusImage& image, const BinaryMask& mask, Rgb color, double alpha);

std::string_view to_string(Laterality laterality) noexcept;
std::string_view to_string(Structure structure) noexcept;
std::string_view to_string(AvLabel label) noexcept;
Laterality parse_laterality(std::string_view text);
Structure parse_structure(std::string_view text);

}  // namespace eyas
