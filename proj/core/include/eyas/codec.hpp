#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eyas/image.hpp"

namespace eyas {

using Bytes = std::vector<std::uint8_t>;

std::string sha256_hex(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::span<const std::uint8_t> data);
Bytes base64_decode(std::string_view text);

/// Decodes 8-bit RGB PNG or binary PPM (P6, maxval 255). Anything else,
/// including 16-bit samples, is rejected with unsupported_format.
/// Ingest limits are enforced on the result.
FundusImage decode_image(std::span<const std::uint8_t> data,
                         Laterality laterality = Laterality::unknown);

Bytes encode_png(const FundusImage& image);
Bytes encode_ppm(const FundusImage& image);
Bytes encode_png(const GrayImage& image);
/// 8-bit grayscale PNG with foreground 255, background 0.
Bytes encode_mask_png(const BinaryMask& mask);
/// Indexed PNG: 0 none, 1 artery, 2 vein.
Bytes encode_av_png(const VesselMask& vessels);

GrayImage decode_gray_png(std::span<const std::uint8_t> data);
/// Accepts a grayscale PNG; any non-zero sample is foreground.
BinaryMask decode_mask_png(std::span<const std::uint8_t> data);
/// Accepts an indexed or grayscale PNG holding labels {0,1,2}.
VesselMask decode_av_png(std::span<const std::uint8_t> data);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_file(const std::filesystem::path& path, std::string_view text);

inline std::span<const std::uint8_t> as_bytes(std::string_view s) noexcept {
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

}  // namespace eyas
