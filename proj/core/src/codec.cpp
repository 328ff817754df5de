#include "eyas/codec.hpp"

#include <png.h>

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <csetjmp>
#include <cstring>
#include <fstream>

#include "eyas/error.hpp"

namespace eyas {

std::string sha256_hex(std::span<const std::uint8_t> data) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(data.data(), data.size(), digest);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(2 * SHA256_DIGEST_LENGTH, '0');
    for (int i = 0; i < SHA256_DIGEST_LENGTH; ++i) {
        out[2 * i] = kHex[digest[i] >> 4];
        out[2 * i + 1] = kHex[digest[i] & 0xF];
    }
    return out;
}

std::string sha256_hex(std::string_view data) { return sha256_hex(as_bytes(data)); }

std::string base64_encode(std::span<const std::uint8_t> data) {
    std::string out(4 * ((data.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                  static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

Bytes base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) fail(ErrorCode::decode, "base64 length is not a multiple of 4");
    Bytes out(3 * text.size() / 4);
    const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) fail(ErrorCode::decode, "invalid base64 payload");
    std::size_t len = static_cast<std::size_t>(n);
    // EVP_DecodeBlock keeps the zero bytes produced by '=' padding.
    if (!text.empty() && text.back() == '=') --len;
    if (text.size() > 1 && text[text.size() - 2] == '=') --len;
    out.resize(len);
    return out;
}

namespace {

struct RawPng {
    int width = 0;
    int height = 0;
    int color_type = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;  // tightly packed, 8 bits per sample
    std::vector<png_color> palette;
};

struct ReadCursor {
    std::span<const std::uint8_t> data;
    std::size_t offset = 0;
};

void read_callback(png_structp png, png_bytep out, png_size_t length) {
    auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cursor->offset + length > cursor->data.size()) png_error(png, "truncated PNG stream");
    std::memcpy(out, cursor->data.data() + cursor->offset, length);
    cursor->offset += length;
}

void error_callback(png_structp png, png_const_charp message) {
    auto* msg = static_cast<std::string*>(png_get_error_ptr(png));
    if (msg) *msg = message;
    png_longjmp(png, 1);
}

void warning_callback(png_structp, png_const_charp) {}

bool is_png(std::span<const std::uint8_t> data) {
    return data.size() >= 8 && png_sig_cmp(data.data(), 0, 8) == 0;
}

RawPng read_png(std::span<const std::uint8_t> data) {
    if (!is_png(data)) fail(ErrorCode::decode, "not a PNG stream");
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, error_callback,
                                             warning_callback);
    if (!png) fail(ErrorCode::internal, "png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(ErrorCode::internal, "png_create_info_struct failed");
    }
    ReadCursor cursor{data, 0};
    RawPng raw;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorCode::decode, "PNG decode failed: " + message);
    }
    const auto reject = [&](ErrorCode code, const char* why) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(code, why);
    };
    png_set_read_fn(png, &cursor, read_callback);
    png_read_info(png, info);
    const int bit_depth = png_get_bit_depth(png, info);
    raw.color_type = png_get_color_type(png, info);
    raw.width = static_cast<int>(png_get_image_width(png, info));
    raw.height = static_cast<int>(png_get_image_height(png, info));
    if (bit_depth > 8) reject(ErrorCode::unsupported_format, "16-bit PNG samples are not supported");
    if (raw.width > kMaxImageSide || raw.height > kMaxImageSide) reject(ErrorCode::invalid_argument, "PNG dimensions exceed the ingest limit");
    if (bit_depth < 8) {
        if (raw.color_type == PNG_COLOR_TYPE_GRAY) png_set_expand_gray_1_2_4_to_8(png);
        else png_set_packing(png);
    }
    if (raw.color_type == PNG_COLOR_TYPE_PALETTE) {
        png_colorp palette = nullptr;
        int count = 0;
        if (png_get_PLTE(png, info, &palette, &count)) raw.palette.assign(palette, palette + count);
    }
    png_read_update_info(png, info);
    raw.channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.data.resize(rowbytes * raw.height);
    rows.resize(raw.height);
    for (int y = 0; y < raw.height; ++y) rows[y] = raw.data.data() + rowbytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return raw;
}

Bytes write_png(int width, int height, int color_type, std::span<const std::uint8_t> data,
                int channels, std::span<const png_color> palette = {}) {
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, error_callback,
                                              warning_callback);
    if (!png) fail(ErrorCode::internal, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(ErrorCode::internal, "png_create_info_struct failed");
    }
    Bytes out;
    std::vector<png_bytep> rows(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorCode::internal, "PNG encode failed: " + message);
    }
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep bytes, png_size_t length) {
            auto* sink = static_cast<Bytes*>(png_get_io_ptr(p));
            sink->insert(sink->end(), bytes, bytes + length);
        },
        [](png_structp) {});
    png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    if (!palette.empty()) {
        png_set_PLTE(png, info, palette.data(), static_cast<int>(palette.size()));
    }
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    const std::size_t stride = static_cast<std::size_t>(width) * channels;
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(data.data() + stride * y);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

// Binary PPM: "P6" ws width ws height ws maxval single-ws raster.
FundusImage decode_ppm(std::span<const std::uint8_t> data, Laterality laterality) {
    std::size_t pos = 2;
    auto skip_ws = [&] {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(data[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&]() -> long {
        skip_ws();
        long v = 0;
        std::size_t digits = 0;
        while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
            v = v * 10 + (data[pos] - '0');
            ++pos;
            if (++digits > 9) fail(ErrorCode::decode, "PPM header value too large");
        }
        if (digits == 0) fail(ErrorCode::decode, "malformed PPM header");
        return v;
    };
    const long width = read_int();
    const long height = read_int();
    const long maxval = read_int();
    if (maxval != 255) fail(ErrorCode::unsupported_format, "only 8-bit PPM (maxval 255) is supported");
    if (pos >= data.size() || !std::isspace(data[pos])) fail(ErrorCode::decode, "malformed PPM header");
    ++pos;
    if (width <= 0 || height <= 0 || width > kMaxImageSide || height > kMaxImageSide) {
        fail(ErrorCode::invalid_argument, "PPM dimensions outside the ingest limit");
    }
    const std::size_t need = static_cast<std::size_t>(width) * height * 3;
    if (data.size() - pos < need) fail(ErrorCode::decode, "truncated PPM raster");
    std::vector<std::uint8_t> rgb(data.begin() + static_cast<std::ptrdiff_t>(pos),
                                  data.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return FundusImage(static_cast<int>(width), static_cast<int>(height), std::move(rgb), laterality);
}

}  // namespace

FundusImage decode_image(std::span<const std::uint8_t> data, Laterality laterality) {
    if (data.size() >= 2 && data[0] == 'P' && data[1] == '6') {
        FundusImage img = decode_ppm(data, laterality);
        validate_ingest_limits(img);
        return img;
    }
    if (!is_png(data)) fail(ErrorCode::decode, "input is neither PNG nor binary PPM");
    RawPng raw = read_png(data);
    if (raw.color_type != PNG_COLOR_TYPE_RGB || raw.channels != 3) {
        fail(ErrorCode::unsupported_format, "only 8-bit RGB PNG images are accepted");
    }
    FundusImage img(raw.width, raw.height, std::move(raw.data), laterality);
    validate_ingest_limits(img);
    return img;
}

Bytes encode_png(const FundusImage& image) {
    return write_png(image.width(), image.height(), PNG_COLOR_TYPE_RGB, image.pixels(), 3);
}

Bytes encode_ppm(const FundusImage& image) {
    const std::string header =
        "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    Bytes out(header.begin(), header.end());
    const auto px = image.pixels();
    out.insert(out.end(), px.begin(), px.end());
    return out;
}

Bytes encode_png(const GrayImage& image) {
    return write_png(image.width(), image.height(), PNG_COLOR_TYPE_GRAY, image.pixels(), 1);
}

Bytes encode_mask_png(const BinaryMask& mask) {
    std::vector<std::uint8_t> gray(mask.bits().begin(), mask.bits().end());
    for (auto& v : gray) v = v ? 255 : 0;
    return write_png(mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, gray, 1);
}

Bytes encode_av_png(const VesselMask& vessels) {
    static const png_color kPalette[3] = {{0, 0, 0}, {220, 40, 40}, {40, 80, 220}};
    std::vector<std::uint8_t> idx(vessels.av.size());
    std::transform(vessels.av.begin(), vessels.av.end(), idx.begin(),
                   [](AvLabel l) { return static_cast<std::uint8_t>(l); });
    return write_png(vessels.width(), vessels.height(), PNG_COLOR_TYPE_PALETTE, idx, 1, kPalette);
}

GrayImage decode_gray_png(std::span<const std::uint8_t> data) {
    RawPng raw = read_png(data);
    if (raw.channels != 1 ||
        (raw.color_type != PNG_COLOR_TYPE_GRAY && raw.color_type != PNG_COLOR_TYPE_PALETTE)) {
        fail(ErrorCode::unsupported_format, "expected a single-channel PNG");
    }
    return GrayImage(raw.width, raw.height, std::move(raw.data));
}

BinaryMask decode_mask_png(std::span<const std::uint8_t> data) {
    GrayImage g = decode_gray_png(data);
    std::vector<std::uint8_t> bits(g.pixels().begin(), g.pixels().end());
    return BinaryMask(g.width(), g.height(), std::move(bits));
}

VesselMask decode_av_png(std::span<const std::uint8_t> data) {
    GrayImage g = decode_gray_png(data);
    BinaryMask vessel(g.width(), g.height());
    std::vector<AvLabel> av(g.size(), AvLabel::none);
    const auto px = g.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (px[i] > 2) fail(ErrorCode::decode, "A/V map contains a label outside {0,1,2}");
        av[i] = static_cast<AvLabel>(px[i]);
        vessel.bits()[i] = px[i] != 0;
    }
    return VesselMask(std::move(vessel), std::move(av));
}

Bytes read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open " + path.string());
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) fail(ErrorCode::io, "short write to " + path.string());
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    write_file(path, as_bytes(text));
}

}  // namespace eyas
