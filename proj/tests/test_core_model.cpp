#include <gtest/gtest.h>

#include <random>
#include <set>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"
#include "eyas/image.hpp"
#include "support.hpp"

using namespace eyas;
using eyas::testing::solid_image;

namespace {

FundusImage random_image(std::mt19937_64& rng, int w, int h) {
    std::uniform_int_distribution<int> byte(0, 255);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
    for (auto& p : px) p = static_cast<std::uint8_t>(byte(rng));
    return FundusImage(w, h, std::move(px));
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an eyas::Error";
    return ErrorCode::internal;
}

}  // namespace

TEST(FundusImage, BufferLengthMustMatchDimensions) {
    EXPECT_EQ(code_of([] { FundusImage(64, 64, std::vector<std::uint8_t>(10)); }), ErrorCode::invalid_argument);
}

TEST(FundusImage, IdIsContentHashOnly) {
    const FundusImage a = solid_image(64, 64, {10, 20, 30});
    const FundusImage b = solid_image(64, 64, {10, 20, 30});
    EXPECT_EQ(a.image_id(), b.image_id());
    EXPECT_EQ(a.image_id().size(), 64u);
    EXPECT_EQ(a.with_laterality(Laterality::left).image_id(), a.image_id());
    EXPECT_NE(solid_image(64, 64, {10, 20, 31}).image_id(), a.image_id());
}

TEST(FundusImage, IdsDistinctAcrossRandomBuffers) {
    std::mt19937_64 rng(3);
    std::set<std::string> ids;
    for (int i = 0; i < 50; ++i) ids.insert(random_image(rng, 64, 64).image_id());
    EXPECT_EQ(ids.size(), 50u);
}

TEST(FundusImage, IngestLimits) {
    EXPECT_EQ(code_of([] { validate_ingest_limits(solid_image(63, 64, {})); }), ErrorCode::invalid_argument);
    EXPECT_NO_THROW(validate_ingest_limits(solid_image(64, 64, {})));
}

TEST(ToGray, WhiteLumaIs255) {
    const GrayImage g = to_gray(solid_image(2, 2, {255, 255, 255}), ChannelMix::luma);
    for (auto v : g.pixels()) EXPECT_EQ(v, 255);
}

TEST(ToGray, ChannelSelection) {
    const FundusImage red = solid_image(1, 1, {255, 0, 0});
    EXPECT_EQ(to_gray(red, ChannelMix::red).at(0, 0), 255);
    EXPECT_EQ(to_gray(red, ChannelMix::green).at(0, 0), 0);
}

TEST(ToGray, LumaArithmetic) {
    // round(0.299*100 + 0.587*150 + 0.114*200) = round(140.75) = 141
    EXPECT_EQ(to_gray(solid_image(1, 1, {100, 150, 200}), ChannelMix::luma).at(0, 0), 141);
}

TEST(Crop, WholeImageIsPixelIdentical) {
    std::mt19937_64 rng(1);
    const FundusImage img = random_image(rng, 64, 64).with_laterality(Laterality::right);
    const FundusImage c = crop(img, RoiBox{0, 0, 64, 64, Structure::onh, 1.0});
    EXPECT_TRUE(std::equal(c.pixels().begin(), c.pixels().end(), img.pixels().begin()));
    EXPECT_EQ(c.laterality(), Laterality::right);
}

TEST(Crop, WindowMatchesSource) {
    std::mt19937_64 rng(2);
    const FundusImage img = random_image(rng, 10, 10);
    const FundusImage c = crop(img, RoiBox{2, 2, 4, 4, Structure::onh, 0.5});
    ASSERT_EQ(c.width(), 4);
    ASSERT_EQ(c.height(), 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) EXPECT_EQ(c.at(x, y), img.at(x + 2, y + 2));
    EXPECT_NE(c.image_id(), img.image_id());
}

TEST(Crop, OutOfBoundsRoi) {
    const FundusImage img = solid_image(10, 10, {});
    EXPECT_EQ(code_of([&] { crop(img, RoiBox{8, 8, 4, 4, Structure::onh, 0.0}); }), ErrorCode::bounds);
}

TEST(Overlay, AlphaZeroIsIdentity) {
    std::mt19937_64 rng(4);
    const FundusImage img = random_image(rng, 16, 16);
    BinaryMask m(16, 16);
    m.set(3, 3, true);
    EXPECT_EQ(overlay(img, m, {255, 0, 0}, 0.0), img);
}

TEST(Overlay, AlphaOneSaturates) {
    const FundusImage img = solid_image(4, 4, {10, 20, 30});
    BinaryMask m(4, 4);
    m.set(1, 2, true);
    const FundusImage out = overlay(img, m, {255, 0, 0}, 1.0);
    EXPECT_EQ(out.at(1, 2), (Rgb{255, 0, 0}));
    EXPECT_EQ(out.at(0, 0), (Rgb{10, 20, 30}));
}

TEST(Overlay, HalfBlend) {
    const FundusImage img = solid_image(2, 2, {100, 100, 100});
    BinaryMask m(2, 2);
    m.set(0, 0, true);
    EXPECT_EQ(overlay(img, m, {200, 0, 0}, 0.5).at(0, 0), (Rgb{150, 50, 50}));
}

TEST(Overlay, EmptyMaskIsIdentityForAnyAlpha) {
    std::mt19937_64 rng(5);
    const FundusImage img = random_image(rng, 8, 8);
    for (double alpha : {0.0, 0.3, 0.77, 1.0}) EXPECT_EQ(overlay(img, BinaryMask(8, 8), {1, 2, 3}, alpha), img);
}

TEST(Overlay, DimensionMismatch) {
    EXPECT_EQ(code_of([] { overlay(solid_image(4, 4, {}), BinaryMask(3, 4), {}, 0.5); }),
              ErrorCode::dimension_mismatch);
}

TEST(EllipseFit, MakeEllipseNormalizes) {
    const EllipseFit e = make_ellipse(0, 0, 10, 20, -0.25);
    EXPECT_DOUBLE_EQ(e.a, 20);
    EXPECT_DOUBLE_EQ(e.b, 10);
    EXPECT_GE(e.theta, 0.0);
    EXPECT_LT(e.theta, 3.14159266);
    EXPECT_NEAR(e.eccentricity, std::sqrt(1 - 100.0 / 400.0), 1e-9);
}

TEST(VesselMask, LabelsRequireVesselBits) {
    BinaryMask bits(4, 4);
    std::vector<AvLabel> labels(16, AvLabel::none);
    labels[5] = AvLabel::artery;
    EXPECT_EQ(code_of([&] { VesselMask(bits, labels); }), ErrorCode::invalid_argument);
}

TEST(Codec, PngAndPpmRoundTripBitExact) {
    std::mt19937_64 rng(6);
    const FundusImage img = random_image(rng, 70, 65);
    EXPECT_EQ(decode_image(encode_png(img)), img);
    EXPECT_EQ(decode_image(encode_ppm(img)), img);
}

TEST(Codec, MaskAndAvRoundTrip) {
    std::mt19937_64 rng(7);
    const BinaryMask m = eyas::testing::random_mask(rng, 33, 17, 0.4);
    EXPECT_EQ(decode_mask_png(encode_mask_png(m)), m);
    const GrayImage g = decode_gray_png(encode_mask_png(m));
    for (auto v : g.pixels()) EXPECT_TRUE(v == 0 || v == 255);

    std::vector<AvLabel> labels(m.size(), AvLabel::none);
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (m.bits()[i]) labels[i] = i % 3 ? AvLabel::artery : AvLabel::vein;
    const VesselMask v(m, labels);
    EXPECT_EQ(decode_av_png(encode_av_png(v)), v);
}

TEST(Codec, RejectsSixteenBitAndAlpha) {
    const Bytes png16 = read_file(std::filesystem::path(EYAS_TEST_DATA) / "rgb16.png");
    EXPECT_EQ(code_of([&] { decode_image(png16); }), ErrorCode::unsupported_format);
    const Bytes rgba = read_file(std::filesystem::path(EYAS_TEST_DATA) / "rgba.png");
    EXPECT_EQ(code_of([&] { decode_image(rgba); }), ErrorCode::unsupported_format);
}

TEST(Codec, RejectsGarbageAndSmallImages) {
    EXPECT_EQ(code_of([] { decode_image(as_bytes("not an image")); }), ErrorCode::decode);
    EXPECT_EQ(code_of([] { decode_image(encode_png(solid_image(32, 32, {}))); }), ErrorCode::invalid_argument);
}

TEST(Codec, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex(std::string_view("abc")),
              "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Codec, Base64RoundTrip) {
    EXPECT_EQ(base64_encode(as_bytes("hello")), "aGVsbG8=");
    const Bytes back = base64_decode("aGVsbG8=");
    EXPECT_EQ(std::string(back.begin(), back.end()), "hello");
}
