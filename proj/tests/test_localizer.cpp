#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "eyas/error.hpp"
#include "eyas/localizer.hpp"
#include "eyas/synthgen.hpp"
#include "support.hpp"

using namespace eyas;
using eyas::testing::solid_image;

namespace {

GrayImage random_gray(std::mt19937_64& rng, int w, int h) {
    std::uniform_int_distribution<int> byte(0, 255);
    GrayImage g(w, h);
    for (auto& v : g.pixels()) v = static_cast<std::uint8_t>(byte(rng));
    return g;
}

GrayImage rotate90(const GrayImage& g) {
    // (x, y) -> (h - 1 - y, x)
    GrayImage r(g.height(), g.width());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) r.at(g.height() - 1 - y, x) = g.at(x, y);
    return r;
}

SynthScene centred_scene(std::uint64_t seed) {
    GenParams p;
    p.noise_sigma = 0.0;
    p.class_mix.shape = {1.0, 0.0, 0.0};
    SynthScene s = gen_scene(p, seed);
    // Disc centre on the centre of the middle pixel, so "the disc centre pixel" is unambiguous.
    return translate_scene(s, s.img_w / 2 + 0.5 - s.disc.cx, s.img_h / 2 + 0.5 - s.disc.cy);
}

}  // namespace

TEST(EnhanceContrast, ConstantImageStaysConstant) {
    for (int level : {0, 90, 200}) {
        const GrayImage out = enhance_contrast(GrayImage(40, 40, static_cast<std::uint8_t>(level)), 2, 2.0);
        for (auto v : out.pixels()) EXPECT_EQ(v, out.at(0, 0));
        // Full redistribution leaves a near-uniform histogram, so the level barely moves.
        EXPECT_NEAR(enhance_contrast(GrayImage(40, 40, static_cast<std::uint8_t>(level)), 1, 1.0).at(5, 5), level,
                    2);
    }
}

TEST(EnhanceContrast, TwoValueCdfMapping) {
    GrayImage g(20, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) g.at(x, y) = x < 10 ? 50 : 200;
    const GrayImage out = enhance_contrast(g, 1, std::numeric_limits<double>::infinity());
    EXPECT_NEAR(out.at(0, 0), 127, 1);
    EXPECT_EQ(out.at(19, 0), 255);
}

TEST(EnhanceContrast, Preconditions) {
    EXPECT_THROW(enhance_contrast(GrayImage(4, 4), 0, 2.0), Error);
    EXPECT_THROW(enhance_contrast(GrayImage(4, 4), 8, 2.0), Error);
    EXPECT_THROW(enhance_contrast(GrayImage(4, 4), 1, 0.5), Error);
    std::mt19937_64 rng(1);
    EXPECT_EQ(enhance_contrast(random_gray(rng, 33, 21), 3, 2.0).width(), 33);
}

TEST(Gradient, ConstantIsZero) {
    const ScoreMap m = gradient_magnitude(GrayImage(8, 8, 77));
    for (double v : m.scores()) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, VerticalStep) {
    GrayImage g(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 4; x < 8; ++x) g.at(x, y) = 255;
    const ScoreMap m = gradient_magnitude(g);
    EXPECT_DOUBLE_EQ(m.at(3, 4), 1020.0);
    EXPECT_DOUBLE_EQ(m.at(4, 4), 1020.0);
    EXPECT_DOUBLE_EQ(m.at(1, 4), 0.0);
    EXPECT_THROW(gradient_magnitude(GrayImage(2, 5)), Error);
}

TEST(Gradient, RotationEquivariant) {
    std::mt19937_64 rng(2);
    const GrayImage g = random_gray(rng, 13, 9);
    const ScoreMap a = gradient_magnitude(g);
    const ScoreMap b = gradient_magnitude(rotate90(g));
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) EXPECT_NEAR(b.at(g.height() - 1 - y, x), a.at(x, y), 1e-9);
}

TEST(Ncc, SelfMatchAndAntiMatch) {
    std::mt19937_64 rng(3);
    const GrayImage g = random_gray(rng, 40, 30);
    const GrayImage t = crop(g, RoiBox{12, 7, 9, 6, Structure::onh, 0.0});
    const TemplateMatch m = match_template_ncc(g, t);
    EXPECT_EQ(m.peak.x, 12);
    EXPECT_EQ(m.peak.y, 7);
    EXPECT_NEAR(m.peak.score, 1.0, 1e-9);

    GrayImage neg = t;
    for (auto& v : neg.pixels()) v = static_cast<std::uint8_t>(255 - v);
    EXPECT_NEAR(match_template_ncc(g, neg).scores.at(12, 7), -1.0, 1e-9);
    for (double s : m.scores.scores()) {
        EXPECT_GE(s, -1.0 - 1e-9);
        EXPECT_LE(s, 1.0 + 1e-9);
    }
}

TEST(Ncc, FlatTemplateAndSizes) {
    EXPECT_EQ([] {
        try {
            match_template_ncc(GrayImage(20, 20, 1), GrayImage(5, 5, 9));
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::internal;
    }(), ErrorCode::degenerate_template);
    std::mt19937_64 rng(4);
    EXPECT_THROW(match_template_ncc(random_gray(rng, 5, 5), random_gray(rng, 5, 5)), Error);
}

TEST(Ncc, TiesGoToSmallestYThenX) {
    GrayImage g(12, 12, 0);
    GrayImage t(3, 3, 0);
    t.at(1, 1) = 255;
    g.at(8, 2) = 255;
    g.at(3, 6) = 255;
    g.at(2, 2) = 255;
    const TemplateMatch m = match_template_ncc(g, t);
    EXPECT_EQ(m.peak.y, 1);
    EXPECT_EQ(m.peak.x, 1);
}

TEST(LocateOnh, CentredDisc) {
    for (std::uint64_t seed : {1u, 2u, 3u, 20u}) {
        const SynthScene s = centred_scene(seed);
        const RoiBox roi = locate_onh(render(s).image);
        EXPECT_EQ(roi.structure, Structure::onh);
        EXPECT_NEAR(roi.center_x(), s.disc.cx, 2.0) << seed;
        EXPECT_NEAR(roi.center_y(), s.disc.cy, 2.0) << seed;
        EXPECT_GE(roi.confidence, 0.0);
        EXPECT_LE(roi.confidence, 1.0);
    }
}

TEST(LocateOnh, UniformImageHasLowConfidence) {
    const RoiBox roi = locate_onh(solid_image(256, 256, {120, 60, 30}));
    EXPECT_LE(roi.confidence, 0.2);
    EXPECT_TRUE(roi.fits(256, 256));
}

TEST(LocateOnh, TranslationEquivariant) {
    GenParams p;
    p.noise_sigma = 0.0;
    for (std::uint64_t seed : {11u, 12u}) {
        const SynthScene s = gen_scene(p, seed);
        const RoiBox a = locate_onh(render(s).image);
        const RoiBox b = locate_onh(render(translate_scene(s, 9, -6)).image);
        EXPECT_NEAR(b.center_x() - a.center_x(), 9, 2.0) << seed;
        EXPECT_NEAR(b.center_y() - a.center_y(), -6, 2.0) << seed;
    }
}

TEST(LocateOnh, SingleChannelWeights) {
    LocalizerConfig cfg;
    cfg.weights = {0.0, 1.0, 0.0};
    const RoiBox roi = locate_onh(render(centred_scene(4)).image, cfg);
    EXPECT_GE(roi.confidence, 0.0);
    EXPECT_LE(roi.confidence, 1.0);
    cfg.weights = {0.0, 0.0, 0.0};
    EXPECT_THROW(locate_onh(solid_image(128, 128, {}), cfg), Error);
}

TEST(LocateMacula, UnknownLateralityFindsSameCentre) {
    GenParams p;
    p.noise_sigma = 0.0;
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const SynthScene s = gen_scene(p, seed);
        const FundusImage img = render(s).image;
        const RoiBox onh = locate_onh(img);
        const RoiBox known = locate_macula(img.with_laterality(s.laterality), onh);
        const RoiBox unknown = locate_macula(img.with_laterality(Laterality::unknown), onh);
        EXPECT_EQ(known.structure, Structure::macula);
        EXPECT_NEAR(known.center_x(), s.fovea.x, 0.5 * s.disc_diameter()) << seed;
        EXPECT_NEAR(known.center_y(), s.fovea.y, 0.5 * s.disc_diameter()) << seed;
        EXPECT_EQ(unknown.x, known.x) << seed;
        EXPECT_EQ(unknown.y, known.y) << seed;
    }
}

TEST(LocateMacula, BandOutsideImage) {
    const FundusImage img = solid_image(256, 256, {120, 60, 30});
    const FundusImage narrow = solid_image(64, 256, {120, 60, 30}).with_laterality(Laterality::right);
    try {
        locate_macula(narrow, RoiBox{0, 100, 20, 20, Structure::onh, 1.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::out_of_view);
    }
    EXPECT_THROW(locate_macula(img, RoiBox{250, 0, 20, 20, Structure::onh, 1.0}), Error);
    EXPECT_THROW(locate_macula(img, RoiBox{0, 0, 20, 20, Structure::macula, 1.0}), Error);
}
