#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"
#include "eyas/localizer.hpp"
#include "eyas/metrics.hpp"
#include "eyas/pipeline.hpp"
#include "eyas/segmenter.hpp"
#include "eyas/services/http.hpp"
#include "eyas/synthgen.hpp"
#include "support.hpp"

using namespace eyas;
using eyas::testing::solid_ellipse;
using eyas::testing::solid_image;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an eyas::Error";
    return ErrorCode::internal;
}

double angle_diff(double a, double b) {
    double d = std::fmod(std::abs(a - b), kPi);
    return std::min(d, kPi - d);
}

GenParams clean() {
    GenParams p;
    p.noise_sigma = 0.0;
    return p;
}

/// Returns a fixed truth mask regardless of input, standing in for a trained model.
class TruthBackend final : public SegmentationBackend {
public:
    TruthBackend(BackendDescriptor desc, BinaryMask truth) : desc_(std::move(desc)), truth_(std::move(truth)) {}
    const BackendDescriptor& descriptor() const override { return desc_; }
    BinaryMask segment_region(const FundusImage&, const RoiBox&) const override { return truth_; }

private:
    BackendDescriptor desc_;
    BinaryMask truth_;
};

}  // namespace

TEST(FitEllipse, Circle) {
    const EllipseFit e = fit_ellipse(solid_ellipse(120, 120, 60, 60, 40, 40, 0));
    EXPECT_NEAR(e.a, 40, 0.8);
    EXPECT_NEAR(e.b, 40, 0.8);
    EXPECT_LE(e.eccentricity, 0.15);
    EXPECT_NEAR(e.cx, 60, 1e-9);
    EXPECT_NEAR(e.cy, 60, 1e-9);
}

TEST(FitEllipse, AxisAligned) {
    const EllipseFit e = fit_ellipse(solid_ellipse(120, 120, 60, 60, 40, 20, 0));
    EXPECT_NEAR(e.a, 40, 0.8);
    EXPECT_NEAR(e.b, 20, 0.4);
    EXPECT_LE(angle_diff(e.theta, 0.0), 0.05);
}

TEST(FitEllipse, RotationByNinetyDegrees) {
    const EllipseFit h = fit_ellipse(solid_ellipse(120, 120, 60, 60, 40, 20, 0.3));
    const EllipseFit v = fit_ellipse(solid_ellipse(120, 120, 60, 60, 40, 20, 0.3 + kPi / 2));
    EXPECT_NEAR(v.a, h.a, 0.5);
    EXPECT_NEAR(v.b, h.b, 0.5);
    EXPECT_LE(angle_diff(v.theta, h.theta + kPi / 2), 0.05);
}

TEST(FitEllipse, Degenerate) {
    BinaryMask three(10, 10);
    for (int x = 0; x < 3; ++x) three.set(x, 4, true);
    EXPECT_EQ(code_of([&] { fit_ellipse(three); }), ErrorCode::degenerate_mask);
    BinaryMask line(20, 20);
    for (int x = 0; x < 12; ++x) line.set(x, 4, true);
    EXPECT_EQ(code_of([&] { fit_ellipse(line); }), ErrorCode::degenerate_mask);
}

TEST(SegmentOnh, NoiseFreeIou) {
    const ClassicalBackend backend(Structure::onh);
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
        const RenderedScene r = render(gen_scene(clean(), seed));
        const BinaryMask m = segment_onh(r.image, locate_onh(r.image), backend);
        EXPECT_GE(iou(m, r.onh_mask), 0.85) << seed;
    }
}

TEST(SegmentOnh, UniformRoiIsEmpty) {
    const FundusImage img = solid_image(200, 200, {150, 80, 40});
    const ClassicalBackend backend(Structure::onh);
    EXPECT_EQ(code_of([&] { segment_onh(img, RoiBox{50, 50, 60, 60, Structure::onh, 0.5}, backend); }),
              ErrorCode::segmentation_empty);
    EXPECT_EQ(code_of([&] { segment_onh(img, RoiBox{50, 50, 60, 60, Structure::macula, 0.5}, backend); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([&] { segment_onh(img, RoiBox{180, 50, 60, 60, Structure::onh, 0.5}, backend); }),
              ErrorCode::bounds);
}

TEST(SegmentMacula, CentroidNearFovea) {
    const ClassicalBackend backend(Structure::macula);
    for (std::uint64_t seed : {5u, 6u, 7u}) {
        const SynthScene s = gen_scene(clean(), seed);
        const RenderedScene r = render(s);
        const FundusImage img = r.image.with_laterality(s.laterality);
        const BinaryMask m = segment_macula(img, locate_macula(img, locate_onh(img)), backend);
        double sx = 0, sy = 0;
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x)
                if (m.at(x, y)) sx += x + 0.5, sy += y + 0.5;
        const double n = static_cast<double>(m.count());
        EXPECT_LE(std::hypot(sx / n - s.fovea.x, sy / n - s.fovea.y), 0.25 * s.disc_diameter()) << seed;
    }
}

TEST(SegmentMacula, UniformRoiIsEmpty) {
    const ClassicalBackend backend(Structure::macula);
    EXPECT_EQ(code_of([&] {
                  segment_macula(solid_image(200, 200, {150, 80, 40}), RoiBox{50, 50, 60, 60, Structure::macula, 0.5},
                                 backend);
              }),
              ErrorCode::segmentation_empty);
}

TEST(SegmentVessels, BlankImageIsEmpty) {
    const VesselMask v = segment_vessels(solid_image(128, 128, {150, 80, 40}), ClassicalBackend(Structure::vessels));
    EXPECT_TRUE(v.vessel.empty_foreground());
    for (AvLabel l : v.av) EXPECT_EQ(l, AvLabel::none);
}

TEST(SegmentVessels, NoiseFreeComponentLabels) {
    const RenderedScene r = render(gen_scene(clean(), 9));
    const VesselMask v = segment_vessels(r.image, ClassicalBackend(Structure::vessels));
    EXPECT_GE(recall(v.vessel, r.vessel_truth.vessel), 0.6);
    EXPECT_GE(precision(v.vessel, r.vessel_truth.vessel), 0.6);
    EXPECT_GE(av_component_accuracy(v, r.vessel_truth).accuracy(), 0.9);
}

TEST(LabelArteriesVeins, BrighterComponentIsArtery) {
    GrayImage g(20, 20, 0);
    BinaryMask bits(20, 20);
    for (int x = 2; x < 18; ++x) {
        bits.set(x, 3, true);
        g.at(x, 3) = 200;
        bits.set(x, 10, true);
        g.at(x, 10) = 100;
        bits.set(x, 16, true);
        g.at(x, 16) = 50;
    }
    const VesselMask v = label_arteries_veins(g, bits);
    EXPECT_EQ(v.label_at(5, 3), AvLabel::artery);
    EXPECT_EQ(v.label_at(5, 10), AvLabel::vein);
    EXPECT_EQ(v.label_at(5, 16), AvLabel::vein);
    EXPECT_EQ(v.label_at(5, 5), AvLabel::none);
}

TEST(DilateRoi, GrowsAndClips) {
    const RoiBox r = dilate_roi(RoiBox{10, 10, 20, 20, Structure::onh, 1}, 0.1, 100, 100);
    EXPECT_EQ(r, (RoiBox{9, 9, 22, 22, Structure::onh, 1}));
    const RoiBox c = dilate_roi(RoiBox{0, 0, 100, 100, Structure::onh, 1}, 0.5, 100, 100);
    EXPECT_EQ(c, (RoiBox{0, 0, 100, 100, Structure::onh, 1}));
}

TEST(Registry, RegisterListAndIdempotence) {
    BackendRegistry reg;
    EXPECT_EQ(reg.list_backends(Structure::onh).size(), 1u);
    const BackendDescriptor unet{"unet", "2.1.0", Structure::onh, BackendKind::remote, "http://127.0.0.1:9/x"};
    reg.register_backend(unet);
    reg.register_backend(unet);
    const auto onh = reg.list_backends(Structure::onh);
    ASSERT_EQ(onh.size(), 2u);
    EXPECT_EQ(std::count(onh.begin(), onh.end(), unet), 1);
    EXPECT_EQ(reg.list_backends(Structure::macula).size(), 1u);
    EXPECT_EQ(reg.find("unet", "2.1.0", Structure::onh), unet);
    EXPECT_FALSE(reg.find("unet", "2.1.0", Structure::vessels));
}

TEST(Registry, ConflictAndValidation) {
    BackendRegistry reg;
    BackendDescriptor d{"unet", "1.0.0", Structure::onh, BackendKind::remote, "http://a:1"};
    reg.register_backend(d);
    d.endpoint = "http://b:2";
    EXPECT_EQ(code_of([&] { reg.register_backend(d); }), ErrorCode::conflict);
    EXPECT_EQ(code_of([&] { reg.register_backend({"unet", "1.0", Structure::onh, BackendKind::remote, "http://a"}); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([&] { reg.register_backend({"x", "1.0.0", Structure::onh, BackendKind::remote, "ftp://a"}); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(parse_backend_label("classical@1.0.0"), (std::pair<std::string, std::string>{"classical", "1.0.0"}));
    EXPECT_THROW(parse_backend_label("classical"), Error);
}

TEST(Registry, SemverOrdering) {
    BackendRegistry reg;
    for (const char* v : {"1.10.0", "1.2.0", "1.2.0-rc.1"})
        reg.register_backend({"m", v, Structure::vessels, BackendKind::remote, "http://h"});
    std::vector<std::string> versions;
    for (const auto& d : reg.list_backends(Structure::vessels))
        if (d.name == "m") versions.push_back(d.version);
    EXPECT_EQ(versions, (std::vector<std::string>{"1.2.0-rc.1", "1.2.0", "1.10.0"}));
}

TEST(Registry, TruthBackendSubstitutes) {
    const RenderedScene r = render(gen_scene(clean(), 12));
    BackendRegistry reg;
    const BackendDescriptor oracle{"oracle", "0.1.0", Structure::onh, BackendKind::builtin, ""};
    reg.register_backend(oracle);
    const BinaryMask truth = r.onh_mask;
    reg.add_builtin_factory("oracle", [truth](const BackendDescriptor& d, const SegmenterConfig&) {
        return std::make_unique<TruthBackend>(d, truth);
    });
    const auto backend = reg.instantiate(oracle);
    EXPECT_EQ(backend->descriptor().label(), "oracle@0.1.0");
    const BinaryMask m = segment_onh(r.image, locate_onh(r.image), *backend);
    EXPECT_GE(iou(m, r.onh_mask), 0.99);
    EXPECT_EQ(code_of([&] { reg.instantiate({"nope", "1.0.0", Structure::onh, BackendKind::builtin, ""}); }),
              ErrorCode::not_found);
}

TEST(Registry, BackendMaskConfinedToDilatedRoi) {
    BinaryMask everywhere(100, 100);
    for (auto& b : everywhere.bits()) b = 1;
    const TruthBackend backend({"all", "1.0.0", Structure::onh, BackendKind::builtin, ""}, everywhere);
    const RoiBox roi{40, 40, 20, 20, Structure::onh, 1};
    const BinaryMask m = segment_onh(solid_image(100, 100, {}), roi, backend);
    EXPECT_EQ(m.count(), 22u * 22u);
    const TruthBackend wrong({"bad", "1.0.0", Structure::onh, BackendKind::builtin, ""}, BinaryMask(50, 50));
    EXPECT_EQ(code_of([&] { segment_onh(solid_image(100, 100, {}), roi, wrong); }), ErrorCode::dimension_mismatch);
}

TEST(RemoteBackend, RoundTripOverHttp) {
    const RenderedScene r = render(gen_scene(clean(), 13));
    services::Router router;
    std::string seen_structure;
    router.add("POST", "/model/segment", [&](const services::Request& req) {
        seen_structure = req.header("x-structure");
        const FundusImage img = decode_image(Bytes(req.body.begin(), req.body.end()));
        services::Response res;
        res.content_type = "image/png";
        const Bytes png = encode_mask_png(img.width() == r.image.width() ? r.onh_mask : BinaryMask(1, 1));
        res.body.assign(png.begin(), png.end());
        return res;
    });
    router.add("POST", "/broken/segment", [](const services::Request&) {
        return services::error_response(500, "internal", "model crashed");
    });
    services::HttpServer server(router);
    const int port = server.start("127.0.0.1", 0);
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    const RemoteBackend remote({"unet", "1.0.0", Structure::onh, BackendKind::remote, base + "/model/"});
    const BinaryMask m = segment_onh(r.image, locate_onh(r.image), remote);
    EXPECT_EQ(seen_structure, "onh");
    EXPECT_GE(iou(m, r.onh_mask), 0.99);

    const RemoteBackend broken({"unet", "1.0.1", Structure::onh, BackendKind::remote, base + "/broken"});
    EXPECT_EQ(code_of([&] { segment_onh(r.image, locate_onh(r.image), broken); }), ErrorCode::backend_failure);
    server.stop();

    const RemoteBackend gone({"unet", "1.0.2", Structure::onh, BackendKind::remote, base}, {}, 1.0);
    EXPECT_EQ(code_of([&] { gone.segment_region(r.image, {}); }), ErrorCode::backend_failure);
}
