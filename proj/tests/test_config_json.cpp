#include <gtest/gtest.h>

#include <cstdlib>

#include "eyas/codec.hpp"
#include "eyas/config.hpp"
#include "eyas/error.hpp"
#include "eyas/json_io.hpp"
#include "support.hpp"

using namespace eyas;
using eyas::testing::TempDir;

TEST(Config, PartialFileKeepsDefaults) {
    TempDir dir;
    const auto path = dir.path() / "c.json";
    write_file(path, std::string(R"({"classifier": {"reflex_threshold": 1.3}, "service": {"ports": {"onh": 9001}}})"));
    const Config c = load_config(path);
    EXPECT_DOUBLE_EQ(c.classifier.reflex_threshold, 1.3);
    EXPECT_EQ(c.service.ports.onh, 9001);
    EXPECT_EQ(c.service.ports.client_gateway, 8080);
    EXPECT_DOUBLE_EQ(c.classifier.round_max_eccentricity, 0.45);
    EXPECT_DOUBLE_EQ(c.service.onh_wait_seconds, 30.0);
}

TEST(Config, UnknownKeyIsFormatError) {
    TempDir dir;
    const auto path = dir.path() / "c.json";
    write_file(path, std::string(R"({"classifier": {"reflex_treshold": 1.3}})"));
    try {
        load_config(path);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::format);
    }
}

TEST(Config, ResolutionOrder) {
    TempDir dir;
    const auto env_path = dir.path() / "env.json";
    const auto flag_path = dir.path() / "flag.json";
    write_file(env_path, std::string(R"({"service": {"job_workers": 7}})"));
    write_file(flag_path, std::string(R"({"service": {"job_workers": 3}})"));
    ::setenv("EYAS_CONFIG", env_path.c_str(), 1);
    EXPECT_EQ(resolve_config(std::nullopt).service.job_workers, 7);
    EXPECT_EQ(resolve_config(flag_path).service.job_workers, 3);
    ::unsetenv("EYAS_CONFIG");
    EXPECT_EQ(resolve_config(std::nullopt).service.job_workers, 4);
}

TEST(Config, DumpLoadsBackUnchanged) {
    Config c;
    c.localizer.weights.edges = 0.25;
    c.templates.words["round"] = "circular";
    c.service.active_backends["onh"] = "classical@1.0.0";
    TempDir dir;
    write_file(dir.path() / "c.json", Json(c).dump(2));
    const Config back = load_config(dir.path() / "c.json");
    EXPECT_EQ(Json(back), Json(c));
}

TEST(Json, RoiBoxSchema) {
    const RoiBox r{1, 2, 30, 40, Structure::macula, 0.5};
    const Json j = r;
    EXPECT_EQ(j, parse_json(R"({"x":1,"y":2,"w":30,"h":40,"structure":"macula","confidence":0.5})"));
    EXPECT_EQ(j.get<RoiBox>(), r);
    EXPECT_THROW(parse_json(R"({"x":1,"y":2,"w":0,"h":40,"structure":"onh","confidence":0.5})").get<RoiBox>(),
                 Error);
}

TEST(Json, FindingsRoundTrip) {
    VesselFindings v;
    v.avr = 0.7;
    v.caliber = CaliberLabel::indeterminate;
    v.source_backend = "classical@1.0.0";
    const Json j = v;
    EXPECT_TRUE(j.at("normalized_artery_caliber").is_null());
    EXPECT_EQ(j.get<VesselFindings>(), v);
}

TEST(Json, SyntaxErrorIsFormat) {
    try {
        parse_json("{not json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::format);
    }
}
