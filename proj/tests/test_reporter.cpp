#include <gtest/gtest.h>

#include <cstdlib>

#include "eyas/error.hpp"
#include "eyas/json_io.hpp"
#include "eyas/reporter.hpp"

using namespace eyas;

namespace {

OnhFindings round_disc() {
    OnhFindings f;
    f.shape = ShapeLabel::round;
    f.eccentricity = 0.21;
    f.disc_diameter_px = 76;
    f.source_backend = "classical@1.0.0";
    f.confidence = 1.0;
    return f;
}

MaculaFindings reflex_present() {
    MaculaFindings f;
    f.reflex = ReflexLabel::present;
    f.reflex_ratio = 1.4;
    f.source_backend = "classical@1.0.0";
    return f;
}

VesselFindings normal_vessels() {
    VesselFindings f;
    f.avr = 0.67;
    f.normalized_artery_caliber = 0.065;
    f.caliber = CaliberLabel::normal;
    f.artery_width_px = 5;
    f.vein_width_px = 7.5;
    f.source_backend = "classical@1.0.0";
    return f;
}

}  // namespace

TEST(Synthesize, ReferenceSentence) {
    const ReportDraft d = synthesize(round_disc(), reflex_present(), normal_vessels());
    EXPECT_EQ(d.text,
              "Optic disc: round shape (eccentricity 0.21). Macula: foveal reflex present. Vessels: artery caliber "
              "normal; artery-to-vein ratio 0.67.");
    EXPECT_EQ(d.status, ReportStatus::draft);
    EXPECT_EQ(d.provenance.size(), 3u);
    EXPECT_EQ(d.provenance.at("onh").backend, "classical@1.0.0");
}

TEST(Synthesize, AbsentSectionIsNotAssessed) {
    const ReportDraft d = synthesize(round_disc(), reflex_present(), std::nullopt);
    EXPECT_TRUE(d.text.ends_with(" Vessels: not assessed.")) << d.text;
    EXPECT_EQ(d.provenance.count("vessels"), 0u);
}

TEST(Synthesize, IndeterminateCaliber) {
    VesselFindings v = normal_vessels();
    v.caliber = CaliberLabel::indeterminate;
    v.normalized_artery_caliber.reset();
    const ReportDraft d = synthesize(std::nullopt, std::nullopt, v);
    EXPECT_EQ(d.text,
              "Optic disc: not assessed. Macula: not assessed. Vessels: caliber not normalized (optic disc "
              "unavailable); artery-to-vein ratio 0.67.");
}

TEST(Synthesize, Deterministic) {
    const ReportDraft a = synthesize(round_disc(), reflex_present(), normal_vessels(), "img", "2024-01-01T00:00:00Z");
    const ReportDraft b = synthesize(round_disc(), reflex_present(), normal_vessels(), "img", "2024-01-01T00:00:00Z");
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.report_id.rfind("rpt_", 0), 0u);
}

TEST(Synthesize, EmptyReport) {
    try {
        synthesize(std::nullopt, std::nullopt, std::nullopt);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_report);
    }
}

TEST(Synthesize, CustomTemplates) {
    ReportTemplates t;
    t.onh = "Papille {shape} ({eccentricity}).";
    t.words["round"] = "rund";
    const ReportDraft d = synthesize(round_disc(), std::nullopt, std::nullopt, "", "1970-01-01T00:00:00Z", t);
    EXPECT_TRUE(d.text.starts_with("Papille rund (0.21).")) << d.text;
}

TEST(Approve, FreezesTextAndKeepsOriginal) {
    const ReportDraft d = synthesize(round_disc(), reflex_present(), normal_vessels());
    const ReportDraft a = approve(d, std::nullopt, "2024-02-02T00:00:00Z");
    EXPECT_EQ(a.status, ReportStatus::approved);
    EXPECT_EQ(a.text, d.text);
    EXPECT_EQ(a.approved_at, "2024-02-02T00:00:00Z");

    const ReportDraft e = approve(d, std::string("Clinician wording."));
    EXPECT_EQ(e.edited_text, "Clinician wording.");
    EXPECT_EQ(e.text, d.text);
}

TEST(Approve, DoubleApprovalIsStateError) {
    const ReportDraft a = approve(synthesize(round_disc(), std::nullopt, std::nullopt));
    try {
        approve(a);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::state);
    }
}

TEST(Export, TxtUsesEditedTextOnceApproved) {
    const ReportDraft d = synthesize(round_disc(), reflex_present(), normal_vessels());
    EXPECT_EQ(render_export(d, ExportFormat::txt), d.text + "\n");
    const ReportDraft a = approve(d, std::string("Edited."));
    EXPECT_EQ(render_export(a, ExportFormat::txt), "Edited.\n");
}

TEST(Export, JsonRoundTrip) {
    const ReportDraft d = approve(synthesize(round_disc(), reflex_present(), normal_vessels(), "img"),
                                  std::string("x"), "2024-01-01T00:00:00Z");
    const std::string json = render_export(d, ExportFormat::json);
    EXPECT_EQ(parse_json(json).get<ReportDraft>(), d);
}

TEST(Timestamps, FormatAndReproducible) {
    EXPECT_EQ(format_timestamp(0), "1970-01-01T00:00:00Z");
    EXPECT_EQ(format_timestamp(1700000000), "2023-11-14T22:13:20Z");
    ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
    EXPECT_EQ(reproducible_timestamp(), "2023-11-14T22:13:20Z");
    ::unsetenv("SOURCE_DATE_EPOCH");
    EXPECT_EQ(reproducible_timestamp(), "1970-01-01T00:00:00Z");
}
