#include "eyas/reporter.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"
#include "eyas/json_io.hpp"

namespace eyas {

std::string_view to_string(ReportStatus status) noexcept {
    return status == ReportStatus::approved ? "approved" : "draft";
}

namespace {

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fill(std::string text, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) {
        const std::string token = "{" + key + "}";
        for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + value.size())) {
            text.replace(pos, token.size(), value);
        }
    }
    return text;
}

std::string word(const ReportTemplates& t, std::string_view key) {
    auto it = t.words.find(std::string(key));
    return it == t.words.end() ? std::string(key) : it->second;
}

}  // namespace

std::string render_text(const std::optional<OnhFindings>& onh, const std::optional<MaculaFindings>& macula,
                        const std::optional<VesselFindings>& vessels, const ReportTemplates& t) {
    auto missing = [&](std::string_view structure) {
        return fill(t.not_assessed, {{"structure", word(t, structure)}});
    };
    std::string out;
    out += onh ? fill(t.onh, {{"shape", word(t, to_string(onh->shape))}, {"eccentricity", fixed2(onh->eccentricity)}})
               : missing("onh");
    out += ' ';
    out += macula ? fill(t.macula, {{"reflex", word(t, to_string(macula->reflex))}}) : missing("macula");
    out += ' ';
    if (!vessels) {
        out += missing("vessels");
    } else if (vessels->caliber == CaliberLabel::indeterminate) {
        out += fill(t.vessels_unnormalized, {{"avr", fixed2(vessels->avr)}});
    } else {
        out += fill(t.vessels, {{"caliber", word(t, to_string(vessels->caliber))}, {"avr", fixed2(vessels->avr)}});
    }
    return out;
}

ReportDraft synthesize(const std::optional<OnhFindings>& onh, const std::optional<MaculaFindings>& macula,
                       const std::optional<VesselFindings>& vessels, const std::string& image_id,
                       const std::string& timestamp, const ReportTemplates& templates) {
    if (!onh && !macula && !vessels) fail(ErrorCode::empty_report, "no findings to report");
    ReportDraft r;
    r.image_id = image_id;
    r.onh = onh;
    r.macula = macula;
    r.vessels = vessels;
    r.text = render_text(onh, macula, vessels, templates);
    r.report_id = "rpt_" + sha256_hex(image_id + "\n" + r.text).substr(0, 16);
    if (onh) r.provenance["onh"] = {onh->source_backend, timestamp};
    if (macula) r.provenance["macula"] = {macula->source_backend, timestamp};
    if (vessels) r.provenance["vessels"] = {vessels->source_backend, timestamp};
    return r;
}

ReportDraft approve(const ReportDraft& report, const std::optional<std::string>& edited_text,
                    const std::string& timestamp) {
    if (report.status != ReportStatus::draft) fail(ErrorCode::state, "report is already approved");
    ReportDraft r = report;
    r.status = ReportStatus::approved;
    r.edited_text = edited_text;
    r.approved_at = timestamp;
    return r;
}

std::string render_export(const ReportDraft& report, ExportFormat format) {
    if (format == ExportFormat::json) return Json(report).dump(2) + "\n";
    const bool edited = report.status == ReportStatus::approved && report.edited_text;
    return (edited ? *report.edited_text : report.text) + "\n";
}

std::string format_timestamp(std::int64_t unix_seconds) {
    const std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string now_timestamp() {
    const auto now = std::chrono::system_clock::now();
    return format_timestamp(std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

std::string reproducible_timestamp() {
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0') return format_timestamp(v);
    }
    return format_timestamp(0);
}

}  // namespace eyas
