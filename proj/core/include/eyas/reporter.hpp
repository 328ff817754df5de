#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "eyas/config.hpp"
#include "eyas/findings.hpp"

namespace eyas {

enum class ReportStatus { draft, approved };

struct SectionProvenance {
    std::string backend;
    std::string timestamp;  // ISO-8601 UTC

    friend bool operator==(const SectionProvenance&, const SectionProvenance&) = default;
};

struct ReportDraft {
    std::string report_id;
    std::string image_id;
    std::optional<OnhFindings> onh;
    std::optional<MaculaFindings> macula;
    std::optional<VesselFindings> vessels;
    std::string text;
    ReportStatus status = ReportStatus::draft;
    std::map<std::string, SectionProvenance> provenance;
    std::optional<std::string> edited_text;
    std::optional<std::string> approved_at;

    friend bool operator==(const ReportDraft&, const ReportDraft&) = default;
};

std::string_view to_string(ReportStatus status) noexcept;

/// Fixed-order sentence per structure. Pure: equal findings give equal text.
std::string render_text(const std::optional<OnhFindings>& onh, const std::optional<MaculaFindings>& macula,
                        const std::optional<VesselFindings>& vessels, const ReportTemplates& templates = {});

/// Builds a draft. report_id is derived from the image id and the text, so
/// it is as deterministic as the findings.
ReportDraft synthesize(const std::optional<OnhFindings>& onh, const std::optional<MaculaFindings>& macula,
                       const std::optional<VesselFindings>& vessels, const std::string& image_id = "",
                       const std::string& timestamp = "1970-01-01T00:00:00Z",
                       const ReportTemplates& templates = {});

/// Terminal transition; the machine text is kept untouched.
ReportDraft approve(const ReportDraft& report, const std::optional<std::string>& edited_text = std::nullopt,
                    const std::string& timestamp = "1970-01-01T00:00:00Z");

enum class ExportFormat { json, txt };
std::string render_export(const ReportDraft& report, ExportFormat format);

std::string format_timestamp(std::int64_t unix_seconds);
/// Current time as ISO-8601 UTC.
std::string now_timestamp();
/// SOURCE_DATE_EPOCH if set, else the Unix epoch. Used where outputs must be
/// byte-for-byte repeatable.
std::string reproducible_timestamp();

}  // namespace eyas
