#pragma once

#include <json.hpp>

#include "eyas/classifier.hpp"
#include "eyas/config.hpp"
#include "eyas/image.hpp"
#include "eyas/metrics.hpp"
#include "eyas/reporter.hpp"
#include "eyas/segmenter.hpp"
#include "eyas/synthgen.hpp"

// nlohmann::json converters for the domain types; field names follow the
// types one to one.
namespace eyas {

using Json = nlohmann::json;

void to_json(Json& j, const RoiBox& v);
void from_json(const Json& j, RoiBox& v);
void to_json(Json& j, const EllipseFit& v);
void from_json(const Json& j, EllipseFit& v);

void to_json(Json& j, const OnhFindings& v);
void from_json(const Json& j, OnhFindings& v);
void to_json(Json& j, const MaculaFindings& v);
void from_json(const Json& j, MaculaFindings& v);
void to_json(Json& j, const VesselFindings& v);
void from_json(const Json& j, VesselFindings& v);

void to_json(Json& j, const ReportDraft& v);
void from_json(const Json& j, ReportDraft& v);

void to_json(Json& j, const BackendDescriptor& v);
void from_json(const Json& j, BackendDescriptor& v);

void to_json(Json& j, const ManifestEntry& v);
void from_json(const Json& j, ManifestEntry& v);
void to_json(Json& j, const CorpusManifest& v);
void from_json(const Json& j, CorpusManifest& v);

void to_json(Json& j, const FormatReport& v);
void to_json(Json& j, const EvaluationReport& v);
void to_json(Json& j, const ConfusionMatrix& v);

void to_json(Json& j, const Config& v);
/// Overlays the keys present in `j` onto `v`.
void merge_config(const Json& j, Config& v);

/// Parses text, mapping syntax errors to ErrorCode::format.
Json parse_json(std::string_view text);

}  // namespace eyas
