#pragma once

#include <memory>

#include "eyas/config.hpp"
#include "eyas/segmenter.hpp"
#include "eyas/services/http.hpp"

namespace eyas::services {

/// Header the internal gateway uses to tell a structure service which backend
/// to run (a BackendDescriptor as JSON).
inline constexpr const char* kBackendHeader = "X-Backend-Descriptor";

/// The stateless analysis services. Each exposes GET /health plus:
///   onh, macula:  POST /v1/analyze     {"image": b64 PNG, "laterality"}
///   vessels:      POST /v1/segment     {"image", "laterality"}
///                 POST /v1/caliber     {"mask", "av_map", "disc", "source_backend"}
///   report:       POST /v1/synthesize  {"image_id", "timestamp", "onh", "macula", "vessels"}
///                 POST /v1/approve     {"report", "edited_text", "timestamp"}
Router make_onh_service(const Config& config, std::shared_ptr<const BackendRegistry> registry);
Router make_macula_service(const Config& config, std::shared_ptr<const BackendRegistry> registry);
Router make_vessels_service(const Config& config, std::shared_ptr<const BackendRegistry> registry);
Router make_report_service(const Config& config);

Json image_payload(const FundusImage& image);
FundusImage image_from_payload(const Json& payload);

}  // namespace eyas::services
