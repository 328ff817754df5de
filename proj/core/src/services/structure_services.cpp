#include "eyas/services/structure_services.hpp"

#include "eyas/codec.hpp"
#include "eyas/pipeline.hpp"

namespace eyas::services {

Json image_payload(const FundusImage& image) {
    return Json{{"image", base64_encode(encode_png(image))}, {"laterality", to_string(image.laterality())}};
}

FundusImage image_from_payload(const Json& payload) {
    const auto laterality = parse_laterality(payload.value("laterality", std::string("unknown")));
    return decode_image(base64_decode(payload.at("image").get<std::string>()), laterality);
}

namespace {

std::string b64(const Bytes& bytes) { return base64_encode(bytes); }

Response health(const std::string& name) { return json_response(200, Json{{"status", "ok"}, {"service", name}}); }

bool faulted(const Config& config, const std::string& name) {
    auto it = config.service.faults.find(name);
    return it != config.service.faults.end() && it->second;
}

Response injected_fault(const std::string& name) {
    return error_response(503, "backend_failure", name + " service is unavailable (fault injected)");
}

std::unique_ptr<SegmentationBackend> backend_for(const Request& req, const BackendRegistry& registry,
                                                 const Config& config, Structure structure) {
    const std::string header = req.header(kBackendHeader);
    BackendDescriptor desc = classical_descriptor(structure);
    if (!header.empty()) desc = parse_json(header).get<BackendDescriptor>();
    if (desc.structure != structure) fail(ErrorCode::invalid_argument, "backend is for another structure");
    return registry.instantiate(desc, config.segmenter);
}

}  // namespace

Router make_onh_service(const Config& config, std::shared_ptr<const BackendRegistry> registry) {
    Router r;
    r.add("GET", "/health", [](const Request&) { return health("onh"); });
    r.add("POST", "/v1/analyze", [config, registry](const Request& req) {
        if (faulted(config, "onh")) return injected_fault("onh");
        const FundusImage image = image_from_payload(parse_json(req.body));
        const auto backend = backend_for(req, *registry, config, Structure::onh);
        const OnhAnalysis a = analyze_onh(image, *backend, config);
        return json_response(200, Json{{"roi", a.roi}, {"mask", b64(encode_mask_png(a.mask))}, {"findings", a.findings}});
    });
    return r;
}

Router make_macula_service(const Config& config, std::shared_ptr<const BackendRegistry> registry) {
    Router r;
    r.add("GET", "/health", [](const Request&) { return health("macula"); });
    r.add("POST", "/v1/analyze", [config, registry](const Request& req) {
        if (faulted(config, "macula")) return injected_fault("macula");
        const FundusImage image = image_from_payload(parse_json(req.body));
        const auto backend = backend_for(req, *registry, config, Structure::macula);
        const MaculaAnalysis a = analyze_macula(image, *backend, config);
        return json_response(200, Json{{"roi", a.roi}, {"mask", b64(encode_mask_png(a.mask))}, {"findings", a.findings}});
    });
    return r;
}

Router make_vessels_service(const Config& config, std::shared_ptr<const BackendRegistry> registry) {
    Router r;
    r.add("GET", "/health", [](const Request&) { return health("vessels"); });
    r.add("POST", "/v1/segment", [config, registry](const Request& req) {
        if (faulted(config, "vessels")) return injected_fault("vessels");
        const FundusImage image = image_from_payload(parse_json(req.body));
        const auto backend = backend_for(req, *registry, config, Structure::vessels);
        const VesselMask v = analyze_vessels(image, *backend);
        return json_response(200, Json{{"mask", b64(encode_mask_png(v.vessel))},
                                       {"av_map", b64(encode_av_png(v))},
                                       {"source_backend", backend->descriptor().label()}});
    });
    r.add("POST", "/v1/caliber", [config](const Request& req) {
        if (faulted(config, "vessels")) return injected_fault("vessels");
        const Json body = parse_json(req.body);
        const BinaryMask bits = decode_mask_png(base64_decode(body.at("mask").get<std::string>()));
        const VesselMask labels = decode_av_png(base64_decode(body.at("av_map").get<std::string>()));
        if (!(labels.vessel == bits)) fail(ErrorCode::invalid_argument, "mask and av_map disagree");
        std::optional<OnhFindings> disc;
        if (body.contains("disc") && !body.at("disc").is_null()) disc = body.at("disc").get<OnhFindings>();
        const VesselFindings f =
            analyze_caliber(labels, disc, body.value("source_backend", std::string()), config);
        return json_response(200, Json(f));
    });
    return r;
}

Router make_report_service(const Config& config) {
    Router r;
    r.add("GET", "/health", [](const Request&) { return health("report"); });
    r.add("POST", "/v1/synthesize", [config](const Request& req) {
        if (faulted(config, "report")) return injected_fault("report");
        const Json body = parse_json(req.body);
        auto section = [&]<class T>(const char* key, std::optional<T>& out) {
            if (body.contains(key) && !body.at(key).is_null()) out = body.at(key).get<T>();
        };
        std::optional<OnhFindings> onh;
        std::optional<MaculaFindings> macula;
        std::optional<VesselFindings> vessels;
        section("onh", onh);
        section("macula", macula);
        section("vessels", vessels);
        const ReportDraft d = synthesize(onh, macula, vessels, body.value("image_id", std::string()),
                                         body.value("timestamp", now_timestamp()), config.templates);
        return json_response(200, Json(d));
    });
    r.add("POST", "/v1/approve", [config](const Request& req) {
        if (faulted(config, "report")) return injected_fault("report");
        const Json body = parse_json(req.body);
        std::optional<std::string> edited;
        if (body.contains("edited_text") && !body.at("edited_text").is_null()) {
            edited = body.at("edited_text").get<std::string>();
        }
        const ReportDraft d = approve(body.at("report").get<ReportDraft>(), edited,
                                      body.value("timestamp", now_timestamp()));
        return json_response(200, Json(d));
    });
    return r;
}

}  // namespace eyas::services
