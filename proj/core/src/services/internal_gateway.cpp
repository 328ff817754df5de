#include "eyas/services/internal_gateway.hpp"

#include "eyas/services/structure_services.hpp"

namespace eyas::services {

InternalGateway::InternalGateway(const Config& config, std::shared_ptr<BackendRegistry> registry,
                                 Transport& transport)
    : config_(config), registry_(std::move(registry)), transport_(transport) {
    for (Structure s : {Structure::onh, Structure::macula, Structure::vessels}) {
        active_[s] = classical_descriptor(s);
        auto it = config_.service.active_backends.find(std::string(to_string(s)));
        if (it != config_.service.active_backends.end()) {
            const auto [name, version] = parse_backend_label(it->second);
            set_active(s, name, version);
        }
    }

    auto& r = router_;
    r.add("POST", "/internal/v1/analyze/onh",
          [this](const Request& req) { return forward("onh", "/v1/analyze", req, Structure::onh); });
    r.add("POST", "/internal/v1/analyze/macula",
          [this](const Request& req) { return forward("macula", "/v1/analyze", req, Structure::macula); });
    r.add("POST", "/internal/v1/analyze/vessels/segment",
          [this](const Request& req) { return forward("vessels", "/v1/segment", req, Structure::vessels); });
    r.add("POST", "/internal/v1/analyze/vessels/caliber",
          [this](const Request& req) { return forward("vessels", "/v1/caliber", req, std::nullopt); });
    r.add("POST", "/internal/v1/report/synthesize",
          [this](const Request& req) { return forward("report", "/v1/synthesize", req, std::nullopt); });
    r.add("POST", "/internal/v1/report/approve",
          [this](const Request& req) { return forward("report", "/v1/approve", req, std::nullopt); });

    r.add("GET", "/internal/v1/backends", [this](const Request& req) {
        std::vector<BackendDescriptor> list;
        auto it = req.query.find("structure");
        if (it != req.query.end()) {
            list = registry_->list_backends(parse_structure(it->second));
        } else {
            list = registry_->list_all();
        }
        Json active = Json::object();
        for (Structure s : {Structure::onh, Structure::macula, Structure::vessels}) {
            active[std::string(to_string(s))] = this->active(s).label();
        }
        return json_response(200, Json{{"backends", list}, {"active", active}});
    });
    r.add("POST", "/internal/v1/backends", [this](const Request& req) {
        const auto desc = parse_json(req.body).get<BackendDescriptor>();
        registry_->register_backend(desc);
        return json_response(201, Json(desc));
    });
    r.add("PUT", "/internal/v1/backends/active/{structure}", [this](const Request& req) {
        const Structure s = parse_structure(req.param("structure"));
        const Json body = parse_json(req.body);
        set_active(s, body.at("name").get<std::string>(), body.at("version").get<std::string>());
        return json_response(200, Json(active(s)));
    });
    r.add("GET", "/internal/v1/health", [this](const Request&) { return health(); });
    r.add("GET", "/health", [](const Request&) { return json_response(200, Json{{"status", "ok"}}); });
}

BackendDescriptor InternalGateway::active(Structure structure) const {
    std::lock_guard lock(mutex_);
    return active_.at(structure);
}

void InternalGateway::set_active(Structure structure, const std::string& name, const std::string& version) {
    const auto desc = registry_->find(name, version, structure);
    if (!desc) {
        fail(ErrorCode::not_found,
             "backend " + name + "@" + version + " is not registered for " + std::string(to_string(structure)));
    }
    std::lock_guard lock(mutex_);
    active_[structure] = *desc;
}

Response InternalGateway::forward(const std::string& service, const std::string& path, const Request& req,
                                  std::optional<Structure> structure) const {
    Request out;
    out.method = "POST";
    out.path = path;
    out.body = req.body;
    out.headers["content-type"] = "application/json";
    if (structure) out.headers["x-backend-descriptor"] = Json(active(*structure)).dump();
    return transport_.send(service, out);
}

Response InternalGateway::health() const {
    Json services = Json::object();
    Json down = Json::array();
    for (const char* name : {"onh", "macula", "vessels", "report"}) {
        Request probe;
        probe.path = "/health";
        const Response res = transport_.send(name, probe);
        const bool up = res.ok();
        services[name] = up ? "ok" : "down";
        if (!up) down.push_back(name);
    }
    return json_response(200, Json{{"status", down.empty() ? "ok" : "degraded"},
                                   {"services", services},
                                   {"down", down},
                                   {"backends", registry_->list_all()}});
}

}  // namespace eyas::services
