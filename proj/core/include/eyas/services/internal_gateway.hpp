#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "eyas/config.hpp"
#include "eyas/segmenter.hpp"
#include "eyas/services/http.hpp"

namespace eyas::services {

/// Routes analysis calls to the structure services and owns the backend
/// registry. Routes:
///   POST /internal/v1/analyze/onh, /internal/v1/analyze/macula
///   POST /internal/v1/analyze/vessels/segment, /internal/v1/analyze/vessels/caliber
///   POST /internal/v1/report/synthesize, /internal/v1/report/approve
///   GET|POST /internal/v1/backends
///   PUT /internal/v1/backends/active/{structure}   {"name", "version"}
///   GET /internal/v1/health
class InternalGateway {
public:
    InternalGateway(const Config& config, std::shared_ptr<BackendRegistry> registry, Transport& transport);

    const Router& router() const { return router_; }
    BackendDescriptor active(Structure structure) const;
    void set_active(Structure structure, const std::string& name, const std::string& version);

private:
    Response forward(const std::string& service, const std::string& path, const Request& req,
                     std::optional<Structure> structure) const;
    Response health() const;

    Config config_;
    std::shared_ptr<BackendRegistry> registry_;
    Transport& transport_;
    mutable std::mutex mutex_;
    std::map<Structure, BackendDescriptor> active_;
    Router router_;
};

}  // namespace eyas::services
