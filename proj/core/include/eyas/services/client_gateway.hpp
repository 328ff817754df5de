#pragma once

#include <memory>
#include <mutex>
#include <random>

#include "eyas/config.hpp"
#include "eyas/services/http.hpp"
#include "eyas/services/job_store.hpp"
#include "eyas/services/orchestrator.hpp"

namespace eyas::services {

/// Public API. Routes:
///   POST /api/v1/analyses                     image bytes (PNG or PPM); ?laterality=
///   GET  /api/v1/analyses
///   GET  /api/v1/analyses/{id}
///   GET  /api/v1/analyses/{id}/structures/{structure}
///   GET  /api/v1/analyses/{id}/structures/{structure}/mask
///   GET  /api/v1/analyses/{id}/structures/vessels/av_map
///   GET  /api/v1/analyses/{id}/report?format=json|txt
///   PUT  /api/v1/analyses/{id}/report         {"approve": true, "edited_text": ...}
///   GET  /api/v1/backends, GET /api/v1/health
class ClientGateway {
public:
    /// Jobs live under config.service.data_dir; unfinished ones are requeued.
    ClientGateway(const Config& config, Transport& transport);

    const Router& router() const { return router_; }
    JobStore& store() { return store_; }
    Orchestrator& orchestrator() { return orchestrator_; }

private:
    std::string new_job_id();

    Config config_;
    Transport& transport_;
    JobStore store_;
    Orchestrator orchestrator_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_;
    Router router_;
};

}  // namespace eyas::services
