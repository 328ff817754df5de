#include "eyas/services/client_gateway.hpp"

#include <cstdio>

#include "eyas/codec.hpp"

namespace eyas::services {

namespace {

Response png_response(const Bytes& bytes) {
    Response r;
    r.status = 200;
    r.content_type = "image/png";
    r.body.assign(bytes.begin(), bytes.end());
    return r;
}

JobRecord require_job(const JobStore& store, const std::string& id) {
    auto job = store.get(id);
    if (!job) fail(ErrorCode::not_found, "no analysis with id " + id);
    return *job;
}

/// Pending or failed structures have no artifacts to serve.
void require_finished(const JobRecord& job, const std::string& structure) {
    const SubState s = job.structures.at(structure);
    if (s == SubState::pending) fail(ErrorCode::pending, structure + " analysis is still pending");
    if (s != SubState::ok) {
        auto it = job.structure_errors.find(structure);
        fail(ErrorCode::not_found,
             structure + " analysis " + std::string(to_string(s)) +
                 (it != job.structure_errors.end() ? ": " + it->second : std::string()));
    }
}

Json analysis_json(const JobRecord& job) {
    Json j = job_summary_json(job);
    j["report"] = job.report ? Json(*job.report) : Json(nullptr);
    return j;
}

}  // namespace

ClientGateway::ClientGateway(const Config& config, Transport& transport)
    : config_(config),
      transport_(transport),
      store_(config.service.data_dir / "jobs"),
      orchestrator_(store_, transport, config),
      rng_(std::random_device{}()) {
    auto& r = router_;
    r.add("GET", "/health", [](const Request&) { return json_response(200, Json{{"status", "ok"}}); });

    r.add("POST", "/api/v1/analyses", [this](const Request& req) {
        if (req.body.size() > config_.service.max_upload_bytes) {
            fail(ErrorCode::payload_too_large, "upload exceeds " + std::to_string(config_.service.max_upload_bytes) +
                                                   " bytes");
        }
        Laterality laterality = Laterality::unknown;
        if (auto it = req.query.find("laterality"); it != req.query.end()) laterality = parse_laterality(it->second);
        const FundusImage image = decode_image(as_bytes(req.body), laterality);
        const std::string id = new_job_id();
        const JobRecord job = store_.create(id, image);
        orchestrator_.enqueue(id);
        Response res = json_response(202, job_summary_json(job));
        res.headers["Location"] = "/api/v1/analyses/" + id;
        return res;
    });

    r.add("GET", "/api/v1/analyses", [this](const Request&) {
        Json list = Json::array();
        for (const auto& id : store_.all_ids()) {
            if (auto job = store_.get(id)) list.push_back(job_summary_json(*job));
        }
        return json_response(200, Json{{"analyses", list}});
    });

    r.add("GET", "/api/v1/analyses/{id}", [this](const Request& req) {
        return json_response(200, analysis_json(require_job(store_, req.param("id"))));
    });

    r.add("GET", "/api/v1/analyses/{id}/structures/{structure}", [this](const Request& req) {
        const std::string id = req.param("id");
        const std::string s(to_string(parse_structure(req.param("structure"))));
        const JobRecord job = require_job(store_, id);
        require_finished(job, s);
        const std::string base = "/api/v1/analyses/" + id + "/structures/" + s;
        Json j{{"job_id", id}, {"structure", s}, {"state", "ok"}, {"mask", base + "/mask"}};
        if (s == "onh") {
            j["roi"] = *job.onh_roi;
            j["findings"] = *job.onh;
        } else if (s == "macula") {
            j["roi"] = *job.macula_roi;
            j["findings"] = *job.macula;
        } else {
            j["roi"] = nullptr;
            j["findings"] = *job.vessels;
            j["av_map"] = base + "/av_map";
        }
        return json_response(200, j);
    });

    auto artifact = [this](const std::string& id, const std::string& structure, const std::string& name) {
        const JobRecord job = require_job(store_, id);
        require_finished(job, structure);
        auto bytes = store_.get_artifact(id, name);
        if (!bytes) fail(ErrorCode::not_found, name + " is missing for " + id);
        return png_response(*bytes);
    };
    r.add("GET", "/api/v1/analyses/{id}/structures/{structure}/mask", [artifact](const Request& req) {
        const std::string s(to_string(parse_structure(req.param("structure"))));
        return artifact(req.param("id"), s, s == "vessels" ? "vessel_mask.png" : s + "_mask.png");
    });
    r.add("GET", "/api/v1/analyses/{id}/structures/vessels/av_map",
          [artifact](const Request& req) { return artifact(req.param("id"), "vessels", "av_map.png"); });

    r.add("GET", "/api/v1/analyses/{id}/report", [this](const Request& req) {
        const JobRecord job = require_job(store_, req.param("id"));
        if (!job.report) fail(ErrorCode::conflict, "analysis " + job.job_id + " has no report yet");
        auto it = req.query.find("format");
        const std::string format = it == req.query.end() ? "json" : it->second;
        Response res;
        if (format == "txt") {
            res.content_type = "text/plain; charset=utf-8";
            res.body = render_export(*job.report, ExportFormat::txt);
        } else if (format == "json") {
            res.body = render_export(*job.report, ExportFormat::json);
        } else {
            fail(ErrorCode::invalid_argument, "format must be json or txt");
        }
        return res;
    });

    r.add("PUT", "/api/v1/analyses/{id}/report", [this](const Request& req) {
        const std::string id = req.param("id");
        const Json body = parse_json(req.body);
        if (!body.value("approve", false)) {
            fail(ErrorCode::invalid_argument, "approve must be true; drafts are only finalized by approval");
        }
        std::optional<std::string> edited;
        if (body.contains("edited_text") && !body.at("edited_text").is_null()) {
            edited = body.at("edited_text").get<std::string>();
        }
        require_job(store_, id);
        const JobRecord job = store_.update(id, [&](JobRecord& j) {
            if (j.state != JobState::done || !j.report) {
                fail(ErrorCode::conflict, "analysis " + id + " is not done");
            }
            Json call{{"report", *j.report},
                      {"edited_text", edited ? Json(*edited) : Json(nullptr)},
                      {"timestamp", now_timestamp()}};
            const Response res = transport_.send("internal", json_request("POST", "/internal/v1/report/approve", call));
            if (!res.ok()) raise_for(res, "approve");
            j.report = res.json().get<ReportDraft>();
            j.updated = now_timestamp();
        });
        return json_response(200, Json(*job.report));
    });

    r.add("GET", "/api/v1/backends", [this](const Request& req) {
        Request out;
        out.path = "/internal/v1/backends";
        out.query = req.query;
        return transport_.send("internal", out);
    });

    r.add("GET", "/api/v1/health", [this](const Request&) {
        Request out;
        out.path = "/internal/v1/health";
        const Response res = transport_.send("internal", out);
        if (!res.ok()) {
            return json_response(200, Json{{"status", "degraded"}, {"down", Json::array({"internal"})}});
        }
        return res;
    });

    for (const auto& id : store_.unfinished()) orchestrator_.enqueue(id);
}

std::string ClientGateway::new_job_id() {
    std::lock_guard lock(rng_mutex_);
    char buf[24];
    std::snprintf(buf, sizeof buf, "job_%016llx", static_cast<unsigned long long>(rng_()));
    return buf;
}

}  // namespace eyas::services
