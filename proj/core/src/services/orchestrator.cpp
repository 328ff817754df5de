#include "eyas/services/orchestrator.hpp"

#include <chrono>
#include <future>

#include "eyas/codec.hpp"
#include "eyas/services/structure_services.hpp"

namespace eyas::services {

namespace {

Json call(Transport& transport, const std::string& path, const Json& body) {
    const Response res = transport.send("internal", json_request("POST", path, body));
    if (!res.ok()) raise_for(res, path);
    return res.json();
}

Bytes b64_field(const Json& j, const char* key) { return base64_decode(j.at(key).get<std::string>()); }

std::string describe(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        return std::string(to_string(err->code())) + ": " + err->what();
    }
    return std::string("internal: ") + e.what();
}

}  // namespace

Orchestrator::Orchestrator(JobStore& store, Transport& transport, const Config& config)
    : store_(store), transport_(transport), config_(config) {
    const int n = std::max(1, config_.service.job_workers);
    for (int i = 0; i < n; ++i) workers_.emplace_back([this] { worker(); });
}

Orchestrator::~Orchestrator() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    cv_.notify_all();
    for (auto& t : workers_) t.join();
}

void Orchestrator::enqueue(const std::string& job_id) {
    {
        std::lock_guard lock(mutex_);
        queue_.push_back(job_id);
    }
    cv_.notify_one();
}

void Orchestrator::drain() {
    std::unique_lock lock(mutex_);
    idle_.wait(lock, [this] { return queue_.empty() && active_ == 0; });
}

void Orchestrator::worker() {
    for (;;) {
        std::string id;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            id = std::move(queue_.front());
            queue_.pop_front();
            ++active_;
        }
        try {
            run_job(id);
        } catch (const std::exception& e) {
            try {
                store_.update(id, [&](JobRecord& j) {
                    j.state = JobState::failed;
                    j.error = describe(e);
                    j.updated = now_timestamp();
                });
            } catch (...) {
            }
        }
        {
            std::lock_guard lock(mutex_);
            --active_;
        }
        idle_.notify_all();
    }
}

void Orchestrator::run_job(const std::string& id) {
    store_.update(id, [](JobRecord& j) {
        j.state = JobState::running;
        j.updated = now_timestamp();
    });
    const FundusImage image = store_.load_image(id);
    const Json payload = image_payload(image);

    auto failed = [&](const std::string& structure, const std::exception& e) noexcept {
        try {
            store_.update(id, [&](JobRecord& j) {
                j.structures[structure] = SubState::failed;
                j.structure_errors[structure] = describe(e);
                j.updated = now_timestamp();
            });
        } catch (...) {
        }
    };

    std::promise<std::optional<OnhFindings>> onh_done;
    std::shared_future<std::optional<OnhFindings>> onh_findings = onh_done.get_future().share();

    std::thread onh([&] {
        try {
            const Json r = call(transport_, "/internal/v1/analyze/onh", payload);
            store_.put_artifact(id, "onh_mask.png", b64_field(r, "mask"));
            const auto findings = r.at("findings").get<OnhFindings>();
            store_.update(id, [&](JobRecord& j) {
                j.onh_roi = r.at("roi").get<RoiBox>();
                j.onh = findings;
                j.structures["onh"] = SubState::ok;
                j.updated = now_timestamp();
            });
            onh_done.set_value(findings);
        } catch (const std::exception& e) {
            onh_done.set_value(std::nullopt);
            failed("onh", e);
        }
    });
    std::thread macula([&] {
        try {
            const Json r = call(transport_, "/internal/v1/analyze/macula", payload);
            store_.put_artifact(id, "macula_mask.png", b64_field(r, "mask"));
            store_.update(id, [&](JobRecord& j) {
                j.macula_roi = r.at("roi").get<RoiBox>();
                j.macula = r.at("findings").get<MaculaFindings>();
                j.structures["macula"] = SubState::ok;
                j.updated = now_timestamp();
            });
        } catch (const std::exception& e) {
            failed("macula", e);
        }
    });

    try {
        const Json seg = call(transport_, "/internal/v1/analyze/vessels/segment", payload);
        store_.put_artifact(id, "vessel_mask.png", b64_field(seg, "mask"));
        store_.put_artifact(id, "av_map.png", b64_field(seg, "av_map"));

        std::optional<OnhFindings> disc;
        const auto wait = std::chrono::duration<double>(config_.service.onh_wait_seconds);
        if (onh_findings.wait_for(wait) == std::future_status::ready) disc = onh_findings.get();

        Json body{{"mask", seg.at("mask")},
                  {"av_map", seg.at("av_map")},
                  {"source_backend", seg.at("source_backend")},
                  {"disc", disc ? Json(*disc) : Json(nullptr)}};
        const auto findings = call(transport_, "/internal/v1/analyze/vessels/caliber", body).get<VesselFindings>();
        store_.update(id, [&](JobRecord& j) {
            j.vessels = findings;
            j.structures["vessels"] = SubState::ok;
            j.updated = now_timestamp();
        });
    } catch (const std::exception& e) {
        failed("vessels", e);
    }
    onh.join();
    macula.join();

    const JobRecord snapshot = *store_.get(id);
    if (!snapshot.onh && !snapshot.macula && !snapshot.vessels) {
        std::string error;
        for (const auto& [structure, message] : snapshot.structure_errors) {
            if (!error.empty()) error += "; ";
            error += structure + ": " + message;
        }
        store_.update(id, [&](JobRecord& j) {
            j.state = JobState::failed;
            j.error = error;
            j.updated = now_timestamp();
        });
        return;
    }
    Json body{{"image_id", snapshot.image_id},
              {"timestamp", now_timestamp()},
              {"onh", snapshot.onh ? Json(*snapshot.onh) : Json(nullptr)},
              {"macula", snapshot.macula ? Json(*snapshot.macula) : Json(nullptr)},
              {"vessels", snapshot.vessels ? Json(*snapshot.vessels) : Json(nullptr)}};
    const auto report = call(transport_, "/internal/v1/report/synthesize", body).get<ReportDraft>();
    store_.update(id, [&](JobRecord& j) {
        j.report = report;
        j.state = JobState::done;
        j.updated = now_timestamp();
    });
}

}  // namespace eyas::services
