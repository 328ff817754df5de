#include "eyas/services/job_store.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <regex>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"

namespace eyas::services {

std::string_view to_string(JobState s) noexcept {
    switch (s) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::done: return "done";
        case JobState::failed: return "failed";
    }
    return "queued";
}

std::string_view to_string(SubState s) noexcept {
    switch (s) {
        case SubState::pending: return "pending";
        case SubState::ok: return "ok";
        case SubState::failed: return "failed";
        case SubState::skipped: return "skipped";
    }
    return "pending";
}

JobState parse_job_state(std::string_view s) {
    for (auto v : {JobState::queued, JobState::running, JobState::done, JobState::failed})
        if (to_string(v) == s) return v;
    fail(ErrorCode::format, "unknown job state '" + std::string(s) + "'");
}

SubState parse_sub_state(std::string_view s) {
    for (auto v : {SubState::pending, SubState::ok, SubState::failed, SubState::skipped})
        if (to_string(v) == s) return v;
    fail(ErrorCode::format, "unknown structure state '" + std::string(s) + "'");
}

namespace {

template <class T>
Json opt_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

template <class T>
std::optional<T> opt_get(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

Json job_summary_json(const JobRecord& v) {
    Json structures = Json::object();
    for (const auto& [k, s] : v.structures) structures[k] = to_string(s);
    return Json{{"job_id", v.job_id},
                {"image_id", v.image_id},
                {"laterality", to_string(v.laterality)},
                {"state", to_string(v.state)},
                {"structures", structures},
                {"structure_errors", v.structure_errors},
                {"created", v.created},
                {"updated", v.updated},
                {"error", opt_json(v.error)}};
}

void to_json(Json& j, const JobRecord& v) {
    j = job_summary_json(v);
    j["onh_roi"] = opt_json(v.onh_roi);
    j["macula_roi"] = opt_json(v.macula_roi);
    j["onh"] = opt_json(v.onh);
    j["macula"] = opt_json(v.macula);
    j["vessels"] = opt_json(v.vessels);
    j["report"] = opt_json(v.report);
}

void from_json(const Json& j, JobRecord& v) {
    v.job_id = j.at("job_id").get<std::string>();
    v.image_id = j.at("image_id").get<std::string>();
    v.laterality = parse_laterality(j.at("laterality").get<std::string>());
    v.state = parse_job_state(j.at("state").get<std::string>());
    v.structures.clear();
    for (const auto& [k, s] : j.at("structures").items()) v.structures[k] = parse_sub_state(s.get<std::string>());
    v.structure_errors = j.value("structure_errors", std::map<std::string, std::string>{});
    v.created = j.at("created").get<std::string>();
    v.updated = j.at("updated").get<std::string>();
    v.error = opt_get<std::string>(j, "error");
    v.onh_roi = opt_get<RoiBox>(j, "onh_roi");
    v.macula_roi = opt_get<RoiBox>(j, "macula_roi");
    v.onh = opt_get<OnhFindings>(j, "onh");
    v.macula = opt_get<MaculaFindings>(j, "macula");
    v.vessels = opt_get<VesselFindings>(j, "vessels");
    v.report = opt_get<ReportDraft>(j, "report");
}

void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    static std::atomic<unsigned> counter{0};
    const auto tmp = path.parent_path() /
                     ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()) + "." + std::to_string(counter++));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::io, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) fail(ErrorCode::io, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorCode::io, "cannot replace " + path.string());
    }
}

JobStore::JobStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (!std::filesystem::is_directory(root_)) fail(ErrorCode::io, "cannot create job store at " + root_.string());
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
        const auto file = entry.path() / "job.json";
        if (!entry.is_directory() || !std::filesystem::exists(file)) continue;
        const Bytes raw = read_file(file);
        auto s = std::make_shared<Slot>();
        s->record = parse_json(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size())).get<JobRecord>();
        slots_[s->record.job_id] = s;
    }
}

void JobStore::persist(const JobRecord& record) const {
    const std::string text = Json(record).dump(2) + "\n";
    atomic_write(dir(record.job_id) / "job.json", as_bytes(text));
}

JobRecord JobStore::create(const std::string& job_id, const FundusImage& image) {
    static const std::regex id_re("[A-Za-z0-9_-]+");
    if (!std::regex_match(job_id, id_re)) fail(ErrorCode::invalid_argument, "bad job id");
    auto s = std::make_shared<Slot>();
    s->record.job_id = job_id;
    s->record.image_id = image.image_id();
    s->record.laterality = image.laterality();
    s->record.created = s->record.updated = now_timestamp();
    {
        std::lock_guard lock(mutex_);
        if (slots_.count(job_id)) fail(ErrorCode::conflict, "job " + job_id + " exists");
        slots_[job_id] = s;
    }
    std::lock_guard lock(s->mutex);
    std::filesystem::create_directories(dir(job_id));
    atomic_write(dir(job_id) / "image.png", encode_png(image));
    persist(s->record);
    return s->record;
}

std::shared_ptr<JobStore::Slot> JobStore::slot(const std::string& job_id) const {
    std::lock_guard lock(mutex_);
    auto it = slots_.find(job_id);
    if (it == slots_.end()) fail(ErrorCode::not_found, "no job " + job_id);
    return it->second;
}

std::optional<JobRecord> JobStore::get(const std::string& job_id) const {
    std::shared_ptr<Slot> s;
    {
        std::lock_guard lock(mutex_);
        auto it = slots_.find(job_id);
        if (it == slots_.end()) return std::nullopt;
        s = it->second;
    }
    std::lock_guard lock(s->mutex);
    return s->record;
}

JobRecord JobStore::update(const std::string& job_id, const std::function<void(JobRecord&)>& fn) {
    auto s = slot(job_id);
    std::lock_guard lock(s->mutex);
    JobRecord next = s->record;
    fn(next);
    next.updated = now_timestamp();
    persist(next);
    s->record = next;
    return next;
}

void JobStore::put_artifact(const std::string& job_id, const std::string& name, std::span<const std::uint8_t> bytes) {
    (void)slot(job_id);
    atomic_write(dir(job_id) / name, bytes);
}

std::optional<Bytes> JobStore::get_artifact(const std::string& job_id, const std::string& name) const {
    (void)slot(job_id);
    const auto p = dir(job_id) / name;
    if (!std::filesystem::exists(p)) return std::nullopt;
    return read_file(p);
}

FundusImage JobStore::load_image(const std::string& job_id) const {
    const auto record = get(job_id);
    if (!record) fail(ErrorCode::not_found, "no job " + job_id);
    return decode_image(read_file(dir(job_id) / "image.png"), record->laterality);
}

std::vector<std::string> JobStore::unfinished() const {
    std::vector<std::string> out;
    for (const auto& id : all_ids()) {
        const auto r = get(id);
        if (r && (r->state == JobState::queued || r->state == JobState::running)) out.push_back(id);
    }
    return out;
}

std::vector<std::string> JobStore::all_ids() const {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : slots_) out.push_back(id);
    return out;
}

}  // namespace eyas::services
