#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eyas/codec.hpp"
#include "eyas/json_io.hpp"

namespace eyas::services {

enum class JobState { queued, running, done, failed };
enum class SubState { pending, ok, failed, skipped };

std::string_view to_string(JobState s) noexcept;
std::string_view to_string(SubState s) noexcept;
JobState parse_job_state(std::string_view s);
SubState parse_sub_state(std::string_view s);

struct JobRecord {
    std::string job_id;
    std::string image_id;
    Laterality laterality = Laterality::unknown;
    JobState state = JobState::queued;
    std::map<std::string, SubState> structures{
        {"onh", SubState::pending}, {"macula", SubState::pending}, {"vessels", SubState::pending}};
    std::map<std::string, std::string> structure_errors;
    std::string created;
    std::string updated;
    std::optional<std::string> error;

    /// Intermediate products kept with the job.
    std::optional<RoiBox> onh_roi;
    std::optional<RoiBox> macula_roi;
    std::optional<OnhFindings> onh;
    std::optional<MaculaFindings> macula;
    std::optional<VesselFindings> vessels;
    std::optional<ReportDraft> report;
};

Json job_summary_json(const JobRecord& job);
void to_json(Json& j, const JobRecord& v);
void from_json(const Json& j, JobRecord& v);

/// Embedded on-disk job store: one directory per job holding job.json and
/// binary artifacts. Every write goes to a temporary file and is renamed into
/// place; updates to one job are serialized by a per-job mutex.
class JobStore {
public:
    explicit JobStore(std::filesystem::path root);

    /// Persists a new queued job with its input image.
    JobRecord create(const std::string& job_id, const FundusImage& image);

    std::optional<JobRecord> get(const std::string& job_id) const;
    /// Read-modify-write under the job's lock; `fn` may throw to abort.
    JobRecord update(const std::string& job_id, const std::function<void(JobRecord&)>& fn);

    void put_artifact(const std::string& job_id, const std::string& name, std::span<const std::uint8_t> bytes);
    std::optional<Bytes> get_artifact(const std::string& job_id, const std::string& name) const;
    FundusImage load_image(const std::string& job_id) const;

    /// Jobs that were accepted but never finished (after a restart).
    std::vector<std::string> unfinished() const;
    std::vector<std::string> all_ids() const;

private:
    struct Slot {
        std::mutex mutex;
        JobRecord record;
    };
    std::shared_ptr<Slot> slot(const std::string& job_id) const;
    void persist(const JobRecord& record) const;
    std::filesystem::path dir(const std::string& job_id) const { return root_ / job_id; }

    std::filesystem::path root_;
    mutable std::mutex mutex_;
    mutable std::map<std::string, std::shared_ptr<Slot>> slots_;
};

/// Writes through a temporary file and an atomic rename.
void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace eyas::services
