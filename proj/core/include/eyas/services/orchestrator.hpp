#pragma once

#include <condition_variable>
#include <deque>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "eyas/config.hpp"
#include "eyas/services/http.hpp"
#include "eyas/services/job_store.hpp"

namespace eyas::services {

/// Runs queued jobs through the internal gateway. Per job, ONH, macula and
/// vessel segmentation start together; the caliber step has one dependency
/// edge, on the ONH step, bounded by onh_wait_seconds. Without ONH findings
/// the caliber comes back indeterminate. The report is synthesized from the
/// sections that succeeded and the job fails only if all three failed.
class Orchestrator {
public:
    Orchestrator(JobStore& store, Transport& transport, const Config& config);
    ~Orchestrator();
    Orchestrator(const Orchestrator&) = delete;
    Orchestrator& operator=(const Orchestrator&) = delete;

    void enqueue(const std::string& job_id);
    /// Runs one job on the calling thread.
    void run_job(const std::string& job_id);
    /// Blocks until the queue is empty and no job is in flight.
    void drain();

private:
    void worker();

    JobStore& store_;
    Transport& transport_;
    Config config_;

    std::mutex mutex_;
    std::condition_variable cv_;
    std::condition_variable idle_;
    std::deque<std::string> queue_;
    std::size_t active_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace eyas::services
