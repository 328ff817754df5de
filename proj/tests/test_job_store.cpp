#include <gtest/gtest.h>

#include <thread>

#include "eyas/error.hpp"
#include "eyas/services/job_store.hpp"
#include "support.hpp"

using namespace eyas;
using namespace eyas::services;
using eyas::testing::solid_image;
using eyas::testing::TempDir;

TEST(JobStore, CreateGetAndReload) {
    TempDir dir;
    const FundusImage img = solid_image(64, 64, {1, 2, 3}).with_laterality(Laterality::left);
    {
        JobStore store(dir.path());
        const JobRecord job = store.create("job_a", img);
        EXPECT_EQ(job.state, JobState::queued);
        EXPECT_EQ(job.image_id, img.image_id());
        EXPECT_EQ(job.laterality, Laterality::left);
        for (const auto& [name, s] : job.structures) EXPECT_EQ(s, SubState::pending) << name;
        EXPECT_THROW(store.create("job_a", img), Error);
    }
    JobStore reopened(dir.path());
    const auto job = reopened.get("job_a");
    ASSERT_TRUE(job);
    EXPECT_EQ(job->image_id, img.image_id());
    EXPECT_EQ(reopened.load_image("job_a"), img);
    EXPECT_EQ(reopened.unfinished(), std::vector<std::string>{"job_a"});
    EXPECT_FALSE(reopened.get("job_b"));
}

TEST(JobStore, UpdateIsAtomicPerJob) {
    TempDir dir;
    JobStore store(dir.path());
    store.create("job_c", solid_image(64, 64, {}));
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t) {
        threads.emplace_back([&] {
            for (int i = 0; i < 25; ++i) {
                store.update("job_c", [](JobRecord& j) {
                    const int n = j.structure_errors.empty() ? 0 : std::stoi(j.structure_errors["n"]);
                    j.structure_errors["n"] = std::to_string(n + 1);
                });
            }
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(store.get("job_c")->structure_errors.at("n"), "100");
    EXPECT_EQ(JobStore(dir.path()).get("job_c")->structure_errors.at("n"), "100");
}

TEST(JobStore, ThrowingUpdateChangesNothing) {
    TempDir dir;
    JobStore store(dir.path());
    store.create("job_d", solid_image(64, 64, {}));
    EXPECT_THROW(store.update("job_d",
                              [](JobRecord& j) {
                                  j.state = JobState::running;
                                  fail(ErrorCode::conflict, "abort");
                              }),
                 Error);
    EXPECT_EQ(store.get("job_d")->state, JobState::queued);
    EXPECT_THROW(store.update("job_missing", [](JobRecord&) {}), Error);
}

TEST(JobStore, Artifacts) {
    TempDir dir;
    JobStore store(dir.path());
    store.create("job_e", solid_image(64, 64, {}));
    const Bytes blob{1, 2, 3, 250};
    store.put_artifact("job_e", "onh_mask.png", blob);
    EXPECT_EQ(store.get_artifact("job_e", "onh_mask.png"), blob);
    EXPECT_FALSE(store.get_artifact("job_e", "macula_mask.png"));
}

TEST(JobStore, FinishedJobsAreNotRequeued) {
    TempDir dir;
    JobStore store(dir.path());
    store.create("job_f", solid_image(64, 64, {}));
    store.create("job_g", solid_image(64, 64, {9, 9, 9}));
    store.update("job_f", [](JobRecord& j) {
        j.state = JobState::failed;
        j.error = "onh: x; macula: y; vessels: z";
    });
    EXPECT_EQ(store.unfinished(), std::vector<std::string>{"job_g"});
    EXPECT_EQ(store.all_ids().size(), 2u);
}

TEST(JobRecord, JsonRoundTrip) {
    JobRecord r;
    r.job_id = "job_x";
    r.image_id = "abc";
    r.state = JobState::done;
    r.structures["onh"] = SubState::ok;
    r.structures["macula"] = SubState::failed;
    r.structure_errors["macula"] = "segmentation_empty";
    r.onh_roi = RoiBox{1, 2, 3, 4, Structure::onh, 0.5};
    OnhFindings f;
    f.eccentricity = 0.3;
    r.onh = f;
    const JobRecord back = Json(r).get<JobRecord>();
    EXPECT_EQ(Json(back), Json(r));
    EXPECT_EQ(parse_job_state("failed"), JobState::failed);
    EXPECT_EQ(parse_sub_state("skipped"), SubState::skipped);
    EXPECT_THROW(parse_job_state("paused"), Error);
}
