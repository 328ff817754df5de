#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "eyas/codec.hpp"
#include "eyas/json_io.hpp"
#include "support.hpp"

using namespace eyas;
using eyas::testing::solid_image;
using eyas::testing::TempDir;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string err;
};

RunResult run_eyas(const std::string& args, const TempDir& dir) {
    const auto err_path = dir.path() / "stderr.txt";
    const std::string cmd = std::string(EYAS_BINARY) + " " + args + " >/dev/null 2>" + err_path.string();
    const int status = std::system(cmd.c_str());
    std::ifstream in(err_path);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const std::filesystem::path& p) {
    const Bytes b = read_file(p);
    return {b.begin(), b.end()};
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
    TempDir dir;
    EXPECT_EQ(run_eyas("", dir).exit_code, 2);
    EXPECT_EQ(run_eyas("frobnicate", dir).exit_code, 2);
    EXPECT_EQ(run_eyas("analyze --input " + (dir.path() / "missing").string() + " --out " +
                           (dir.path() / "o").string(),
                       dir)
                  .exit_code,
              2);
    EXPECT_EQ(run_eyas("--help", dir).exit_code, 0);
}

TEST(Cli, JsonErrors) {
    TempDir dir;
    write_file(dir.path() / "junk.png", std::string("not an image"));
    const RunResult r = run_eyas("analyze --input " + (dir.path() / "junk.png").string() + " --out " +
                                     (dir.path() / "o").string() + " --json-errors",
                                 dir);
    EXPECT_EQ(r.exit_code, 2);
    const Json j = parse_json(r.err.substr(0, r.err.find('\n')));
    EXPECT_EQ(j.at("error").at("code"), "decode_error");
}

TEST(Cli, UniformImageIsAnalysisFailure) {
    TempDir dir;
    write_file(dir.path() / "flat.png", encode_png(solid_image(256, 256, {120, 60, 30})));
    const RunResult r =
        run_eyas("analyze --input " + (dir.path() / "flat.png").string() + " --out " + (dir.path() / "o").string(), dir);
    EXPECT_EQ(r.exit_code, 1) << r.err;
}

TEST(Cli, UnknownBackendIsUsageError) {
    TempDir dir;
    write_file(dir.path() / "flat.png", encode_png(solid_image(256, 256, {120, 60, 30})));
    EXPECT_EQ(run_eyas("analyze --input " + (dir.path() / "flat.png").string() + " --out " +
                           (dir.path() / "o").string() + " --backend ghost@1.0.0",
                       dir)
                  .exit_code,
              2);
}

TEST(Cli, GenAnalyzeEvalAreDeterministic) {
    TempDir dir;
    const auto a = dir.path() / "a", b = dir.path() / "b";
    const std::string gen = " --count 3 --seed 5 --noise 4 --width 384 --height 384";
    ASSERT_EQ(run_eyas("gen --out " + a.string() + gen, dir).exit_code, 0);
    ASSERT_EQ(run_eyas("gen --jobs 2 --out " + b.string() + gen, dir).exit_code, 0);
    for (const auto& entry : std::filesystem::directory_iterator(a))
        EXPECT_EQ(read_file(entry.path()), read_file(b / entry.path().filename())) << entry.path().filename();

    const auto p1 = dir.path() / "p1", p2 = dir.path() / "p2";
    const RunResult r1 = run_eyas("analyze --input " + a.string() + " --out " + p1.string(), dir);
    ASSERT_LE(r1.exit_code, 1) << r1.err;
    run_eyas("analyze --jobs 2 --input " + a.string() + " --out " + p2.string(), dir);
    const CorpusManifest m = load_manifest(a);
    for (const auto& e : m.entries) {
        for (const char* f : {"report.json", "findings.json", "rois.json", "vessel_mask.png"}) {
            if (!std::filesystem::exists(p1 / e.id / f)) continue;
            EXPECT_EQ(slurp(p1 / e.id / f), slurp(p2 / e.id / f)) << e.id << "/" << f;
        }
    }
    ASSERT_TRUE(std::filesystem::exists(p1 / m.entries[0].id / "report.txt"));

    const auto report = dir.path() / "eval.json";
    ASSERT_EQ(run_eyas("eval --corpus " + a.string() + " --pred " + p1.string() + " --out " + report.string(), dir)
                  .exit_code,
              0);
    const Json j = parse_json(slurp(report));
    EXPECT_TRUE(j.contains("segmentation"));
    EXPECT_TRUE(j.contains("classification"));
}

TEST(Cli, ConfigFlagIsApplied) {
    TempDir dir;
    write_file(dir.path() / "bad.json", std::string(R"({"no_such_section": {}})"));
    EXPECT_EQ(run_eyas("gen --count 1 --out " + (dir.path() / "c").string() + " --config " +
                           (dir.path() / "bad.json").string(),
                       dir)
                  .exit_code,
              2);
}
