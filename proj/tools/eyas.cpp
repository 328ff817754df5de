#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eyas/codec.hpp"
#include "eyas/json_io.hpp"
#include "eyas/pipeline.hpp"
#include "eyas/services/service_graph.hpp"

namespace fs = std::filesystem;
using namespace eyas;

namespace {

enum Exit { kOk = 0, kAnalysisFailure = 1, kUsage = 2 };

bool g_json_errors = false;
std::mutex g_err_mutex;

void report_error(std::string_view code, const std::string& message) {
    std::lock_guard lock(g_err_mutex);
    if (g_json_errors) {
        std::cerr << Json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
    } else {
        std::cerr << "eyas: " << code << ": " << message << "\n";
    }
}

bool is_analysis_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::degenerate_template:
        case ErrorCode::out_of_view:
        case ErrorCode::segmentation_empty:
        case ErrorCode::degenerate_mask:
        case ErrorCode::classification_failed:
        case ErrorCode::insufficient_vessels:
        case ErrorCode::roi_too_small:
        case ErrorCode::empty_report:
        case ErrorCode::backend_failure:
        case ErrorCode::timeout:
            return true;
        default:
            return false;
    }
}

struct Job {
    std::string name;
    fs::path path;
    std::optional<Laterality> laterality;
};

bool is_image_file(const fs::path& p) {
    const auto ext = p.extension().string();
    return ext == ".png" || ext == ".ppm";
}

std::vector<Job> collect_inputs(const fs::path& input) {
    if (!fs::exists(input)) fail(ErrorCode::io, "input not found: " + input.string());
    if (fs::is_regular_file(input)) return {{input.stem().string(), input, std::nullopt}};
    std::vector<Job> jobs;
    if (fs::exists(input / "manifest.json")) {
        for (const auto& e : load_manifest(input).entries) jobs.push_back({e.id, input / e.image, e.laterality});
        return jobs;
    }
    for (const auto& entry : fs::directory_iterator(input)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) {
            jobs.push_back({entry.path().stem().string(), entry.path(), std::nullopt});
        }
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.name < b.name; });
    if (jobs.empty()) fail(ErrorCode::io, "no PNG or PPM images in " + input.string());
    return jobs;
}

/// --backend NAME@VERSION applies to every structure the backend is
/// registered for; other structures keep their configured backend.
void apply_backend_flag(const BackendRegistry& registry, Config& config, const std::string& label) {
    const auto [name, version] = parse_backend_label(label);
    bool any = false;
    for (Structure s : {Structure::onh, Structure::macula, Structure::vessels}) {
        if (registry.find(name, version, s)) {
            config.service.active_backends[std::string(to_string(s))] = label;
            any = true;
        }
    }
    if (!any) fail(ErrorCode::not_found, "backend " + label + " is not registered");
}

int cmd_analyze(Config config, const fs::path& input, const fs::path& out, const std::string& backend,
                const std::string& laterality, const std::vector<std::string>& register_files, int jobs) {
    BackendRegistry registry;
    for (const auto& file : register_files) {
        const Bytes bytes = read_file(file);
        const Json j = parse_json(std::string(bytes.begin(), bytes.end()));
        if (j.is_array()) {
            for (const auto& d : j) registry.register_backend(d.get<BackendDescriptor>());
        } else {
            registry.register_backend(j.get<BackendDescriptor>());
        }
    }
    if (!backend.empty()) apply_backend_flag(registry, config, backend);
    std::optional<Laterality> forced;
    if (!laterality.empty()) forced = parse_laterality(laterality);

    const auto inputs = collect_inputs(input);
    const BackendSet backends(registry, config);
    const std::string timestamp = reproducible_timestamp();
    std::atomic<int> worst{kOk};
    auto raise_exit = [&](int code) {
        int cur = worst.load();
        while (code > cur && !worst.compare_exchange_weak(cur, code)) {
        }
    };
    parallel_for(inputs.size(), jobs, [&](std::size_t i) {
        const Job& job = inputs[i];
        try {
            const Laterality lat = forced ? *forced : job.laterality.value_or(Laterality::unknown);
            const FundusImage image = decode_image(read_file(job.path), lat);
            const PipelineResult result = run_pipeline(image, backends.view(), config, timestamp);
            write_outputs(result, out / job.name);
            for (const auto& [structure, message] : result.errors) {
                report_error("analysis", job.name + ": " + structure + ": " + message);
            }
            if (result.failed()) raise_exit(kAnalysisFailure);
        } catch (const Error& e) {
            report_error(to_string(e.code()), job.name + ": " + e.what());
            raise_exit(is_analysis_error(e.code()) ? kAnalysisFailure : kUsage);
        }
    });
    return worst.load();
}

int run(int argc, char** argv) {
    CLI::App app{"Fundus image analysis: localization, segmentation, classification and report drafting"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::string> config_path;
    app.add_flag("--json-errors", g_json_errors, "Print errors to stderr as JSON");
    app.add_option("--config", config_path, "JSON config file (else EYAS_CONFIG, else defaults)");

    auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus with ground truth");
    int count = 200;
    std::uint64_t seed = 42;
    GenParams params;
    std::string gen_out;
    int jobs = 1;
    gen->add_option("--count", count, "Number of scenes")->check(CLI::PositiveNumber);
    gen->add_option("--seed", seed, "Corpus seed");
    gen->add_option("--noise", params.noise_sigma, "Gaussian noise sigma")->check(CLI::NonNegativeNumber);
    gen->add_option("--width", params.img_w, "Image width")->check(CLI::Range(64, 8192));
    gen->add_option("--height", params.img_h, "Image height")->check(CLI::Range(64, 8192));
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

    auto* analyze = app.add_subcommand("analyze", "Run the offline pipeline on an image, directory or corpus");
    std::string input, out, backend, laterality;
    std::vector<std::string> register_files;
    analyze->add_option("--input", input, "Image file, image directory or corpus directory")->required();
    analyze->add_option("--out", out, "Output directory (one subdirectory per image)")->required();
    analyze->add_option("--backend", backend, "Backend as NAME@VERSION");
    analyze->add_option("--register", register_files, "JSON backend descriptor file(s) to register first");
    analyze->add_option("--laterality", laterality, "left, right or unknown (overrides the manifest)")
        ->check(CLI::IsMember({"left", "right", "unknown"}));
    analyze->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

    auto* eval = app.add_subcommand("eval", "Score predictions against corpus ground truth");
    std::string corpus, pred, eval_out;
    eval->add_option("--corpus", corpus, "Corpus directory")->required();
    eval->add_option("--pred", pred, "Prediction directory written by analyze")->required();
    eval->add_option("--out", eval_out, "Report JSON path")->required();

    auto* formats = app.add_subcommand("compare-formats", "Compare classifier input formats on the holdout");
    std::string formats_out;
    formats->add_option("--corpus", corpus, "Corpus directory")->required();
    formats->add_option("--out", formats_out, "Report JSON path")->required();
    formats->add_option("--jobs", jobs, "Parallel workers")->check(CLI::PositiveNumber);

    auto* serve = app.add_subcommand("serve", "Start the service graph");
    bool single_process = false;
    std::string role;
    serve->add_flag("--single-process", single_process, "Run every service in this process");
    serve->add_option("--role", role, "Run a single service of the multi-process graph");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        if (g_json_errors) {
            report_error("usage", e.what());
        } else {
            app.exit(e);
        }
        return kUsage;
    }

    try {
        std::optional<fs::path> cfg_path;
        if (config_path) cfg_path = *config_path;
        Config config = resolve_config(cfg_path);

        if (*gen) {
            const auto manifest = gen_corpus(count, params, seed, gen_out, jobs);
            std::cout << "wrote " << manifest.entries.size() << " scenes to " << gen_out << "\n";
            return kOk;
        }
        if (*analyze) return cmd_analyze(config, input, out, backend, laterality, register_files, jobs);
        if (*eval) {
            const EvaluationReport report = evaluate_predictions(corpus, pred);
            write_file(eval_out, Json(report).dump(2) + "\n");
            return kOk;
        }
        if (*formats) {
            const FormatReport report = compare_formats(fs::path(corpus), config, jobs);
            write_file(formats_out, Json(report).dump(2) + "\n");
            return kOk;
        }
        if (*serve) {
            if (!role.empty()) return services::run_role(services::parse_role(role), config);
            if (single_process) return services::run_single_process(config);
            std::optional<fs::path> abs_cfg;
            if (cfg_path) abs_cfg = fs::absolute(*cfg_path);
            return services::run_multi_process(fs::read_symlink("/proc/self/exe"), abs_cfg, config);
        }
    } catch (const Error& e) {
        report_error(to_string(e.code()), e.what());
        return is_analysis_error(e.code()) ? kAnalysisFailure : kUsage;
    } catch (const std::exception& e) {
        report_error("internal", e.what());
        return kUsage;
    }
    return kUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
