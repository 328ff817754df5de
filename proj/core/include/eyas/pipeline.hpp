#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "eyas/classifier.hpp"
#include "eyas/config.hpp"
#include "eyas/localizer.hpp"
#include "eyas/metrics.hpp"
#include "eyas/reporter.hpp"
#include "eyas/segmenter.hpp"
#include "eyas/synthgen.hpp"

namespace eyas {

// Each structure step is a pure function of (image, backend, config). The
// offline CLI and the structure services call the same steps, which is what
// makes their outputs byte-identical.

struct OnhAnalysis {
    RoiBox roi;
    BinaryMask mask;
    OnhFindings findings;
};

struct MaculaAnalysis {
    RoiBox roi;
    BinaryMask mask;
    MaculaFindings findings;
};

OnhAnalysis analyze_onh(const FundusImage& image, const SegmentationBackend& backend, const Config& config);
/// Locates the disc on its own, so it does not depend on the ONH step.
MaculaAnalysis analyze_macula(const FundusImage& image, const SegmentationBackend& backend, const Config& config);
VesselMask analyze_vessels(const FundusImage& image, const SegmentationBackend& backend);
VesselFindings analyze_caliber(const VesselMask& vessels, const std::optional<OnhFindings>& disc,
                               const std::string& source_backend, const Config& config);

struct Backends {
    const SegmentationBackend* onh = nullptr;
    const SegmentationBackend* macula = nullptr;
    const SegmentationBackend* vessels = nullptr;
};

/// Owns one backend per structure, chosen from the active_backends config
/// (classical by default).
class BackendSet {
public:
    BackendSet(const BackendRegistry& registry, const Config& config);
    Backends view() const { return {onh_.get(), macula_.get(), vessels_.get()}; }

private:
    std::unique_ptr<SegmentationBackend> onh_, macula_, vessels_;
};

std::unique_ptr<SegmentationBackend> select_backend(const BackendRegistry& registry, const Config& config,
                                                    Structure structure);

struct PipelineResult {
    std::string image_id;
    std::optional<OnhAnalysis> onh;
    std::optional<MaculaAnalysis> macula;
    std::optional<VesselMask> vessels;
    std::optional<VesselFindings> vessel_findings;
    /// Structure name to error message for each failed step.
    std::map<std::string, std::string> errors;
    std::optional<ReportDraft> report;

    bool failed() const { return !report.has_value(); }
};

PipelineResult run_pipeline(const FundusImage& image, const Backends& backends, const Config& config,
                            const std::string& timestamp);

/// Writes rois.json, onh_mask.png, macula_mask.png, vessel_mask.png,
/// av_map.png, findings.json, report.txt and report.json into `dir`.
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

/// Evaluates the four classifier input formats on the holdout split.
FormatReport compare_formats(const std::filesystem::path& corpus_dir, const Config& config, int jobs = 1);
/// Same harness over already loaded inputs.
struct FormatSample {
    FundusImage image;
    ShapeLabel truth;
};
FormatReport compare_formats(const std::vector<FormatSample>& samples, const Config& config, int jobs = 1);

/// Metrics of a prediction tree (one subdirectory per corpus entry, as
/// written by write_outputs) against the corpus ground truth.
EvaluationReport evaluate_predictions(const std::filesystem::path& corpus_dir,
                                      const std::filesystem::path& pred_dir);

/// Fraction of predicted vessel components whose label matches the majority
/// truth label; components that are mostly non-vessel in truth are skipped.
struct AvScore {
    std::size_t counted = 0;
    std::size_t correct = 0;
    double accuracy() const { return counted ? double(correct) / double(counted) : 1.0; }
};
AvScore av_component_accuracy(const VesselMask& pred, const VesselMask& truth);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads; first exception wins.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace eyas
