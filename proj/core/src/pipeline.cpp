#include "eyas/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "eyas/codec.hpp"
#include "eyas/error.hpp"
#include "eyas/json_io.hpp"
#include "eyas/raster.hpp"

namespace eyas {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(std::max(jobs, 1), std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

OnhAnalysis analyze_onh(const FundusImage& image, const SegmentationBackend& backend, const Config& config) {
    OnhAnalysis out;
    out.roi = locate_onh(image, config.localizer);
    out.mask = segment_onh(image, out.roi, backend, config.segmenter);
    out.findings = classify_onh_shape(make_input(image, out.roi, out.mask, InputFormat::mask), config.classifier,
                                      backend.descriptor().label());
    return out;
}

MaculaAnalysis analyze_macula(const FundusImage& image, const SegmentationBackend& backend, const Config& config) {
    MaculaAnalysis out;
    const RoiBox onh = locate_onh(image, config.localizer);
    out.roi = locate_macula(image, onh, config.localizer);
    out.mask = segment_macula(image, out.roi, backend, config.segmenter);
    out.findings = classify_macular_reflex(image, out.roi, config.classifier, backend.descriptor().label());
    return out;
}

VesselMask analyze_vessels(const FundusImage& image, const SegmentationBackend& backend) {
    return segment_vessels(image, backend);
}

VesselFindings analyze_caliber(const VesselMask& vessels, const std::optional<OnhFindings>& disc,
                               const std::string& source_backend, const Config& config) {
    return classify_artery_caliber(vessels, disc, config.classifier, source_backend);
}

std::unique_ptr<SegmentationBackend> select_backend(const BackendRegistry& registry, const Config& config,
                                                    Structure structure) {
    const std::string key(to_string(structure));
    auto it = config.service.active_backends.find(key);
    if (it == config.service.active_backends.end()) return registry.instantiate(classical_descriptor(structure), config.segmenter);
    const auto [name, version] = parse_backend_label(it->second);
    const auto desc = registry.find(name, version, structure);
    if (!desc) fail(ErrorCode::not_found, "backend " + it->second + " is not registered for " + key);
    return registry.instantiate(*desc, config.segmenter);
}

BackendSet::BackendSet(const BackendRegistry& registry, const Config& config)
    : onh_(select_backend(registry, config, Structure::onh)),
      macula_(select_backend(registry, config, Structure::macula)),
      vessels_(select_backend(registry, config, Structure::vessels)) {}

PipelineResult run_pipeline(const FundusImage& image, const Backends& backends, const Config& config,
                            const std::string& timestamp) {
    PipelineResult r;
    r.image_id = image.image_id();
    try {
        r.onh = analyze_onh(image, *backends.onh, config);
    } catch (const Error& e) {
        r.errors["onh"] = e.what();
    }
    try {
        r.macula = analyze_macula(image, *backends.macula, config);
    } catch (const Error& e) {
        r.errors["macula"] = e.what();
    }
    try {
        r.vessels = analyze_vessels(image, *backends.vessels);
        std::optional<OnhFindings> disc;
        if (r.onh) disc = r.onh->findings;
        r.vessel_findings = analyze_caliber(*r.vessels, disc, backends.vessels->descriptor().label(), config);
    } catch (const Error& e) {
        r.errors["vessels"] = e.what();
    }
    std::optional<OnhFindings> onh;
    std::optional<MaculaFindings> macula;
    if (r.onh) onh = r.onh->findings;
    if (r.macula) macula = r.macula->findings;
    if (onh || macula || r.vessel_findings) {
        r.report = synthesize(onh, macula, r.vessel_findings, r.image_id, timestamp, config.templates);
    }
    return r;
}

void write_outputs(const PipelineResult& r, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
    Json rois{{"onh", nullptr}, {"macula", nullptr}};
    Json findings{{"image_id", r.image_id}, {"onh", nullptr}, {"macula", nullptr}, {"vessels", nullptr}};
    if (r.onh) {
        rois["onh"] = r.onh->roi;
        findings["onh"] = r.onh->findings;
        write_file(dir / "onh_mask.png", encode_mask_png(r.onh->mask));
    }
    if (r.macula) {
        rois["macula"] = r.macula->roi;
        findings["macula"] = r.macula->findings;
        write_file(dir / "macula_mask.png", encode_mask_png(r.macula->mask));
    }
    if (r.vessels) {
        write_file(dir / "vessel_mask.png", encode_mask_png(r.vessels->vessel));
        write_file(dir / "av_map.png", encode_av_png(*r.vessels));
    }
    if (r.vessel_findings) findings["vessels"] = *r.vessel_findings;
    findings["errors"] = r.errors;
    write_file(dir / "rois.json", rois.dump(2) + "\n");
    write_file(dir / "findings.json", findings.dump(2) + "\n");
    if (r.report) {
        write_file(dir / "report.txt", render_export(*r.report, ExportFormat::txt));
        write_file(dir / "report.json", render_export(*r.report, ExportFormat::json));
    }
}

FormatReport compare_formats(const std::vector<FormatSample>& samples, const Config& config, int jobs) {
    const ClassicalBackend backend(Structure::onh, config.segmenter);
    const std::size_t n = samples.size();
    // preds[format][sample]; "failed" marks an input the pipeline could not classify.
    std::vector<std::vector<std::string>> preds(kAllFormats.size(), std::vector<std::string>(n, "failed"));
    parallel_for(n, jobs, [&](std::size_t i) {
        const FundusImage& image = samples[i].image;
        const RoiBox roi = locate_onh(image, config.localizer);
        std::optional<BinaryMask> mask;
        try {
            mask = segment_onh(image, roi, backend, config.segmenter);
        } catch (const Error&) {
        }
        for (std::size_t f = 0; f < kAllFormats.size(); ++f) {
            try {
                const auto in = make_input(image, roi, mask, kAllFormats[f]);
                preds[f][i] = std::string(to_string(classify_onh_shape(in, config.classifier).shape));
            } catch (const Error&) {
            }
        }
    });
    std::vector<std::string> truths;
    for (const auto& s : samples) truths.emplace_back(to_string(s.truth));
    const std::vector<std::string> labels{"round", "oval_vertical", "oval_horizontal", "failed"};
    FormatReport report;
    report.holdout_size = n;
    for (std::size_t f = 0; f < kAllFormats.size(); ++f) {
        FormatRow row;
        row.format = kAllFormats[f];
        row.evaluated = n;
        if (n > 0) {
            const auto cm = confusion(preds[f], truths, labels);
            row.accuracy = accuracy(cm);
            row.per_class = per_class_accuracy(cm);
        }
        report.formats.push_back(std::move(row));
    }
    return report;
}

namespace {

FundusImage load_entry_image(const std::filesystem::path& dir, const ManifestEntry& e) {
    return decode_image(read_file(dir / e.image), e.laterality);
}

}  // namespace

FormatReport compare_formats(const std::filesystem::path& corpus_dir, const Config& config, int jobs) {
    const CorpusManifest manifest = load_manifest(corpus_dir);
    std::vector<const ManifestEntry*> holdout;
    for (const auto& e : manifest.entries)
        if (e.holdout) holdout.push_back(&e);
    std::vector<std::optional<FormatSample>> loaded(holdout.size());
    parallel_for(holdout.size(), jobs, [&](std::size_t i) {
        loaded[i] = FormatSample{load_entry_image(corpus_dir, *holdout[i]), holdout[i]->shape};
    });
    std::vector<FormatSample> samples;
    for (auto& s : loaded) samples.push_back(std::move(*s));
    return compare_formats(samples, config, jobs);
}

AvScore av_component_accuracy(const VesselMask& pred, const VesselMask& truth) {
    if (pred.width() != truth.width() || pred.height() != truth.height()) {
        fail(ErrorCode::dimension_mismatch, "vessel masks differ in size");
    }
    const auto comps = raster::label_components(pred.vessel);
    struct Tally {
        std::size_t pixels = 0, on_truth = 0, artery = 0, vein = 0;
        AvLabel label = AvLabel::none;
    };
    std::vector<Tally> t(comps.count + 1);
    for (std::size_t i = 0; i < pred.vessel.size(); ++i) {
        const int c = comps.labels[i];
        if (c == 0) continue;
        auto& tc = t[c];
        ++tc.pixels;
        tc.label = pred.av[i];
        if (truth.vessel.bits()[i]) {
            ++tc.on_truth;
            if (truth.av[i] == AvLabel::artery) ++tc.artery;
            if (truth.av[i] == AvLabel::vein) ++tc.vein;
        }
    }
    AvScore score;
    for (int c = 1; c <= comps.count; ++c) {
        const auto& tc = t[c];
        if (2 * tc.on_truth <= tc.pixels || tc.artery == tc.vein) continue;
        ++score.counted;
        const AvLabel majority = tc.artery > tc.vein ? AvLabel::artery : AvLabel::vein;
        if (tc.label == majority) ++score.correct;
    }
    return score;
}

EvaluationReport evaluate_predictions(const std::filesystem::path& corpus_dir, const std::filesystem::path& pred_dir) {
    const CorpusManifest manifest = load_manifest(corpus_dir);
    SegmentationAccumulator onh, macula, vessels;
    std::vector<std::string> shape_p, shape_t, cal_p, cal_t, ref_p, ref_t;
    std::size_t onh_hits = 0, mac_hits = 0, av_counted = 0, av_correct = 0;
    const std::size_t n = manifest.entries.size();
    auto read_json = [](const std::filesystem::path& p) {
        const Bytes raw = read_file(p);
        return parse_json(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()));
    };
    for (const auto& e : manifest.entries) {
        const auto pdir = pred_dir / e.id;
        if (!std::filesystem::is_directory(pdir)) fail(ErrorCode::io, "no predictions for " + e.id);
        const Json truth = read_json(corpus_dir / (e.id + "_truth.json"));
        const EllipseFit disc = truth.at("disc").get<EllipseFit>();
        const double fx = truth.at("fovea")[0].get<double>(), fy = truth.at("fovea")[1].get<double>();
        const Json rois = read_json(pdir / "rois.json");
        const Json findings = read_json(pdir / "findings.json");

        const BinaryMask onh_truth = decode_mask_png(read_file(corpus_dir / e.onh_mask));
        const BinaryMask mac_truth = decode_mask_png(read_file(corpus_dir / e.macula_mask));
        const VesselMask ves_truth = decode_av_png(read_file(corpus_dir / e.av_map));
        const BinaryMask empty(onh_truth.width(), onh_truth.height());
        auto pred_mask = [&](const char* name) {
            const auto p = pdir / name;
            return std::filesystem::exists(p) ? decode_mask_png(read_file(p)) : empty;
        };
        onh.add(pred_mask("onh_mask.png"), onh_truth);
        macula.add(pred_mask("macula_mask.png"), mac_truth);
        const auto av_path = pdir / "av_map.png";
        const VesselMask ves_pred = std::filesystem::exists(av_path) ? decode_av_png(read_file(av_path)) : VesselMask(empty);
        vessels.add(ves_pred.vessel, ves_truth.vessel);
        const AvScore av = av_component_accuracy(ves_pred, ves_truth);
        av_counted += av.counted;
        av_correct += av.correct;

        if (!rois.at("onh").is_null()) {
            const RoiBox r = rois.at("onh").get<RoiBox>();
            if (std::hypot(r.center_x() - disc.cx, r.center_y() - disc.cy) <= 0.5 * disc.a) ++onh_hits;
        }
        if (!rois.at("macula").is_null()) {
            const RoiBox r = rois.at("macula").get<RoiBox>();
            if (std::hypot(r.center_x() - fx, r.center_y() - fy) <= 0.5 * 2.0 * disc.a) ++mac_hits;
        }
        shape_t.emplace_back(to_string(e.shape));
        shape_p.push_back(findings.at("onh").is_null() ? "failed" : findings.at("onh").at("shape").get<std::string>());
        cal_t.emplace_back(to_string(e.caliber));
        cal_p.push_back(findings.at("vessels").is_null() ? "failed"
                                                           : findings.at("vessels").at("caliber").get<std::string>());
        ref_t.emplace_back(to_string(e.reflex));
        ref_p.push_back(findings.at("macula").is_null() ? "failed"
                                                          : findings.at("macula").at("reflex").get<std::string>());
    }
    EvaluationReport report;
    report.segmentation["onh"] = onh.summary();
    report.segmentation["macula"] = macula.summary();
    report.segmentation["vessels"] = vessels.summary();
    report.classification["shape"] = summarize(shape_p, shape_t, {"round", "oval_vertical", "oval_horizontal", "failed"});
    report.classification["caliber"] =
        summarize(cal_p, cal_t, {"narrowed", "normal", "widened", "indeterminate", "failed"});
    report.classification["reflex"] = summarize(ref_p, ref_t, {"present", "absent", "failed"});
    if (n > 0) {
        report.localization["onh_hit_rate"] = double(onh_hits) / double(n);
        report.localization["macula_hit_rate"] = double(mac_hits) / double(n);
    }
    report.localization["av_component_accuracy"] = av_counted ? double(av_correct) / double(av_counted) : 1.0;
    return report;
}

}  // namespace eyas
