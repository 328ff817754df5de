#include "eyas/json_io.hpp"

#include "eyas/error.hpp"

namespace eyas {

namespace {

template <class T>
T req(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(ErrorCode::format, std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::format, std::string("bad field '") + key + "': " + e.what());
    }
}

template <class T>
std::optional<T> opt(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return req<T>(j, key);
}

}  // namespace

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorCode::format, std::string("invalid JSON: ") + e.what());
    }
}

void to_json(Json& j, const RoiBox& v) {
    j = Json{{"x", v.x},
             {"y", v.y},
             {"w", v.w},
             {"h", v.h},
             {"structure", to_string(v.structure)},
             {"confidence", v.confidence}};
}

void from_json(const Json& j, RoiBox& v) {
    v.x = req<int>(j, "x");
    v.y = req<int>(j, "y");
    v.w = req<int>(j, "w");
    v.h = req<int>(j, "h");
    v.structure = parse_structure(req<std::string>(j, "structure"));
    v.confidence = req<double>(j, "confidence");
    if (v.x < 0 || v.y < 0 || v.w <= 0 || v.h <= 0) fail(ErrorCode::format, "roi has negative origin or empty size");
    if (!(v.confidence >= 0.0 && v.confidence <= 1.0)) fail(ErrorCode::format, "roi confidence outside [0,1]");
}

void to_json(Json& j, const EllipseFit& v) {
    j = Json{{"cx", v.cx}, {"cy", v.cy}, {"a", v.a}, {"b", v.b}, {"theta", v.theta}, {"eccentricity", v.eccentricity}};
}

void from_json(const Json& j, EllipseFit& v) {
    v = make_ellipse(req<double>(j, "cx"), req<double>(j, "cy"), req<double>(j, "a"), req<double>(j, "b"),
                     req<double>(j, "theta"));
}

void to_json(Json& j, const OnhFindings& v) {
    j = Json{{"shape", to_string(v.shape)},
             {"eccentricity", v.eccentricity},
             {"theta", v.theta},
             {"disc_diameter_px", v.disc_diameter_px},
             {"cx", v.cx},
             {"cy", v.cy},
             {"source_backend", v.source_backend},
             {"confidence", v.confidence}};
}

void from_json(const Json& j, OnhFindings& v) {
    v.shape = parse_shape(req<std::string>(j, "shape"));
    v.eccentricity = req<double>(j, "eccentricity");
    v.theta = opt<double>(j, "theta").value_or(0.0);
    v.disc_diameter_px = req<double>(j, "disc_diameter_px");
    v.cx = opt<double>(j, "cx").value_or(0.0);
    v.cy = opt<double>(j, "cy").value_or(0.0);
    v.source_backend = req<std::string>(j, "source_backend");
    v.confidence = req<double>(j, "confidence");
}

void to_json(Json& j, const MaculaFindings& v) {
    j = Json{{"reflex", to_string(v.reflex)}, {"reflex_ratio", v.reflex_ratio}, {"source_backend", v.source_backend}};
}

void from_json(const Json& j, MaculaFindings& v) {
    v.reflex = parse_reflex(req<std::string>(j, "reflex"));
    v.reflex_ratio = req<double>(j, "reflex_ratio");
    v.source_backend = req<std::string>(j, "source_backend");
}

void to_json(Json& j, const VesselFindings& v) {
    j = Json{{"avr", v.avr},
             {"normalized_artery_caliber", nullptr},
             {"caliber", to_string(v.caliber)},
             {"artery_width_px", v.artery_width_px},
             {"vein_width_px", v.vein_width_px},
             {"source_backend", v.source_backend}};
    if (v.normalized_artery_caliber) j["normalized_artery_caliber"] = *v.normalized_artery_caliber;
}

void from_json(const Json& j, VesselFindings& v) {
    v.avr = req<double>(j, "avr");
    v.normalized_artery_caliber = opt<double>(j, "normalized_artery_caliber");
    v.caliber = parse_caliber(req<std::string>(j, "caliber"));
    v.artery_width_px = opt<double>(j, "artery_width_px").value_or(0.0);
    v.vein_width_px = opt<double>(j, "vein_width_px").value_or(0.0);
    v.source_backend = req<std::string>(j, "source_backend");
}

void to_json(Json& j, const ReportDraft& v) {
    Json sections = Json::object();
    sections["onh"] = v.onh ? Json(*v.onh) : Json(nullptr);
    sections["macula"] = v.macula ? Json(*v.macula) : Json(nullptr);
    sections["vessels"] = v.vessels ? Json(*v.vessels) : Json(nullptr);
    Json prov = Json::object();
    for (const auto& [k, p] : v.provenance) prov[k] = Json{{"backend", p.backend}, {"timestamp", p.timestamp}};
    j = Json{{"report_id", v.report_id},
             {"image_id", v.image_id},
             {"sections", sections},
             {"text", v.text},
             {"status", to_string(v.status)},
             {"provenance", prov},
             {"edited_text", v.edited_text ? Json(*v.edited_text) : Json(nullptr)},
             {"approved_at", v.approved_at ? Json(*v.approved_at) : Json(nullptr)}};
}

void from_json(const Json& j, ReportDraft& v) {
    v.report_id = req<std::string>(j, "report_id");
    v.image_id = req<std::string>(j, "image_id");
    const Json& s = j.at("sections");
    v.onh = opt<OnhFindings>(s, "onh");
    v.macula = opt<MaculaFindings>(s, "macula");
    v.vessels = opt<VesselFindings>(s, "vessels");
    v.text = req<std::string>(j, "text");
    const auto status = req<std::string>(j, "status");
    if (status == "draft") v.status = ReportStatus::draft;
    else if (status == "approved") v.status = ReportStatus::approved;
    else fail(ErrorCode::format, "unknown report status '" + status + "'");
    v.provenance.clear();
    if (auto it = j.find("provenance"); it != j.end()) {
        for (const auto& [k, p] : it->items()) {
            v.provenance[k] = {req<std::string>(p, "backend"), req<std::string>(p, "timestamp")};
        }
    }
    v.edited_text = opt<std::string>(j, "edited_text");
    v.approved_at = opt<std::string>(j, "approved_at");
}

void to_json(Json& j, const BackendDescriptor& v) {
    j = Json{{"name", v.name},
             {"version", v.version},
             {"structure", to_string(v.structure)},
             {"kind", v.kind == BackendKind::builtin ? "builtin" : "remote"}};
    if (v.kind == BackendKind::remote) j["endpoint"] = v.endpoint;
}

void from_json(const Json& j, BackendDescriptor& v) {
    v.name = req<std::string>(j, "name");
    v.version = req<std::string>(j, "version");
    v.structure = parse_structure(req<std::string>(j, "structure"));
    const auto kind = opt<std::string>(j, "kind").value_or("remote");
    if (kind == "builtin") v.kind = BackendKind::builtin;
    else if (kind == "remote") v.kind = BackendKind::remote;
    else fail(ErrorCode::format, "unknown backend kind '" + kind + "'");
    v.endpoint = opt<std::string>(j, "endpoint").value_or("");
}

void to_json(Json& j, const ManifestEntry& v) {
    j = Json{{"id", v.id},
             {"image", v.image},
             {"onh_mask", v.onh_mask},
             {"macula_mask", v.macula_mask},
             {"vessel_mask", v.vessel_mask},
             {"av_map", v.av_map},
             {"labels", {{"shape", to_string(v.shape)}, {"caliber", to_string(v.caliber)}, {"reflex", to_string(v.reflex)}}},
             {"laterality", to_string(v.laterality)},
             {"split", v.holdout ? "holdout" : "train"}};
}

void from_json(const Json& j, ManifestEntry& v) {
    v.id = req<std::string>(j, "id");
    v.image = req<std::string>(j, "image");
    v.onh_mask = req<std::string>(j, "onh_mask");
    v.macula_mask = req<std::string>(j, "macula_mask");
    v.vessel_mask = req<std::string>(j, "vessel_mask");
    v.av_map = req<std::string>(j, "av_map");
    auto labels = j.find("labels");
    if (labels == j.end() || !labels->is_object()) fail(ErrorCode::missing_labels, "entry " + v.id + " has no labels");
    for (const char* key : {"shape", "caliber", "reflex"}) {
        if (!labels->contains(key)) fail(ErrorCode::missing_labels, "entry " + v.id + " lacks label " + key);
    }
    v.shape = parse_shape(req<std::string>(*labels, "shape"));
    v.caliber = parse_caliber(req<std::string>(*labels, "caliber"));
    v.reflex = parse_reflex(req<std::string>(*labels, "reflex"));
    v.laterality = parse_laterality(opt<std::string>(j, "laterality").value_or("unknown"));
    const auto split = req<std::string>(j, "split");
    if (split != "train" && split != "holdout") fail(ErrorCode::format, "unknown split '" + split + "'");
    v.holdout = split == "holdout";
}

void to_json(Json& j, const CorpusManifest& v) { j = Json{{"version", v.version}, {"entries", v.entries}}; }

void from_json(const Json& j, CorpusManifest& v) {
    v.version = req<int>(j, "version");
    if (v.version != 1) fail(ErrorCode::format, "unsupported manifest version");
    v.entries = req<std::vector<ManifestEntry>>(j, "entries");
}

void to_json(Json& j, const FormatReport& v) {
    Json rows = Json::array();
    for (const auto& r : v.formats) {
        rows.push_back({{"format", to_string(r.format)}, {"accuracy", r.accuracy}, {"per_class", r.per_class},
                        {"evaluated", r.evaluated}});
    }
    j = Json{{"formats", rows}, {"holdout_size", v.holdout_size}};
}

void to_json(Json& j, const EvaluationReport& v) {
    Json seg = Json::object();
    for (const auto& [k, s] : v.segmentation) {
        seg[k] = {{"mean_iou", s.mean_iou},
                  {"mean_dice", s.mean_dice},
                  {"mean_precision", s.mean_precision},
                  {"mean_recall", s.mean_recall},
                  {"count", s.count}};
    }
    Json cls = Json::object();
    for (const auto& [k, c] : v.classification) {
        cls[k] = {{"accuracy", c.accuracy}, {"per_class", c.per_class}, {"count", c.count}};
    }
    j = Json{{"segmentation", seg}, {"classification", cls}, {"localization", v.localization}};
}

void to_json(Json& j, const ConfusionMatrix& v) { j = Json{{"labels", v.labels}, {"counts", v.counts}}; }

// Config: one field list per struct drives both directions.
namespace {

void put(Json& j, const ChannelWeights& w) { j = Json::array({w.r, w.g, w.b}); }
void take(const Json& j, ChannelWeights& w) {
    if (!j.is_array() || j.size() != 3) fail(ErrorCode::format, "channel weights must be [r,g,b]");
    w = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
template <class T>
void put(Json& j, const T& v) {
    j = v;
}
void put(Json& j, const std::filesystem::path& p) { j = p.string(); }
template <class T>
void take(const Json& j, T& v) {
    try {
        v = j.get<T>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::format, std::string("config: ") + e.what());
    }
}
void take(const Json& j, std::filesystem::path& p) { p = j.get<std::string>(); }

#define EYAS_FIELD(name) f(#name, s.name)

template <class F>
void fields_of(EnsembleWeights& s, F&& f) {
    EYAS_FIELD(brightness);
    EYAS_FIELD(template_match);
    EYAS_FIELD(edges);
}

template <class F>
void fields_of(LocalizerConfig& s, F&& f) {
    EYAS_FIELD(red_weighted);
    EYAS_FIELD(expected_disc_fraction);
    EYAS_FIELD(template_scales);
    EYAS_FIELD(weights);
    EYAS_FIELD(brightness_smoothing);
    EYAS_FIELD(edge_window);
    EYAS_FIELD(roi_scale);
    EYAS_FIELD(band_min_dd);
    EYAS_FIELD(band_max_dd);
    EYAS_FIELD(band_half_angle_deg);
    EYAS_FIELD(darkness_smoothing);
    EYAS_FIELD(macula_roi_dd);
    EYAS_FIELD(fov_threshold);
}

template <class F>
void fields_of(RegionSegmentation& s, F&& f) {
    EYAS_FIELD(channels);
    EYAS_FIELD(presmooth);
    EYAS_FIELD(clahe_tiles);
    EYAS_FIELD(clahe_clip);
    EYAS_FIELD(structure_percentile);
    EYAS_FIELD(surround_percentile);
    EYAS_FIELD(min_contrast);
    EYAS_FIELD(close_radius);
    EYAS_FIELD(min_component);
    EYAS_FIELD(roi_dilation);
}

template <class F>
void fields_of(VesselSegmentation& s, F&& f) {
    EYAS_FIELD(green_weighted);
    EYAS_FIELD(presmooth);
    EYAS_FIELD(line_fraction);
    EYAS_FIELD(orientations);
    EYAS_FIELD(k_sigma);
    EYAS_FIELD(min_component);
    EYAS_FIELD(fov_erosion);
    EYAS_FIELD(fov_threshold);
}

template <class F>
void fields_of(SegmenterConfig& s, F&& f) {
    EYAS_FIELD(onh);
    EYAS_FIELD(macula);
    EYAS_FIELD(vessels);
}

template <class F>
void fields_of(ClassifierConfig& s, F&& f) {
    EYAS_FIELD(round_max_eccentricity);
    EYAS_FIELD(vertical_tolerance);
    EYAS_FIELD(confidence_span);
    EYAS_FIELD(crude_percentile);
    EYAS_FIELD(crude_channels);
    EYAS_FIELD(caliber_narrow_below);
    EYAS_FIELD(caliber_wide_above);
    EYAS_FIELD(annulus_min_dd);
    EYAS_FIELD(annulus_max_dd);
    EYAS_FIELD(reflex_threshold);
    EYAS_FIELD(reflex_center);
    EYAS_FIELD(reflex_annulus_min);
    EYAS_FIELD(reflex_annulus_max);
    EYAS_FIELD(reflex_smoothing);
}

template <class F>
void fields_of(ServicePorts& s, F&& f) {
    EYAS_FIELD(client_gateway);
    EYAS_FIELD(internal_gateway);
    EYAS_FIELD(onh);
    EYAS_FIELD(macula);
    EYAS_FIELD(vessels);
    EYAS_FIELD(report);
}

template <class F>
void fields_of(ServiceConfig& s, F&& f) {
    EYAS_FIELD(host);
    EYAS_FIELD(ports);
    EYAS_FIELD(data_dir);
    EYAS_FIELD(onh_wait_seconds);
    EYAS_FIELD(call_timeout_seconds);
    EYAS_FIELD(max_upload_bytes);
    EYAS_FIELD(job_workers);
    EYAS_FIELD(active_backends);
    EYAS_FIELD(faults);
}

template <class F>
void fields_of(ReportTemplates& s, F&& f) {
    EYAS_FIELD(onh);
    EYAS_FIELD(macula);
    EYAS_FIELD(vessels);
    EYAS_FIELD(vessels_unnormalized);
    EYAS_FIELD(not_assessed);
    EYAS_FIELD(words);
}

template <class F>
void fields_of(Config& s, F&& f) {
    EYAS_FIELD(localizer);
    EYAS_FIELD(segmenter);
    EYAS_FIELD(classifier);
    EYAS_FIELD(service);
    EYAS_FIELD(templates);
}

#undef EYAS_FIELD

template <class S>
concept Record = requires(S& s) { fields_of(s, [](const char*, auto&) {}); };

template <class S>
void write_record(Json& j, S& s) {
    j = Json::object();
    fields_of(s, [&](const char* name, auto& field) {
        using T = std::remove_cvref_t<decltype(field)>;
        if constexpr (Record<T>) write_record(j[name], field);
        else put(j[name], field);
    });
}

template <class S>
void merge_record(const Json& j, S& s, const std::string& path) {
    if (!j.is_object()) fail(ErrorCode::format, "config: '" + path + "' must be an object");
    for (const auto& [key, _] : j.items()) {
        bool known = false;
        fields_of(s, [&](const char* name, auto&) { known = known || key == name; });
        if (!known) fail(ErrorCode::format, "config: unknown key '" + path + key + "'");
    }
    fields_of(s, [&](const char* name, auto& field) {
        auto it = j.find(name);
        if (it == j.end()) return;
        using T = std::remove_cvref_t<decltype(field)>;
        if constexpr (Record<T>) merge_record(*it, field, path + name + ".");
        else take(*it, field);
    });
}

}  // namespace

void to_json(Json& j, const Config& v) {
    Config copy = v;
    write_record(j, copy);
}

void merge_config(const Json& j, Config& v) { merge_record(j, v, ""); }

}  // namespace eyas
