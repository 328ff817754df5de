#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "eyas/image.hpp"

namespace eyas {

struct EnsembleWeights {
    double brightness = 0.4;
    double template_match = 0.4;
    double edges = 0.2;
};

struct LocalizerConfig {
    ChannelWeights red_weighted{0.5, 0.4, 0.1};
    /// Expected disc diameter as a fraction of image height.
    double expected_disc_fraction = 0.15;
    std::array<double, 3> template_scales{0.10, 0.15, 0.20};
    EnsembleWeights weights;
    /// Box widths, as multiples of the expected disc diameter.
    double brightness_smoothing = 0.25;
    double edge_window = 1.0;
    double roi_scale = 1.5;

    double band_min_dd = 2.0;
    double band_max_dd = 3.0;
    double band_half_angle_deg = 30.0;
    double darkness_smoothing = 0.5;
    double macula_roi_dd = 1.0;
    /// Luma level separating the fundus aperture from the black surround.
    int fov_threshold = 20;
};

struct RegionSegmentation {
    ChannelWeights channels;
    int presmooth = 3;
    int clahe_tiles = 2;
    double clahe_clip = 2.0;
    /// Percentile anchoring the structure's own intensity level.
    double structure_percentile = 80.0;
    /// Percentile anchoring the surround; a negative value thresholds
    /// directly at structure_percentile.
    double surround_percentile = -1.0;
    /// Below this spread between the two anchors the region is flat.
    double min_contrast = 8.0;
    int close_radius = 3;
    std::size_t min_component = 50;
    double roi_dilation = 0.10;
};

struct VesselSegmentation {
    ChannelWeights green_weighted{0.1, 0.8, 0.1};
    int presmooth = 1;  // box width; 1 disables
    double line_fraction = 0.03;
    int orientations = 12;
    double k_sigma = 2.0;
    std::size_t min_component = 30;
    int fov_erosion = 3;
    int fov_threshold = 20;
};

struct SegmenterConfig {
    RegionSegmentation onh{{0.5, 0.4, 0.1}, 3, 2, 2.0, 80.0, 30.0, 8.0, 3, 50, 0.10};
    RegionSegmentation macula{{0.299, 0.587, 0.114}, 5, 2, 2.0, 20.0, -1.0, 8.0, 3, 50, 0.10};
    VesselSegmentation vessels;
};

struct ClassifierConfig {
    double round_max_eccentricity = 0.45;
    /// |theta - pi/2| below this counts as vertical.
    double vertical_tolerance = 0.7853981633974483;
    double confidence_span = 0.15;
    double crude_percentile = 80.0;
    ChannelWeights crude_channels{0.5, 0.4, 0.1};

    double caliber_narrow_below = 0.05;
    double caliber_wide_above = 0.09;
    double annulus_min_dd = 1.0;
    double annulus_max_dd = 1.5;

    double reflex_threshold = 1.15;
    double reflex_center = 0.1;
    double reflex_annulus_min = 0.2;
    double reflex_annulus_max = 0.4;
    int reflex_smoothing = 3;
};

struct ServicePorts {
    int client_gateway = 8080;
    int internal_gateway = 8090;
    int onh = 8091;
    int macula = 8092;
    int vessels = 8093;
    int report = 8094;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    ServicePorts ports;
    std::filesystem::path data_dir = "eyas-data";
    double onh_wait_seconds = 30.0;
    double call_timeout_seconds = 120.0;
    std::size_t max_upload_bytes = 64u << 20;
    int job_workers = 4;
    /// Active backend per structure, as name@version.
    std::map<std::string, std::string> active_backends;
    /// Structures whose service answers every analysis with 503 (fault injection).
    std::map<std::string, bool> faults;
};

struct ReportTemplates {
    std::string onh = "Optic disc: {shape} shape (eccentricity {eccentricity}).";
    std::string macula = "Macula: foveal reflex {reflex}.";
    std::string vessels = "Vessels: artery caliber {caliber}; artery-to-vein ratio {avr}.";
    std::string vessels_unnormalized =
        "Vessels: caliber not normalized (optic disc unavailable); artery-to-vein ratio {avr}.";
    std::string not_assessed = "{structure}: not assessed.";
    std::map<std::string, std::string> words{
        {"round", "round"},
        {"oval_vertical", "vertically oval"},
        {"oval_horizontal", "horizontally oval"},
        {"present", "present"},
        {"absent", "absent"},
        {"narrowed", "narrowed"},
        {"normal", "normal"},
        {"widened", "widened"},
        {"onh", "Optic disc"},
        {"macula", "Macula"},
        {"vessels", "Vessels"},
    };
};

struct Config {
    LocalizerConfig localizer;
    SegmenterConfig segmenter;
    ClassifierConfig classifier;
    ServiceConfig service;
    ReportTemplates templates;
};

/// Reads a JSON config file; keys that are absent keep their defaults.
Config load_config(const std::filesystem::path& path);
/// Explicit path wins, then EYAS_CONFIG, then built-in defaults.
Config resolve_config(const std::optional<std::filesystem::path>& explicit_path);

}  // namespace eyas
