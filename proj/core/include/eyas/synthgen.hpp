#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eyas/findings.hpp"
#include "eyas/image.hpp"

namespace eyas {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct ClassMix {
    std::array<double, 3> shape{1.0 / 3, 1.0 / 3, 1.0 / 3};    // round, oval_vertical, oval_horizontal
    std::array<double, 3> caliber{1.0 / 3, 1.0 / 3, 1.0 / 3};  // narrowed, normal, widened
    std::array<double, 2> reflex{0.5, 0.5};                    // present, absent
};

struct GenParams {
    int img_w = 512;
    int img_h = 512;
    ClassMix class_mix;
    double noise_sigma = 8.0;
};

struct SynthVessel {
    /// Quadratic Bezier control points; the stroke starts at p0 on the disc rim.
    Point p0, p1, p2;
    std::vector<Point> polyline;
    double width = 0.0;      // at p0
    double end_width = 0.0;  // at p2, linear taper in between
    AvLabel av = AvLabel::artery;
};

struct SynthScene {
    std::uint64_t seed = 0;
    int img_w = 0;
    int img_h = 0;
    EllipseFit disc;
    Point fovea;
    Laterality laterality = Laterality::right;
    std::vector<SynthVessel> vessels;
    bool reflex_present = false;
    ShapeLabel shape_label = ShapeLabel::round;
    CaliberLabel caliber_label = CaliberLabel::normal;
    double noise_sigma = 0.0;

    /// Rendering parameters that are not ground truth as such.
    Point aperture_center;
    double aperture_radius = 0.0;
    double illumination = 1.0;
    /// Normalized artery caliber the widths were built for.
    double artery_caliber = 0.0;

    double disc_diameter() const noexcept { return 2.0 * disc.a; }
};

struct RenderedScene {
    FundusImage image;
    BinaryMask onh_mask;
    BinaryMask macula_mask;
    VesselMask vessel_truth;
};

/// Truth macula radius, in disc diameters.
inline constexpr double kMaculaTruthRadiusDd = 0.25;

SynthScene gen_scene(const GenParams& params, std::uint64_t seed);
RenderedScene render(const SynthScene& scene);

/// Same anatomy with every length multiplied by `factor` (image size included).
SynthScene scale_scene(const SynthScene& scene, double factor);
/// Same anatomy shifted by (dx, dy) pixels within an unchanged frame.
SynthScene translate_scene(const SynthScene& scene, double dx, double dy);

/// Mean artery stroke width over the 1.0-1.5 disc diameter annulus.
double annulus_artery_width(const SynthScene& scene);

struct ManifestEntry {
    std::string id;
    std::string image;
    std::string onh_mask;
    std::string macula_mask;
    std::string vessel_mask;
    std::string av_map;
    ShapeLabel shape = ShapeLabel::round;
    CaliberLabel caliber = CaliberLabel::normal;
    ReflexLabel reflex = ReflexLabel::absent;
    /// Acquisition metadata, not ground truth.
    Laterality laterality = Laterality::unknown;
    bool holdout = false;
};

struct CorpusManifest {
    int version = 1;
    std::vector<ManifestEntry> entries;
};

/// Indices sent to the 20% holdout split: order by a hash of (seed, index)
/// and take the first round(0.2 n).
std::vector<bool> holdout_split(std::size_t n, std::uint64_t seed);

/// Scenes use seeds derived from (seed, index). `jobs` > 1 renders in parallel.
CorpusManifest gen_corpus(int n, const GenParams& params, std::uint64_t seed,
                          const std::filesystem::path& out_dir, int jobs = 1);
std::uint64_t scene_seed(std::uint64_t corpus_seed, std::size_t index);

CorpusManifest load_manifest(const std::filesystem::path& corpus_dir);

}  // namespace eyas
