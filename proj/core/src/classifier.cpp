#include "eyas/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eyas/error.hpp"
#include "eyas/raster.hpp"
#include "eyas/segmenter.hpp"

namespace eyas {

std::string_view to_string(InputFormat format) noexcept {
    switch (format) {
        case InputFormat::image: return "image";
        case InputFormat::local_onh: return "local_onh";
        case InputFormat::mask: return "mask";
        case InputFormat::mask_plus_local: return "mask_plus_local";
    }
    return "image";
}

InputFormat parse_format(std::string_view text) {
    for (auto f : kAllFormats)
        if (to_string(f) == text) return f;
    fail(ErrorCode::format, "unknown input format '" + std::string(text) + "'");
}

int ClassifierInput::width() const { return image ? image->width() : mask ? mask->width() : 0; }
int ClassifierInput::height() const { return image ? image->height() : mask ? mask->height() : 0; }
int ClassifierInput::channels() const { return (image ? 3 : 0) + (mask ? 1 : 0); }

ClassifierInput make_input(const FundusImage& image, const std::optional<RoiBox>& roi,
                           const std::optional<BinaryMask>& mask, InputFormat format) {
    const bool local = format == InputFormat::local_onh || format == InputFormat::mask_plus_local;
    const bool masked = format == InputFormat::mask || format == InputFormat::mask_plus_local;
    if (local && !roi) fail(ErrorCode::format, std::string(to_string(format)) + " input needs an roi");
    if (masked && !mask) fail(ErrorCode::format, std::string(to_string(format)) + " input needs a mask");
    if (masked && (mask->width() != image.width() || mask->height() != image.height())) {
        fail(ErrorCode::dimension_mismatch, "mask and image differ in size");
    }
    ClassifierInput in;
    in.format = format;
    switch (format) {
        case InputFormat::image: in.image = image; break;
        case InputFormat::local_onh:
            in.image = crop(image, *roi);
            in.offset_x = roi->x;
            in.offset_y = roi->y;
            break;
        case InputFormat::mask: in.mask = *mask; break;
        case InputFormat::mask_plus_local:
            in.image = crop(image, *roi);
            in.mask = crop(*mask, *roi);
            in.offset_x = roi->x;
            in.offset_y = roi->y;
            break;
    }
    return in;
}

ShapeLabel shape_from_ellipse(const EllipseFit& fit, const ClassifierConfig& config) {
    if (fit.eccentricity < config.round_max_eccentricity) return ShapeLabel::round;
    return std::abs(fit.theta - std::numbers::pi / 2) <= config.vertical_tolerance ? ShapeLabel::oval_vertical
                                                                                   : ShapeLabel::oval_horizontal;
}

double shape_confidence(double eccentricity, const ClassifierConfig& config) {
    const double d = std::abs(eccentricity - config.round_max_eccentricity);
    return 0.5 + 0.5 * std::min(1.0, d / config.confidence_span);
}

namespace {

int odd(double v) {
    int w = std::max(1, static_cast<int>(std::lround(v)));
    return w % 2 == 0 ? w + 1 : w;
}

// Bright-region threshold inside `window` of `gray`, largest component, holes
// filled; coordinates stay those of `gray`.
BinaryMask crude_region(const GrayImage& gray, const RoiBox& window, double q) {
    const GrayImage part = crop(gray, window);
    const double t = raster::percentile(part.pixels(), q);
    BinaryMask local(part.width(), part.height());
    for (int y = 0; y < part.height(); ++y)
        for (int x = 0; x < part.width(); ++x) local.set(x, y, part.at(x, y) >= t);
    local = raster::fill_holes(raster::largest_component(local));
    BinaryMask out(gray.width(), gray.height());
    for (int y = 0; y < part.height(); ++y)
        for (int x = 0; x < part.width(); ++x)
            if (local.at(x, y)) out.set(window.x + x, window.y + y, true);
    return out;
}

BinaryMask crude_mask(const FundusImage& image, InputFormat format, const ClassifierConfig& config) {
    const GrayImage gray = weighted_gray(image, config.crude_channels);
    if (format != InputFormat::image) {
        return crude_region(gray, {0, 0, gray.width(), gray.height(), Structure::onh, 0.0}, config.crude_percentile);
    }
    // A full frame is mostly not disc: find the brightest disc-sized blob
    // first and threshold a local window around it.
    const double dd = 0.15 * image.height();
    const ScoreMap smooth = raster::box_mean(raster::to_scores(gray), odd(0.25 * dd));
    int bx = 0, by = 0;
    double best = -1.0;
    for (int y = 0; y < smooth.height(); ++y)
        for (int x = 0; x < smooth.width(); ++x)
            if (smooth.at(x, y) > best) {
                best = smooth.at(x, y);
                bx = x;
                by = y;
            }
    const int side = std::min({static_cast<int>(std::lround(1.5 * dd)), gray.width(), gray.height()});
    RoiBox window{std::clamp(bx - side / 2, 0, gray.width() - side), std::clamp(by - side / 2, 0, gray.height() - side),
                  side, side, Structure::onh, 0.0};
    return crude_region(gray, window, config.crude_percentile);
}

}  // namespace

OnhFindings classify_onh_shape(const ClassifierInput& input, const ClassifierConfig& config,
                               const std::string& source_backend) {
    BinaryMask mask;
    switch (input.format) {
        case InputFormat::mask:
        case InputFormat::mask_plus_local:
            if (!input.mask) fail(ErrorCode::format, "mask input without a mask");
            mask = *input.mask;
            break;
        case InputFormat::image:
        case InputFormat::local_onh:
            if (!input.image) fail(ErrorCode::format, "image input without an image");
            mask = crude_mask(*input.image, input.format, config);
            break;
    }
    EllipseFit fit;
    try {
        fit = fit_ellipse(mask);
    } catch (const Error& e) {
        fail(ErrorCode::classification_failed, std::string("onh shape: ") + e.what());
    }
    OnhFindings f;
    f.shape = shape_from_ellipse(fit, config);
    f.eccentricity = fit.eccentricity;
    f.theta = fit.theta;
    f.disc_diameter_px = 2.0 * fit.a;
    f.cx = fit.cx + input.offset_x;
    f.cy = fit.cy + input.offset_y;
    f.source_backend = source_backend;
    f.confidence = shape_confidence(fit.eccentricity, config);
    return f;
}

CaliberLabel caliber_from_ratio(double c, const ClassifierConfig& config) {
    if (c < config.caliber_narrow_below) return CaliberLabel::narrowed;
    if (c > config.caliber_wide_above) return CaliberLabel::widened;
    return CaliberLabel::normal;
}

WidthSamples sample_vessel_widths(const VesselMask& vessels, std::optional<std::array<double, 4>> annulus) {
    // Measured on a 2x nearest-neighbour supersample: every width becomes an even
    // pixel count there, which removes the odd/even bias of a pixel-centre transform.
    constexpr int kUp = 2;
    const int w = vessels.width() * kUp;
    const int h = vessels.height() * kUp;
    BinaryMask up(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) up.set(x, y, vessels.vessel.at(x / kUp, y / kUp));
    const BinaryMask skel = raster::skeletonize(up);
    const std::vector<double> dist = raster::distance_transform(up);
    WidthSamples out;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!skel.at(x, y)) continue;
            if (annulus) {
                const auto [cx, cy, rmin, rmax] = *annulus;
                const double r = std::hypot((x + 0.5) / kUp - cx, (y + 0.5) / kUp - cy);
                if (r < rmin || r > rmax) continue;
            }
            const double width = 2.0 * dist[static_cast<std::size_t>(y) * w + x] / kUp;
            switch (vessels.label_at(x / kUp, y / kUp)) {
                case AvLabel::artery: out.artery.push_back(width); break;
                case AvLabel::vein: out.vein.push_back(width); break;
                case AvLabel::none: break;
            }
        }
    }
    return out;
}

VesselFindings classify_artery_caliber(const VesselMask& vessels, const std::optional<OnhFindings>& disc,
                                       const ClassifierConfig& config, const std::string& source_backend) {
    std::optional<std::array<double, 4>> annulus;
    if (disc) {
        const double dd = disc->disc_diameter_px;
        if (!(dd > 0.0)) fail(ErrorCode::invalid_argument, "disc diameter must be positive");
        annulus = std::array<double, 4>{disc->cx, disc->cy, config.annulus_min_dd * dd, config.annulus_max_dd * dd};
    }
    const WidthSamples s = sample_vessel_widths(vessels, annulus);
    if (s.artery.empty() || s.vein.empty()) {
        fail(ErrorCode::insufficient_vessels,
             std::string("no ") + (s.artery.empty() ? "artery" : "vein") + " centreline" +
                 (disc ? " in the caliber annulus" : ""));
    }
    auto mean = [](const std::vector<double>& v) {
        double sum = 0.0;
        for (double x : v) sum += x;
        return sum / double(v.size());
    };
    VesselFindings f;
    f.artery_width_px = mean(s.artery);
    f.vein_width_px = mean(s.vein);
    f.avr = f.artery_width_px / f.vein_width_px;
    f.source_backend = source_backend;
    if (disc) {
        f.normalized_artery_caliber = f.artery_width_px / disc->disc_diameter_px;
        f.caliber = caliber_from_ratio(*f.normalized_artery_caliber, config);
    } else {
        f.caliber = CaliberLabel::indeterminate;
    }
    return f;
}

MaculaFindings classify_macular_reflex(const FundusImage& image, const RoiBox& roi, const ClassifierConfig& config,
                                       const std::string& source_backend) {
    if (roi.w < 10 || roi.h < 10) fail(ErrorCode::roi_too_small, "macula roi is smaller than 10 px");
    if (!roi.fits(image.width(), image.height())) fail(ErrorCode::bounds, "macula roi outside the image");
    const GrayImage luma = raster::box_mean(crop(to_gray(image, ChannelMix::luma), roi), config.reflex_smoothing);
    const double side = std::min(roi.w, roi.h);
    const double cx = roi.w / 2.0, cy = roi.h / 2.0;
    double cs = 0, as = 0;
    std::size_t cn = 0, an = 0;
    for (int y = 0; y < roi.h; ++y) {
        for (int x = 0; x < roi.w; ++x) {
            const double r = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
            if (r <= config.reflex_center * side) {
                cs += luma.at(x, y);
                ++cn;
            } else if (r >= config.reflex_annulus_min * side && r <= config.reflex_annulus_max * side) {
                as += luma.at(x, y);
                ++an;
            }
        }
    }
    const double mc = cn ? cs / cn : 0.0;
    const double ma = an ? as / an : 0.0;
    MaculaFindings f;
    if (ma > 0.0) f.reflex_ratio = std::max(mc / ma, 1e-6);
    else f.reflex_ratio = mc > 0.0 ? 1e6 : 1.0;
    f.reflex = f.reflex_ratio >= config.reflex_threshold ? ReflexLabel::present : ReflexLabel::absent;
    f.source_backend = source_backend;
    return f;
}

}  // namespace eyas
