#include "eyas/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eyas/error.hpp"
#include "eyas/localizer.hpp"
#include "eyas/raster.hpp"

namespace eyas {

RoiBox dilate_roi(const RoiBox& roi, double fraction, int width, int height) {
    const int mx = static_cast<int>(std::lround(fraction * roi.w / 2.0));
    const int my = static_cast<int>(std::lround(fraction * roi.h / 2.0));
    RoiBox out = roi;
    out.x = std::max(0, roi.x - mx);
    out.y = std::max(0, roi.y - my);
    out.w = std::min(width, roi.x + roi.w + mx) - out.x;
    out.h = std::min(height, roi.y + roi.h + my) - out.y;
    return out;
}

namespace {

BinaryMask confine(const BinaryMask& mask, const RoiBox& region) {
    BinaryMask out(mask.width(), mask.height());
    for (int y = region.y; y < region.y + region.h; ++y)
        for (int x = region.x; x < region.x + region.w; ++x)
            if (mask.at(x, y)) out.set(x, y, true);
    return out;
}

BinaryMask checked_region(const FundusImage& image, const RoiBox& roi, const SegmentationBackend& backend,
                          const RegionSegmentation& config, Structure expected) {
    if (roi.structure != expected) {
        fail(ErrorCode::invalid_argument, std::string("roi is for ") + std::string(to_string(roi.structure)) +
                                               ", expected " + std::string(to_string(expected)));
    }
    if (!roi.fits(image.width(), image.height())) fail(ErrorCode::bounds, "roi outside the image");
    const BinaryMask raw = backend.segment_region(image, roi);
    if (raw.width() != image.width() || raw.height() != image.height()) {
        fail(ErrorCode::dimension_mismatch, "backend " + backend.descriptor().label() + " returned a " +
                                                std::to_string(raw.width()) + "x" + std::to_string(raw.height()) +
                                                " mask");
    }
    BinaryMask mask = confine(raw, dilate_roi(roi, config.roi_dilation, image.width(), image.height()));
    if (mask.count() < config.min_component) {
        fail(ErrorCode::segmentation_empty, std::string(to_string(expected)) + " segmentation is empty");
    }
    return mask;
}

}  // namespace

BinaryMask segment_onh(const FundusImage& image, const RoiBox& roi, const SegmentationBackend& backend,
                       const SegmenterConfig& config) {
    return checked_region(image, roi, backend, config.onh, Structure::onh);
}

BinaryMask segment_macula(const FundusImage& image, const RoiBox& roi, const SegmentationBackend& backend,
                          const SegmenterConfig& config) {
    return checked_region(image, roi, backend, config.macula, Structure::macula);
}

VesselMask segment_vessels(const FundusImage& image, const SegmentationBackend& backend) {
    VesselMask out = backend.segment_vessels(image);
    if (out.width() != image.width() || out.height() != image.height()) {
        fail(ErrorCode::dimension_mismatch, "backend " + backend.descriptor().label() + " returned a mask of the wrong size");
    }
    return out;
}

BinaryMask segment_region_classical(const FundusImage& image, const RoiBox& roi, const RegionSegmentation& config,
                                    bool bright) {
    const RoiBox region = dilate_roi(roi, config.roi_dilation, image.width(), image.height());
    const GrayImage gray = crop(weighted_gray(image, config.channels), region);
    const GrayImage smooth = raster::box_mean(gray, config.presmooth);

    // Flat regions are rejected on the unenhanced values: equalization would
    // stretch plain noise into apparent contrast.
    const double s_anchor = raster::percentile(smooth.pixels(), config.structure_percentile);
    const double b_anchor =
        raster::percentile(smooth.pixels(), config.surround_percentile >= 0 ? config.surround_percentile : 50.0);
    BinaryMask full(image.width(), image.height());
    if (std::abs(s_anchor - b_anchor) < config.min_contrast) {
        fail(ErrorCode::segmentation_empty, "roi has no contrast");
    }

    const int tiles = std::max(1, std::min({config.clahe_tiles, smooth.width(), smooth.height()}));
    const GrayImage enhanced = enhance_contrast(smooth, tiles, config.clahe_clip);
    const double ps = raster::percentile(enhanced.pixels(), config.structure_percentile);
    double threshold = ps;
    if (config.surround_percentile >= 0) {
        threshold = 0.5 * (ps + raster::percentile(enhanced.pixels(), config.surround_percentile));
    }

    BinaryMask local(region.w, region.h);
    for (int y = 0; y < region.h; ++y) {
        for (int x = 0; x < region.w; ++x) {
            const double v = enhanced.at(x, y);
            local.set(x, y, bright ? v >= threshold : v <= threshold);
        }
    }
    local = raster::fill_holes(raster::largest_component(raster::close_disk(local, config.close_radius)));
    if (local.count() < config.min_component) {
        fail(ErrorCode::segmentation_empty, "no component reaches the minimum size");
    }
    for (int y = 0; y < region.h; ++y)
        for (int x = 0; x < region.w; ++x)
            if (local.at(x, y)) full.set(region.x + x, region.y + y, true);
    return full;
}

ScoreMap vessel_response(const FundusImage& image, const VesselSegmentation& config) {
    const GrayImage g = raster::box_mean(weighted_gray(image, config.green_weighted), config.presmooth);
    ScoreMap inv(g.width(), g.height());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) inv.at(x, y) = 255.0 - g.at(x, y);

    int length = static_cast<int>(std::lround(config.line_fraction * image.height()));
    length = std::max(3, length % 2 == 0 ? length + 1 : length);
    ScoreMap response(g.width(), g.height(), 0.0);
    for (int k = 0; k < config.orientations; ++k) {
        const double angle = std::numbers::pi * k / config.orientations;
        const auto offsets = raster::line_offsets(length, angle);
        const ScoreMap opened = raster::open_with(inv, offsets);
        auto r = response.scores();
        auto o = opened.scores();
        auto s = inv.scores();
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::max(r[i], s[i] - o[i]);
    }
    return response;
}

VesselMask segment_vessels_classical(const FundusImage& image, const VesselSegmentation& config) {
    const ScoreMap response = vessel_response(image, config);
    const BinaryMask fov = raster::erode_disk(field_of_view(image, config.fov_threshold), config.fov_erosion);

    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < fov.size(); ++i) {
        if (!fov.bits()[i]) continue;
        const double v = response.scores()[i];
        sum += v;
        sum2 += v * v;
        ++n;
    }
    BinaryMask bits(image.width(), image.height());
    if (n == 0) return VesselMask(bits);
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
    // A flat response (blank image) has nothing to threshold.
    if (sd < 1e-9) return VesselMask(bits);
    const double threshold = mean + config.k_sigma * sd;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits.bits()[i] = fov.bits()[i] && response.scores()[i] > threshold ? 1 : 0;
    }
    bits = raster::remove_small_components(bits, config.min_component);
    return label_arteries_veins(weighted_gray(image, config.green_weighted), bits);
}

VesselMask label_arteries_veins(const GrayImage& intensity, const BinaryMask& vessels) {
    if (intensity.width() != vessels.width() || intensity.height() != vessels.height()) {
        fail(ErrorCode::dimension_mismatch, "intensity and vessel mask differ in size");
    }
    const auto comps = raster::label_components(vessels);
    std::vector<AvLabel> av(vessels.size(), AvLabel::none);
    if (comps.count == 0) return VesselMask(vessels, std::move(av));

    const BinaryMask skel = raster::skeletonize(vessels);
    std::vector<double> skel_sum(comps.count + 1, 0.0), all_sum(comps.count + 1, 0.0);
    std::vector<std::size_t> skel_n(comps.count + 1, 0), all_n(comps.count + 1, 0);
    for (std::size_t i = 0; i < vessels.size(); ++i) {
        const int c = comps.labels[i];
        if (c == 0) continue;
        const double v = intensity.pixels()[i];
        all_sum[c] += v;
        ++all_n[c];
        if (skel.bits()[i]) {
            skel_sum[c] += v;
            ++skel_n[c];
        }
    }
    std::vector<double> means(comps.count + 1, 0.0);
    std::vector<double> samples;
    for (int c = 1; c <= comps.count; ++c) {
        means[c] = skel_n[c] > 0 ? skel_sum[c] / skel_n[c] : all_sum[c] / all_n[c];
        samples.push_back(means[c]);
    }
    const double median = raster::percentile(samples, 50.0);
    for (std::size_t i = 0; i < vessels.size(); ++i) {
        const int c = comps.labels[i];
        if (c != 0) av[i] = means[c] > median ? AvLabel::artery : AvLabel::vein;
    }
    return VesselMask(vessels, std::move(av));
}

EllipseFit fit_ellipse(const BinaryMask& mask) {
    double n = 0, sx = 0, sy = 0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                n += 1;
                sx += x;
                sy += y;
            }
    if (n < 5) fail(ErrorCode::degenerate_mask, "mask has fewer than 5 foreground pixels");
    const double cx = sx / n, cy = sy / n;
    double xx = 0, yy = 0, xy = 0;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                const double dx = x - cx, dy = y - cy;
                xx += dx * dx;
                yy += dy * dy;
                xy += dx * dy;
            }
    xx /= n;
    yy /= n;
    xy /= n;
    const double mid = 0.5 * (xx + yy);
    const double rad = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    const double l1 = mid + rad;
    const double l2 = mid - rad;
    if (!(l2 > 1e-12)) fail(ErrorCode::degenerate_mask, "mask is collinear");
    const double theta = 0.5 * std::atan2(2.0 * xy, xx - yy);
    // Pixel centres shift the image coordinates by 0.5.
    return make_ellipse(cx + 0.5, cy + 0.5, 2.0 * std::sqrt(l1), 2.0 * std::sqrt(l2), theta);
}

}  // namespace eyas
