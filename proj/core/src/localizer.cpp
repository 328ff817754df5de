#include "eyas/localizer.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include "eyas/error.hpp"
#include "eyas/raster.hpp"

namespace eyas {

namespace {

int odd_width(double w) {
    int v = std::max(1, static_cast<int>(std::lround(w)));
    return v % 2 == 0 ? v + 1 : v;
}

std::array<double, 256> tile_mapping(const GrayImage& g, int x0, int x1, int y0, int y1, double clip) {
    std::array<double, 256> hist{};
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) hist[g.at(x, y)] += 1.0;
    const double n = double(x1 - x0) * (y1 - y0);
    if (std::isfinite(clip)) {
        const double limit = clip * n / 256.0;
        double excess = 0.0;
        for (auto& h : hist) {
            if (h > limit) {
                excess += h - limit;
                h = limit;
            }
        }
        const double share = excess / 256.0;
        for (auto& h : hist) h += share;
    }
    std::array<double, 256> lut{};
    double cdf = 0.0;
    for (int v = 0; v < 256; ++v) {
        cdf += hist[v];
        lut[v] = std::clamp(255.0 * cdf / n, 0.0, 255.0);
    }
    return lut;
}

}  // namespace

GrayImage enhance_contrast(const GrayImage& gray, int tiles, double clip) {
    if (tiles < 1) fail(ErrorCode::invalid_argument, "tiles must be >= 1");
    if (gray.width() < tiles || gray.height() < tiles) {
        fail(ErrorCode::invalid_argument, "image is smaller than the tile grid");
    }
    if (!(clip >= 1.0)) fail(ErrorCode::invalid_argument, "clip must be >= 1");
    const int w = gray.width();
    const int h = gray.height();
    std::vector<int> xb(tiles + 1), yb(tiles + 1);
    for (int i = 0; i <= tiles; ++i) {
        xb[i] = static_cast<int>(static_cast<long long>(i) * w / tiles);
        yb[i] = static_cast<int>(static_cast<long long>(i) * h / tiles);
    }
    std::vector<std::array<double, 256>> luts(static_cast<std::size_t>(tiles) * tiles);
    std::vector<double> cx(tiles), cy(tiles);
    for (int ty = 0; ty < tiles; ++ty) {
        cy[ty] = (yb[ty] + yb[ty + 1] - 1) / 2.0;
        for (int tx = 0; tx < tiles; ++tx) {
            luts[static_cast<std::size_t>(ty) * tiles + tx] =
                tile_mapping(gray, xb[tx], xb[tx + 1], yb[ty], yb[ty + 1], clip);
        }
    }
    for (int tx = 0; tx < tiles; ++tx) cx[tx] = (xb[tx] + xb[tx + 1] - 1) / 2.0;

    // Neighbouring tile pair and blend weight along one axis.
    auto locate = [tiles](const std::vector<double>& centres, double p, int& i0, int& i1, double& t) {
        if (p <= centres.front()) { i0 = i1 = 0; t = 0.0; return; }
        if (p >= centres.back()) { i0 = i1 = tiles - 1; t = 0.0; return; }
        i0 = 0;
        while (i0 + 1 < tiles && centres[i0 + 1] <= p) ++i0;
        i1 = std::min(i0 + 1, tiles - 1);
        t = i1 == i0 ? 0.0 : (p - centres[i0]) / (centres[i1] - centres[i0]);
    };

    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        int y0, y1;
        double ty;
        locate(cy, y, y0, y1, ty);
        for (int x = 0; x < w; ++x) {
            int x0, x1;
            double tx;
            locate(cx, x, x0, x1, tx);
            const int v = gray.at(x, y);
            const double m00 = luts[static_cast<std::size_t>(y0) * tiles + x0][v];
            const double m01 = luts[static_cast<std::size_t>(y0) * tiles + x1][v];
            const double m10 = luts[static_cast<std::size_t>(y1) * tiles + x0][v];
            const double m11 = luts[static_cast<std::size_t>(y1) * tiles + x1][v];
            const double top = m00 + (m01 - m00) * tx;
            const double bottom = m10 + (m11 - m10) * tx;
            out.at(x, y) = static_cast<std::uint8_t>(
                std::clamp(std::lround(top + (bottom - top) * ty), 0L, 255L));
        }
    }
    return out;
}

ScoreMap gradient_magnitude(const GrayImage& gray) {
    const int w = gray.width();
    const int h = gray.height();
    if (w < 3 || h < 3) fail(ErrorCode::invalid_argument, "gradient needs at least a 3x3 image");
    auto px = [&](int x, int y) -> double {
        return gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
    };
    ScoreMap out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
            out.at(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

namespace {

// FFTW planning is not thread-safe; execution with new-array APIs is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <typename T>
FftwBuffer<T> fftw_alloc(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) fail(ErrorCode::internal, "fftw_malloc failed");
    return FftwBuffer<T>(p);
}

// Valid-placement cross-correlation of `image` with a zero-mean template.
std::vector<double> correlate_fft(const std::vector<double>& image, int w, int h,
                                  const std::vector<double>& templ, int tw, int th) {
    const std::size_t real_n = static_cast<std::size_t>(w) * h;
    const std::size_t cplx_n = static_cast<std::size_t>(h) * (w / 2 + 1);
    auto in = fftw_alloc<double>(real_n);
    auto fi = fftw_alloc<fftw_complex>(cplx_n);
    auto ft = fftw_alloc<fftw_complex>(cplx_n);
    fftw_plan forward, backward;
    {
        std::lock_guard lock(fftw_planner_mutex());
        forward = fftw_plan_dft_r2c_2d(h, w, in.get(), fi.get(), FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_2d(h, w, fi.get(), in.get(), FFTW_ESTIMATE);
    }
    std::copy(image.begin(), image.end(), in.get());
    fftw_execute_dft_r2c(forward, in.get(), fi.get());
    std::fill(in.get(), in.get() + real_n, 0.0);
    for (int j = 0; j < th; ++j)
        for (int i = 0; i < tw; ++i)
            in[static_cast<std::size_t>(j) * w + i] = templ[static_cast<std::size_t>(j) * tw + i];
    fftw_execute_dft_r2c(forward, in.get(), ft.get());
    for (std::size_t k = 0; k < cplx_n; ++k) {
        const double ar = fi[k][0], ai = fi[k][1];
        const double br = ft[k][0], bi = -ft[k][1];
        fi[k][0] = ar * br - ai * bi;
        fi[k][1] = ar * bi + ai * br;
    }
    fftw_execute_dft_c2r(backward, fi.get(), in.get());
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    const int ow = w - tw + 1;
    const int oh = h - th + 1;
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    const double scale = 1.0 / static_cast<double>(real_n);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            out[static_cast<std::size_t>(y) * ow + x] = in[static_cast<std::size_t>(y) * w + x] * scale;
    return out;
}

std::vector<double> correlate_direct(const std::vector<double>& image, int w, int h,
                                     const std::vector<double>& templ, int tw, int th) {
    const int ow = w - tw + 1;
    const int oh = h - th + 1;
    std::vector<double> out(static_cast<std::size_t>(ow) * oh, 0.0);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int j = 0; j < th; ++j) {
                const double* row = image.data() + static_cast<std::size_t>(y + j) * w + x;
                const double* trow = templ.data() + static_cast<std::size_t>(j) * tw;
                for (int i = 0; i < tw; ++i) acc += row[i] * trow[i];
            }
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

}  // namespace

TemplateMatch match_template_ncc(const GrayImage& image, const GrayImage& templ) {
    const int w = image.width();
    const int h = image.height();
    const int tw = templ.width();
    const int th = templ.height();
    if (tw > w || th > h || (tw == w && th == h)) {
        fail(ErrorCode::invalid_argument, "template must be strictly smaller than the image");
    }
    const auto tn = static_cast<double>(tw) * th;
    double tmean = 0.0;
    for (auto v : templ.pixels()) tmean += v;
    tmean /= tn;
    std::vector<double> t0(templ.size());
    double tvar = 0.0;
    for (std::size_t i = 0; i < t0.size(); ++i) {
        t0[i] = templ.pixels()[i] - tmean;
        tvar += t0[i] * t0[i];
    }
    if (tvar <= 1e-9) fail(ErrorCode::degenerate_template, "template has zero variance");

    // Centre the image on its global mean; the zero-mean template makes the
    // numerator invariant to this shift and it keeps FFT magnitudes small.
    double gmean = 0.0;
    for (auto v : image.pixels()) gmean += v;
    gmean /= static_cast<double>(image.size());
    std::vector<double> img(image.size());
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = image.pixels()[i] - gmean;

    const int ow = w - tw + 1;
    const int oh = h - th + 1;
    const double direct_cost = double(ow) * oh * tn;
    const auto num = direct_cost <= double(1 << 22) ? correlate_direct(img, w, h, t0, tw, th)
                                                    : correlate_fft(img, w, h, t0, tw, th);

    // Window sums of the centred image via summed-area tables.
    std::vector<double> s1(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    std::vector<double> s2(s1.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        double r1 = 0.0, r2 = 0.0;
        for (int x = 0; x < w; ++x) {
            const double v = img[static_cast<std::size_t>(y) * w + x];
            r1 += v;
            r2 += v * v;
            const auto i = static_cast<std::size_t>(y + 1) * (w + 1) + x + 1;
            s1[i] = s1[i - (w + 1)] + r1;
            s2[i] = s2[i - (w + 1)] + r2;
        }
    }
    auto window = [&](const std::vector<double>& s, int x, int y) {
        const auto W = static_cast<std::size_t>(w + 1);
        return s[(y + th) * W + x + tw] - s[y * W + x + tw] - s[(y + th) * W + x] + s[y * W + x];
    };

    TemplateMatch result{ScoreMap(ow, oh), {0, 0, -std::numeric_limits<double>::infinity()}};
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            const double a = window(s1, x, y);
            const double var = window(s2, x, y) - a * a / tn;
            double score = 0.0;
            if (var > 1e-6 * tn) {
                score = num[static_cast<std::size_t>(y) * ow + x] / std::sqrt(var * tvar);
                score = std::clamp(score, -1.0, 1.0);
            }
            result.scores.at(x, y) = score;
            if (score > result.peak.score) result.peak = {x, y, score};
        }
    }
    return result;
}

GrayImage disk_template(double diameter, int side) {
    GrayImage t(side, side);
    const double c = (side - 1) / 2.0;
    const double r = diameter / 2.0;
    constexpr int ss = 4;
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            int inside = 0;
            for (int j = 0; j < ss; ++j) {
                for (int i = 0; i < ss; ++i) {
                    const double dx = x - 0.5 + (i + 0.5) / ss - c;
                    const double dy = y - 0.5 + (j + 0.5) / ss - c;
                    inside += dx * dx + dy * dy <= r * r;
                }
            }
            t.at(x, y) = static_cast<std::uint8_t>(std::lround(255.0 * inside / (ss * ss)));
        }
    }
    return t;
}

BinaryMask field_of_view(const FundusImage& image, int threshold) {
    const GrayImage luma = to_gray(image, ChannelMix::luma);
    BinaryMask fov(image.width(), image.height());
    for (std::size_t i = 0; i < luma.size(); ++i) fov.bits()[i] = luma.pixels()[i] > threshold;
    return fov;
}

OnhEvidence onh_evidence(const FundusImage& image, const LocalizerConfig& config) {
    const int w = image.width();
    const int h = image.height();
    const double expected_dd = config.expected_disc_fraction * h;
    const GrayImage gray = weighted_gray(image, config.red_weighted);

    OnhEvidence ev;
    ev.brightness = raster::box_mean(raster::to_scores(gray), odd_width(config.brightness_smoothing * expected_dd));
    raster::normalize_minmax(ev.brightness);

    ev.template_match = ScoreMap(w, h, 0.0);
    ev.best_scale.assign(static_cast<std::size_t>(w) * h, 1);
    std::vector<double> best(static_cast<std::size_t>(w) * h, -1.0);
    for (std::size_t s = 0; s < config.template_scales.size(); ++s) {
        const double diameter = config.template_scales[s] * h;
        const int side = odd_width(config.roi_scale * diameter);
        if (side >= w || side >= h) continue;
        const auto match = match_template_ncc(gray, disk_template(diameter, side));
        const int half = side / 2;
        for (int y = 0; y < match.scores.height(); ++y) {
            for (int x = 0; x < match.scores.width(); ++x) {
                const double v = match.scores.at(x, y);
                const auto idx = static_cast<std::size_t>(y + half) * w + x + half;
                if (v > best[idx]) {
                    best[idx] = v;
                    ev.best_scale[idx] = static_cast<int>(s);
                }
            }
        }
    }
    for (std::size_t i = 0; i < best.size(); ++i) ev.template_match.scores()[i] = std::max(0.0, best[i]);

    ev.edges = raster::box_mean(gradient_magnitude(gray), odd_width(config.edge_window * expected_dd));
    {
        auto s = ev.edges.scores();
        const double mx = *std::max_element(s.begin(), s.end());
        if (mx > 1e-12) for (auto& v : s) v /= mx;
        else std::fill(s.begin(), s.end(), 0.0);
    }

    const auto& wt = config.weights;
    const double total = wt.brightness + wt.template_match + wt.edges;
    if (!(total > 0.0) || wt.brightness < 0 || wt.template_match < 0 || wt.edges < 0) {
        fail(ErrorCode::invalid_argument, "ensemble weights must be non-negative with a positive sum");
    }
    ev.combined = ScoreMap(w, h);
    for (std::size_t i = 0; i < best.size(); ++i) {
        ev.combined.scores()[i] = (wt.brightness * ev.brightness.scores()[i] +
                                   wt.template_match * ev.template_match.scores()[i] +
                                   wt.edges * ev.edges.scores()[i]) /
                                  total;
    }
    return ev;
}

namespace {

RoiBox square_roi(double cx, double cy, int side, int w, int h, Structure structure, double confidence) {
    side = std::clamp(side, 1, std::min(w, h));
    RoiBox roi;
    roi.w = roi.h = side;
    roi.x = std::clamp(static_cast<int>(std::lround(cx - side / 2.0)), 0, w - side);
    roi.y = std::clamp(static_cast<int>(std::lround(cy - side / 2.0)), 0, h - side);
    roi.structure = structure;
    roi.confidence = std::clamp(confidence, 0.0, 1.0);
    return roi;
}

}  // namespace

RoiBox locate_onh(const FundusImage& image, const LocalizerConfig& config) {
    const auto ev = onh_evidence(image, config);
    const int w = image.width();
    int bx = 0, by = 0;
    double bv = -std::numeric_limits<double>::infinity();
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = ev.combined.at(x, y);
            if (v > bv) { bv = v; bx = x; by = y; }
        }
    }
    const int scale = ev.best_scale[static_cast<std::size_t>(by) * w + bx];
    const double diameter = config.template_scales[static_cast<std::size_t>(scale)] * image.height();
    const int side = static_cast<int>(std::lround(config.roi_scale * diameter));
    return square_roi(bx, by, side, w, image.height(), Structure::onh, bv);
}

double estimated_disc_diameter(const RoiBox& onh, const LocalizerConfig& config) {
    return std::max(onh.w, onh.h) / config.roi_scale;
}

double expected_disc_diameter(int image_height, const LocalizerConfig& config) {
    return config.expected_disc_fraction * image_height;
}

RoiBox locate_macula(const FundusImage& image, const RoiBox& onh, const LocalizerConfig& config) {
    const int w = image.width();
    const int h = image.height();
    if (onh.structure != Structure::onh) fail(ErrorCode::invalid_argument, "locate_macula needs an ONH box");
    if (!onh.fits(w, h)) fail(ErrorCode::bounds, "ONH box does not fit the image");
    // The box-implied diameter follows the template, which tracks the minor
    // axis of an oval disc; the anatomical prior is steadier for the band.
    const double dd = expected_disc_diameter(h, config);
    const double ox = onh.center_x();
    const double oy = onh.center_y();
    const double rmin = config.band_min_dd * dd;
    const double rmax = config.band_max_dd * dd;
    const double max_angle = config.band_half_angle_deg * std::numbers::pi / 180.0;

    const GrayImage luma = to_gray(image, ChannelMix::luma);
    BinaryMask fov(w, h);
    for (std::size_t i = 0; i < luma.size(); ++i) fov.bits()[i] = luma.pixels()[i] > config.fov_threshold;
    const ScoreMap smooth = raster::masked_box_mean(raster::to_scores(luma), fov,
                                                    odd_width(config.darkness_smoothing * dd), 0.9);

    // Temporal side: image left for a right eye, image right for a left eye.
    int side_sign = 0;
    if (image.laterality() == Laterality::right) side_sign = -1;
    if (image.laterality() == Laterality::left) side_sign = +1;

    std::vector<double> band;
    int bx = -1, by = -1;
    double bv = std::numeric_limits<double>::infinity();
    const int y0 = std::max(0, static_cast<int>(std::floor(oy - rmax)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(oy + rmax)));
    const int x0 = std::max(0, static_cast<int>(std::floor(ox - rmax)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(ox + rmax)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - ox;
            const double dy = y - oy;
            const double r = std::hypot(dx, dy);
            if (r < rmin || r > rmax) continue;
            if (std::atan2(std::abs(dy), std::abs(dx)) > max_angle) continue;
            if (side_sign != 0 && dx * side_sign <= 0) continue;
            if (!fov.at(x, y)) continue;
            const double v = smooth.at(x, y);
            if (std::isnan(v)) continue;
            band.push_back(v);
            if (v < bv) { bv = v; bx = x; by = y; }
        }
    }
    if (band.empty()) fail(ErrorCode::out_of_view, "macula search band lies outside the field of view");
    const double median = raster::percentile(band, 50.0);
    const double confidence = median > 0.0 ? (median - bv) / median : 0.0;
    const int side = static_cast<int>(std::lround(config.macula_roi_dd * dd));
    return square_roi(bx, by, side, w, h, Structure::macula, confidence);
}

}  // namespace eyas
