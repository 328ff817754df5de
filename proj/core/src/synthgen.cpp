#include "eyas/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "eyas/error.hpp"

namespace eyas {

namespace {

constexpr double kPi = std::numbers::pi;

// Portable draws on top of mt19937_64: the standard distributions are not
// required to produce the same sequence across library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    template <std::size_t N>
    std::size_t pick(const std::array<double, N>& probs) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        for (std::size_t i = N; i-- > 0;)
            if (probs[i] > 0.0) return i;
        return N - 1;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

template <std::size_t N>
void check_mix(const std::array<double, N>& probs, const char* family) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            fail(ErrorCode::invalid_argument, std::string("negative probability in ") + family + " mix");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        fail(ErrorCode::invalid_argument, std::string(family) + " mix does not sum to 1");
    }
}

constexpr double kTaper = 0.35;
constexpr int kPolylineSamples = 96;

// Narrowed / normal / widened artery calibers, as true stroke width over disc
// diameter. The classifier thresholds sit at 0.05 and 0.09; the gaps leave
// room for the +0.5 px bias of centreline distance-transform widths.
constexpr std::array<std::array<double, 2>, 3> kCaliberRanges{{
    {0.028, 0.038},
    {0.058, 0.072},
    {0.104, 0.118},
}};
constexpr std::array<double, 8> kVesselOffsetsDeg{50, 85, 120, 160, -160, -120, -80, -50};

Point bezier(const Point& p0, const Point& p1, const Point& p2, double t) {
    const double u = 1.0 - t;
    return {u * u * p0.x + 2 * u * t * p1.x + t * t * p2.x, u * u * p0.y + 2 * u * t * p1.y + t * t * p2.y};
}

std::vector<Point> sample_bezier(const Point& p0, const Point& p1, const Point& p2) {
    std::vector<Point> out(kPolylineSamples + 1);
    for (int i = 0; i <= kPolylineSamples; ++i) out[i] = bezier(p0, p1, p2, double(i) / kPolylineSamples);
    return out;
}

// Distance from the ellipse centre to its boundary along direction `angle`.
double rim_radius(const EllipseFit& e, double angle) {
    const double c = std::cos(angle - e.theta);
    const double s = std::sin(angle - e.theta);
    return e.a * e.b / std::sqrt(e.b * e.b * c * c + e.a * e.a * s * s);
}

double mean_annulus_factor(const SynthVessel& v, const EllipseFit& disc) {
    const double dd = 2.0 * disc.a;
    double sum = 0.0;
    int n = 0;
    const int steps = 4 * kPolylineSamples;
    for (int i = 0; i <= steps; ++i) {
        const double t = double(i) / steps;
        const Point p = bezier(v.p0, v.p1, v.p2, t);
        const double r = std::hypot(p.x - disc.cx, p.y - disc.cy);
        if (r >= dd && r <= 1.5 * dd) {
            sum += 1.0 - kTaper * t;
            ++n;
        }
    }
    return n > 0 ? sum / n : 0.0;
}

double width_at(const SynthVessel& v, double t) { return v.width + (v.end_width - v.width) * t; }

}  // namespace

SynthScene gen_scene(const GenParams& params, std::uint64_t seed) {
    check_mix(params.class_mix.shape, "shape");
    check_mix(params.class_mix.caliber, "caliber");
    check_mix(params.class_mix.reflex, "reflex");
    if (params.img_w < kMinImageSide || params.img_h < kMinImageSide || params.img_w > kMaxImageSide ||
        params.img_h > kMaxImageSide) {
        fail(ErrorCode::invalid_argument, "image dimensions outside 64..8192");
    }
    if (!(params.noise_sigma >= 0.0)) fail(ErrorCode::invalid_argument, "noise_sigma must be >= 0");

    Rng rng(seed);
    SynthScene s;
    s.seed = seed;
    s.img_w = params.img_w;
    s.img_h = params.img_h;
    s.noise_sigma = params.noise_sigma;
    s.aperture_center = {params.img_w / 2.0, params.img_h / 2.0};
    s.aperture_radius = 0.47 * std::min(params.img_w, params.img_h);
    s.illumination = rng.uniform(0.92, 1.05);
    s.laterality = rng.uniform() < 0.5 ? Laterality::right : Laterality::left;
    s.shape_label = static_cast<ShapeLabel>(rng.pick(params.class_mix.shape));
    s.caliber_label = static_cast<CaliberLabel>(rng.pick(params.class_mix.caliber));
    s.reflex_present = rng.pick(params.class_mix.reflex) == 0;

    const double H = params.img_h;
    const double dd = rng.uniform(0.14, 0.16) * H;
    const double a = dd / 2.0;
    double ratio = 1.0;
    double theta = 0.0;
    switch (s.shape_label) {
        case ShapeLabel::round:
            ratio = rng.uniform(0.95, 1.0);
            theta = rng.uniform(0.0, kPi);
            break;
        case ShapeLabel::oval_vertical:
            ratio = rng.uniform(0.66, 0.83);
            theta = kPi / 2 + rng.uniform(-0.35, 0.35);
            break;
        case ShapeLabel::oval_horizontal:
            ratio = rng.uniform(0.66, 0.83);
            theta = rng.uniform(-0.35, 0.35);
            break;
    }

    // The macula sits temporal to the disc: image left for a right eye.
    const double side = s.laterality == Laterality::right ? -1.0 : 1.0;
    const double k = rng.uniform(2.2, 2.8);
    const double phi = rng.uniform(-20.0, 20.0) * kPi / 180.0;
    const Point dir{side * std::cos(phi), std::sin(phi)};
    const Point mid{s.aperture_center.x + rng.uniform(-0.03, 0.03) * params.img_w,
                    s.aperture_center.y + rng.uniform(-0.03, 0.03) * H};
    const double half = 0.5 * k * dd;
    const Point disc_c{mid.x - half * dir.x, mid.y - half * dir.y};
    s.fovea = {mid.x + half * dir.x, mid.y + half * dir.y};
    s.disc = make_ellipse(disc_c.x, disc_c.y, a, a * ratio, theta);

    const auto& range = kCaliberRanges[static_cast<std::size_t>(s.caliber_label)];
    s.artery_caliber = rng.uniform(range[0], range[1]);

    const double temporal = std::atan2(dir.y, dir.x);
    for (std::size_t i = 0; i < kVesselOffsetsDeg.size(); ++i) {
        SynthVessel v;
        v.av = i % 2 == 0 ? AvLabel::artery : AvLabel::vein;
        const double alpha = temporal + (kVesselOffsetsDeg[i] + rng.uniform(-4.0, 4.0)) * kPi / 180.0;
        const double r0 = rim_radius(s.disc, alpha);
        v.p0 = {disc_c.x + r0 * std::cos(alpha), disc_c.y + r0 * std::sin(alpha)};

        // Ray from p0 to the aperture edge.
        const double ux = std::cos(alpha), uy = std::sin(alpha);
        const double ox = v.p0.x - s.aperture_center.x, oy = v.p0.y - s.aperture_center.y;
        const double bq = ox * ux + oy * uy;
        const double cq = ox * ox + oy * oy - s.aperture_radius * s.aperture_radius;
        const double t_edge = -bq + std::sqrt(std::max(0.0, bq * bq - cq));
        double length = rng.uniform(0.75, 0.9) * t_edge;

        const double bend = rng.uniform(-6.0, 6.0) * kPi / 180.0;
        const double cx = std::cos(alpha + bend), cy = std::sin(alpha + bend);
        const double offset = rng.uniform(-0.05, 0.05);
        for (;;) {
            v.p2 = {v.p0.x + length * cx, v.p0.y + length * cy};
            if (std::hypot(v.p2.x - s.aperture_center.x, v.p2.y - s.aperture_center.y) <=
                0.95 * s.aperture_radius) {
                break;
            }
            length *= 0.95;
        }
        v.p1 = {0.5 * (v.p0.x + v.p2.x) - offset * length * cy, 0.5 * (v.p0.y + v.p2.y) + offset * length * cx};
        v.polyline = sample_bezier(v.p0, v.p1, v.p2);

        const double target = v.av == AvLabel::artery ? s.artery_caliber * dd : rng.uniform(0.09, 0.11) * dd;
        double factor = mean_annulus_factor(v, s.disc);
        if (factor <= 0.0) factor = 1.0 - kTaper * 0.3;
        v.width = target / factor;
        v.end_width = v.width * (1.0 - kTaper);
        s.vessels.push_back(std::move(v));
    }
    return s;
}

double annulus_artery_width(const SynthScene& scene) {
    const double dd = scene.disc_diameter();
    double sum = 0.0;
    int n = 0;
    const int steps = 4 * kPolylineSamples;
    for (const auto& v : scene.vessels) {
        if (v.av != AvLabel::artery) continue;
        for (int i = 0; i <= steps; ++i) {
            const double t = double(i) / steps;
            const Point p = bezier(v.p0, v.p1, v.p2, t);
            const double r = std::hypot(p.x - scene.disc.cx, p.y - scene.disc.cy);
            if (r >= dd && r <= 1.5 * dd) {
                sum += width_at(v, t);
                ++n;
            }
        }
    }
    return n > 0 ? sum / n : 0.0;
}

RenderedScene render(const SynthScene& scene) {
    const int W = scene.img_w;
    const int H = scene.img_h;
    const std::size_t n = static_cast<std::size_t>(W) * H;
    const double dd = scene.disc_diameter();
    const double il = scene.illumination;
    const double R = scene.aperture_radius;

    // Linear RGB field before quantization.
    std::vector<double> r(n), g(n), b(n);
    std::vector<std::uint8_t> inside(n, 0);
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            const double px = x + 0.5, py = y + 0.5;
            const double rr = std::hypot(px - scene.aperture_center.x, py - scene.aperture_center.y) / R;
            if (rr > 1.0) continue;
            inside[i] = 1;
            const double shade = il * (1.0 - 0.15 * rr * rr);
            double f = 1.0;
            const double rf = std::hypot(px - scene.fovea.x, py - scene.fovea.y);
            const double ro = 0.35 * dd;
            f -= 0.55 * std::max(0.0, 1.0 - (rf / ro) * (rf / ro));
            if (scene.reflex_present) {
                const double w = std::clamp((0.16 * dd - rf) / (0.04 * dd), 0.0, 1.0);
                f += (1.05 - f) * w;
            }
            r[i] = 205.0 * shade * f;
            g[i] = 100.0 * shade * f;
            b[i] = 45.0 * shade * f;
        }
    }

    BinaryMask vessel_bits(W, H);
    std::vector<AvLabel> av(n, AvLabel::none);
    std::vector<double> vessel_factor(n, 1.0);
    for (const auto& v : scene.vessels) {
        const double max_half = std::max(v.width, v.end_width) / 2.0;
        double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
        for (const auto& p : v.polyline) {
            x0 = std::min(x0, p.x), y0 = std::min(y0, p.y);
            x1 = std::max(x1, p.x), y1 = std::max(y1, p.y);
        }
        const int bx0 = std::max(0, int(std::floor(x0 - max_half - 2)));
        const int by0 = std::max(0, int(std::floor(y0 - max_half - 2)));
        const int bx1 = std::min(W - 1, int(std::ceil(x1 + max_half + 2)));
        const int by1 = std::min(H - 1, int(std::ceil(y1 + max_half + 2)));
        const double base = v.av == AvLabel::artery ? 0.60 : 0.50;
        const std::size_t segs = v.polyline.size() - 1;
        for (int y = by0; y <= by1; ++y) {
            for (int x = bx0; x <= bx1; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                double best = 1e300, best_t = 0.0;
                for (std::size_t k = 0; k < segs; ++k) {
                    const Point& a = v.polyline[k];
                    const Point& c = v.polyline[k + 1];
                    const double ex = c.x - a.x, ey = c.y - a.y;
                    const double len2 = ex * ex + ey * ey;
                    double u = len2 > 0 ? ((px - a.x) * ex + (py - a.y) * ey) / len2 : 0.0;
                    u = std::clamp(u, 0.0, 1.0);
                    const double qx = a.x + u * ex - px, qy = a.y + u * ey - py;
                    const double d2 = qx * qx + qy * qy;
                    if (d2 < best) {
                        best = d2;
                        best_t = (double(k) + u) / double(segs);
                    }
                }
                const double d = std::sqrt(best);
                const double hw = width_at(v, best_t) / 2.0;
                const double cov = std::clamp(hw - d + 0.5, 0.0, 1.0);
                if (cov <= 0.0) continue;
                const std::size_t i = static_cast<std::size_t>(y) * W + x;
                double m = base;
                if (v.av == AvLabel::artery && d < 0.5) m = 0.72;
                vessel_factor[i] = std::min(vessel_factor[i], 1.0 - cov * (1.0 - m));
                if (d <= hw && inside[i] && av[i] == AvLabel::none) {
                    vessel_bits.set(x, y, true);
                    av[i] = v.av;
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        r[i] *= vessel_factor[i];
        g[i] *= vessel_factor[i];
        b[i] *= vessel_factor[i];
    }

    // Disc over the vessels, domed from the centre to the rim.
    BinaryMask onh(W, H);
    const EllipseFit& e = scene.disc;
    const double ct = std::cos(e.theta), st = std::sin(e.theta);
    auto rho2 = [&](double px, double py) {
        const double dx = px - e.cx, dy = py - e.cy;
        const double u = dx * ct + dy * st;
        const double v = -dx * st + dy * ct;
        return (u / e.a) * (u / e.a) + (v / e.b) * (v / e.b);
    };
    const int ex0 = std::max(0, int(std::floor(e.cx - e.a - 2)));
    const int ex1 = std::min(W - 1, int(std::ceil(e.cx + e.a + 2)));
    const int ey0 = std::max(0, int(std::floor(e.cy - e.a - 2)));
    const int ey1 = std::min(H - 1, int(std::ceil(e.cy + e.a + 2)));
    constexpr int kSuper = 4;
    for (int y = ey0; y <= ey1; ++y) {
        for (int x = ex0; x <= ex1; ++x) {
            const double q = rho2(x + 0.5, y + 0.5);
            int hits = 0;
            for (int sy = 0; sy < kSuper; ++sy)
                for (int sx = 0; sx < kSuper; ++sx)
                    if (rho2(x + (sx + 0.5) / kSuper, y + (sy + 0.5) / kSuper) <= 1.0) ++hits;
            const std::size_t i = static_cast<std::size_t>(y) * W + x;
            if (q <= 1.0 && inside[i]) onh.set(x, y, true);
            if (hits == 0 || !inside[i]) continue;
            const double cov = double(hits) / (kSuper * kSuper);
            const double t = std::min(q, 1.0);
            const double dr = il * (250.0 - 15.0 * t);
            const double dg = il * (215.0 - 30.0 * t);
            const double db = il * (150.0 - 30.0 * t);
            r[i] = (1 - cov) * r[i] + cov * dr;
            g[i] = (1 - cov) * g[i] + cov * dg;
            b[i] = (1 - cov) * b[i] + cov * db;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (onh.bits()[i]) {
            vessel_bits.bits()[i] = 0;
            av[i] = AvLabel::none;
        }
    }

    BinaryMask macula(W, H);
    const double mr = kMaculaTruthRadiusDd * dd;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (std::hypot(x + 0.5 - scene.fovea.x, y + 0.5 - scene.fovea.y) <= mr &&
                inside[static_cast<std::size_t>(y) * W + x]) {
                macula.set(x, y, true);
            }

    std::vector<std::uint8_t> rgb(n * 3, 0);
    Rng noise(scene.seed ^ 0x6e6f697365ULL);
    const double sigma = scene.noise_sigma;
    auto quantize = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); };
    for (std::size_t i = 0; i < n; ++i) {
        if (!inside[i]) continue;
        double cr = r[i], cg = g[i], cb = b[i];
        if (sigma > 0.0) {
            cr += sigma * noise.normal();
            cg += sigma * noise.normal();
            cb += sigma * noise.normal();
        }
        rgb[3 * i] = quantize(cr);
        rgb[3 * i + 1] = quantize(cg);
        rgb[3 * i + 2] = quantize(cb);
    }

    return {FundusImage(W, H, std::move(rgb), scene.laterality), std::move(onh), std::move(macula),
            VesselMask(std::move(vessel_bits), std::move(av))};
}

SynthScene scale_scene(const SynthScene& scene, double factor) {
    if (!(factor > 0.0)) fail(ErrorCode::invalid_argument, "scale factor must be positive");
    SynthScene s = scene;
    auto sp = [&](Point p) { return Point{p.x * factor, p.y * factor}; };
    s.img_w = static_cast<int>(std::lround(scene.img_w * factor));
    s.img_h = static_cast<int>(std::lround(scene.img_h * factor));
    s.aperture_center = sp(scene.aperture_center);
    s.aperture_radius = scene.aperture_radius * factor;
    s.disc = make_ellipse(scene.disc.cx * factor, scene.disc.cy * factor, scene.disc.a * factor,
                          scene.disc.b * factor, scene.disc.theta);
    s.fovea = sp(scene.fovea);
    for (auto& v : s.vessels) {
        v.p0 = sp(v.p0);
        v.p1 = sp(v.p1);
        v.p2 = sp(v.p2);
        for (auto& p : v.polyline) p = sp(p);
        v.width *= factor;
        v.end_width *= factor;
    }
    return s;
}

SynthScene translate_scene(const SynthScene& scene, double dx, double dy) {
    SynthScene s = scene;
    auto tp = [&](Point p) { return Point{p.x + dx, p.y + dy}; };
    s.aperture_center = tp(scene.aperture_center);
    s.disc = make_ellipse(scene.disc.cx + dx, scene.disc.cy + dy, scene.disc.a, scene.disc.b, scene.disc.theta);
    s.fovea = tp(scene.fovea);
    for (auto& v : s.vessels) {
        v.p0 = tp(v.p0);
        v.p1 = tp(v.p1);
        v.p2 = tp(v.p2);
        for (auto& p : v.polyline) p = tp(p);
    }
    return s;
}

}  // namespace eyas
