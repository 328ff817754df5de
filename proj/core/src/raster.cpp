#include "eyas/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eyas/error.hpp"

namespace eyas::raster {

namespace {

// Summed-area table with a zero first row/column.
std::vector<double> integral(std::span<const double> v, int w, int h) {
    std::vector<double> s(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += v[static_cast<std::size_t>(y) * w + x];
            s[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] =
                s[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
        }
    }
    return s;
}

double rect_sum(const std::vector<double>& s, int w, int x0, int y0, int x1, int y1) {
    // inclusive x0..x1, y0..y1
    const auto W = static_cast<std::size_t>(w + 1);
    return s[(y1 + 1) * W + x1 + 1] - s[y0 * W + x1 + 1] - s[(y1 + 1) * W + x0] + s[y0 * W + x0];
}

}  // namespace

ScoreMap box_mean(const ScoreMap& src, int width) {
    if (width <= 1) return src;
    const int r = width / 2;
    const int w = src.width();
    const int h = src.height();
    // Edge replication: pad by r, then average exact windows.
    const int pw = w + 2 * r;
    const int ph = h + 2 * r;
    std::vector<double> padded(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = std::clamp(y - r, 0, h - 1);
        for (int x = 0; x < pw; ++x) {
            const int sx = std::clamp(x - r, 0, w - 1);
            padded[static_cast<std::size_t>(y) * pw + x] = src.at(sx, sy);
        }
    }
    const auto s = integral(padded, pw, ph);
    const double area = double(2 * r + 1) * (2 * r + 1);
    ScoreMap out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = rect_sum(s, pw, x, y, x + 2 * r, y + 2 * r) / area;
    return out;
}

ScoreMap to_scores(const GrayImage& g) {
    ScoreMap m(g.width(), g.height());
    std::copy(g.pixels().begin(), g.pixels().end(), m.scores().begin());
    return m;
}

GrayImage to_gray_clamped(const ScoreMap& m) {
    GrayImage g(m.width(), m.height());
    auto dst = g.pixels();
    const auto src = m.scores();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<std::uint8_t>(std::clamp(std::lround(src[i]), 0L, 255L));
    }
    return g;
}

GrayImage box_mean(const GrayImage& src, int width) {
    if (width <= 1) return src;
    return to_gray_clamped(box_mean(to_scores(src), width));
}

ScoreMap masked_box_mean(const ScoreMap& src, const BinaryMask& support, int width,
                         double min_fraction) {
    const int w = src.width();
    const int h = src.height();
    const int r = std::max(0, width / 2);
    std::vector<double> values(src.scores().size());
    std::vector<double> weights(values.size());
    const auto bits = support.bits();
    for (std::size_t i = 0; i < values.size(); ++i) {
        weights[i] = bits[i] ? 1.0 : 0.0;
        values[i] = bits[i] ? src.scores()[i] : 0.0;
    }
    const auto sv = integral(values, w, h);
    const auto sw = integral(weights, w, h);
    const double area = double(2 * r + 1) * (2 * r + 1);
    ScoreMap out(w, h, std::numeric_limits<double>::quiet_NaN());
    for (int y = 0; y < h; ++y) {
        const int y0 = std::max(0, y - r);
        const int y1 = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - r);
            const int x1 = std::min(w - 1, x + r);
            const double n = rect_sum(sw, w, x0, y0, x1, y1);
            if (n >= min_fraction * area && n > 0.0) out.at(x, y) = rect_sum(sv, w, x0, y0, x1, y1) / n;
        }
    }
    return out;
}

double percentile(std::vector<double> samples, double q) {
    if (samples.empty()) fail(ErrorCode::invalid_argument, "percentile of an empty sample");
    q = std::clamp(q, 0.0, 100.0);
    const auto n = samples.size();
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(rank - 1), samples.end());
    return samples[rank - 1];
}

std::uint8_t percentile(std::span<const std::uint8_t> samples, double q) {
    if (samples.empty()) fail(ErrorCode::invalid_argument, "percentile of an empty sample");
    std::size_t hist[256] = {};
    for (auto v : samples) ++hist[v];
    q = std::clamp(q, 0.0, 100.0);
    const auto n = samples.size();
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::size_t acc = 0;
    for (int v = 0; v < 256; ++v) {
        acc += hist[v];
        if (acc >= rank) return static_cast<std::uint8_t>(v);
    }
    return 255;
}

void normalize_minmax(ScoreMap& m) {
    auto s = m.scores();
    if (s.empty()) return;
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    const double a = *lo;
    const double range = *hi - *lo;
    if (!(range > 1e-12)) {
        std::fill(s.begin(), s.end(), 0.0);
        return;
    }
    for (auto& v : s) v = (v - a) / range;
}

namespace {

std::vector<std::pair<int, int>> disk_offsets(int radius) {
    std::vector<std::pair<int, int>> off;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dx * dx + dy * dy <= radius * radius) off.emplace_back(dx, dy);
    return off;
}

// Binary dilation with pixels outside the raster treated as `outside`.
BinaryMask morph(const BinaryMask& m, int radius, bool dilate) {
    const int w = m.width();
    const int h = m.height();
    const auto off = disk_offsets(radius);
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool v = !dilate;
            for (const auto& [dx, dy] : off) {
                const int xx = x + dx;
                const int yy = y + dy;
                bool s;
                if (xx < 0 || yy < 0 || xx >= w || yy >= h) {
                    s = !dilate;  // neutral element
                } else {
                    s = m.at(xx, yy);
                }
                if (dilate && s) { v = true; break; }
                if (!dilate && !s) { v = false; break; }
            }
            out.set(x, y, v);
        }
    }
    return out;
}

}  // namespace

BinaryMask dilate_disk(const BinaryMask& m, int radius) { return radius <= 0 ? m : morph(m, radius, true); }
BinaryMask erode_disk(const BinaryMask& m, int radius) { return radius <= 0 ? m : morph(m, radius, false); }
BinaryMask close_disk(const BinaryMask& m, int radius) { return erode_disk(dilate_disk(m, radius), radius); }

Components label_components(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    Components c;
    c.labels.assign(m.size(), 0);
    c.areas.push_back(0);
    std::vector<int> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto idx = static_cast<std::size_t>(y) * w + x;
            if (!m.bits()[idx] || c.labels[idx]) continue;
            const int label = ++c.count;
            std::size_t area = 0;
            stack.push_back(static_cast<int>(idx));
            c.labels[idx] = label;
            while (!stack.empty()) {
                const int p = stack.back();
                stack.pop_back();
                ++area;
                const int px = p % w;
                const int py = p / w;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = px + dx;
                        const int ny = py + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const auto n = static_cast<std::size_t>(ny) * w + nx;
                        if (m.bits()[n] && !c.labels[n]) {
                            c.labels[n] = label;
                            stack.push_back(static_cast<int>(n));
                        }
                    }
                }
            }
            c.areas.push_back(area);
        }
    }
    return c;
}

BinaryMask largest_component(const BinaryMask& m) {
    const auto c = label_components(m);
    BinaryMask out(m.width(), m.height());
    if (c.count == 0) return out;
    int best = 1;
    for (int i = 2; i <= c.count; ++i)
        if (c.areas[i] > c.areas[best]) best = i;  // ties keep the first in raster order
    for (std::size_t i = 0; i < c.labels.size(); ++i) out.bits()[i] = c.labels[i] == best;
    return out;
}

BinaryMask remove_small_components(const BinaryMask& m, std::size_t min_area) {
    const auto c = label_components(m);
    BinaryMask out(m.width(), m.height());
    for (std::size_t i = 0; i < c.labels.size(); ++i)
        out.bits()[i] = c.labels[i] && c.areas[c.labels[i]] >= min_area;
    return out;
}

BinaryMask fill_holes(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    // Flood the background from the border (4-connected, dual of 8-connected foreground).
    std::vector<std::uint8_t> outside(m.size(), 0);
    std::vector<int> stack;
    auto seed = [&](int x, int y) {
        const auto i = static_cast<std::size_t>(y) * w + x;
        if (!m.bits()[i] && !outside[i]) {
            outside[i] = 1;
            stack.push_back(static_cast<int>(i));
        }
    };
    for (int x = 0; x < w; ++x) { seed(x, 0); seed(x, h - 1); }
    for (int y = 0; y < h; ++y) { seed(0, y); seed(w - 1, y); }
    while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        const int px = p % w;
        const int py = p / w;
        if (px > 0) seed(px - 1, py);
        if (px < w - 1) seed(px + 1, py);
        if (py > 0) seed(px, py - 1);
        if (py < h - 1) seed(px, py + 1);
    }
    BinaryMask out(w, h);
    for (std::size_t i = 0; i < outside.size(); ++i) out.bits()[i] = !outside[i];
    return out;
}

namespace {

// 1-D squared distance transform (Felzenszwalb & Huttenlocher).
constexpr double kFar = 1e20;

void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    auto intersect = [&](int q, int p) {
        return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
    };
    for (int q = 1; q < n; ++q) {
        double s = intersect(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> distance_transform(const BinaryMask& m) {
    // Pad by one background pixel so the raster border counts as background.
    const int w = m.width() + 2;
    const int h = m.height() + 2;
    std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            grid[static_cast<std::size_t>(y + 1) * w + x + 1] = m.at(x, y) ? kFar : 0.0;
    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);
    for (int x = 0; x < w; ++x) {
        f.resize(h); d.resize(h);
        for (int y = 0; y < h; ++y) f[y] = grid[static_cast<std::size_t>(y) * w + x];
        edt_1d(f, d, v, z);
        for (int y = 0; y < h; ++y) grid[static_cast<std::size_t>(y) * w + x] = d[y];
    }
    for (int y = 0; y < h; ++y) {
        f.resize(w); d.resize(w);
        for (int x = 0; x < w; ++x) f[x] = grid[static_cast<std::size_t>(y) * w + x];
        edt_1d(f, d, v, z);
        for (int x = 0; x < w; ++x) grid[static_cast<std::size_t>(y) * w + x] = d[x];
    }
    std::vector<double> out(m.size());
    for (int y = 0; y < m.height(); ++y)
        for (int x = 0; x < m.width(); ++x)
            out[static_cast<std::size_t>(y) * m.width() + x] =
                std::sqrt(grid[static_cast<std::size_t>(y + 1) * w + x + 1]);
    return out;
}

BinaryMask skeletonize(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    std::vector<std::uint8_t> img(m.bits().begin(), m.bits().end());
    auto px = [&](int x, int y) -> int {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0;
        return img[static_cast<std::size_t>(y) * w + x];
    };
    std::vector<std::size_t> to_clear;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            to_clear.clear();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!px(x, y)) continue;
                    const int p2 = px(x, y - 1), p3 = px(x + 1, y - 1), p4 = px(x + 1, y),
                              p5 = px(x + 1, y + 1), p6 = px(x, y + 1), p7 = px(x - 1, y + 1),
                              p8 = px(x - 1, y), p9 = px(x - 1, y - 1);
                    const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    if (b < 2 || b > 6) continue;
                    const int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
                    int a = 0;
                    for (int i = 0; i < 8; ++i) a += (seq[i] == 0 && seq[i + 1] == 1);
                    if (a != 1) continue;
                    if (pass == 0) {
                        if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
                    } else {
                        if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
                    }
                    to_clear.push_back(static_cast<std::size_t>(y) * w + x);
                }
            }
            for (auto i : to_clear) img[i] = 0;
            changed = changed || !to_clear.empty();
        }
    }
    return BinaryMask(w, h, std::move(img));
}

std::vector<std::pair<int, int>> line_offsets(int length, double radians) {
    std::vector<std::pair<int, int>> off;
    const double half = (length - 1) / 2.0;
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    const int steps = std::max(1, length - 1);
    for (int i = 0; i <= steps; ++i) {
        const double t = -half + (2.0 * half) * i / steps;
        const std::pair<int, int> p{static_cast<int>(std::lround(t * c)), static_cast<int>(std::lround(t * s))};
        if (std::find(off.begin(), off.end(), p) == off.end()) off.push_back(p);
    }
    return off;
}

ScoreMap open_with(const ScoreMap& src, std::span<const std::pair<int, int>> offsets) {
    const int w = src.width();
    const int h = src.height();
    auto pass = [&](const ScoreMap& in, bool take_max) {
        ScoreMap out(w, h);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double v = take_max ? -std::numeric_limits<double>::infinity()
                                    : std::numeric_limits<double>::infinity();
                for (const auto& [dx, dy] : offsets) {
                    const double s = in.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1));
                    v = take_max ? std::max(v, s) : std::min(v, s);
                }
                out.at(x, y) = v;
            }
        }
        return out;
    };
    return pass(pass(src, false), true);
}

}  // namespace eyas::raster
