#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eyas/image.hpp"

// Low-level raster helpers shared by the localizer, segmenter and classifier.
namespace eyas::raster {

/// Mean over a (2r+1)x(2r+1) window, edges replicated. width <= 1 is identity.
ScoreMap box_mean(const ScoreMap& src, int width);
ScoreMap to_scores(const GrayImage& g);
GrayImage to_gray_clamped(const ScoreMap& m);
GrayImage box_mean(const GrayImage& src, int width);

/// Box mean restricted to pixels where `support` is set; pixels whose window
/// holds less than `min_fraction` support get NaN.
ScoreMap masked_box_mean(const ScoreMap& src, const BinaryMask& support, int width,
                         double min_fraction);

/// Nearest-rank percentile (q in [0,100]) of the given samples.
double percentile(std::vector<double> samples, double q);
std::uint8_t percentile(std::span<const std::uint8_t> samples, double q);

/// Min-max rescale to [0,1]; a flat map becomes all zeros.
void normalize_minmax(ScoreMap& m);

BinaryMask dilate_disk(const BinaryMask& m, int radius);
BinaryMask erode_disk(const BinaryMask& m, int radius);
BinaryMask close_disk(const BinaryMask& m, int radius);

struct Components {
    std::vector<int> labels;       // 0 = background, 1..count
    std::vector<std::size_t> areas;  // index 0 unused
    int count = 0;
};

/// 8-connected component labelling in raster order (deterministic).
Components label_components(const BinaryMask& m);
BinaryMask largest_component(const BinaryMask& m);
BinaryMask remove_small_components(const BinaryMask& m, std::size_t min_area);
BinaryMask fill_holes(const BinaryMask& m);

/// Exact Euclidean distance from each foreground pixel to the nearest
/// background pixel (pixels outside the raster count as background).
std::vector<double> distance_transform(const BinaryMask& m);

/// Zhang-Suen thinning to a one-pixel-wide skeleton.
BinaryMask skeletonize(const BinaryMask& m);

/// Pixel offsets of a digital line segment of the given length through the
/// origin at angle `radians`.
std::vector<std::pair<int, int>> line_offsets(int length, double radians);

/// Grey-level opening (erosion then dilation) with a symmetric flat
/// structuring element, borders replicated.
ScoreMap open_with(const ScoreMap& src, std::span<const std::pair<int, int>> offsets);

}  // namespace eyas::raster
