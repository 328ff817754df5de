#pragma once

#include <array>

#include "eyas/config.hpp"
#include "eyas/image.hpp"

namespace eyas {

/// Contrast-limited tile-wise histogram equalization. Histogram bins are
/// clipped at clip x (tile pixels / 256) and the excess is spread evenly over
/// all bins; per-tile mappings are blended bilinearly between tile centres.
/// A non-finite clip disables clipping.
GrayImage enhance_contrast(const GrayImage& gray, int tiles, double clip);

/// 3x3 Sobel magnitude sqrt(gx^2 + gy^2), borders replicated.
ScoreMap gradient_magnitude(const GrayImage& gray);

struct Peak {
    int x = 0;
    int y = 0;
    double score = 0.0;
};

struct TemplateMatch {
    /// One score per valid placement; (x, y) is the template's top-left corner.
    ScoreMap scores;
    Peak peak;
};

/// Normalized cross-correlation over every valid placement. Scores lie in
/// [-1, 1]; flat image windows score 0. Ties in the peak go to the smallest
/// y, then the smallest x.
TemplateMatch match_template_ncc(const GrayImage& image, const GrayImage& templ);

/// Anti-aliased bright disk of the given diameter centred in a square of side
/// `side` (dark surround).
GrayImage disk_template(double diameter, int side);

/// Candidate maps the ONH ensemble votes over, all normalized to [0, 1].
struct OnhEvidence {
    ScoreMap brightness;
    ScoreMap template_match;
    ScoreMap edges;
    ScoreMap combined;
    std::vector<int> best_scale;  // per pixel index into template_scales
};

OnhEvidence onh_evidence(const FundusImage& image, const LocalizerConfig& config = {});
RoiBox locate_onh(const FundusImage& image, const LocalizerConfig& config = {});

/// Disc diameter implied by an ONH box produced by locate_onh.
double estimated_disc_diameter(const RoiBox& onh, const LocalizerConfig& config = {});

/// Prior disc diameter for an image of this height.
double expected_disc_diameter(int image_height, const LocalizerConfig& config = {});

/// Searches the 2-3 disc diameter band (prior diameter) on the temporal side.
RoiBox locate_macula(const FundusImage& image, const RoiBox& onh,
                     const LocalizerConfig& config = {});

/// Fundus aperture: luma above the configured threshold.
BinaryMask field_of_view(const FundusImage& image, int threshold);

}  // namespace eyas
