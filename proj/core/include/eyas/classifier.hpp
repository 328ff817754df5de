#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eyas/config.hpp"
#include "eyas/findings.hpp"
#include "eyas/image.hpp"

namespace eyas {

enum class InputFormat { image, local_onh, mask, mask_plus_local };

std::string_view to_string(InputFormat format) noexcept;
InputFormat parse_format(std::string_view text);
inline constexpr std::array<InputFormat, 4> kAllFormats{InputFormat::image, InputFormat::local_onh,
                                                       InputFormat::mask, InputFormat::mask_plus_local};

/// Classifier payload. `offset_x/offset_y` map payload coordinates back to the
/// full frame (non-zero for local formats).
struct ClassifierInput {
    InputFormat format = InputFormat::image;
    std::optional<FundusImage> image;
    std::optional<BinaryMask> mask;
    int offset_x = 0;
    int offset_y = 0;

    int width() const;
    int height() const;
    /// 3 for RGB payloads, 1 for a bare mask, 4 for crop plus mask channel.
    int channels() const;
};

ClassifierInput make_input(const FundusImage& image, const std::optional<RoiBox>& roi,
                           const std::optional<BinaryMask>& mask, InputFormat format);

/// Shape rule over an ellipse fit: eccentricity below the round threshold is
/// round, otherwise the major-axis angle picks the oval orientation.
ShapeLabel shape_from_ellipse(const EllipseFit& fit, const ClassifierConfig& config = {});
/// 1 at confidence_span or more from the eccentricity boundary, 0.5 on it.
double shape_confidence(double eccentricity, const ClassifierConfig& config = {});

/// Mask formats fit the supplied mask; image formats threshold the frame (or
/// crop) at the crude percentile first.
OnhFindings classify_onh_shape(const ClassifierInput& input, const ClassifierConfig& config = {},
                               const std::string& source_backend = "");

CaliberLabel caliber_from_ratio(double normalized, const ClassifierConfig& config = {});

struct WidthSamples {
    std::vector<double> artery;
    std::vector<double> vein;
};

/// 2 x distance-transform along component centrelines (on a 2x supersample), optionally restricted
/// to the annulus [rmin, rmax] around (cx, cy).
WidthSamples sample_vessel_widths(const VesselMask& vessels, std::optional<std::array<double, 4>> annulus);

VesselFindings classify_artery_caliber(const VesselMask& vessels, const std::optional<OnhFindings>& disc,
                                       const ClassifierConfig& config = {},
                                       const std::string& source_backend = "");

MaculaFindings classify_macular_reflex(const FundusImage& image, const RoiBox& macula_roi,
                                       const ClassifierConfig& config = {},
                                       const std::string& source_backend = "");

struct FormatRow {
    InputFormat format = InputFormat::image;
    double accuracy = 0.0;
    std::map<std::string, double> per_class;
    std::size_t evaluated = 0;
};

struct FormatReport {
    std::vector<FormatRow> formats;
    std::size_t holdout_size = 0;
};

}  // namespace eyas
