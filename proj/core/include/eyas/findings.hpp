#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace eyas {

enum class ShapeLabel { round, oval_vertical, oval_horizontal };
enum class CaliberLabel { narrowed, normal, widened, indeterminate };
enum class ReflexLabel { present, absent };

std::string_view to_string(ShapeLabel label) noexcept;
std::string_view to_string(CaliberLabel label) noexcept;
std::string_view to_string(ReflexLabel label) noexcept;
ShapeLabel parse_shape(std::string_view text);
CaliberLabel parse_caliber(std::string_view text);
ReflexLabel parse_reflex(std::string_view text);

struct OnhFindings {
    ShapeLabel shape = ShapeLabel::round;
    double eccentricity = 0.0;
    double theta = 0.0;
    double disc_diameter_px = 0.0;  // 2a
    /// Disc centre in full-image coordinates; the caliber annulus is centred here.
    double cx = 0.0;
    double cy = 0.0;
    std::string source_backend;
    double confidence = 0.0;

    friend bool operator==(const OnhFindings&, const OnhFindings&) = default;
};

struct MaculaFindings {
    ReflexLabel reflex = ReflexLabel::absent;
    double reflex_ratio = 1.0;
    std::string source_backend;

    friend bool operator==(const MaculaFindings&, const MaculaFindings&) = default;
};

struct VesselFindings {
    double avr = 1.0;
    std::optional<double> normalized_artery_caliber;
    CaliberLabel caliber = CaliberLabel::indeterminate;
    double artery_width_px = 0.0;
    double vein_width_px = 0.0;
    std::string source_backend;

    friend bool operator==(const VesselFindings&, const VesselFindings&) = default;
};

}  // namespace eyas
