#include "eyas/findings.hpp"

#include <string>

#include "eyas/error.hpp"

namespace eyas {

std::string_view to_string(ShapeLabel label) noexcept {
    switch (label) {
        case ShapeLabel::round: return "round";
        case ShapeLabel::oval_vertical: return "oval_vertical";
        case ShapeLabel::oval_horizontal: return "oval_horizontal";
    }
    return "round";
}

std::string_view to_string(CaliberLabel label) noexcept {
    switch (label) {
        case CaliberLabel::narrowed: return "narrowed";
        case CaliberLabel::normal: return "normal";
        case CaliberLabel::widened: return "widened";
        case CaliberLabel::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

std::string_view to_string(ReflexLabel label) noexcept {
    return label == ReflexLabel::present ? "present" : "absent";
}

ShapeLabel parse_shape(std::string_view text) {
    for (auto l : {ShapeLabel::round, ShapeLabel::oval_vertical, ShapeLabel::oval_horizontal})
        if (to_string(l) == text) return l;
    fail(ErrorCode::unknown_label, "unknown shape label '" + std::string(text) + "'");
}

CaliberLabel parse_caliber(std::string_view text) {
    for (auto l : {CaliberLabel::narrowed, CaliberLabel::normal, CaliberLabel::widened, CaliberLabel::indeterminate})
        if (to_string(l) == text) return l;
    fail(ErrorCode::unknown_label, "unknown caliber label '" + std::string(text) + "'");
}

ReflexLabel parse_reflex(std::string_view text) {
    if (text == "present") return ReflexLabel::present;
    if (text == "absent") return ReflexLabel::absent;
    fail(ErrorCode::unknown_label, "unknown reflex label '" + std::string(text) + "'");
}

}  // namespace eyas
