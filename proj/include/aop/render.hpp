#pragma once

#include "aop/geometry.hpp"
#include "aop/raster.hpp"

#include <optional>
#include <string>

namespace aop {

/// SVG in pixel coordinates (viewBox 0 0 W H, y down): PS/FH regions as filled
/// paths and, when a measurement is given, the fitted ellipse, the PS axis p1-p3,
/// the tangent p3-p4, the AoP arc with its label and a C_AoP caption.
std::string render_svg(const LabelMask& mask, const std::optional<AopResult>& result,
                       const std::string& failure_note = {});

/// "105.23°"
std::string format_angle_label(double aop_deg);

}  // namespace aop
