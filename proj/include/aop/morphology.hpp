#pragma once

#include "aop/raster.hpp"

#include <cstdint>
#include <vector>

namespace aop {

struct PixelCoord {
    int row = 0;
    int col = 0;

    auto operator<=>(const PixelCoord&) const = default;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point2&) const = default;
};

/// One 8-connected region of a single class, pixels in row-major order.
struct Component {
    std::uint8_t class_id = kPS;
    std::vector<PixelCoord> pixels;

    std::size_t pixel_count() const noexcept { return pixels.size(); }
};

/// Continuous points (pixel centers, x = col + 0.5, y = row + 0.5) with
/// per-point weights in (0,1).
struct WeightedPoints {
    std::vector<Point2> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
};

Point2 pixel_center(PixelCoord p);

/// All 8-connected components of `class_id`, ordered by seed pixel (the
/// first pixel in row-major scan order).
std::vector<Component> connected_components(const LabelMask& mask, std::uint8_t class_id);

/// Largest 8-connected component; ties go to the lexicographically smallest seed.
/// Throws MissingStructure when the class is absent.
Component largest_component(const LabelMask& mask, std::uint8_t class_id);

/// Component pixels with at least one 4-neighbour outside the image or of a
/// different class. Row-major order.
std::vector<PixelCoord> boundary_points(const Component& comp, const LabelMask& mask);

WeightedPoints weighted_boundary(const std::vector<PixelCoord>& boundary, const ConfMap& conf);

}  // namespace aop
