#include "aop/morphology.hpp"

#include "aop/error.hpp"

#include <algorithm>

namespace aop {

Point2 pixel_center(PixelCoord p) { return {p.col + 0.5, p.row + 0.5}; }

std::vector<Component> connected_components(const LabelMask& mask, std::uint8_t class_id) {
    const int h = mask.height();
    const int w = mask.width();
    std::vector<int> visited(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0);
    std::vector<Component> components;
    std::vector<PixelCoord> stack;

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const std::size_t seed = static_cast<std::size_t>(r) * w + c;
            if (visited[seed] || mask.at(r, c) != class_id) continue;

            Component comp;
            comp.class_id = class_id;
            visited[seed] = 1;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                comp.pixels.push_back(p);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int nr = p.row + dr;
                        const int nc = p.col + dc;
                        if (!mask.contains(nr, nc)) continue;
                        const std::size_t k = static_cast<std::size_t>(nr) * w + nc;
                        if (visited[k] || mask.at(nr, nc) != class_id) continue;
                        visited[k] = 1;
                        stack.push_back({nr, nc});
                    }
                }
            }
            std::sort(comp.pixels.begin(), comp.pixels.end());
            components.push_back(std::move(comp));
        }
    }
    return components;
}

Component largest_component(const LabelMask& mask, std::uint8_t class_id) {
    if (class_id != kPS && class_id != kFH) {
        throw Error(ErrorCode::InvalidInput, "largest_component: class id must be PS or FH");
    }
    auto components = connected_components(mask, class_id);
    if (components.empty()) {
        throw Error(ErrorCode::MissingStructure,
                    std::string("no ") + (class_id == kPS ? "PS" : "FH") + " pixels in mask",
                    "largest_component");
    }
    // Components arrive in seed order, so the first maximum has the smallest seed.
    std::size_t best = 0;
    for (std::size_t i = 1; i < components.size(); ++i) {
        if (components[i].pixel_count() > components[best].pixel_count()) best = i;
    }
    return std::move(components[best]);
}

std::vector<PixelCoord> boundary_points(const Component& comp, const LabelMask& mask) {
    static constexpr int kDr[4] = {-1, 1, 0, 0};
    static constexpr int kDc[4] = {0, 0, -1, 1};
    std::vector<PixelCoord> boundary;
    for (const PixelCoord& p : comp.pixels) {
        for (int k = 0; k < 4; ++k) {
            const int nr = p.row + kDr[k];
            const int nc = p.col + kDc[k];
            if (!mask.contains(nr, nc) || mask.at(nr, nc) != comp.class_id) {
                boundary.push_back(p);
                break;
            }
        }
    }
    return boundary;
}

WeightedPoints weighted_boundary(const std::vector<PixelCoord>& boundary, const ConfMap& conf) {
    WeightedPoints out;
    out.points.reserve(boundary.size());
    out.weights.reserve(boundary.size());
    for (const PixelCoord& p : boundary) {
        if (p.row < 0 || p.col < 0 || p.row >= conf.height() || p.col >= conf.width()) {
            throw Error(ErrorCode::InvalidInput,
                        "weighted_boundary: boundary pixel outside confidence map",
                        "weighted_boundary");
        }
        out.points.push_back(pixel_center(p));
        out.weights.push_back(conf.at(p.row, p.col));
    }
    return out;
}

}  // namespace aop
