#include "aop/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace aop {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// Row runs of one class as a single path of rectangles.
std::string region_path(const LabelMask& mask, std::uint8_t label) {
    std::ostringstream d;
    for (int r = 0; r < mask.height(); ++r) {
        int c = 0;
        while (c < mask.width()) {
            if (mask.at(r, c) != label) {
                ++c;
                continue;
            }
            const int start = c;
            while (c < mask.width() && mask.at(r, c) == label) ++c;
            d << 'M' << start << ' ' << r << 'h' << (c - start) << "v1h" << -(c - start) << 'z';
        }
    }
    return d.str();
}

std::string escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace

std::string format_angle_label(double aop_deg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f°", aop_deg);
    return buf;
}

std::string render_svg(const LabelMask& mask, const std::optional<AopResult>& result,
                       const std::string& failure_note) {
    const int w = mask.width();
    const int h = mask.height();
    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
        << "<!-- pixel coordinates, origin top-left, y axis points down -->\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << w << "\" height=\"" << h << "\" fill=\"#101010\"/>\n"
        << "<path class=\"region-ps\" fill=\"#e4572e\" fill-opacity=\"0.8\" d=\""
        << region_path(mask, kPS) << "\"/>\n"
        << "<path class=\"region-fh\" fill=\"#4c9be8\" fill-opacity=\"0.6\" d=\""
        << region_path(mask, kFH) << "\"/>\n";

    if (result) {
        const AopResult& r = *result;
        const Ellipse& e = r.ellipse;
        const double stroke = std::max(0.5, std::min(w, h) / 256.0);
        svg << "<g class=\"geometry\" fill=\"none\" stroke-width=\"" << fmt(stroke) << "\">\n"
            << "<ellipse class=\"fh-fit\" cx=\"" << fmt(e.cx) << "\" cy=\"" << fmt(e.cy)
            << "\" rx=\"" << fmt(e.a) << "\" ry=\"" << fmt(e.b) << "\" transform=\"rotate("
            << fmt(e.theta * 180.0 / std::numbers::pi) << ' ' << fmt(e.cx) << ' ' << fmt(e.cy)
            << ")\" stroke=\"#ffd23f\"/>\n"
            << "<line class=\"ps-axis\" x1=\"" << fmt(r.p1.x) << "\" y1=\"" << fmt(r.p1.y)
            << "\" x2=\"" << fmt(r.p3.x) << "\" y2=\"" << fmt(r.p3.y) << "\" stroke=\"#ffffff\"/>\n"
            << "<line class=\"fh-tangent\" x1=\"" << fmt(r.p3.x) << "\" y1=\"" << fmt(r.p3.y)
            << "\" x2=\"" << fmt(r.p4.x) << "\" y2=\"" << fmt(r.p4.y) << "\" stroke=\"#3bceac\"/>\n";

        // Arc at p3 from the PS ray to the tangent ray.
        const double radius = std::max(3.0, 0.25 * std::min(r.d13, r.d34));
        const double ax = (r.p1.x - r.p3.x) / r.d13;
        const double ay = (r.p1.y - r.p3.y) / r.d13;
        const double bx = (r.p4.x - r.p3.x) / r.d34;
        const double by = (r.p4.y - r.p3.y) / r.d34;
        const int sweep = (ax * by - ay * bx) > 0.0 ? 1 : 0;
        svg << "<path class=\"aop-arc\" stroke=\"#ff70a6\" d=\"M" << fmt(r.p3.x + radius * ax) << ' '
            << fmt(r.p3.y + radius * ay) << " A" << fmt(radius) << ' ' << fmt(radius) << " 0 0 "
            << sweep << ' ' << fmt(r.p3.x + radius * bx) << ' ' << fmt(r.p3.y + radius * by)
            << "\"/>\n";
        double mx = ax + bx;
        double my = ay + by;
        const double mlen = std::hypot(mx, my);
        if (mlen < 1e-9) {
            mx = -ay;
            my = ax;
        } else {
            mx /= mlen;
            my /= mlen;
        }
        svg << "</g>\n"
            << "<text class=\"aop-label\" x=\"" << fmt(r.p3.x + 1.6 * radius * mx) << "\" y=\""
            << fmt(r.p3.y + 1.6 * radius * my) << "\" fill=\"#ff70a6\" font-size=\""
            << fmt(std::max(6.0, h / 24.0)) << "\">" << format_angle_label(r.aop_deg)
            << "</text>\n";
        char caption[64];
        std::snprintf(caption, sizeof caption, "AoP %.2f°, C_AoP %.4f", r.aop_deg, r.c_aop);
        svg << "<text class=\"caption\" x=\"4\" y=\"" << fmt(h - 4.0) << "\" fill=\"#ffffff\" font-size=\""
            << fmt(std::max(6.0, h / 28.0)) << "\">" << caption << "</text>\n";
    } else if (!failure_note.empty()) {
        svg << "<text class=\"caption\" x=\"4\" y=\"" << fmt(h - 4.0)
            << "\" fill=\"#ffffff\" font-size=\"" << fmt(std::max(6.0, h / 28.0))
            << "\">measurement failed: " << escape(failure_note) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace aop
