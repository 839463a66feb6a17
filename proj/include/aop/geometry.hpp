#pragma once

#include "aop/morphology.hpp"
#include "aop/raster.hpp"

#include <array>
#include <span>
#include <utility>

namespace aop {

/// Ellipse {(cx, cy), a, b, theta} in pixel coordinates with a >= b > 0 and
/// theta (major axis from +x) in [0, pi).
struct Ellipse {
    double cx = 0.0;
    double cy = 0.0;
    double a = 1.0;
    double b = 1.0;
    double theta = 0.0;

    /// (u/a)^2 + (v/b)^2 in the ellipse frame; 1 on the curve.
    double level(Point2 p) const;
    Point2 center() const { return {cx, cy}; }
    /// Point at eccentric anomaly t.
    Point2 point_at(double t) const;
    /// Implicit conic A x^2 + B xy + C y^2 + D x + E y + F = 0 scaled so that 4AC - B^2 = 1.
    std::array<double, 6> conic() const;
};

/// Conic coefficients (A, B, C, D, E, F) to geometric parameters.
/// Throws DegenerateFit when the conic is not a real ellipse.
Ellipse ellipse_from_conic(const std::array<double, 6>& conic);

struct PsAxis {
    Point2 p_sup;
    Point2 p_inf;
};

struct AopResult {
    double aop_deg = 0.0;
    double c_aop = 0.0;
    Point2 p1;  ///< PS superior endpoint
    Point2 p3;  ///< PS inferior endpoint, the AoP vertex
    Point2 p4;  ///< FH tangent point
    double d13 = 0.0;
    double d34 = 0.0;
    double d14 = 0.0;
    Ellipse ellipse;
    std::size_t m_points = 0;
};

/// Weighted direct least-squares ellipse fit (ellipse-specific constraint
/// 4AC - B^2 = 1), solved through the reduced 3x3 scatter eigenproblem.
Ellipse fit_ellipse_weighted(const WeightedPoints& pts);

/// Principal axis of the confidence-weighted PS pixel centers. The endpoint
/// nearer to `fh_centroid` is the inferior one.
PsAxis ps_axis(const Component& comp, const ConfMap& conf, Point2 fh_centroid);

/// The two points of tangency of lines through `q` (strictly exterior).
std::pair<Point2, Point2> tangent_points(const Ellipse& e, Point2 q);

/// Angle at `vertex` between rays to `a` and `b`, in degrees within [0, 180].
double angle_at_deg(Point2 vertex, Point2 a, Point2 b);

/// Candidate maximizing the angle at axis.p_inf between the rays towards
/// axis.p_sup and the candidate; ties go to the lexicographically smaller point.
Point2 select_tangent(const Ellipse& e, const PsAxis& axis,
                      const std::pair<Point2, Point2>& candidates);

/// Law-of-cosines angle opposite d14, in degrees.
double aop_from_sides(double d13, double d34, double d14);

/// Mean confidence at the given points (nearest-pixel lookup).
double aop_confidence(std::span<const Point2> samples, const ConfMap& conf);

/// Full measurement: components, boundaries, FH ellipse, PS axis, tangent, AoP and C_AoP.
/// Geometric failures are thrown as aop::Error carrying the failing stage.
AopResult compute_aop(const LabelMask& mask, const ConfMap& conf,
                      const PixelSpacing& spacing = PixelSpacing{});

double distance(Point2 a, Point2 b);

}  // namespace aop
