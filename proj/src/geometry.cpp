#include "aop/geometry.hpp"

#include "aop/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aop {

namespace {

constexpr double kPi = std::numbers::pi;

double normalize_theta(double theta) {
    theta = std::fmod(theta, kPi);
    if (theta < 0.0) theta += kPi;
    if (theta >= kPi) theta -= kPi;
    return theta;
}

bool lex_less(Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Ellipse::level(Point2 p) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double dx = p.x - cx;
    const double dy = p.y - cy;
    const double u = (c * dx + s * dy) / a;
    const double v = (-s * dx + c * dy) / b;
    return u * u + v * v;
}

Point2 Ellipse::point_at(double t) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double u = a * std::cos(t);
    const double v = b * std::sin(t);
    return {cx + c * u - s * v, cy + s * u + c * v};
}

std::array<double, 6> Ellipse::conic() const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double ia2 = 1.0 / (a * a);
    const double ib2 = 1.0 / (b * b);
    double A = c * c * ia2 + s * s * ib2;
    double B = 2.0 * c * s * (ia2 - ib2);
    double C = s * s * ia2 + c * c * ib2;
    double D = -2.0 * A * cx - B * cy;
    double E = -B * cx - 2.0 * C * cy;
    double F = A * cx * cx + B * cx * cy + C * cy * cy - 1.0;
    const double k = 0.5 * a * b;
    return {A * k, B * k, C * k, D * k, E * k, F * k};
}

Ellipse ellipse_from_conic(const std::array<double, 6>& conic) {
    auto [A, B, C, D, E, F] = conic;
    const double det = 4.0 * A * C - B * B;
    if (!(det > 0.0) || !std::isfinite(det)) {
        throw Error(ErrorCode::DegenerateFit, "conic is not an ellipse (4AC - B^2 <= 0)");
    }
    // Center solves [2A B; B 2C] c = -[D; E].
    const double cx = (B * E - 2.0 * C * D) / det;
    const double cy = (B * D - 2.0 * A * E) / det;
    double f0 = F + 0.5 * (D * cx + E * cy);
    if (f0 > 0.0) {
        A = -A;
        B = -B;
        C = -C;
        f0 = -f0;
    }
    // Quadratic form in direction phi: (A+C)/2 + R cos(2 phi - alpha).
    const double mean = 0.5 * (A + C);
    const double radius = std::hypot(0.5 * (A - C), 0.5 * B);
    const double lambda_min = mean - radius;
    const double lambda_max = mean + radius;
    if (!(lambda_min > 0.0) || !(f0 < 0.0)) {
        throw Error(ErrorCode::DegenerateFit, "conic has no real points (imaginary ellipse)");
    }
    Ellipse e;
    e.cx = cx;
    e.cy = cy;
    e.a = std::sqrt(-f0 / lambda_min);
    e.b = std::sqrt(-f0 / lambda_max);
    const double alpha = std::atan2(B, A - C);
    e.theta = normalize_theta(0.5 * (alpha + kPi));
    if (!std::isfinite(e.a) || !std::isfinite(e.b) || !std::isfinite(e.cx) ||
        !std::isfinite(e.cy)) {
        throw Error(ErrorCode::DegenerateFit, "ellipse parameters are not finite");
    }
    return e;
}

Ellipse fit_ellipse_weighted(const WeightedPoints& pts) {
    const std::size_t n = pts.size();
    if (pts.weights.size() != n) {
        throw Error(ErrorCode::InvalidInput, "point and weight counts differ",
                    "fit_ellipse_weighted");
    }
    if (n < 6) {
        throw Error(ErrorCode::InsufficientPoints,
                    "ellipse fit needs at least 6 points, got " + std::to_string(n),
                    "fit_ellipse_weighted");
    }
    double wsum = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = pts.weights[i];
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::InvalidInput, "weights must be positive",
                        "fit_ellipse_weighted");
        }
        wsum += w;
        mx += w * pts.points[i].x;
        my += w * pts.points[i].y;
    }
    mx /= wsum;
    my /= wsum;
    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = pts.points[i].x - mx;
        const double dy = pts.points[i].y - my;
        spread += pts.weights[i] * (dx * dx + dy * dy);
    }
    const double scale = std::sqrt(spread / wsum);
    if (!(scale > 0.0)) {
        throw Error(ErrorCode::DegenerateFit, "all points coincide", "fit_ellipse_weighted");
    }

    // Scatter blocks of the quadratic (x^2, xy, y^2) and linear (x, y, 1) design rows.
    Eigen::Matrix3d s1 = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d s2 = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d s3 = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (pts.points[i].x - mx) / scale;
        const double y = (pts.points[i].y - my) / scale;
        const Eigen::Vector3d quad(x * x, x * y, y * y);
        const Eigen::Vector3d lin(x, y, 1.0);
        const double w = pts.weights[i];
        s1.noalias() += w * quad * quad.transpose();
        s2.noalias() += w * quad * lin.transpose();
        s3.noalias() += w * lin * lin.transpose();
    }
    s1 /= wsum;
    s2 /= wsum;
    s3 /= wsum;

    Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
    s3_lu.setThreshold(1e-10);
    if (s3_lu.rank() < 3) {
        throw Error(ErrorCode::DegenerateFit, "points are collinear (rank-deficient scatter)",
                    "fit_ellipse_weighted");
    }
    const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
    const Eigen::Matrix3d m = s1 + s2 * t;
    // Premultiply by the inverse of the constraint block [[0,0,2],[0,-1,0],[2,0,0]].
    Eigen::Matrix3d reduced;
    reduced.row(0) = m.row(2) / 2.0;
    reduced.row(1) = -m.row(1);
    reduced.row(2) = m.row(0) / 2.0;

    Eigen::EigenSolver<Eigen::Matrix3d> solver(reduced);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::DegenerateFit, "eigen decomposition failed", "fit_ellipse_weighted");
    }
    const Eigen::Matrix3d vectors = solver.eigenvectors().real();
    int best = -1;
    double best_constraint = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3d v = vectors.col(k).normalized();
        const double constraint = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (constraint > best_constraint) {
            best_constraint = constraint;
            best = k;
        }
    }
    if (best < 0) {
        throw Error(ErrorCode::DegenerateFit, "no eigenvector satisfies the ellipse constraint",
                    "fit_ellipse_weighted");
    }
    const Eigen::Vector3d quad = vectors.col(best);
    const Eigen::Vector3d lin = t * quad;

    Ellipse e;
    try {
        e = ellipse_from_conic({quad(0), quad(1), quad(2), lin(0), lin(1), lin(2)});
    } catch (const Error& err) {
        throw err.with_stage("fit_ellipse_weighted");
    }
    e.cx = e.cx * scale + mx;
    e.cy = e.cy * scale + my;
    e.a *= scale;
    e.b *= scale;
    return e;
}

PsAxis ps_axis(const Component& comp, const ConfMap& conf, Point2 fh_centroid) {
    if (comp.pixels.size() < 2) {
        throw Error(ErrorCode::DegenerateAxis, "PS component needs at least two pixels", "ps_axis");
    }
    double wsum = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (const PixelCoord& p : comp.pixels) {
        if (p.row < 0 || p.col < 0 || p.row >= conf.height() || p.col >= conf.width()) {
            throw Error(ErrorCode::InvalidInput, "PS pixel outside confidence map", "ps_axis");
        }
        const double w = conf.at(p.row, p.col);
        const Point2 c = pixel_center(p);
        wsum += w;
        mx += w * c.x;
        my += w * c.y;
    }
    mx /= wsum;
    my /= wsum;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const PixelCoord& p : comp.pixels) {
        const double w = conf.at(p.row, p.col);
        const Point2 c = pixel_center(p);
        const double dx = c.x - mx;
        const double dy = c.y - my;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    sxx /= wsum;
    sxy /= wsum;
    syy /= wsum;
    const double lambda_max = 0.5 * (sxx + syy) + std::hypot(0.5 * (sxx - syy), sxy);
    if (!(lambda_max > 1e-12)) {
        throw Error(ErrorCode::DegenerateAxis, "PS covariance is zero", "ps_axis");
    }
    const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    const double ux = std::cos(phi);
    const double uy = std::sin(phi);

    Point2 lo = pixel_center(comp.pixels.front());
    Point2 hi = lo;
    double lo_proj = ux * lo.x + uy * lo.y;
    double hi_proj = lo_proj;
    for (const PixelCoord& p : comp.pixels) {
        const Point2 c = pixel_center(p);
        const double proj = ux * c.x + uy * c.y;
        if (proj < lo_proj) {
            lo_proj = proj;
            lo = c;
        }
        if (proj > hi_proj) {
            hi_proj = proj;
            hi = c;
        }
    }
    if (lo == hi) {
        throw Error(ErrorCode::DegenerateAxis, "PS endpoints coincide", "ps_axis");
    }
    if (distance(hi, fh_centroid) < distance(lo, fh_centroid)) return {lo, hi};
    return {hi, lo};
}

std::pair<Point2, Point2> tangent_points(const Ellipse& e, Point2 q) {
    const double c = std::cos(e.theta);
    const double s = std::sin(e.theta);
    const double dx = q.x - e.cx;
    const double dy = q.y - e.cy;
    // Ellipse frame, then scale onto the unit circle.
    const double ux = (c * dx + s * dy) / e.a;
    const double uy = (-s * dx + c * dy) / e.b;
    const double r2 = ux * ux + uy * uy;
    if (!(r2 > 1.0 + 1e-12)) {
        throw Error(ErrorCode::PointNotExterior, "point is not outside the ellipse",
                    "tangent_points");
    }
    const double k = std::sqrt(r2 - 1.0);
    auto to_image = [&](double tx, double ty) {
        const double u = e.a * tx;
        const double v = e.b * ty;
        return Point2{e.cx + c * u - s * v, e.cy + s * u + c * v};
    };
    const Point2 t1 = to_image((ux - k * uy) / r2, (uy + k * ux) / r2);
    const Point2 t2 = to_image((ux + k * uy) / r2, (uy - k * ux) / r2);
    return {t1, t2};
}

double angle_at_deg(Point2 vertex, Point2 a, Point2 b) {
    const double ax = a.x - vertex.x;
    const double ay = a.y - vertex.y;
    const double bx = b.x - vertex.x;
    const double by = b.y - vertex.y;
    return std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by) * 180.0 / kPi;
}

Point2 select_tangent(const Ellipse& /*e*/, const PsAxis& axis,
                      const std::pair<Point2, Point2>& candidates) {
    const double first = angle_at_deg(axis.p_inf, axis.p_sup, candidates.first);
    const double second = angle_at_deg(axis.p_inf, axis.p_sup, candidates.second);
    if (std::abs(first - second) <= 1e-12) {
        return lex_less(candidates.second, candidates.first) ? candidates.second
                                                             : candidates.first;
    }
    return first > second ? candidates.first : candidates.second;
}

double aop_from_sides(double d13, double d34, double d14) {
    if (!(d13 > 0.0) || !(d34 > 0.0) || !std::isfinite(d13) || !std::isfinite(d34) ||
        !std::isfinite(d14)) {
        throw Error(ErrorCode::InvalidTriangle, "triangle sides d13 and d34 must be positive",
                    "aop_from_sides");
    }
    const double cosine = (d13 * d13 + d34 * d34 - d14 * d14) / (2.0 * d13 * d34);
    return std::acos(std::clamp(cosine, -1.0, 1.0)) * 180.0 / kPi;
}

double aop_confidence(std::span<const Point2> samples, const ConfMap& conf) {
    if (samples.empty()) {
        throw Error(ErrorCode::InvalidInput, "empty confidence sample set", "aop_confidence");
    }
    double sum = 0.0;
    for (const Point2& p : samples) {
        const double fr = std::floor(p.y);
        const double fc = std::floor(p.x);
        if (fr < 0.0 || fc < 0.0 || fr >= conf.height() || fc >= conf.width()) {
            throw Error(ErrorCode::InvalidInput, "sample point outside confidence map",
                        "aop_confidence");
        }
        sum += conf.at(static_cast<int>(fr), static_cast<int>(fc));
    }
    return sum / static_cast<double>(samples.size());
}

AopResult compute_aop(const LabelMask& mask, const ConfMap& conf, const PixelSpacing& spacing) {
    if (!spacing.isotropic()) {
        throw Error(ErrorCode::AnisotropicSpacing, "AoP requires isotropic pixel spacing",
                    "spacing");
    }
    if (mask.height() != conf.height() || mask.width() != conf.width()) {
        throw Error(ErrorCode::InvalidInput, "mask and confidence extents differ", "compute_aop");
    }
    const Component ps = largest_component(mask, kPS);
    const Component fh = largest_component(mask, kFH);
    const auto ps_boundary = boundary_points(ps, mask);
    const auto fh_boundary = boundary_points(fh, mask);
    const WeightedPoints fh_weighted = weighted_boundary(fh_boundary, conf);
    const WeightedPoints ps_weighted = weighted_boundary(ps_boundary, conf);

    AopResult result;
    result.ellipse = fit_ellipse_weighted(fh_weighted);
    const PsAxis axis = ps_axis(ps, conf, result.ellipse.center());
    result.p1 = axis.p_sup;
    result.p3 = axis.p_inf;
    result.p4 = select_tangent(result.ellipse, axis, tangent_points(result.ellipse, result.p3));
    result.d13 = distance(result.p1, result.p3);
    result.d34 = distance(result.p3, result.p4);
    result.d14 = distance(result.p1, result.p4);
    result.aop_deg = aop_from_sides(result.d13, result.d34, result.d14);

    std::vector<Point2> samples;
    samples.reserve(ps_weighted.size() + fh_weighted.size());
    samples.insert(samples.end(), ps_weighted.points.begin(), ps_weighted.points.end());
    samples.insert(samples.end(), fh_weighted.points.begin(), fh_weighted.points.end());
    result.c_aop = aop_confidence(samples, conf);
    result.m_points = samples.size();
    return result;
}

}  // namespace aop
