#include "aop/geometry.hpp"
#include "aop/phantom.hpp"

#include "support/oracles.hpp"
#include "support/test_util.hpp"

#include <cmath>
#include <numbers>

using namespace aop;

namespace {
WeightedPoints unit_weights(std::vector<Point2> pts) {
    WeightedPoints w;
    w.weights.assign(pts.size(), 1.0);
    w.points = std::move(pts);
    return w;
}
}  // namespace

TEST(LawOfCosines, KnownTriangles) {
    EXPECT_NEAR(aop_from_sides(1, 1, 1), 60.0, 1e-9);
    EXPECT_NEAR(aop_from_sides(3, 4, 5), 90.0, 1e-9);
    EXPECT_NEAR(aop_from_sides(1, 2, 3), 180.0, 1e-9);
    EXPECT_NEAR(aop_from_sides(2, 1, 1), 0.0, 1e-6);
}

TEST(LawOfCosines, MonotoneInOppositeSide) {
    double prev = -1.0;
    for (double d14 = 1.05; d14 < 4.96; d14 += 0.1) {
        const double a = aop_from_sides(2.0, 3.0, d14);
        EXPECT_GT(a, prev);
        prev = a;
    }
}

TEST(LawOfCosines, ClampsAndRejectsNonpositiveSides) {
    EXPECT_EQ(aop_from_sides(1, 1, 3), 180.0);
    EXPECT_EQ(aop_from_sides(1, 1, 0), 0.0);
    EXPECT_AOP_ERROR(aop_from_sides(0, 1, 1), ErrorCode::InvalidTriangle);
    EXPECT_AOP_ERROR(aop_from_sides(-1, 1, 1), ErrorCode::InvalidTriangle);
}

TEST(EllipseFit, RecoversCircle) {
    const Ellipse e = fit_ellipse_weighted(unit_weights(oracle::ellipse_samples(10, -4, 3, 3, 0, 12)));
    EXPECT_NEAR(e.cx, 10, 1e-9);
    EXPECT_NEAR(e.cy, -4, 1e-9);
    EXPECT_NEAR(e.a, 3, 1e-9);
    EXPECT_NEAR(e.b, 3, 1e-9);
}

TEST(EllipseFit, RecoversRotatedEllipseAndAngleRange) {
    for (double theta : {0.1, 1.0, 2.0, 3.0}) {
        const Ellipse e =
            fit_ellipse_weighted(unit_weights(oracle::ellipse_samples(50, 60, 20, 8, theta, 30)));
        EXPECT_NEAR(e.a, 20, 1e-8);
        EXPECT_NEAR(e.b, 8, 1e-8);
        EXPECT_NEAR(e.theta, theta, 1e-8);
        EXPECT_GE(e.theta, 0.0);
        EXPECT_LT(e.theta, std::numbers::pi);
    }
}

TEST(EllipseFit, ErrorPaths) {
    EXPECT_AOP_ERROR(fit_ellipse_weighted(unit_weights(oracle::ellipse_samples(0, 0, 2, 1, 0, 5))),
                     ErrorCode::InsufficientPoints);
    std::vector<Point2> line;
    for (int i = 0; i < 10; ++i) line.push_back({double(i), 2.0 * i});
    EXPECT_AOP_ERROR(fit_ellipse_weighted(unit_weights(line)), ErrorCode::DegenerateFit);
}

TEST(EllipseFit, DownweightedOutlierHasLittleEffect) {
    auto pts = unit_weights(oracle::ellipse_samples(0, 0, 10, 5, 0.5, 40));
    pts.points.push_back({30, 30});
    pts.weights.push_back(1e-6);
    const Ellipse e = fit_ellipse_weighted(pts);
    EXPECT_NEAR(e.a, 10, 1e-3);
    EXPECT_NEAR(e.b, 5, 1e-3);
}

TEST(Conic, RoundTripsAndRejectsHyperbola) {
    const Ellipse e{3, 4, 7, 2, 0.7};
    const auto k = e.conic();
    EXPECT_NEAR(4 * k[0] * k[2] - k[1] * k[1], 1.0, 1e-12);
    const Ellipse back = ellipse_from_conic(k);
    EXPECT_NEAR(back.cx, 3, 1e-9);
    EXPECT_NEAR(back.a, 7, 1e-9);
    EXPECT_NEAR(back.theta, 0.7, 1e-9);
    EXPECT_AOP_ERROR(ellipse_from_conic({1, 0, -1, 0, 0, -1}), ErrorCode::DegenerateFit);
    EXPECT_AOP_ERROR(ellipse_from_conic({1, 0, 1, 0, 0, 1}), ErrorCode::DegenerateFit);
}

TEST(Tangents, MatchCircleClosedForm) {
    const Ellipse circle{2, 3, 5, 5, 0};
    const Point2 q{14, -1};
    auto [t1, t2] = tangent_points(circle, q);
    const auto ref = oracle::circle_tangents({2, 3}, 5, q);
    auto near = [](Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y) < 1e-9; };
    EXPECT_TRUE((near(t1, ref[0]) && near(t2, ref[1])) || (near(t1, ref[1]) && near(t2, ref[0])));
}

TEST(Tangents, LieOnEllipseAndArePerpendicularToGradient) {
    const Ellipse e{0, 0, 9, 4, 0.4};
    const Point2 q{20, 13};
    const auto [t1, t2] = tangent_points(e, q);
    const auto k = e.conic();
    for (Point2 t : {t1, t2}) {
        EXPECT_NEAR(e.level(t), 1.0, 1e-12);
        const double gx = 2 * k[0] * t.x + k[1] * t.y + k[3];
        const double gy = k[1] * t.x + 2 * k[2] * t.y + k[4];
        EXPECT_NEAR((q.x - t.x) * gx + (q.y - t.y) * gy, 0.0, 1e-9 * std::hypot(gx, gy) * 30);
    }
}

TEST(Tangents, InteriorOrBoundaryPointRejected) {
    const Ellipse e{0, 0, 4, 2, 0};
    EXPECT_AOP_ERROR(tangent_points(e, {1, 0}), ErrorCode::PointNotExterior);
    EXPECT_AOP_ERROR(tangent_points(e, {4, 0}), ErrorCode::PointNotExterior);
}

TEST(Tangents, SelectionMaximizesVertexAngle) {
    const Ellipse e{0, 0, 5, 3, 0.3};
    const PsAxis axis{{20, 30}, {12, 6}};
    const auto pair = tangent_points(e, axis.p_inf);
    const Point2 s = select_tangent(e, axis, pair);
    const Point2 other = (s == pair.first) ? pair.second : pair.first;
    EXPECT_GE(oracle::vertex_angle_deg(axis.p_inf, axis.p_sup, s),
              oracle::vertex_angle_deg(axis.p_inf, axis.p_sup, other));
}

TEST(Angle, MatchesCrossDotOracle) {
    SplitMix64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const Point2 v{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Point2 a{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Point2 b{rng.uniform(-5, 5), rng.uniform(-5, 5)};
        EXPECT_NEAR(angle_at_deg(v, a, b), oracle::vertex_angle_deg(v, a, b), 1e-9);
    }
}

TEST(PsAxisTest, EndpointNearerCentroidIsInferior) {
    LabelMask m(5, 20);
    for (int c = 2; c < 18; ++c) m.set(2, c, kPS);
    const Component comp = largest_component(m, kPS);
    const PsAxis ax = ps_axis(comp, ConfMap(5, 20, 0.8), {30, 2.5});
    EXPECT_NEAR(ax.p_inf.x, 17.5, 1e-9);
    EXPECT_NEAR(ax.p_sup.x, 2.5, 1e-9);
    EXPECT_NEAR(ax.p_inf.y, 2.5, 1e-9);
}

TEST(PsAxisTest, SinglePixelIsDegenerate) {
    LabelMask m(3, 3);
    m.set(1, 1, kPS);
    EXPECT_AOP_ERROR(ps_axis(largest_component(m, kPS), ConfMap(3, 3, 0.5), {0, 0}),
                     ErrorCode::DegenerateAxis);
}

TEST(Confidence, MeanOverSamplesAndErrors) {
    ConfMap c(2, 2, std::vector<double>{0.2, 0.4, 0.6, 0.8});
    const std::vector<Point2> pts{{0.5, 0.5}, {1.5, 1.5}};
    EXPECT_NEAR(aop_confidence(pts, c), 0.5, 1e-15);
    EXPECT_AOP_ERROR(aop_confidence(std::vector<Point2>{}, c), ErrorCode::InvalidInput);
    EXPECT_AOP_ERROR(aop_confidence(std::vector<Point2>{{5, 5}}, c), ErrorCode::InvalidInput);
}

TEST(ComputeAop, PhantomWithinOneDegree) {
    const auto c = phantom::suite_case(123, 0);
    const AopResult r = compute_aop(c.mask, c.conf);
    EXPECT_NEAR(r.aop_deg, c.gt_aop_deg, 1.0);
    EXPECT_GT(r.m_points, 6u);
    EXPECT_NEAR(r.c_aop, 0.7, 0.3);
    EXPECT_NEAR(aop_from_sides(r.d13, r.d34, r.d14), r.aop_deg, 1e-12);
}

TEST(ComputeAop, FailureStagesAndCodes) {
    const auto c = phantom::suite_case(123, 1);
    LabelMask no_fh = c.mask;
    for (int r = 0; r < no_fh.height(); ++r)
        for (int col = 0; col < no_fh.width(); ++col)
            if (no_fh.at(r, col) == kFH) no_fh.set(r, col, kBackground);
    try {
        compute_aop(no_fh, c.conf);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingStructure);
        EXPECT_FALSE(e.stage().empty());
    }
    EXPECT_AOP_ERROR(compute_aop(c.mask, c.conf, PixelSpacing(0.1, 0.2)),
                     ErrorCode::AnisotropicSpacing);
    EXPECT_AOP_ERROR(compute_aop(c.mask, ConfMap(3, 3, 0.5)), ErrorCode::InvalidInput);
}

TEST(ComputeAop, IsotropicSpacingScalesDistancesOnly) {
    const auto c = phantom::suite_case(123, 2);
    const AopResult a = compute_aop(c.mask, c.conf);
    const AopResult b = compute_aop(c.mask, c.conf, PixelSpacing(0.25));
    EXPECT_NEAR(a.aop_deg, b.aop_deg, 1e-9);
}

TEST(Property, FitIsTranslationEquivariant) {
    SplitMix64 rng(8);
    for (int i = 0; i < 20; ++i) {
        auto pts = oracle::ellipse_samples(0, 0, rng.uniform(5, 30), rng.uniform(2, 4), rng.uniform(0.1, 3), 25);
        for (auto& p : pts) {
            p.x += rng.uniform(-0.05, 0.05);
            p.y += rng.uniform(-0.05, 0.05);
        }
        const Ellipse e0 = fit_ellipse_weighted(unit_weights(pts));
        const double dx = rng.uniform(-100, 100), dy = rng.uniform(-100, 100);
        for (auto& p : pts) {
            p.x += dx;
            p.y += dy;
        }
        const Ellipse e1 = fit_ellipse_weighted(unit_weights(pts));
        EXPECT_NEAR(e1.cx - e0.cx, dx, 1e-7);
        EXPECT_NEAR(e1.cy - e0.cy, dy, 1e-7);
        EXPECT_NEAR(e1.a, e0.a, 1e-7);
    }
}

TEST(ComputeAop, UniformConfidenceGivesThatConfidence) {
    const auto c = phantom::suite_case(77, 0);
    const AopResult r = compute_aop(c.mask, ConfMap(c.mask.height(), c.mask.width(), 0.7));
    EXPECT_NEAR(r.c_aop, 0.7, 1e-9);
}

TEST(ComputeAop, VertexInsideFittedEllipse) {
    // FH ring with the PS segment inside the hole.
    LabelMask m(64, 64);
    for (int r = 0; r < 64; ++r)
        for (int col = 0; col < 64; ++col) {
            const double d = std::hypot(r + 0.5 - 32, col + 0.5 - 32);
            if (d >= 20 && d <= 28) m.set(r, col, kFH);
        }
    for (int col = 26; col < 36; ++col) m.set(32, col, kPS);
    EXPECT_AOP_ERROR(compute_aop(m, ConfMap(64, 64, 0.5)), ErrorCode::PointNotExterior);
}

TEST(Property, ConstantWeightsMatchUnitWeights) {
    SplitMix64 rng(14);
    auto pts = oracle::ellipse_samples(30, 40, 12, 7, 0.8, 40);
    for (auto& p : pts) p.x += rng.uniform(-0.3, 0.3);
    const Ellipse u = fit_ellipse_weighted(unit_weights(pts));
    WeightedPoints w = unit_weights(pts);
    std::fill(w.weights.begin(), w.weights.end(), 0.37);
    const Ellipse c = fit_ellipse_weighted(w);
    EXPECT_NEAR(u.cx, c.cx, 1e-9);
    EXPECT_NEAR(u.a, c.a, 1e-9);
    EXPECT_NEAR(u.b, c.b, 1e-9);
    EXPECT_NEAR(u.theta, c.theta, 1e-9);
}

TEST(Property, QuarterTurnsChangeAopByAtMostOneDegree) {
    auto rotate = [](const LabelMask& m) {
        LabelMask out(m.width(), m.height());
        for (int r = 0; r < m.height(); ++r)
            for (int col = 0; col < m.width(); ++col) out.set(col, m.height() - 1 - r, m.at(r, col));
        return out;
    };
    for (int i = 0; i < 5; ++i) {
        const auto c = phantom::suite_case(31, i);
        const double base = compute_aop(c.mask, c.conf).aop_deg;
        LabelMask m = c.mask;
        for (int turn = 1; turn < 4; ++turn) {
            m = rotate(m);
            const ConfMap conf(m.height(), m.width(), 0.7);
            EXPECT_NEAR(compute_aop(m, conf).aop_deg, base, 1.0);
        }
    }
}

TEST(Property, ConfidenceIsStrictlyMonotone) {
    const auto c = phantom::suite_case(32, 0);
    const AopResult lo = compute_aop(c.mask, ConfMap(c.mask.height(), c.mask.width(), 0.4));
    const AopResult hi = compute_aop(c.mask, ConfMap(c.mask.height(), c.mask.width(), 0.41));
    EXPECT_GT(hi.c_aop, lo.c_aop);
}
