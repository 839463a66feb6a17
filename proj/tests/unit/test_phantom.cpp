#include "aop/geometry.hpp"
#include "aop/phantom.hpp"

#include "support/oracles.hpp"
#include "support/test_util.hpp"

#include <cmath>

using namespace aop;
using namespace aop::phantom;

namespace {
PhantomSpec simple_spec() {
    PhantomSpec s;
    s.height = 128;
    s.width = 128;
    s.fh_ellipse = Ellipse{40, 80, 25, 18, 0.3};
    s.ps_sup = {100.5, 20.5};
    s.ps_inf = {90.5, 60.5};
    s.ps_half_width = 0.9;
    return s;
}
}  // namespace

TEST(Validate, AcceptsSimpleSpec) { EXPECT_NO_THROW(validate(simple_spec())); }

TEST(Validate, RejectsBadSpecs) {
    auto s = simple_spec();
    s.ps_inf = {40, 80};
    EXPECT_AOP_ERROR(validate(s), ErrorCode::InvalidSpec);
    s = simple_spec();
    s.fh_ellipse.cx = 5;
    EXPECT_AOP_ERROR(validate(s), ErrorCode::InvalidSpec);
    s = simple_spec();
    s.ps_sup = {200, 20};
    EXPECT_AOP_ERROR(validate(s), ErrorCode::InvalidSpec);
    s = simple_spec();
    s.ps_inf = {64.5, 80.5};
    EXPECT_AOP_ERROR(validate(s), ErrorCode::InvalidSpec);
}

TEST(Generate, CleanLogitsAgreeWithMask) {
    const PhantomCase c = generate(simple_spec());
    EXPECT_EQ(argmax_labels(c.logits), c.mask);
    for (double v : c.logits.values()) EXPECT_TRUE(v == 0.0 || v == kLogitMargin);
    for (double v : c.conf.values()) EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
}

TEST(Generate, GroundTruthFromExactShapes) {
    const PhantomSpec s = simple_spec();
    const PhantomCase c = generate(s);
    const auto [t1, t2] = tangent_points(s.fh_ellipse, s.ps_inf);
    const double a1 = oracle::vertex_angle_deg(s.ps_inf, s.ps_sup, t1);
    const double a2 = oracle::vertex_angle_deg(s.ps_inf, s.ps_sup, t2);
    EXPECT_NEAR(c.gt_aop_deg, std::max(a1, a2), 1e-9);
    EXPECT_NEAR(compute_aop(c.mask, c.conf).aop_deg, c.gt_aop_deg, 1.0);
}

TEST(Generate, RadialConfidenceFallsOff) {
    PhantomSpec s = simple_spec();
    s.conf_field = RadialConf{{64, 64}, 0.9, 0.3};
    const PhantomCase c = generate(s);
    EXPECT_GT(c.conf.at(64, 64), c.conf.at(0, 0));
    EXPECT_NEAR(c.conf.at(64, 64), 0.9, 1e-2);
}

TEST(Suite, MemberMatchesSuiteCase) {
    const auto s = suite(4, 17);
    const PhantomCase c = suite_case(17, 3);
    EXPECT_EQ(s[3].mask, c.mask);
    EXPECT_EQ(s[3].gt_aop_deg, c.gt_aop_deg);
    EXPECT_NE(suite_case(18, 3).mask, c.mask);
    EXPECT_AOP_ERROR(suite(-1, 1), ErrorCode::InvalidInput);
}

TEST(Suite, GroundTruthInRangeAndMeasurable) {
    for (const auto& c : suite(25, 3)) {
        EXPECT_GE(c.gt_aop_deg, 70.0);
        EXPECT_LE(c.gt_aop_deg, 160.0);
        EXPECT_NEAR(compute_aop(c.mask, c.conf).aop_deg, c.gt_aop_deg, 1.0);
    }
}

TEST(Corruption, LeavesMaskAndShiftsLogits) {
    const PhantomCase clean = suite_case(5, 0);
    const PhantomCase noisy = corrupt(clean, LogitNoise{1.0}, 9);
    EXPECT_EQ(noisy.mask, clean.mask);
    EXPECT_FALSE(std::ranges::equal(noisy.logits.values(), clean.logits.values()));
    EXPECT_TRUE(std::ranges::equal(corrupt(clean, LogitNoise{1.0}, 9).logits.values(),
                                   noisy.logits.values()));

    const PhantomCase biased = corrupt(clean, LogitBias{kFH, 2.5}, 0);
    for (std::size_t i = 0; i < clean.logits.values().size(); ++i) {
        const bool fh_channel = i >= 2 * clean.logits.pixels();
        EXPECT_EQ(biased.logits.values()[i], clean.logits.values()[i] + (fh_channel ? 2.5 : 0.0));
    }

    const PhantomCase eroded = corrupt(clean, BoundaryErosion{1}, 0);
    const LabelMask seen = argmax_labels(eroded.logits);
    int lost = 0;
    for (int r = 0; r < seen.height(); ++r)
        for (int col = 0; col < seen.width(); ++col) {
            EXPECT_TRUE(seen.at(r, col) == clean.mask.at(r, col) || seen.at(r, col) == kBackground);
            lost += seen.at(r, col) != clean.mask.at(r, col);
        }
    EXPECT_GT(lost, 0);
}

TEST(Corruption, DescribeNamesKind) {
    EXPECT_NE(describe(LogitNoise{1.5}).find("noise"), std::string::npos);
    EXPECT_NE(describe(NoCorruption{}).find("none"), std::string::npos);
}
