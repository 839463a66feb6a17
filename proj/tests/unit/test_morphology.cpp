#include "aop/morphology.hpp"

#include "support/oracles.hpp"
#include "support/test_util.hpp"

#include <algorithm>

using namespace aop;

namespace {
LabelMask block(int h, int w, int r0, int c0, int r1, int c1, std::uint8_t cls) {
    LabelMask m(h, w);
    for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) m.set(r, c, cls);
    return m;
}
}  // namespace

TEST(Morphology, PixelCenterConvention) {
    const Point2 p = pixel_center({3, 7});
    EXPECT_EQ(p.x, 7.5);
    EXPECT_EQ(p.y, 3.5);
}

TEST(Morphology, SolidBlockBoundaryCount) {
    const LabelMask m = block(12, 12, 1, 1, 11, 11, kFH);
    const Component c = largest_component(m, kFH);
    EXPECT_EQ(c.pixel_count(), 100u);
    EXPECT_EQ(boundary_points(c, m).size(), 36u);
}

TEST(Morphology, DiagonalNeighboursAreConnected) {
    LabelMask m(3, 3);
    m.set(0, 0, kPS);
    m.set(1, 1, kPS);
    m.set(2, 2, kPS);
    EXPECT_EQ(connected_components(m, kPS).size(), 1u);
}

TEST(Morphology, LargestComponentTieGoesToEarliestSeed) {
    LabelMask m(5, 5);
    m.set(4, 0, kPS);
    m.set(4, 1, kPS);
    m.set(0, 3, kPS);
    m.set(0, 4, kPS);
    const Component c = largest_component(m, kPS);
    EXPECT_EQ(c.pixels.front(), (PixelCoord{0, 3}));
}

TEST(Morphology, MissingClassReportsStage) {
    const LabelMask m(4, 4);
    try {
        largest_component(m, kFH);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingStructure);
        EXPECT_EQ(e.stage(), "largest_component");
    }
}

TEST(Morphology, SinglePixelIsItsOwnBoundary) {
    LabelMask m(3, 3);
    m.set(1, 1, kPS);
    const Component c = largest_component(m, kPS);
    EXPECT_EQ(boundary_points(c, m).size(), 1u);
}

TEST(Morphology, WeightedBoundaryUsesConfidence) {
    const LabelMask m = block(6, 6, 2, 2, 4, 5, kPS);
    const Component c = largest_component(m, kPS);
    const auto b = boundary_points(c, m);
    ASSERT_EQ(b.size(), 6u);
    const auto wp = weighted_boundary(b, ConfMap(6, 6, 0.5));
    EXPECT_EQ(wp.size(), 6u);
    for (double w : wp.weights) EXPECT_EQ(w, 0.5);
    EXPECT_AOP_ERROR(weighted_boundary(b, ConfMap(3, 3, 0.5)), ErrorCode::InvalidInput);
}

TEST(Property, ComponentsMatchFloodFill) {
    SplitMix64 rng(5);
    for (int i = 0; i < 60; ++i) {
        const int h = 1 + static_cast<int>(rng.next() % 24), w = 1 + static_cast<int>(rng.next() % 24);
        const LabelMask m = testutil::random_labels(rng, h, w);
        for (std::uint8_t cls : {kPS, kFH}) {
            auto want = oracle::component_sizes(m, cls);
            std::vector<int> got;
            for (const auto& c : connected_components(m, cls))
                got.push_back(static_cast<int>(c.pixel_count()));
            std::sort(want.begin(), want.end());
            std::sort(got.begin(), got.end());
            EXPECT_EQ(got, want);
        }
    }
}

TEST(Property, BoundaryIsSubsetWithoutInteriorPixels) {
    SplitMix64 rng(9);
    for (int i = 0; i < 40; ++i) {
        const LabelMask m = testutil::random_labels(rng, 16, 16);
        for (const auto& comp : connected_components(m, kFH)) {
            for (const auto& p : boundary_points(comp, m)) {
                EXPECT_TRUE(std::binary_search(comp.pixels.begin(), comp.pixels.end(), p));
                const bool interior = m.contains(p.row - 1, p.col) && m.at(p.row - 1, p.col) == kFH &&
                                      m.contains(p.row + 1, p.col) && m.at(p.row + 1, p.col) == kFH &&
                                      m.contains(p.row, p.col - 1) && m.at(p.row, p.col - 1) == kFH &&
                                      m.contains(p.row, p.col + 1) && m.at(p.row, p.col + 1) == kFH;
                EXPECT_FALSE(interior);
            }
        }
    }
}
