#pragma once

#include "aop/geometry.hpp"
#include "aop/raster.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace aop::phantom {

struct UniformConf {
    double value = 0.7;
};

/// Linear falloff from v_max at `center` to v_min at half the extent diagonal.
struct RadialConf {
    Point2 center;
    double v_max = 0.95;
    double v_min = 0.4;
};

using ConfField = std::variant<UniformConf, RadialConf>;

struct NoCorruption {};
struct LogitNoise {
    double sigma = 1.0;
};
struct LogitBias {
    std::uint8_t class_id = kBackground;
    double delta = 0.0;
};
struct BoundaryErosion {
    int iterations = 1;
};

using Corruption = std::variant<NoCorruption, LogitNoise, LogitBias, BoundaryErosion>;

inline constexpr double kLogitMargin = 5.0;

struct PhantomSpec {
    int height = 256;
    int width = 256;
    Ellipse fh_ellipse;
    Point2 ps_sup;
    Point2 ps_inf;
    double ps_half_width = 0.9;
    ConfField conf_field = UniformConf{};
    Corruption corruption = NoCorruption{};
    std::uint64_t seed = 0;
};

struct PhantomCase {
    PhantomSpec spec;
    LabelMask mask;
    ConfMap conf;
    LogitMap logits;
    double gt_aop_deg = 0.0;
    Ellipse gt_ellipse;
    PsAxis gt_ps;
    Point2 gt_tangent;
};

/// Throws InvalidSpec when the shapes overlap, leave the extent, or p_inf is
/// not strictly outside the ellipse.
void validate(const PhantomSpec& spec);

/// Ground-truth AoP on the continuous shapes, with the tangent point it uses.
std::pair<double, Point2> analytic_aop(const Ellipse& fh, Point2 ps_sup, Point2 ps_inf);

PhantomCase generate(const PhantomSpec& spec);

/// Corruption of the logits only; mask and ground truth are untouched.
PhantomCase corrupt(const PhantomCase& input, const Corruption& corruption, std::uint64_t seed);

/// Clean logits: +margin on the true class, 0 elsewhere.
LogitMap clean_logits(const LabelMask& mask);

/// `n` cases with seeded random geometry on a 256 x 256 extent.
std::vector<PhantomCase> suite(int n, std::uint64_t base_seed,
                               const Corruption& corruption = NoCorruption{});

/// Single suite member (member `index` of suite(n, base_seed, corruption) for any n > index).
PhantomCase suite_case(std::uint64_t base_seed, int index,
                       const Corruption& corruption = NoCorruption{});

std::string describe(const Corruption& corruption);

}  // namespace aop::phantom
