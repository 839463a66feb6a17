#include "aop/phantom.hpp"

#include "aop/error.hpp"
#include "aop/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace aop::phantom {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kExtent = 256;
constexpr double kMargin = 3.0;

double to_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

double segment_distance(Point2 p, Point2 a, Point2 b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

// Minimum distance between the ellipse curve and the segment, by dense sampling.
double ellipse_segment_gap(const Ellipse& e, Point2 a, Point2 b) {
    constexpr int kSamples = 1440;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSamples; ++k) {
        const Point2 p = e.point_at(2.0 * kPi * k / kSamples);
        best = std::min(best, segment_distance(p, a, b));
    }
    return best;
}

// Axis-aligned half extents of a rotated ellipse.
std::pair<double, double> half_extents(const Ellipse& e) {
    const double c = std::cos(e.theta);
    const double s = std::sin(e.theta);
    return {std::hypot(e.a * c, e.b * s), std::hypot(e.a * s, e.b * c)};
}

Point2 snap(Point2 p) { return {std::floor(p.x) + 0.5, std::floor(p.y) + 0.5}; }

double conf_value(const ConfField& field, double x, double y, int height, int width) {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, UniformConf>) {
                return f.value;
            } else {
                const double reach = 0.5 * std::hypot(height, width);
                const double r = std::hypot(x - f.center.x, y - f.center.y);
                return f.v_max - (f.v_max - f.v_min) * std::min(1.0, r / reach);
            }
        },
        field);
}

void invalid(const std::string& message) { throw Error(ErrorCode::InvalidSpec, message, "phantom"); }

std::vector<std::uint8_t> foreground_ring(const LabelMask& labels) {
    static constexpr int kDr[4] = {-1, 1, 0, 0};
    static constexpr int kDc[4] = {0, 0, -1, 1};
    std::vector<std::uint8_t> ring(labels.size(), 0);
    for (int r = 0; r < labels.height(); ++r) {
        for (int c = 0; c < labels.width(); ++c) {
            if (labels.at(r, c) == kBackground) continue;
            for (int k = 0; k < 4; ++k) {
                const int nr = r + kDr[k];
                const int nc = c + kDc[k];
                if (!labels.contains(nr, nc) || labels.at(nr, nc) == kBackground) {
                    ring[static_cast<std::size_t>(r) * labels.width() + c] = 1;
                    break;
                }
            }
        }
    }
    return ring;
}

}  // namespace

void validate(const PhantomSpec& spec) {
    if (spec.height < 8 || spec.width < 8) invalid("extent must be at least 8x8");
    const Ellipse& e = spec.fh_ellipse;
    if (!(e.a > 0.0) || !(e.b > 0.0) || e.b > e.a || e.theta < 0.0 || e.theta >= kPi) {
        invalid("ellipse requires a >= b > 0 and theta in [0, pi)");
    }
    if (!(spec.ps_half_width > 0.0)) invalid("PS half-width must be positive");
    const auto [hx, hy] = half_extents(e);
    if (e.cx - hx < 0.0 || e.cx + hx > spec.width || e.cy - hy < 0.0 || e.cy + hy > spec.height) {
        invalid("FH ellipse leaves the extent");
    }
    for (const Point2& p : {spec.ps_sup, spec.ps_inf}) {
        if (p.x - spec.ps_half_width < 0.0 || p.x + spec.ps_half_width > spec.width ||
            p.y - spec.ps_half_width < 0.0 || p.y + spec.ps_half_width > spec.height) {
            invalid("PS segment leaves the extent");
        }
    }
    if (distance(spec.ps_sup, spec.ps_inf) <= 2.0 * spec.ps_half_width) {
        invalid("PS segment is too short");
    }
    if (!(e.level(spec.ps_inf) > 1.0)) invalid("PS inferior endpoint is not outside the FH ellipse");
    if (ellipse_segment_gap(e, spec.ps_sup, spec.ps_inf) <= spec.ps_half_width + 1.0) {
        invalid("PS segment and FH ellipse are not disjoint");
    }
}

std::pair<double, Point2> analytic_aop(const Ellipse& fh, Point2 ps_sup, Point2 ps_inf) {
    const PsAxis axis{ps_sup, ps_inf};
    const Point2 t = select_tangent(fh, axis, tangent_points(fh, ps_inf));
    return {angle_at_deg(ps_inf, ps_sup, t), t};
}

LogitMap clean_logits(const LabelMask& mask) {
    LogitMap logits(mask.height(), mask.width());
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) logits.at(mask.at(r, c), r, c) = kLogitMargin;
    }
    return logits;
}

PhantomCase generate(const PhantomSpec& spec) {
    validate(spec);
    PhantomCase out;
    out.spec = spec;
    out.gt_ellipse = spec.fh_ellipse;
    out.gt_ps = {spec.ps_sup, spec.ps_inf};
    std::tie(out.gt_aop_deg, out.gt_tangent) =
        analytic_aop(spec.fh_ellipse, spec.ps_sup, spec.ps_inf);

    LabelMask mask(spec.height, spec.width);
    std::vector<double> conf(static_cast<std::size_t>(spec.height) * spec.width);
    for (int r = 0; r < spec.height; ++r) {
        for (int c = 0; c < spec.width; ++c) {
            const Point2 p{c + 0.5, r + 0.5};
            if (spec.fh_ellipse.level(p) <= 1.0) {
                mask.set(r, c, kFH);
            } else if (segment_distance(p, spec.ps_sup, spec.ps_inf) <= spec.ps_half_width) {
                mask.set(r, c, kPS);
            }
            conf[static_cast<std::size_t>(r) * spec.width + c] =
                to_f32(conf_value(spec.conf_field, p.x, p.y, spec.height, spec.width));
        }
    }
    out.mask = std::move(mask);
    out.conf = ConfMap(spec.height, spec.width, std::move(conf));
    out.logits = clean_logits(out.mask);
    if (!std::holds_alternative<NoCorruption>(spec.corruption)) {
        out = corrupt(out, spec.corruption, derive_seed(spec.seed, 1));
    }
    return out;
}

PhantomCase corrupt(const PhantomCase& input, const Corruption& corruption, std::uint64_t seed) {
    PhantomCase out = input;
    auto values = out.logits.values();
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LogitNoise>) {
                if (c.sigma == 0.0) return;
                SplitMix64 rng(seed);
                for (double& v : values) v = to_f32(v + c.sigma * rng.normal());
            } else if constexpr (std::is_same_v<T, LogitBias>) {
                if (c.class_id > kFH) throw Error(ErrorCode::InvalidInput, "bias class out of range");
                double* plane = out.logits.plane(c.class_id);
                for (std::size_t i = 0; i < out.logits.pixels(); ++i) {
                    plane[i] = to_f32(plane[i] + c.delta);
                }
            } else if constexpr (std::is_same_v<T, BoundaryErosion>) {
                for (int it = 0; it < c.iterations; ++it) {
                    const auto ring = foreground_ring(argmax_labels(out.logits));
                    for (std::size_t i = 0; i < ring.size(); ++i) {
                        if (!ring[i]) continue;
                        out.logits.plane(kBackground)[i] = kLogitMargin;
                        out.logits.plane(kPS)[i] = 0.0;
                        out.logits.plane(kFH)[i] = 0.0;
                    }
                }
            }
        },
        corruption);
    out.spec.corruption = corruption;
    return out;
}

PhantomCase suite_case(std::uint64_t base_seed, int index, const Corruption& corruption) {
    const std::uint64_t case_seed = derive_seed(base_seed, static_cast<std::uint64_t>(index));
    SplitMix64 rng(derive_seed(case_seed, 0));

    for (int attempt = 0; attempt < 100000; ++attempt) {
        const double target = rng.uniform(70.0, 160.0);
        Ellipse e;
        e.a = rng.uniform(15.0, 60.0);
        e.b = rng.uniform(std::max(15.0, 0.6 * e.a), e.a);
        e.theta = rng.uniform(0.0, kPi);
        const auto [hx, hy] = half_extents(e);
        e.cx = rng.uniform(hx + kMargin, kExtent - hx - kMargin);
        e.cy = rng.uniform(hy + kMargin, kExtent - hy - kMargin);
        const double length = rng.uniform(30.0, 80.0);
        const double half_width = rng.uniform(0.75, 0.95);
        const double phi = rng.uniform(0.0, 2.0 * kPi);
        const double reach = e.a + rng.uniform(45.0, 150.0);
        const bool pick_first = rng.uniform() < 0.5;
        const double v_max = rng.uniform(0.85, 0.98);
        const double v_min = rng.uniform(0.3, 0.6);

        const Point2 p_inf = snap({e.cx + reach * std::cos(phi), e.cy + reach * std::sin(phi)});
        if (p_inf.x < kMargin || p_inf.y < kMargin || p_inf.x > kExtent - kMargin ||
            p_inf.y > kExtent - kMargin || !(e.level(p_inf) > 1.0)) {
            continue;
        }
        const auto [t1, t2] = tangent_points(e, p_inf);
        const Point2 chosen = pick_first ? t1 : t2;
        const Point2 other = pick_first ? t2 : t1;
        const double ux = chosen.x - p_inf.x;
        const double uy = chosen.y - p_inf.y;
        const double wedge = angle_at_deg(p_inf, chosen, other);
        if (target < wedge + 5.0) continue;
        // Rotate the chosen tangent direction past the other one by the target angle.
        const double turn = (ux * (other.y - p_inf.y) - uy * (other.x - p_inf.x)) > 0.0 ? 1.0 : -1.0;
        const double rot = turn * target * kPi / 180.0;
        const double norm = std::hypot(ux, uy);
        const double vx = (ux * std::cos(rot) - uy * std::sin(rot)) / norm;
        const double vy = (ux * std::sin(rot) + uy * std::cos(rot)) / norm;
        const Point2 p_sup = snap({p_inf.x + length * vx, p_inf.y + length * vy});
        if (p_sup.x < kMargin || p_sup.y < kMargin || p_sup.x > kExtent - kMargin ||
            p_sup.y > kExtent - kMargin) {
            continue;
        }
        const Point2 center = e.center();
        if (distance(p_sup, center) < distance(p_inf, center) + kMargin) continue;
        if (ellipse_segment_gap(e, p_sup, p_inf) < half_width + kMargin) continue;

        // The tangent choice must be unambiguous and the angle inside the target range.
        const double angle1 = angle_at_deg(p_inf, p_sup, t1);
        const double angle2 = angle_at_deg(p_inf, p_sup, t2);
        if (std::abs(angle1 - angle2) < 2.0) continue;
        const double gt = std::max(angle1, angle2);
        if (gt < 70.0 || gt > 160.0) continue;

        PhantomSpec spec;
        spec.height = kExtent;
        spec.width = kExtent;
        spec.fh_ellipse = e;
        spec.ps_sup = p_sup;
        spec.ps_inf = p_inf;
        spec.ps_half_width = half_width;
        spec.conf_field = RadialConf{{0.5 * (center.x + 0.5 * (p_sup.x + p_inf.x)),
                                      0.5 * (center.y + 0.5 * (p_sup.y + p_inf.y))},
                                     v_max, v_min};
        spec.corruption = corruption;
        spec.seed = case_seed;
        return generate(spec);
    }
    throw Error(ErrorCode::InvalidSpec, "could not draw a valid phantom geometry", "phantom");
}

std::vector<PhantomCase> suite(int n, std::uint64_t base_seed, const Corruption& corruption) {
    if (n < 1) throw Error(ErrorCode::InvalidInput, "suite size must be at least 1");
    std::vector<PhantomCase> cases;
    cases.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cases.push_back(suite_case(base_seed, i, corruption));
    return cases;
}

std::string describe(const Corruption& corruption) {
    std::ostringstream os;
    std::visit(
        [&](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, NoCorruption>) {
                os << "none";
            } else if constexpr (std::is_same_v<T, LogitNoise>) {
                os << "logit_noise(" << c.sigma << ")";
            } else if constexpr (std::is_same_v<T, LogitBias>) {
                os << "logit_bias(" << static_cast<int>(c.class_id) << ", " << c.delta << ")";
            } else {
                os << "boundary_erosion(" << c.iterations << ")";
            }
        },
        corruption);
    return os.str();
}

}  // namespace aop::phantom
