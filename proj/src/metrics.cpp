#include "aop/metrics.hpp"

#include "aop/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aop::metrics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const LabelMask& pred, const LabelMask& gt, ClassSet classes) {
    if (pred.height() != gt.height() || pred.width() != gt.width()) {
        throw Error(ErrorCode::InvalidInput, "prediction and ground-truth extents differ");
    }
    if (classes.empty()) throw Error(ErrorCode::InvalidInput, "empty class set");
}

// 1-D squared distance transform (lower envelope of parabolas). Positions are
// index * step; sources are the finite entries of f. Values are re-evaluated at
// the chosen source so the result is the exact sum of squares.
void distance_transform_1d(const std::vector<double>& f, double step, std::vector<double>& out,
                           std::vector<int>& sources, std::vector<double>& bounds) {
    const int n = static_cast<int>(f.size());
    sources.clear();
    bounds.clear();
    auto intersect = [&](int q, int v) {
        const double xq = q * step;
        const double xv = v * step;
        return ((f[q] + xq * xq) - (f[v] + xv * xv)) / (2.0 * (xq - xv));
    };
    for (int q = 0; q < n; ++q) {
        if (!std::isfinite(f[q])) continue;
        if (sources.empty()) {
            sources.push_back(q);
            bounds = {-kInf, kInf};
            continue;
        }
        double s = intersect(q, sources.back());
        while (s <= bounds[sources.size() - 1]) {
            sources.pop_back();
            bounds.pop_back();
            if (sources.empty()) break;
            s = intersect(q, sources.back());
        }
        if (sources.empty()) {
            sources.push_back(q);
            bounds = {-kInf, kInf};
            continue;
        }
        bounds.back() = s;
        sources.push_back(q);
        bounds.push_back(kInf);
    }
    if (sources.empty()) {
        std::fill(out.begin(), out.end(), kInf);
        return;
    }
    // sources[k] is nearest on [bounds[k], bounds[k + 1]].
    std::size_t k = 0;
    for (int p = 0; p < n; ++p) {
        const double xp = p * step;
        while (bounds[k + 1] < xp) ++k;
        const double d = (p - sources[k]) * step;
        out[p] = d * d + f[sources[k]];
    }
}

// Squared mm distance from every pixel to the nearest marked pixel.
std::vector<double> squared_edt(int height, int width, const std::vector<PixelCoord>& marks,
                                const PixelSpacing& spacing) {
    std::vector<double> grid(static_cast<std::size_t>(height) * width, kInf);
    for (const PixelCoord& p : marks) grid[static_cast<std::size_t>(p.row) * width + p.col] = 0.0;

    std::vector<int> sources;
    std::vector<double> bounds;
    std::vector<double> line(height);
    std::vector<double> result(height);
    for (int c = 0; c < width; ++c) {
        for (int r = 0; r < height; ++r) line[r] = grid[static_cast<std::size_t>(r) * width + c];
        distance_transform_1d(line, spacing.row_mm, result, sources, bounds);
        for (int r = 0; r < height; ++r) grid[static_cast<std::size_t>(r) * width + c] = result[r];
    }
    line.resize(width);
    result.resize(width);
    for (int r = 0; r < height; ++r) {
        std::copy_n(grid.begin() + static_cast<std::ptrdiff_t>(r) * width, width, line.begin());
        distance_transform_1d(line, spacing.col_mm, result, sources, bounds);
        std::copy(result.begin(), result.end(), grid.begin() + static_cast<std::ptrdiff_t>(r) * width);
    }
    return grid;
}

}  // namespace

double dice(const LabelMask& pred, const LabelMask& gt, ClassSet classes) {
    check_pair(pred, gt, classes);
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t both = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool in_a = classes.contains(pred.labels()[i]);
        const bool in_b = classes.contains(gt.labels()[i]);
        a += in_a;
        b += in_b;
        both += in_a && in_b;
    }
    if (a + b == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

std::vector<PixelCoord> region_boundary(const LabelMask& mask, ClassSet classes) {
    static constexpr int kDr[4] = {-1, 1, 0, 0};
    static constexpr int kDc[4] = {0, 0, -1, 1};
    std::vector<PixelCoord> out;
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!classes.contains(mask.at(r, c))) continue;
            for (int k = 0; k < 4; ++k) {
                const int nr = r + kDr[k];
                const int nc = c + kDc[k];
                if (!mask.contains(nr, nc) || !classes.contains(mask.at(nr, nc))) {
                    out.push_back({r, c});
                    break;
                }
            }
        }
    }
    return out;
}

std::vector<double> surface_distances(const LabelMask& pred, const LabelMask& gt,
                                      ClassSet classes, const PixelSpacing& spacing) {
    check_pair(pred, gt, classes);
    const auto pred_boundary = region_boundary(pred, classes);
    const auto gt_boundary = region_boundary(gt, classes);
    if (pred_boundary.empty() || gt_boundary.empty()) {
        throw Error(ErrorCode::EmptyStructure,
                    pred_boundary.empty() ? "structure absent from prediction"
                                          : "structure absent from ground truth",
                    "surface_distances");
    }
    const int h = pred.height();
    const int w = pred.width();
    const auto to_gt = squared_edt(h, w, gt_boundary, spacing);
    const auto to_pred = squared_edt(h, w, pred_boundary, spacing);

    std::vector<double> distances;
    distances.reserve(pred_boundary.size() + gt_boundary.size());
    for (const PixelCoord& p : pred_boundary) {
        distances.push_back(std::sqrt(to_gt[static_cast<std::size_t>(p.row) * w + p.col]));
    }
    for (const PixelCoord& p : gt_boundary) {
        distances.push_back(std::sqrt(to_pred[static_cast<std::size_t>(p.row) * w + p.col]));
    }
    return distances;
}

double asd(std::span<const double> distances) {
    if (distances.empty()) throw Error(ErrorCode::InvalidInput, "asd of an empty distance set");
    double sum = 0.0;
    for (double d : distances) sum += d;
    return sum / static_cast<double>(distances.size());
}

double hd_percentile(std::span<const double> distances, double q) {
    if (distances.empty()) {
        throw Error(ErrorCode::InvalidInput, "percentile of an empty distance set");
    }
    if (!(q > 0.0) || q > 100.0) throw Error(ErrorCode::InvalidInput, "q must lie in (0, 100]");
    std::vector<double> sorted(distances.begin(), distances.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

double aop_abs_error(double pred_aop_deg, double gt_aop_deg) {
    if (!std::isfinite(pred_aop_deg) || !std::isfinite(gt_aop_deg)) {
        throw Error(ErrorCode::InvalidInput, "AoP values must be finite");
    }
    return std::abs(pred_aop_deg - gt_aop_deg);
}

std::array<std::optional<double>, kFieldNames.size()> field_values(const CaseMetrics& m) {
    return {m.dice_ps, m.dice_fh, m.dice_psfh, m.asd_ps,     m.asd_fh,
            m.asd_psfh, m.hd100_ps, m.hd100_fh, m.hd100_psfh, m.aop_abs_err};
}

CaseMetrics evaluate_case(std::string case_id, const LabelMask& pred, const LabelMask& gt,
                          const PixelSpacing& spacing, std::optional<double> pred_aop_deg,
                          std::optional<double> gt_aop_deg) {
    CaseMetrics m;
    m.case_id = std::move(case_id);
    struct Slot {
        ClassSet classes;
        std::optional<double>* dice_value;
        std::optional<double>* asd_value;
        std::optional<double>* hd_value;
    };
    const Slot slots[] = {
        {ClassSet::PS(), &m.dice_ps, &m.asd_ps, &m.hd100_ps},
        {ClassSet::FH(), &m.dice_fh, &m.asd_fh, &m.hd100_fh},
        {ClassSet::PSFH(), &m.dice_psfh, &m.asd_psfh, &m.hd100_psfh},
    };
    for (const Slot& slot : slots) {
        *slot.dice_value = dice(pred, gt, slot.classes);
        try {
            const auto d = surface_distances(pred, gt, slot.classes, spacing);
            *slot.asd_value = asd(d);
            *slot.hd_value = hd_percentile(d, 100.0);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyStructure) throw;
        }
    }
    if (pred_aop_deg && gt_aop_deg) m.aop_abs_err = aop_abs_error(*pred_aop_deg, *gt_aop_deg);
    return m;
}

MetricsReport aggregate(std::vector<CaseMetrics> cases) {
    MetricsReport report;
    for (std::size_t f = 0; f < kFieldNames.size(); ++f) {
        FieldSummary& s = report.summary[f];
        double sum = 0.0;
        for (const CaseMetrics& c : cases) {
            if (const auto v = field_values(c)[f]) {
                sum += *v;
                ++s.count;
            } else {
                ++s.excluded;
            }
        }
        if (s.count == 0) continue;
        const double mean = sum / static_cast<double>(s.count);
        double sq = 0.0;
        for (const CaseMetrics& c : cases) {
            if (const auto v = field_values(c)[f]) sq += (*v - mean) * (*v - mean);
        }
        s.mean = mean;
        s.std = std::sqrt(sq / static_cast<double>(s.count));
    }
    report.cases = std::move(cases);
    return report;
}

}  // namespace aop::metrics
