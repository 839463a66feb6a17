#pragma once

#include "aop/morphology.hpp"
#include "aop/raster.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aop::metrics {

/// Subset of {PS, FH}; PSFH is their union treated as one region.
struct ClassSet {
    bool ps = false;
    bool fh = false;

    static constexpr ClassSet PS() { return {true, false}; }
    static constexpr ClassSet FH() { return {false, true}; }
    static constexpr ClassSet PSFH() { return {true, true}; }

    bool contains(std::uint8_t label) const noexcept {
        return (ps && label == kPS) || (fh && label == kFH);
    }
    bool empty() const noexcept { return !ps && !fh; }
};

double dice(const LabelMask& pred, const LabelMask& gt, ClassSet classes);

/// Pixels of the merged class-set region with a 4-neighbour outside the image or
/// outside the region. Row-major order.
std::vector<PixelCoord> region_boundary(const LabelMask& mask, ClassSet classes);

/// Boundary-to-boundary distances in mm: every pred boundary pixel to the nearest gt
/// boundary pixel, followed by every gt boundary pixel to the nearest pred one.
/// Throws EmptyStructure if either region is empty.
std::vector<double> surface_distances(const LabelMask& pred, const LabelMask& gt,
                                      ClassSet classes, const PixelSpacing& spacing);

double asd(std::span<const double> distances);
/// Value at 1-based rank ceil(q/100 * n) of the ascending sort; q in (0, 100].
double hd_percentile(std::span<const double> distances, double q);
double aop_abs_error(double pred_aop_deg, double gt_aop_deg);

/// Per-case metric values; absent fields could not be computed.
struct CaseMetrics {
    std::string case_id;
    std::optional<double> dice_ps, dice_fh, dice_psfh;
    std::optional<double> asd_ps, asd_fh, asd_psfh;
    std::optional<double> hd100_ps, hd100_fh, hd100_psfh;
    std::optional<double> aop_abs_err;
};

inline constexpr std::array<const char*, 10> kFieldNames = {
    "dice_ps", "dice_fh", "dice_psfh", "asd_ps", "asd_fh",
    "asd_psfh", "hd100_ps", "hd100_fh", "hd100_psfh", "aop_abs_err"};

std::array<std::optional<double>, kFieldNames.size()> field_values(const CaseMetrics& m);

struct FieldSummary {
    std::optional<double> mean;  ///< absent when no case had a value
    std::optional<double> std;   ///< population standard deviation
    std::size_t count = 0;
    std::size_t excluded = 0;
};

struct MetricsReport {
    std::vector<CaseMetrics> cases;
    std::array<FieldSummary, kFieldNames.size()> summary;
    std::vector<std::string> unpaired;
};

/// Overlap and boundary metrics for one case. AoP error is filled when both angles are given.
CaseMetrics evaluate_case(std::string case_id, const LabelMask& pred, const LabelMask& gt,
                          const PixelSpacing& spacing, std::optional<double> pred_aop_deg = {},
                          std::optional<double> gt_aop_deg = {});

/// Per-field mean and population std over the cases that carry the field.
MetricsReport aggregate(std::vector<CaseMetrics> cases);

}  // namespace aop::metrics
