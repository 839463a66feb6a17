#pragma once

#include "aop/metrics.hpp"
#include "aop/phantom.hpp"

#include <cstdint>
#include <string>

namespace aop::case_io {

/// Writes mask.pgm, conf.f32r, logits.f32r and meta.json into `dir` (created if needed).
void write_case(const std::string& dir, const phantom::PhantomCase& c, const std::string& case_id);

/// Writes `n` suite cases as case_0000, case_0001, ... plus manifest.json.
/// Returns the manifest text.
std::string write_suite(const std::string& out_dir, int n, std::uint64_t base_seed,
                        const phantom::Corruption& corruption = phantom::NoCorruption{});

/// Pairs case directories of `pred_dir` and `gt_dir` by name (lexicographic order) and
/// evaluates every pair. Cases present on one side only, or lacking mask.pgm, are
/// listed in report.unpaired.
metrics::MetricsReport evaluate_dirs(const std::string& pred_dir, const std::string& gt_dir,
                                     const PixelSpacing& spacing);

}  // namespace aop::case_io
