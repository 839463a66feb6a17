#pragma once

#include "aop/error.hpp"
#include "aop/geometry.hpp"
#include "aop/metrics.hpp"
#include "aop/phantom.hpp"
#include "aop/tta.hpp"

#include "json.hpp"

#include <string>

namespace aop::report {

using nlohmann::json;

json to_json(Point2 p);
json to_json(const Ellipse& e);
/// Frozen field names: aop_deg, c_aop, p1, p3, p4, d13, d34, d14, m_points, ellipse.
json to_json(const AopResult& r);
json error_json(const Error& e);

json to_json(const tta::AdaptParams& p);
json to_json(const tta::TtaConfig& c);
json step_json(const tta::StepRecord& record, const tta::TtaConfig& config);
/// One JSON object per line, one line per step.
std::string trace_jsonl(const tta::TtaTrace& trace, const tta::TtaConfig& config);

json to_json(const phantom::PhantomSpec& spec);
json meta_json(const phantom::PhantomCase& c, const std::string& case_id);

json to_json(const metrics::MetricsReport& report);
/// One row per case followed by summary_mean and summary_std rows.
std::string to_csv(const metrics::MetricsReport& report);

}  // namespace aop::report
