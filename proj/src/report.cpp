#include "aop/report.hpp"

#include "aop/rng.hpp"

#include <sstream>

namespace aop::report {

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_cell(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

}  // namespace

json to_json(Point2 p) { return json::array({p.x, p.y}); }

json to_json(const Ellipse& e) {
    return {{"cx", e.cx}, {"cy", e.cy}, {"a", e.a}, {"b", e.b}, {"theta", e.theta}};
}

json to_json(const AopResult& r) {
    return {{"aop_deg", r.aop_deg}, {"c_aop", r.c_aop},     {"p1", to_json(r.p1)},
            {"p3", to_json(r.p3)},   {"p4", to_json(r.p4)},   {"d13", r.d13},
            {"d34", r.d34},          {"d14", r.d14},          {"m_points", r.m_points},
            {"ellipse", to_json(r.ellipse)}};
}

json error_json(const Error& e) {
    return {{"error",
             {{"code", std::string(to_string(e.code()))}, {"stage", e.stage()}, {"message", e.what()}}}};
}

json to_json(const tta::AdaptParams& p) {
    return {{"gamma", p.gamma},
            {"beta", p.beta},
            {"mix", p.mix},
            {"trainable",
             {{"gamma", p.trainable.gamma}, {"beta", p.trainable.beta}, {"mix", p.trainable.mix}}}};
}

json to_json(const tta::TtaConfig& c) {
    return {{"lambda_ent", c.lambda_ent}, {"lambda_tv", c.lambda_tv},
            {"lambda_aop", c.lambda_aop}, {"lr", c.lr},
            {"steps", c.steps},           {"epsilon", c.epsilon},
            {"fd_step", c.fd_step}};
}

json step_json(const tta::StepRecord& record, const tta::TtaConfig& config) {
    const auto& l = record.losses;
    json failures = json::array();
    for (std::size_t i = 0; i < l.images.size(); ++i) {
        if (!l.images[i].aop) {
            failures.push_back({{"image", i},
                                {"stage", l.images[i].failure_stage},
                                {"message", l.images[i].failure}});
        }
    }
    return {{"step", record.step},
            {"l_ent", l.l_ent},
            {"l_tv", l.l_tv},
            {"l_aop", l.l_aop},
            {"l_tta", l.l_tta},
            {"c_aop", optional_json(l.mean_c_aop())},
            {"aop_deg", optional_json(l.mean_aop_deg())},
            {"weighted",
             {{"ent", config.lambda_ent * l.l_ent},
              {"tv", config.lambda_tv * l.l_tv},
              {"aop", config.lambda_aop * l.l_aop}}},
            {"failures", failures}};
}

std::string trace_jsonl(const tta::TtaTrace& trace, const tta::TtaConfig& config) {
    std::string out;
    for (const auto& record : trace.records) {
        out += step_json(record, config).dump();
        out += '\n';
    }
    return out;
}

json to_json(const phantom::PhantomSpec& spec) {
    json conf = std::visit(
        [](const auto& f) -> json {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, phantom::UniformConf>) {
                return {{"kind", "uniform"}, {"value", f.value}};
            } else {
                return {{"kind", "radial_falloff"},
                        {"center", to_json(f.center)},
                        {"v_max", f.v_max},
                        {"v_min", f.v_min}};
            }
        },
        spec.conf_field);
    json corruption = std::visit(
        [](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, phantom::NoCorruption>) {
                return {{"kind", "none"}};
            } else if constexpr (std::is_same_v<T, phantom::LogitNoise>) {
                return {{"kind", "logit_noise"}, {"sigma", c.sigma}};
            } else if constexpr (std::is_same_v<T, phantom::LogitBias>) {
                return {{"kind", "logit_bias"}, {"class", c.class_id}, {"delta", c.delta}};
            } else {
                return {{"kind", "boundary_erosion"}, {"iterations", c.iterations}};
            }
        },
        spec.corruption);
    return {{"extent", {spec.height, spec.width}},
            {"fh_ellipse", to_json(spec.fh_ellipse)},
            {"ps_segment",
             {{"p_sup", to_json(spec.ps_sup)},
              {"p_inf", to_json(spec.ps_inf)},
              {"half_width", spec.ps_half_width}}},
            {"conf_field", conf},
            {"corruption", corruption},
            {"seed", spec.seed}};
}

json meta_json(const phantom::PhantomCase& c, const std::string& case_id) {
    return {{"case_id", case_id},
            {"rng", SplitMix64::kAlgorithm},
            {"seed", c.spec.seed},
            {"spec", to_json(c.spec)},
            {"gt_aop_deg", c.gt_aop_deg},
            {"gt_ellipse", to_json(c.gt_ellipse)},
            {"gt_ps", {{"p_sup", to_json(c.gt_ps.p_sup)}, {"p_inf", to_json(c.gt_ps.p_inf)}}},
            {"gt_tangent", to_json(c.gt_tangent)}};
}

json to_json(const metrics::MetricsReport& report) {
    json cases = json::array();
    for (const auto& c : report.cases) {
        json row = {{"case_id", c.case_id}};
        const auto values = metrics::field_values(c);
        for (std::size_t f = 0; f < values.size(); ++f) {
            row[metrics::kFieldNames[f]] = optional_json(values[f]);
        }
        cases.push_back(std::move(row));
    }
    json summary = json::object();
    for (std::size_t f = 0; f < metrics::kFieldNames.size(); ++f) {
        const auto& s = report.summary[f];
        summary[metrics::kFieldNames[f]] = {{"mean", optional_json(s.mean)},
                                            {"std", optional_json(s.std)},
                                            {"count", s.count},
                                            {"excluded", s.excluded}};
    }
    return {{"cases", cases}, {"summary", summary}, {"unpaired", report.unpaired}};
}

std::string to_csv(const metrics::MetricsReport& report) {
    std::ostringstream os;
    os << "case_id";
    for (const char* name : metrics::kFieldNames) os << ',' << name;
    os << '\n';
    for (const auto& c : report.cases) {
        os << c.case_id;
        for (const auto& v : metrics::field_values(c)) os << ',' << csv_cell(v);
        os << '\n';
    }
    os << "summary_mean";
    for (const auto& s : report.summary) os << ',' << csv_cell(s.mean);
    os << "\nsummary_std";
    for (const auto& s : report.summary) os << ',' << csv_cell(s.std);
    os << '\n';
    return os.str();
}

}  // namespace aop::report
