#include "aop/aop.h"

#include "aop/case_io.hpp"
#include "aop/error.hpp"
#include "aop/geometry.hpp"
#include "aop/raster.hpp"
#include "aop/render.hpp"
#include "aop/report.hpp"
#include "aop/tta.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct aop_mask {
    aop::LabelMask value;
};
struct aop_conf {
    aop::ConfMap value;
};
struct aop_logits {
    aop::LogitMap value;
};

namespace {

thread_local std::string g_error_message;
thread_local std::string g_error_stage;

aop_status status_of(aop::ErrorCode code) {
    using aop::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidInput: return AOP_E_INVALID_INPUT;
        case ErrorCode::FormatError: return AOP_E_FORMAT;
        case ErrorCode::IoError: return AOP_E_IO;
        case ErrorCode::MissingStructure: return AOP_E_MISSING_STRUCTURE;
        case ErrorCode::InsufficientPoints: return AOP_E_INSUFFICIENT_POINTS;
        case ErrorCode::DegenerateFit: return AOP_E_DEGENERATE_FIT;
        case ErrorCode::DegenerateAxis: return AOP_E_DEGENERATE_AXIS;
        case ErrorCode::PointNotExterior: return AOP_E_POINT_NOT_EXTERIOR;
        case ErrorCode::InvalidTriangle: return AOP_E_INVALID_TRIANGLE;
        case ErrorCode::AnisotropicSpacing: return AOP_E_ANISOTROPIC_SPACING;
        case ErrorCode::EmptyStructure: return AOP_E_EMPTY_STRUCTURE;
        case ErrorCode::InvalidSpec: return AOP_E_INVALID_SPEC;
    }
    return AOP_E_INTERNAL;
}

aop_status fail(aop_status status, std::string message, std::string stage = {}) {
    g_error_message = std::move(message);
    g_error_stage = std::move(stage);
    return status;
}

aop_status fail(const aop::Error& e) { return fail(status_of(e.code()), e.what(), e.stage()); }

void clear_error() {
    g_error_message.clear();
    g_error_stage.clear();
}

// Runs `body`, translating exceptions into status codes.
template <class F>
aop_status guarded(F&& body) {
    clear_error();
    try {
        return body();
    } catch (const aop::Error& e) {
        return fail(e);
    } catch (const std::bad_alloc&) {
        return fail(AOP_E_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(AOP_E_INTERNAL, e.what());
    }
}

char* duplicate(const std::string& text) {
    char* out = static_cast<char*>(std::malloc(text.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, text.data(), text.size() + 1);
    return out;
}

aop::PixelSpacing spacing(double row_mm, double col_mm) { return aop::PixelSpacing(row_mm, col_mm); }

aop_point to_c(aop::Point2 p) { return {p.x, p.y}; }
aop::Point2 from_c(aop_point p) { return {p.x, p.y}; }

aop_result to_c(const aop::AopResult& r) {
    aop_result out{};
    out.aop_deg = r.aop_deg;
    out.c_aop = r.c_aop;
    out.p1 = to_c(r.p1);
    out.p3 = to_c(r.p3);
    out.p4 = to_c(r.p4);
    out.d13 = r.d13;
    out.d34 = r.d34;
    out.d14 = r.d14;
    out.ellipse = {r.ellipse.cx, r.ellipse.cy, r.ellipse.a, r.ellipse.b, r.ellipse.theta};
    out.m_points = r.m_points;
    return out;
}

aop::AopResult from_c(const aop_result& r) {
    aop::AopResult out;
    out.aop_deg = r.aop_deg;
    out.c_aop = r.c_aop;
    out.p1 = from_c(r.p1);
    out.p3 = from_c(r.p3);
    out.p4 = from_c(r.p4);
    out.d13 = r.d13;
    out.d34 = r.d34;
    out.d14 = r.d14;
    out.ellipse = {r.ellipse.cx, r.ellipse.cy, r.ellipse.a, r.ellipse.b, r.ellipse.theta};
    out.m_points = r.m_points;
    return out;
}

template <class T>
void require(const T* p, const char* what) {
    if (!p) throw aop::Error(aop::ErrorCode::InvalidInput, std::string(what) + " is null");
}

aop::report::json measurement_json(const aop::tta::ImageMeasurement& m) {
    if (m.aop) return aop::report::to_json(*m.aop);
    return {{"error", {{"stage", m.failure_stage}, {"message", m.failure}}}};
}

}  // namespace

extern "C" {

const char* aop_version(void) { return "1.0.0"; }

const char* aop_status_name(aop_status status) {
    switch (status) {
        case AOP_OK: return "OK";
        case AOP_E_INVALID_INPUT: return "InvalidInput";
        case AOP_E_FORMAT: return "FormatError";
        case AOP_E_IO: return "IoError";
        case AOP_E_MISSING_STRUCTURE: return "MissingStructure";
        case AOP_E_INSUFFICIENT_POINTS: return "InsufficientPoints";
        case AOP_E_DEGENERATE_FIT: return "DegenerateFit";
        case AOP_E_DEGENERATE_AXIS: return "DegenerateAxis";
        case AOP_E_POINT_NOT_EXTERIOR: return "PointNotExterior";
        case AOP_E_INVALID_TRIANGLE: return "InvalidTriangle";
        case AOP_E_ANISOTROPIC_SPACING: return "AnisotropicSpacing";
        case AOP_E_EMPTY_STRUCTURE: return "EmptyStructure";
        case AOP_E_INVALID_SPEC: return "InvalidSpec";
        case AOP_E_UNPAIRED: return "Unpaired";
        case AOP_E_INTERNAL: return "Internal";
    }
    return "Unknown";
}

int aop_status_is_geometric(aop_status status) {
    switch (status) {
        case AOP_E_MISSING_STRUCTURE:
        case AOP_E_INSUFFICIENT_POINTS:
        case AOP_E_DEGENERATE_FIT:
        case AOP_E_DEGENERATE_AXIS:
        case AOP_E_POINT_NOT_EXTERIOR:
        case AOP_E_INVALID_TRIANGLE:
        case AOP_E_ANISOTROPIC_SPACING:
            return 1;
        default:
            return 0;
    }
}

const char* aop_last_error_message(void) { return g_error_message.c_str(); }
const char* aop_last_error_stage(void) { return g_error_stage.c_str(); }
void aop_string_free(char* text) { std::free(text); }

// --- masks ------------------------------------------------------------------

aop_status aop_mask_create(int32_t height, int32_t width, const uint8_t* labels, aop_mask** out) {
    return guarded([&] {
        require(labels, "labels");
        require(out, "out");
        const std::size_t n = static_cast<std::size_t>(std::max(height, 0)) *
                              static_cast<std::size_t>(std::max(width, 0));
        *out = new aop_mask{aop::LabelMask(height, width, std::vector<uint8_t>(labels, labels + n))};
        return AOP_OK;
    });
}

aop_status aop_mask_load_pgm(const char* path, aop_mask** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new aop_mask{aop::read_mask_pgm(aop::read_file(path))};
        return AOP_OK;
    });
}

aop_status aop_mask_save_pgm(const aop_mask* mask, const char* path) {
    return guarded([&] {
        require(mask, "mask");
        require(path, "path");
        aop::write_file(path, aop::write_mask_pgm(mask->value));
        return AOP_OK;
    });
}

int32_t aop_mask_height(const aop_mask* mask) { return mask ? mask->value.height() : 0; }
int32_t aop_mask_width(const aop_mask* mask) { return mask ? mask->value.width() : 0; }
const uint8_t* aop_mask_data(const aop_mask* mask) {
    return mask ? mask->value.labels().data() : nullptr;
}
void aop_mask_free(aop_mask* mask) { delete mask; }

// --- confidence ---------------------------------------------------------------

aop_status aop_conf_create(int32_t height, int32_t width, const double* values, aop_conf** out) {
    return guarded([&] {
        require(values, "values");
        require(out, "out");
        const std::size_t n = static_cast<std::size_t>(std::max(height, 0)) *
                              static_cast<std::size_t>(std::max(width, 0));
        *out = new aop_conf{aop::ConfMap(height, width, std::vector<double>(values, values + n))};
        return AOP_OK;
    });
}

aop_status aop_conf_load_f32r(const char* path, aop_conf** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new aop_conf{aop::read_conf_f32r(aop::read_file(path))};
        return AOP_OK;
    });
}

aop_status aop_conf_save_f32r(const aop_conf* conf, const char* path) {
    return guarded([&] {
        require(conf, "conf");
        require(path, "path");
        aop::write_file(path, aop::write_f32r(conf->value));
        return AOP_OK;
    });
}

void aop_conf_free(aop_conf* conf) { delete conf; }

// --- logits -------------------------------------------------------------------

aop_status aop_logits_create(int32_t height, int32_t width, const double* values,
                             aop_logits** out) {
    return guarded([&] {
        require(values, "values");
        require(out, "out");
        const std::size_t n = 3 * static_cast<std::size_t>(std::max(height, 0)) *
                              static_cast<std::size_t>(std::max(width, 0));
        *out = new aop_logits{aop::LogitMap(height, width, std::vector<double>(values, values + n))};
        return AOP_OK;
    });
}

aop_status aop_logits_load_f32r(const char* path, aop_logits** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = new aop_logits{aop::read_logits_f32r(aop::read_file(path))};
        return AOP_OK;
    });
}

aop_status aop_logits_save_f32r(const aop_logits* logits, const char* path) {
    return guarded([&] {
        require(logits, "logits");
        require(path, "path");
        aop::write_file(path, aop::write_f32r(logits->value));
        return AOP_OK;
    });
}

aop_status aop_logits_argmax(const aop_logits* logits, aop_mask** out) {
    return guarded([&] {
        require(logits, "logits");
        require(out, "out");
        *out = new aop_mask{aop::argmax_labels(logits->value)};
        return AOP_OK;
    });
}

void aop_logits_free(aop_logits* logits) { delete logits; }

// --- measurement ----------------------------------------------------------------

aop_status aop_measure(const aop_mask* mask, const aop_conf* conf, double row_mm, double col_mm,
                       aop_result* out) {
    return guarded([&] {
        require(mask, "mask");
        require(conf, "conf");
        require(out, "out");
        *out = to_c(aop::compute_aop(mask->value, conf->value, spacing(row_mm, col_mm)));
        return AOP_OK;
    });
}

aop_status aop_result_to_json(const aop_result* result, char** json_out) {
    return guarded([&] {
        require(result, "result");
        require(json_out, "json_out");
        *json_out = duplicate(aop::report::to_json(from_c(*result)).dump(2) + "\n");
        return AOP_OK;
    });
}

aop_status aop_measure_json(const aop_mask* mask, const aop_conf* conf, double row_mm,
                            double col_mm, char** json_out) {
    return guarded([&] {
        require(mask, "mask");
        require(conf, "conf");
        require(json_out, "json_out");
        const auto sp = spacing(row_mm, col_mm);
        try {
            const auto result = aop::compute_aop(mask->value, conf->value, sp);
            *json_out = duplicate(aop::report::to_json(result).dump(2) + "\n");
            return AOP_OK;
        } catch (const aop::Error& e) {
            if (!aop::is_geometric(e.code())) throw;
            *json_out = duplicate(aop::report::error_json(e).dump(2) + "\n");
            return fail(e);
        }
    });
}

// --- adaptation -----------------------------------------------------------------

void aop_tta_config_default(aop_tta_config* config) {
    if (!config) return;
    const aop::tta::TtaConfig defaults;
    config->lambda_ent = defaults.lambda_ent;
    config->lambda_tv = defaults.lambda_tv;
    config->lambda_aop = defaults.lambda_aop;
    config->lr = defaults.lr;
    config->steps = defaults.steps;
    config->epsilon = defaults.epsilon;
    config->fd_step = defaults.fd_step;
    config->train_gamma = 1;
    config->train_beta = 1;
    config->train_mix = 1;
}

aop_status aop_adapt_json(const aop_logits* logits, const aop_conf* conf,
                          const aop_tta_config* config, double row_mm, double col_mm,
                          char** report_json, char** trace_jsonl) {
    return guarded([&] {
        require(logits, "logits");
        require(conf, "conf");
        require(config, "config");
        require(report_json, "report_json");
        const auto sp = spacing(row_mm, col_mm);
        aop::tta::TtaConfig cfg;
        cfg.lambda_ent = config->lambda_ent;
        cfg.lambda_tv = config->lambda_tv;
        cfg.lambda_aop = config->lambda_aop;
        cfg.lr = config->lr;
        cfg.steps = config->steps;
        cfg.epsilon = config->epsilon;
        cfg.fd_step = config->fd_step;
        cfg.validate();
        aop::tta::AdaptParams params;
        params.trainable = {config->train_gamma != 0, config->train_beta != 0,
                            config->train_mix != 0};

        const aop::tta::Sample batch[] = {{logits->value, conf->value}};
        const auto [adapted, trace] = aop::tta::adapt(batch, params, cfg, sp);

        aop::report::json steps = aop::report::json::array();
        for (const auto& record : trace.records) steps.push_back(aop::report::step_json(record, cfg));
        const auto& pre = trace.records.front().losses.images.front();
        const auto& post = trace.final_losses.images.front();
        const aop::report::json report = {
            {"config", aop::report::to_json(cfg)},
            {"pre", measurement_json(pre)},
            {"post", measurement_json(post)},
            {"objective_before", trace.records.front().losses.l_tta},
            {"objective_after", trace.final_losses.l_tta},
            {"params_before", aop::report::to_json(trace.before)},
            {"params_after", aop::report::to_json(adapted)},
            {"trace", steps}};
        *report_json = duplicate(report.dump(2) + "\n");
        if (trace_jsonl) *trace_jsonl = duplicate(aop::report::trace_jsonl(trace, cfg));
        if (!post.aop) return fail(status_of(post.failure_code), post.failure, post.failure_stage);
        return AOP_OK;
    });
}

// --- evaluation, phantoms, rendering --------------------------------------------

aop_status aop_eval_dirs(const char* pred_dir, const char* gt_dir, double row_mm, double col_mm,
                         aop_report_format format, char** report_out) {
    return guarded([&] {
        require(pred_dir, "pred_dir");
        require(gt_dir, "gt_dir");
        require(report_out, "report_out");
        const auto report = aop::case_io::evaluate_dirs(pred_dir, gt_dir, spacing(row_mm, col_mm));
        *report_out = duplicate(format == AOP_FORMAT_CSV
                                    ? aop::report::to_csv(report)
                                    : aop::report::to_json(report).dump(2) + "\n");
        if (!report.unpaired.empty()) {
            std::string ids;
            for (const auto& id : report.unpaired) ids += (ids.empty() ? "" : ", ") + id;
            return fail(AOP_E_UNPAIRED, "unpaired cases: " + ids, "eval");
        }
        return AOP_OK;
    });
}

aop_status aop_phantom_write_suite(const char* out_dir, int32_t n, uint64_t base_seed,
                                   double noise_sigma, char** manifest_json) {
    return guarded([&] {
        require(out_dir, "out_dir");
        if (n < 1) throw aop::Error(aop::ErrorCode::InvalidInput, "case count must be at least 1");
        if (!(noise_sigma >= 0.0)) {
            throw aop::Error(aop::ErrorCode::InvalidInput, "noise sigma must be non-negative");
        }
        aop::phantom::Corruption corruption = aop::phantom::NoCorruption{};
        if (noise_sigma > 0.0) corruption = aop::phantom::LogitNoise{noise_sigma};
        const std::string manifest = aop::case_io::write_suite(out_dir, n, base_seed, corruption);
        if (manifest_json) *manifest_json = duplicate(manifest);
        return AOP_OK;
    });
}

aop_status aop_render_svg(const aop_mask* mask, const aop_conf* conf, double row_mm, double col_mm,
                          char** svg_out) {
    return guarded([&] {
        require(mask, "mask");
        require(conf, "conf");
        require(svg_out, "svg_out");
        const auto sp = spacing(row_mm, col_mm);
        try {
            const auto result = aop::compute_aop(mask->value, conf->value, sp);
            *svg_out = duplicate(aop::render_svg(mask->value, result));
            return AOP_OK;
        } catch (const aop::Error& e) {
            if (!aop::is_geometric(e.code())) throw;
            *svg_out = duplicate(aop::render_svg(mask->value, std::nullopt,
                                                 e.stage() + ": " + e.what()));
            return fail(e);
        }
    });
}

}  // extern "C"
