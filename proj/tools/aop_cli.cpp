// Command-line front end. Links only the C API in libaop.

#include "aop/aop.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

namespace {

enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitGeometry = 2,
    kExitUnpaired = 3,
    kExitUsage = 64,
};

struct Spacing {
    double row_mm = 1.0;
    double col_mm = 1.0;
};

// "<mm>" or "<row_mm>,<col_mm>"
bool parse_spacing(const std::string& text, Spacing& out) {
    std::istringstream in(text);
    char comma = 0;
    if (!(in >> out.row_mm)) return false;
    out.col_mm = out.row_mm;
    if (in >> comma) {
        if (comma != ',' || !(in >> out.col_mm)) return false;
    }
    in >> std::ws;
    return in.eof() && out.row_mm > 0.0 && out.col_mm > 0.0;
}

struct StringDeleter {
    void operator()(char* p) const { aop_string_free(p); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct MaskDeleter {
    void operator()(aop_mask* p) const { aop_mask_free(p); }
};
struct ConfDeleter {
    void operator()(aop_conf* p) const { aop_conf_free(p); }
};
struct LogitsDeleter {
    void operator()(aop_logits* p) const { aop_logits_free(p); }
};

int exit_code_for(aop_status status) {
    if (status == AOP_OK) return kExitOk;
    if (aop_status_is_geometric(status)) return kExitGeometry;
    if (status == AOP_E_UNPAIRED) return kExitUnpaired;
    if (status == AOP_E_INVALID_INPUT) return kExitUsage;
    return kExitIo;
}

int report_failure(aop_status status) {
    std::cerr << "aop: " << aop_status_name(status);
    if (*aop_last_error_stage()) std::cerr << " [" << aop_last_error_stage() << "]";
    std::cerr << ": " << aop_last_error_message() << '\n';
    return exit_code_for(status);
}

// Writes to `path`, or stdout when empty.
bool emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return static_cast<bool>(std::cout);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        std::cerr << "aop: cannot write " << path << '\n';
        return false;
    }
    return true;
}

int load_inputs(const std::string& mask_path, const std::string& conf_path,
                std::unique_ptr<aop_mask, MaskDeleter>& mask,
                std::unique_ptr<aop_conf, ConfDeleter>& conf) {
    aop_mask* m = nullptr;
    if (aop_status s = aop_mask_load_pgm(mask_path.c_str(), &m); s != AOP_OK) {
        report_failure(s);
        return kExitIo;
    }
    mask.reset(m);
    aop_conf* c = nullptr;
    if (aop_status s = aop_conf_load_f32r(conf_path.c_str(), &c); s != AOP_OK) {
        report_failure(s);
        return kExitIo;
    }
    conf.reset(c);
    return kExitOk;
}

std::string result_csv(const aop_result& r) {
    std::ostringstream os;
    os.precision(17);
    os << "aop_deg,c_aop,p1_x,p1_y,p3_x,p3_y,p4_x,p4_y,d13,d34,d14,m_points\n"
       << r.aop_deg << ',' << r.c_aop << ',' << r.p1.x << ',' << r.p1.y << ',' << r.p3.x << ','
       << r.p3.y << ',' << r.p4.x << ',' << r.p4.y << ',' << r.d13 << ',' << r.d34 << ',' << r.d14
       << ',' << r.m_points << '\n';
    return os.str();
}

int cmd_measure(const std::string& mask_path, const std::string& conf_path, const Spacing& sp,
                const std::string& format, const std::string& out_path) {
    std::unique_ptr<aop_mask, MaskDeleter> mask;
    std::unique_ptr<aop_conf, ConfDeleter> conf;
    if (int rc = load_inputs(mask_path, conf_path, mask, conf); rc != kExitOk) return rc;

    char* raw = nullptr;
    const aop_status status = aop_measure_json(mask.get(), conf.get(), sp.row_mm, sp.col_mm, &raw);
    OwnedString json(raw);
    if (status != AOP_OK && !json) return report_failure(status);
    if (status != AOP_OK) {
        report_failure(status);
        return emit(out_path, json.get()) ? kExitGeometry : kExitIo;
    }
    aop_result result{};
    aop_measure(mask.get(), conf.get(), sp.row_mm, sp.col_mm, &result);
    std::fprintf(stderr, "AoP %.2f deg, C_AoP %.4f\n", result.aop_deg, result.c_aop);
    const std::string text = format == "csv" ? result_csv(result) : std::string(json.get());
    return emit(out_path, text) ? kExitOk : kExitIo;
}

int cmd_adapt(const std::string& logits_path, const std::string& conf_path, const Spacing& sp,
              const aop_tta_config& config, const std::string& out_path,
              const std::string& trace_path) {
    aop_logits* raw_logits = nullptr;
    if (aop_status s = aop_logits_load_f32r(logits_path.c_str(), &raw_logits); s != AOP_OK) {
        report_failure(s);
        return kExitIo;
    }
    std::unique_ptr<aop_logits, LogitsDeleter> logits(raw_logits);
    aop_conf* raw_conf = nullptr;
    if (aop_status s = aop_conf_load_f32r(conf_path.c_str(), &raw_conf); s != AOP_OK) {
        report_failure(s);
        return kExitIo;
    }
    std::unique_ptr<aop_conf, ConfDeleter> conf(raw_conf);

    char* report_raw = nullptr;
    char* trace_raw = nullptr;
    const aop_status status = aop_adapt_json(logits.get(), conf.get(), &config, sp.row_mm,
                                             sp.col_mm, &report_raw, &trace_raw);
    OwnedString report(report_raw);
    OwnedString trace(trace_raw);
    if (!report) return report_failure(status);
    if (!trace_path.empty() && !emit(trace_path, trace.get())) return kExitIo;
    if (!emit(out_path, report.get())) return kExitIo;
    if (status != AOP_OK) return report_failure(status);
    return kExitOk;
}

int cmd_eval(const std::string& pred_dir, const std::string& gt_dir, const Spacing& sp,
             const std::string& format, const std::string& out_path) {
    char* raw = nullptr;
    const aop_status status =
        aop_eval_dirs(pred_dir.c_str(), gt_dir.c_str(), sp.row_mm, sp.col_mm,
                      format == "csv" ? AOP_FORMAT_CSV : AOP_FORMAT_JSON, &raw);
    OwnedString report(raw);
    if (!report) return report_failure(status);
    if (!emit(out_path, report.get())) return kExitIo;
    if (status != AOP_OK) return report_failure(status);
    return kExitOk;
}

int cmd_phantom(const std::string& out_dir, int count, std::uint64_t seed, double noise) {
    char* raw = nullptr;
    const aop_status status = aop_phantom_write_suite(out_dir.c_str(), count, seed, noise, &raw);
    OwnedString manifest(raw);
    if (status != AOP_OK) return report_failure(status);
    std::cerr << "wrote " << count << " phantom cases to " << out_dir << '\n';
    return kExitOk;
}

int cmd_render(const std::string& mask_path, const std::string& conf_path,
               const std::string& svg_path, const Spacing& sp) {
    std::unique_ptr<aop_mask, MaskDeleter> mask;
    std::unique_ptr<aop_conf, ConfDeleter> conf;
    if (int rc = load_inputs(mask_path, conf_path, mask, conf); rc != kExitOk) return rc;
    char* raw = nullptr;
    const aop_status status = aop_render_svg(mask.get(), conf.get(), sp.row_mm, sp.col_mm, &raw);
    OwnedString svg(raw);
    if (!svg) return report_failure(status);
    if (!emit(svg_path, svg.get())) return kExitIo;
    if (status != AOP_OK) return report_failure(status);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Angle of Progression measurement, test-time adaptation and evaluation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(aop_version()));

    std::string spacing_text = "1.0";
    std::string out_path;
    std::string format = "json";

    auto add_spacing = [&](CLI::App* cmd) {
        cmd->add_option("--spacing", spacing_text, "Pixel spacing in mm: <mm> or <row_mm>,<col_mm>")
            ->capture_default_str();
    };
    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_path, "Output file (default: stdout)");
        cmd->add_option("--format", format, "Report format")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
    };

    std::string mask_path;
    std::string conf_path;
    auto* measure = app.add_subcommand("measure", "Measure AoP and C_AoP from a mask and confidence map");
    measure->add_option("mask", mask_path, "Label mask (P5 PGM)")->required();
    measure->add_option("conf", conf_path, "Confidence map (F32R, 1 channel)")->required();
    add_spacing(measure);
    add_output(measure);

    std::string logits_path;
    std::string trace_path;
    aop_tta_config config;
    aop_tta_config_default(&config);
    auto* adapt = app.add_subcommand("adapt", "Run test-time adaptation on logits and re-measure");
    adapt->add_option("logits", logits_path, "Class logits (F32R, 3 channels)")->required();
    adapt->add_option("conf", conf_path, "Confidence map (F32R, 1 channel)")->required();
    add_spacing(adapt);
    adapt->add_option("--out", out_path, "Report file (default: stdout)");
    adapt->add_option("--trace", trace_path, "Write the per-step trace as JSON lines");
    adapt->add_option("--steps", config.steps, "Gradient steps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    adapt->add_option("--lr", config.lr, "Learning rate")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    adapt->add_option("--lambda-ent", config.lambda_ent, "Entropy weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    adapt->add_option("--lambda-tv", config.lambda_tv, "Total-variation weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    adapt->add_option("--lambda-aop", config.lambda_aop, "AoP-confidence weight")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    adapt->add_option("--epsilon", config.epsilon, "Stabilizer in -log(C_AoP + epsilon)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    adapt->add_option("--fd-step", config.fd_step, "Finite-difference step for the AoP term")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    std::vector<std::string> frozen;
    adapt->add_option("--freeze", frozen, "Parameter groups kept frozen")
        ->check(CLI::IsMember({"gamma", "beta", "mix"}))
        ->delimiter(',');

    std::string pred_dir;
    std::string gt_dir;
    auto* eval = app.add_subcommand("eval", "Evaluate prediction case directories against ground truth");
    eval->add_option("pred_dir", pred_dir, "Prediction case directories")->required();
    eval->add_option("gt_dir", gt_dir, "Ground-truth case directories")->required();
    add_spacing(eval);
    add_output(eval);

    std::string out_dir;
    int count = 1;
    std::uint64_t seed = 0;
    double noise = 0.0;
    auto* phantom = app.add_subcommand("phantom", "Write a seeded suite of synthetic cases");
    phantom->add_option("out_dir", out_dir, "Output directory")->required();
    phantom->add_option("-n,--count", count, "Number of cases")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    phantom->add_option("--seed", seed, "Base seed")->capture_default_str();
    phantom->add_option("--noise", noise, "Logit noise sigma (0 = clean logits)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    std::string svg_path;
    auto* render = app.add_subcommand("render", "Render the measurement geometry as SVG");
    render->add_option("mask", mask_path, "Label mask (P5 PGM)")->required();
    render->add_option("conf", conf_path, "Confidence map (F32R, 1 channel)")->required();
    render->add_option("out_svg", svg_path, "Output SVG file")->required();
    add_spacing(render);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    Spacing sp;
    if (!parse_spacing(spacing_text, sp)) {
        std::cerr << "aop: invalid --spacing '" << spacing_text << "'\n";
        return kExitUsage;
    }

    if (measure->parsed()) return cmd_measure(mask_path, conf_path, sp, format, out_path);
    if (adapt->parsed()) {
        for (const auto& group : frozen) {
            if (group == "gamma") config.train_gamma = 0;
            if (group == "beta") config.train_beta = 0;
            if (group == "mix") config.train_mix = 0;
        }
        return cmd_adapt(logits_path, conf_path, sp, config, out_path, trace_path);
    }
    if (eval->parsed()) return cmd_eval(pred_dir, gt_dir, sp, format, out_path);
    if (phantom->parsed()) return cmd_phantom(out_dir, count, seed, noise);
    if (render->parsed()) return cmd_render(mask_path, conf_path, svg_path, sp);
    return kExitUsage;
}
