#include "aop/case_io.hpp"

#include "aop/error.hpp"
#include "aop/geometry.hpp"
#include "aop/report.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

namespace aop::case_io {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "cannot create directory " + dir.string());
    }
}

std::set<std::string> case_ids(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
    std::set<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_directory()) ids.insert(entry.path().filename().string());
    }
    if (ec) throw Error(ErrorCode::IoError, "cannot list " + dir.string());
    return ids;
}

std::optional<ConfMap> try_conf(const fs::path& dir) {
    const fs::path path = dir / "conf.f32r";
    if (!fs::exists(path)) return std::nullopt;
    return read_conf_f32r(read_file(path.string()));
}

std::optional<double> try_measure(const LabelMask& mask, const std::optional<ConfMap>& conf,
                                  const PixelSpacing& spacing) {
    if (!conf) return std::nullopt;
    try {
        return compute_aop(mask, *conf, spacing).aop_deg;
    } catch (const Error& e) {
        if (is_geometric(e.code()) || e.code() == ErrorCode::InvalidInput) return std::nullopt;
        throw;
    }
}

}  // namespace

void write_case(const std::string& dir, const phantom::PhantomCase& c, const std::string& case_id) {
    const fs::path root(dir);
    ensure_dir(root);
    write_file((root / "mask.pgm").string(), write_mask_pgm(c.mask));
    write_file((root / "conf.f32r").string(), write_f32r(c.conf));
    write_file((root / "logits.f32r").string(), write_f32r(c.logits));
    write_file((root / "meta.json").string(), report::meta_json(c, case_id).dump(2) + "\n");
}

std::string write_suite(const std::string& out_dir, int n, std::uint64_t base_seed,
                        const phantom::Corruption& corruption) {
    if (n < 1) throw Error(ErrorCode::InvalidInput, "case count must be at least 1");
    const fs::path root(out_dir);
    ensure_dir(root);
    report::json cases = report::json::array();
    for (int i = 0; i < n; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "case_%04d", i);
        const auto c = phantom::suite_case(base_seed, i, corruption);
        write_case((root / name).string(), c, name);
        cases.push_back({{"case_id", name}, {"seed", c.spec.seed}, {"gt_aop_deg", c.gt_aop_deg}});
    }
    const report::json manifest = {{"count", n},
                                   {"base_seed", base_seed},
                                   {"rng", "splitmix64"},
                                   {"corruption", phantom::describe(corruption)},
                                   {"cases", cases}};
    const std::string text = manifest.dump(2) + "\n";
    write_file((root / "manifest.json").string(), text);
    return text;
}

metrics::MetricsReport evaluate_dirs(const std::string& pred_dir, const std::string& gt_dir,
                                     const PixelSpacing& spacing) {
    const fs::path pred_root(pred_dir);
    const fs::path gt_root(gt_dir);
    const auto pred_ids = case_ids(pred_root);
    const auto gt_ids = case_ids(gt_root);
    std::set<std::string> all(pred_ids);
    all.insert(gt_ids.begin(), gt_ids.end());

    std::vector<metrics::CaseMetrics> cases;
    std::vector<std::string> unpaired;
    for (const std::string& id : all) {
        const fs::path pred_case = pred_root / id;
        const fs::path gt_case = gt_root / id;
        if (!pred_ids.count(id) || !gt_ids.count(id) || !fs::exists(pred_case / "mask.pgm") ||
            !fs::exists(gt_case / "mask.pgm")) {
            unpaired.push_back(id);
            continue;
        }
        const LabelMask pred = read_mask_pgm(read_file((pred_case / "mask.pgm").string()));
        const LabelMask gt = read_mask_pgm(read_file((gt_case / "mask.pgm").string()));

        const auto gt_conf = try_conf(gt_case);
        auto pred_conf = try_conf(pred_case);
        if (!pred_conf) pred_conf = gt_conf;

        std::optional<double> gt_aop;
        if (fs::exists(gt_case / "meta.json")) {
            try {
                const auto meta =
                    report::json::parse(read_file((gt_case / "meta.json").string()));
                if (meta.contains("gt_aop_deg")) gt_aop = meta["gt_aop_deg"].get<double>();
            } catch (const report::json::exception& e) {
                throw Error(ErrorCode::FormatError, id + "/meta.json: " + e.what());
            }
        }
        if (!gt_aop) gt_aop = try_measure(gt, gt_conf, spacing);
        const auto pred_aop = try_measure(pred, pred_conf, spacing);
        cases.push_back(metrics::evaluate_case(id, pred, gt, spacing, pred_aop, gt_aop));
    }
    auto report = metrics::aggregate(std::move(cases));
    report.unpaired = std::move(unpaired);
    return report;
}

}  // namespace aop::case_io
