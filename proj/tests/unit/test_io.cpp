#include "aop/case_io.hpp"
#include "aop/render.hpp"
#include "aop/report.hpp"

#include "support/test_util.hpp"

#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace aop;
namespace fs = std::filesystem;

namespace {
class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("aop_io_" + std::to_string(::getpid()) + "_" +
                                                   std::to_string(counter_++))) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};
}  // namespace

TEST(Report, ResultJsonKeys) {
    const auto c = phantom::suite_case(1, 0);
    const auto j = report::to_json(compute_aop(c.mask, c.conf));
    for (const char* key : {"aop_deg", "c_aop", "p1", "p3", "p4", "d13", "d34", "d14", "m_points", "ellipse"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["p1"].size(), 2u);
}

TEST(Report, ErrorJsonCarriesStage) {
    const auto j = report::error_json(Error(ErrorCode::PointNotExterior, "inside", "tangent_points"));
    EXPECT_EQ(j["error"]["stage"], "tangent_points");
    EXPECT_EQ(j["error"]["code"], std::string(to_string(ErrorCode::PointNotExterior)));
}

TEST(Report, CsvHasHeaderRowsAndSummaries) {
    metrics::CaseMetrics a;
    a.case_id = "x";
    a.dice_ps = 0.5;
    const std::string csv = report::to_csv(metrics::aggregate({a}));
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "case_id,dice_ps,dice_fh,dice_psfh,asd_ps,asd_fh,asd_psfh,hd100_ps,hd100_fh,hd100_psfh,aop_abs_err");
    EXPECT_NE(csv.find("\nx,0.5,"), std::string::npos);
    EXPECT_NE(csv.find("\nsummary_mean,0.5"), std::string::npos);
    EXPECT_NE(csv.find("\nsummary_std,0"), std::string::npos);
}

TEST(CaseIo, SuiteEvaluatesAgainstItself) {
    TempDir dir;
    case_io::write_suite(dir.path().string(), 3, 44);
    EXPECT_TRUE(fs::exists(dir.path() / "manifest.json"));
    EXPECT_TRUE(fs::exists(dir.path() / "case_0002" / "meta.json"));
    const auto r = case_io::evaluate_dirs(dir.path().string(), dir.path().string(), PixelSpacing{});
    ASSERT_EQ(r.cases.size(), 3u);
    EXPECT_TRUE(r.unpaired.empty());
    for (const auto& c : r.cases) {
        EXPECT_EQ(c.dice_psfh, 1.0);
        EXPECT_EQ(c.hd100_psfh, 0.0);
        ASSERT_TRUE(c.aop_abs_err.has_value());
        EXPECT_LE(*c.aop_abs_err, 1.0);
    }
}

TEST(CaseIo, UnpairedCasesReported) {
    TempDir a, b;
    case_io::write_suite(a.path().string(), 2, 1);
    case_io::write_suite(b.path().string(), 1, 1);
    const auto r = case_io::evaluate_dirs(a.path().string(), b.path().string(), PixelSpacing{});
    EXPECT_EQ(r.cases.size(), 1u);
    ASSERT_EQ(r.unpaired.size(), 1u);
    EXPECT_EQ(r.unpaired[0], "case_0001");
}

TEST(CaseIo, MissingDirectoryIsIoError) {
    EXPECT_AOP_ERROR(case_io::evaluate_dirs("/nonexistent/a", "/nonexistent/b", PixelSpacing{}),
                     ErrorCode::IoError);
}

TEST(CaseIo, CorruptMetaIsFormatError) {
    TempDir dir;
    case_io::write_suite(dir.path().string(), 1, 2);
    std::ofstream(dir.path() / "case_0000" / "meta.json") << "{not json";
    EXPECT_AOP_ERROR(case_io::evaluate_dirs(dir.path().string(), dir.path().string(), PixelSpacing{}),
                     ErrorCode::FormatError);
}

TEST(Render, GeometryElementsAndLabel) {
    const auto c = phantom::suite_case(3, 0);
    const AopResult r = compute_aop(c.mask, c.conf);
    const std::string svg = render_svg(c.mask, r, "");
    for (const char* token : {"<svg", "region-ps", "region-fh", "<ellipse", "ps-axis", "fh-tangent", "aop-arc", "aop-label"})
        EXPECT_NE(svg.find(token), std::string::npos) << token;
    EXPECT_NE(svg.find(format_angle_label(r.aop_deg)), std::string::npos);
    EXPECT_EQ(format_angle_label(90.0), "90.00°");
}

TEST(Render, FailureKeepsRegionsOnly) {
    const auto c = phantom::suite_case(3, 0);
    const std::string svg = render_svg(c.mask, std::nullopt, "missing FH");
    EXPECT_NE(svg.find("region-ps"), std::string::npos);
    EXPECT_EQ(svg.find("<ellipse"), std::string::npos);
    EXPECT_NE(svg.find("measurement failed"), std::string::npos);
}
