// Runs the installed CLI binary and checks exit codes and outputs.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(AOP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = fs::temp_directory_path() / ("aop_cli_" + std::to_string(::getpid()));
        fs::remove_all(root_);
        fs::create_directories(root_);
        ASSERT_EQ(run("phantom " + (root_ / "gt").string() + " -n 2 --seed 5"), 0);
        ASSERT_EQ(run("phantom " + (root_ / "small").string() + " -n 1 --seed 5"), 0);
    }
    static void TearDownTestSuite() { fs::remove_all(root_); }

    static std::string gt(const std::string& rel) { return (root_ / "gt" / rel).string(); }
    static inline fs::path root_;
};

}  // namespace

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run(""), 64);
    EXPECT_EQ(run("frobnicate"), 64);
    EXPECT_EQ(run("measure"), 64);
    EXPECT_EQ(run("measure " + gt("case_0000/mask.pgm") + " " + gt("case_0000/conf.f32r") + " --format xml"), 64);
    EXPECT_EQ(run("measure " + gt("case_0000/mask.pgm") + " " + gt("case_0000/conf.f32r") + " --spacing 0"), 64);
    EXPECT_EQ(run("adapt " + gt("case_0000/logits.f32r") + " " + gt("case_0000/conf.f32r") + " --steps 0"), 64);
    EXPECT_EQ(run("adapt " + gt("case_0000/logits.f32r") + " " + gt("case_0000/conf.f32r") + " --lr -1"), 64);
    EXPECT_EQ(run("phantom " + (root_ / "none").string() + " -n 0"), 64);
    EXPECT_EQ(run("--help"), 0);
}

TEST_F(Cli, MeasureWritesJsonAndCsv) {
    const fs::path out = root_ / "m.json";
    ASSERT_EQ(run("measure " + gt("case_0000/mask.pgm") + " " + gt("case_0000/conf.f32r") + " --out " + out.string()), 0);
    EXPECT_NE(slurp(out).find("\"aop_deg\""), std::string::npos);
    const fs::path csv = root_ / "m.csv";
    ASSERT_EQ(run("measure " + gt("case_0000/mask.pgm") + " " + gt("case_0000/conf.f32r") + " --format csv --out " + csv.string()), 0);
    EXPECT_EQ(slurp(csv).rfind("aop_deg,c_aop,", 0), 0u);
}

TEST_F(Cli, IoAndGeometricFailures) {
    EXPECT_EQ(run("measure /nonexistent/mask.pgm " + gt("case_0000/conf.f32r")), 1);
    EXPECT_EQ(run("measure " + gt("case_0000/conf.f32r") + " " + gt("case_0000/conf.f32r")), 1);
    EXPECT_EQ(run("measure " + gt("case_0000/mask.pgm") + " " + gt("case_0000/conf.f32r") + " --spacing 0.1,0.2"), 2);
    // Mask with PS only.
    const fs::path ps_only = root_ / "ps_only.pgm";
    std::string pgm = slurp(gt("case_0000/mask.pgm"));
    const auto header_end = pgm.find("255\n") + 4;
    for (std::size_t i = header_end; i < pgm.size(); ++i)
        if (pgm[i] == 2) pgm[i] = 0;
    std::ofstream(ps_only, std::ios::binary) << pgm;
    const fs::path err = root_ / "err.json";
    EXPECT_EQ(run("measure " + ps_only.string() + " " + gt("case_0000/conf.f32r") + " --out " + err.string()), 2);
    EXPECT_NE(slurp(err).find("\"error\""), std::string::npos);
}

TEST_F(Cli, AdaptWritesReportAndTrace) {
    const fs::path out = root_ / "adapt.json", trace = root_ / "trace.jsonl";
    ASSERT_EQ(run("adapt " + gt("case_0000/logits.f32r") + " " + gt("case_0000/conf.f32r") +
                  " --steps 2 --lr 1e-3 --lambda-ent 1 --lambda-tv 0.5 --lambda-aop 1 --epsilon 1e-6 --fd-step 1e-4 --out " +
                  out.string() + " --trace " + trace.string()),
              0);
    EXPECT_NE(slurp(out).find("\"params_after\""), std::string::npos);
    const std::string t = slurp(trace);
    EXPECT_EQ(std::count(t.begin(), t.end(), '\n'), 2);
}

TEST_F(Cli, EvalAndUnpaired) {
    const fs::path out = root_ / "eval.csv";
    ASSERT_EQ(run("eval " + (root_ / "gt").string() + " " + (root_ / "gt").string() + " --format csv --out " + out.string()), 0);
    EXPECT_NE(slurp(out).find("summary_mean"), std::string::npos);
    EXPECT_EQ(run("eval " + (root_ / "gt").string() + " " + (root_ / "small").string()), 3);
    EXPECT_EQ(run("eval /nonexistent/a /nonexistent/b"), 1);
}

TEST_F(Cli, PhantomIsDeterministic) {
    ASSERT_EQ(run("phantom " + (root_ / "again").string() + " -n 2 --seed 5"), 0);
    for (const char* f : {"case_0001/mask.pgm", "case_0001/logits.f32r", "case_0001/meta.json", "manifest.json"})
        EXPECT_EQ(slurp(root_ / "again" / f), slurp(root_ / "gt" / f)) << f;
}

TEST_F(Cli, RenderWritesSvg) {
    const fs::path svg = root_ / "r.svg";
    ASSERT_EQ(run("render " + gt("case_0000/mask.pgm") + " " + gt("case_0000/conf.f32r") + " " + svg.string()), 0);
    EXPECT_NE(slurp(svg).find("aop-label"), std::string::npos);
}
