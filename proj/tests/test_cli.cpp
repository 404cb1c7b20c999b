#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "bayescal/binary_oc.hpp"
#include "bayescal/cli.hpp"
#include "bayescal/presets.hpp"

using namespace bayescal;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    args.insert(args.begin(), "bayescal");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    CliRun r;
    r.code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t end = text.find("\r\n", pos);
        const std::string line = text.substr(pos, end - pos);
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
        if (end == std::string::npos) break;
        pos = end + 2;
    }
    return rows;
}

class TempFile {
public:
    explicit TempFile(const std::string& content) {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("bayescal_cli_test_" + std::to_string(::getpid()) + "_" +
                                             std::to_string(counter++) + ".json");
        std::ofstream(path_) << content;
    }
    ~TempFile() { fs::remove(path_); }
    [[nodiscard]] std::string path() const { return path_.string(); }

private:
    fs::path path_;
};

std::string with_c(const std::string& preset, double c) {
    json j = *preset_json(preset);
    j["rule"]["c"] = c;
    return j.dump();
}

}  // namespace

TEST(Cli, OcPrettyShowsFourDecimals) {
    const CliRun r = run({"oc", "preset:fig1-neutral", "--c", "0.975"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("gamma1"), std::string::npos);
    EXPECT_NE(r.out.find("0.5000"), std::string::npos);
    for (const char* m : {"bp", "bcp", "bt1e", "ft1e", "pid", "for"}) EXPECT_NE(r.out.find(m), std::string::npos) << m;
}

TEST(Cli, OcCsvIsHeaderPlusOneRow) {
    const CliRun r = run({"oc", "preset:fig1-neutral", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].front(), "c");
    EXPECT_EQ(rows[0].size(), rows[1].size());
    const OCResult exact = evaluate(load_preset("fig1-neutral"));
    EXPECT_EQ(std::stod(rows[1][1]), exact.bp);
}

TEST(Cli, OcJsonRoundTripsBytes) {
    const CliRun r = run({"oc", "preset:culprit-shock", "--c", "0.772", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.dump() + "\n", r.out);
    EXPECT_NEAR(j["ft1e"].get<double>(), evaluate([] {
                    DesignSpec s = load_preset("culprit-shock");
                    s.rule.c = 0.772;
                    return s;
                }()).ft1e,
                0.0);
}

TEST(Cli, ThresholdOutsideUnitIntervalExitsTwo) {
    TempFile f(with_c("fig1-neutral", 1.5));
    const CliRun r = run({"oc", f.path()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("rule.c"), std::string::npos);
    EXPECT_EQ(run({"oc", "preset:fig1-neutral", "--c", "1.5"}).code, 2);
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"oc"}).code, 2);
    EXPECT_EQ(run({"oc", "/nonexistent/design.json"}).code, 2);
    EXPECT_EQ(run({"oc", "preset:nope"}).code, 2);
    EXPECT_EQ(run({"oc", "preset:fig1-neutral", "--format", "xml"}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    TempFile bad("{not json");
    EXPECT_EQ(run({"validate", bad.path()}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ValidateReportsEndpoint) {
    const CliRun r = run({"validate", "preset:figS3-neutral"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("tte"), std::string::npos);
}

TEST(Cli, CurveRowCountAndFlatPriorIdentity) {
    json j = *preset_json("fig1-neutral");
    j["analysis_prior"] = {{"kind", "flat"}};
    TempFile f(j.dump());
    const CliRun r = run({"curve", f.path(), "--c-min", "0.5", "--c-max", "0.99", "--steps", "99", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 100u);
    const std::size_t ft1e_col = std::find(rows[0].begin(), rows[0].end(), "ft1e") - rows[0].begin();
    double prev_c = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double c = std::stod(rows[i][0]);
        EXPECT_GT(c, prev_c);
        EXPECT_EQ(std::stod(rows[i][ft1e_col]), 1.0 - c);
        prev_c = c;
    }
}

TEST(Cli, CurveBadRangeExitsTwo) {
    EXPECT_EQ(run({"curve", "preset:fig1-neutral", "--c-min", "0.9", "--c-max", "0.5"}).code, 2);
    EXPECT_EQ(run({"curve", "preset:fig1-neutral", "--steps", "1"}).code, 2);
}

TEST(Cli, BinaryCurveRepeatsRowsBetweenAchievableValues) {
    const CliRun r = run({"curve", "preset:figS2-neutral", "--c-min", "0.5", "--c-max", "0.999", "--steps", "400",
                       "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 401u);
    const DecisionGrid g = binary_single_grid(load_preset("figS2-neutral"));
    const auto& vals = g.achievable();
    int repeats = 0;
    for (std::size_t i = 2; i < rows.size(); ++i) {
        const double lo = std::stod(rows[i - 1][0]), hi = std::stod(rows[i][0]);
        const bool crossed = std::any_of(vals.begin(), vals.end(), [&](double p) { return p >= lo && p < hi; });
        const bool same = std::equal(rows[i].begin() + 1, rows[i].end(), rows[i - 1].begin() + 1);
        EXPECT_EQ(same, !crossed) << lo << ' ' << hi;
        repeats += same ? 1 : 0;
    }
    EXPECT_GT(repeats, 100);
}

TEST(Cli, CalibrateCaseStudyTargets) {
    const CliRun r = run({"calibrate", "preset:culprit-shock", "--target", "pid=0.025", "--target", "ft1e=0.025",
                       "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0][3], "c_star");
    EXPECT_EQ(rows[1][1], "pid");
    EXPECT_NEAR(std::stod(rows[1][3]), 0.772, 0.01);
    EXPECT_EQ(rows[2][1], "ft1e");
    EXPECT_NEAR(std::stod(rows[2][3]), 0.975, 0.01);
}

TEST(Cli, CalibrateInfeasibleAndBadTargets) {
    json j = *preset_json("figS2-neutral");
    j["n_T"] = 3;
    j["design_prior"] = {{"kind", "beta"}, {"alpha", 1}, {"beta", 10}};
    TempFile f(j.dump());
    const CliRun r = run({"calibrate", f.path(), "--target", "pid=0.01", "--format", "csv"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("INFEASIBLE"), std::string::npos);
    EXPECT_EQ(run({"calibrate", "preset:culprit-shock", "--target", "pid=1.5"}).code, 2);
    EXPECT_EQ(run({"calibrate", "preset:culprit-shock"}).code, 2);
}

TEST(Cli, CalibrateWithScenarioFile) {
    TempFile sc(R"({"neutral": {"kind": "beta", "alpha": 74, "beta": 52}})");
    const CliRun r =
        run({"calibrate", "preset:culprit-shock", "--target", "pid=0.025", "--scenarios", sc.path(), "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    ASSERT_EQ(j["rows"].size(), 1u);
    EXPECT_EQ(j["rows"][0]["scenario"], "neutral");
    EXPECT_NEAR(j["rows"][0]["c_star"].get<double>(), 0.898, 0.01);
    EXPECT_EQ(j.dump() + "\n", r.out);
}

TEST(Cli, CaseStudyJson) {
    const CliRun r = run({"case-study", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_TRUE(j["posterior_flat"]["pass"].get<bool>());
    ASSERT_EQ(j["rows"].size(), 8u);
    EXPECT_NEAR(j["rows"][7]["calibration"]["c_star"].get<double>(), 0.983, 0.01);
    EXPECT_TRUE(j["rows"][1]["decision"]["success"].get<bool>());
    EXPECT_EQ(j.dump() + "\n", r.out);
}

TEST(Cli, SimulateIsByteDeterministic) {
    const std::vector<std::string> args = {"simulate", "preset:figS2-neutral", "--sims", "1000000", "--seed", "42",
                                           "--format", "csv"};
    const CliRun a = run(args);
    const CliRun b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SimulateContinuousWithinTolerance) {
    const CliRun r = run({"simulate", "preset:fig1-optimistic", "--sims", "1000000", "--seed", "42", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j.dump() + "\n", r.out);
    for (const char* m : {"bp", "bcp", "bt1e", "ft1e", "pid", "for"}) {
        const double d = j["delta"][m].get<double>();
        const double se = j["standard_errors"][m].get<double>();
        EXPECT_LE(std::abs(d), 3.29 * se) << m;
    }
    EXPECT_EQ(run({"simulate", "preset:fig1-neutral", "--sims", "0"}).code, 2);
}

TEST(Cli, DecideContinuousAndBinary) {
    const CliRun r = run({"decide", "preset:culprit-shock", "--c", "0.8145", "--x-T", "172", "--x-C", "194"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("SUCCESS"), std::string::npos);
    const CliRun j = run({"decide", "preset:culprit-shock", "--x-T", "172", "--x-C", "194", "--format", "json"});
    ASSERT_EQ(j.code, 0);
    EXPECT_FALSE(json::parse(j.out)["success"].get<bool>());
    EXPECT_EQ(run({"decide", "preset:culprit-shock", "--x-T", "172"}).code, 2);
    EXPECT_EQ(run({"decide", "preset:fig1-neutral", "--estimate", "0.3"}).code, 0);
}

TEST(Cli, PresetsListAndShow) {
    const CliRun r = run({"presets"});
    ASSERT_EQ(r.code, 0);
    for (const auto& n : preset_names()) EXPECT_NE(r.out.find(n), std::string::npos);
    const CliRun one = run({"presets", "fig1-neutral"});
    ASSERT_EQ(one.code, 0);
    EXPECT_EQ(json::parse(one.out)["endpoint"], "continuous_single");
    EXPECT_EQ(run({"presets", "missing"}).code, 2);
}

TEST(Cli, StrictEscalatesPrecisionWarnings) {
    json j;
    j["endpoint"] = "binary_two_arm";
    j["n_T"] = 1;
    j["n_C"] = 1;
    j["null_rate"] = 0.5;
    j["analysis_prior"] = {{"treatment", {{"kind", "beta"}, {"alpha", 0.02}, {"beta", 0.02}}},
                          {"control", {{"kind", "beta"}, {"alpha", 0.02}, {"beta", 0.02}}}};
    j["design_prior"] = {{"treatment", {{"kind", "beta"}, {"alpha", 2}, {"beta", 2}}},
                        {"control", {{"kind", "beta"}, {"alpha", 2}, {"beta", 2}}}};
    j["rule"] = {{"delta", 0.0}, {"c", 0.9}};
    TempFile f(j.dump());
    const CliRun lax = run({"oc", f.path()});
    EXPECT_EQ(lax.code, 0) << lax.err;
    EXPECT_NE(lax.err.find("warning"), std::string::npos);
    EXPECT_EQ(run({"--strict", "oc", f.path()}).code, 3);
}

TEST(Cli, ExecutableExitCodes) {
    const std::string exe = BAYESCAL_CLI_PATH;
    auto status = [&](const std::string& args) {
        const int s = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status("oc preset:fig1-neutral"), 0);
    EXPECT_EQ(status("oc preset:fig1-neutral --c 1.5"), 2);
    EXPECT_EQ(status("calibrate preset:culprit-shock --target pid=1.5"), 2);
}
