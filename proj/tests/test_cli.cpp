#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "auctionfda/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using testing_support::fixture;
using testing_support::scratch_dir;

namespace {

struct Outcome {
    int code = -1;
    std::string log;
};

Outcome cli(const std::string& args, const fs::path& dir) {
    const auto log = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + AUCTIONFDA_CLI + "\" " + args + " > /dev/null 2> \"" + log.string() + "\"";
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.log = auctionfda::io::read_file(log);
    return o;
}

std::vector<std::string> rows(const fs::path& csv) {
    std::vector<std::string> out;
    std::ifstream in(csv);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        out.push_back(line);
    }
    return out;
}

std::string sample_inputs() {
    return "--lots \"" + fixture("sample_lots.csv").string() + "\" --bids \"" + fixture("sample_bids.csv").string() + "\"";
}

std::string data_inputs(const fs::path& dir) {
    return "--lots \"" + (dir / "lots.csv").string() + "\" --bids \"" + (dir / "bids.csv").string() + "\"";
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + 1)) ++n;
    return n;
}

}  // namespace

TEST(Cli, SmoothSampleLots) {
    const auto dir = scratch_dir("cli_smooth");
    const auto o = cli("smooth " + sample_inputs() + " --out \"" + dir.string() + "\"", dir);
    ASSERT_EQ(o.code, 0) << o.log;
    const auto r = rows(dir / "curves.csv");
    EXPECT_EQ(r.size(), 400u);
    EXPECT_EQ(count(auctionfda::io::read_file(dir / "curves.svg"), "<polyline"), 4u);
    const auto head = auctionfda::io::read_file(dir / "curves.csv");
    EXPECT_NE(head.find("# command: smooth"), std::string::npos);
    EXPECT_NE(head.find("sha256="), std::string::npos);
}

TEST(Cli, LotWithoutBidsIsSkipped) {
    const auto dir = scratch_dir("cli_nobids");
    auto catalog = auctionfda::io::read_file(fixture("sample_lots.csv"));
    std::string lastline = catalog.substr(catalog.rfind('\n', catalog.size() - 2) + 1);
    lastline.replace(0, lastline.find(','), "999");
    std::ofstream(dir / "lots.csv") << catalog << lastline;
    const auto o = cli("smooth --lots \"" + (dir / "lots.csv").string() + "\" --bids \"" +
                           fixture("sample_bids.csv").string() + "\" --out \"" + dir.string() + "\"",
                       dir);
    ASSERT_EQ(o.code, 0) << o.log;
    EXPECT_NE(o.log.find("999"), std::string::npos);
    EXPECT_EQ(rows(dir / "curves.csv").size(), 400u);
}

TEST(Cli, SimulateAndSmoothAreDeterministic) {
    const auto a = scratch_dir("cli_det_a");
    const auto b = scratch_dir("cli_det_b");
    ASSERT_EQ(cli("simulate --seed 7 --out \"" + a.string() + "\"", a).code, 0);
    ASSERT_EQ(cli("simulate --seed 7 --out \"" + b.string() + "\"", b).code, 0);
    for (const char* f : {"lots.csv", "bids.csv", "truth.json"}) {
        EXPECT_EQ(auctionfda::io::read_file(a / f), auctionfda::io::read_file(b / f)) << f;
    }
    const auto s1 = scratch_dir("cli_det_s1");
    const auto s2 = scratch_dir("cli_det_s2");
    ASSERT_EQ(cli("smooth " + data_inputs(a) + " --out \"" + s1.string() + "\"", s1).code, 0);
    ASSERT_EQ(cli("smooth " + data_inputs(a) + " --out \"" + s2.string() + "\"", s2).code, 0);
    EXPECT_EQ(auctionfda::io::read_file(s1 / "curves.csv"), auctionfda::io::read_file(s2 / "curves.csv"));
    EXPECT_EQ(auctionfda::io::read_file(s1 / "curves.svg"), auctionfda::io::read_file(s2 / "curves.svg"));
}

TEST(Cli, RegressWritesEveryCovariateAndEchoesAlpha) {
    const auto data = scratch_dir("cli_reg_data");
    ASSERT_EQ(cli("simulate --seed 11 --out \"" + data.string() + "\"", data).code, 0);
    const auto out = scratch_dir("cli_reg_out");
    const auto o = cli("regress " + data_inputs(data) + " --alpha 0.1 --out \"" + out.string() + "\"", out);
    ASSERT_EQ(o.code, 0) << o.log;
    EXPECT_EQ(rows(out / "coefficients.csv").size(), 1800u);
    const auto text = auctionfda::io::read_file(out / "coefficients.csv");
    EXPECT_NE(text.find("# alpha: 0.1\n"), std::string::npos);
    EXPECT_NE(text.find("--alpha 0.1"), std::string::npos);
    EXPECT_TRUE(fs::exists(out / "beta_log_opening_bid.svg"));

    const auto acc = scratch_dir("cli_reg_acc");
    ASSERT_EQ(cli("regress " + data_inputs(data) + " --acceleration --out \"" + acc.string() + "\"", acc).code, 0);
    EXPECT_EQ(rows(acc / "coefficients.csv").size(), 2700u);

    const auto sm = scratch_dir("cli_reg_sm");
    ASSERT_EQ(cli("smooth " + data_inputs(data) + " --out \"" + sm.string() + "\"", sm).code, 0);
    const auto pre = scratch_dir("cli_reg_pre");
    ASSERT_EQ(cli("regress " + data_inputs(data) + " --alpha 0.1 --curves \"" + (sm / "curves.csv").string() +
                      "\" --out \"" + pre.string() + "\"",
                  pre)
                  .code,
              0);
    EXPECT_EQ(rows(pre / "coefficients.csv"), rows(out / "coefficients.csv"));
}

TEST(Cli, OutlierScreenDropsPlantedLots) {
    const auto data = scratch_dir("cli_outliers");
    std::ofstream(data / "spec.json") << R"({"planted_outliers": 7, "covariate_truncation_sd": 1.5})";
    ASSERT_EQ(cli("simulate --seed 3 --spec \"" + (data / "spec.json").string() + "\" --out \"" + data.string() + "\"",
                  data)
                  .code,
              0);
    const auto out = scratch_dir("cli_outliers_out");
    const auto o = cli("regress " + data_inputs(data) + " --outlier-sd 2.5 --out \"" + out.string() + "\"", out);
    ASSERT_EQ(o.code, 0) << o.log;
    const auto text = auctionfda::io::read_file(out / "coefficients.csv");
    EXPECT_NE(text.find("# n_lots: 100\n"), std::string::npos) << text.substr(0, 800);
    EXPECT_NE(o.log.find("removed 7 lots"), std::string::npos) << o.log;
}

TEST(Cli, SensitivityTable) {
    const auto out = scratch_dir("cli_sens");
    ASSERT_EQ(cli("sensitivity " + sample_inputs() + " --out \"" + out.string() + "\"", out).code, 0);
    const auto r = rows(out / "sensitivity.csv");
    ASSERT_EQ(r.size(), 42u);
    std::size_t minima = 0;
    for (const auto& row : r) minima += row.find(",true,") != std::string::npos;
    EXPECT_EQ(minima, 1u);

    const auto one = scratch_dir("cli_sens_one");
    ASSERT_EQ(cli("sensitivity " + sample_inputs() + " --p-values 5 --lambda-values 0.1 --out \"" + one.string() + "\"",
                  one)
                  .code,
              0);
    const auto single = rows(one / "sensitivity.csv");
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0].rfind("5,0.1,", 0), 0u);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch_dir("cli_exit");
    EXPECT_EQ(cli("smooth --lots /nonexistent.csv --bids /nonexistent.csv --out \"" + dir.string() + "\"", dir).code, 2);
    EXPECT_EQ(cli("smooth " + sample_inputs() + " --grid 1 --out \"" + dir.string() + "\"", dir).code, 2);
    EXPECT_EQ(cli("smooth " + sample_inputs() + " --bogus --out \"" + dir.string() + "\"", dir).code, 2);
    EXPECT_EQ(cli("regress " + sample_inputs() + " --alpha 1.5 --out \"" + dir.string() + "\"", dir).code, 2);
    const auto few = cli("regress " + sample_inputs() + " --out \"" + dir.string() + "\"", dir);
    EXPECT_EQ(few.code, 2);
    EXPECT_NE(few.log.find("lots"), std::string::npos);
    const auto partial = cli("smooth " + sample_inputs() + " --grid 5 --lambda 0 --out \"" + dir.string() + "\"", dir);
    EXPECT_EQ(partial.code, 1) << partial.log;
}
