#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "erl/cli.hpp"

using namespace erl::cli;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = ERL_CONFIG_DIR;

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "erl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
  protected:
    fs::path dir;
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("erl_cli_" + std::to_string(::getpid()) + "_" +
               ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string cfg(const std::string& name) const { return kConfigs + "/" + name; }
    std::vector<std::string> rd_example(const std::string& out) const {
        return {"rd", "--system", cfg("full2.json"), "--measure", cfg("bern55.json"), "--family", "linf",
                "--eps", "0.5", "--s", "0.1", "--n", "1", "--out", out};
    }
};

}  // namespace

TEST(CliCells, RoundTripText) {
    for (std::string s : {"0.36806442717580545", "8", "-3", "true", "false", "katok", "1e-300", "0.1"}) {
        EXPECT_EQ(format_cell(parse_cell(s)), s);
    }
    EXPECT_TRUE(std::holds_alternative<long long>(parse_cell("12")));
    EXPECT_TRUE(std::holds_alternative<double>(parse_cell("0.5")));
    EXPECT_TRUE(std::holds_alternative<std::string>(parse_cell("")));
}

TEST(CliCells, CsvQuotesCommas) {
    Table t{{"a", "b"}, {{std::string("x,y"), 1.5}, {std::string("say \"hi\""), 2LL}}};
    const auto csv = to_csv(t);
    EXPECT_NE(csv.find("\"x,y\""), std::string::npos);
    const auto back = from_csv(csv);
    EXPECT_EQ(back.columns, t.columns);
    EXPECT_EQ(to_csv(back), csv);
    EXPECT_EQ(std::get<std::string>(back.rows[1][0]), "say \"hi\"");
}

TEST(CliCells, JsonTableRoundTrip) {
    Table t{{"scale", "lower", "upper"}, {{16LL, 0.25, 0.5}, {32LL, 0.3, 0.6}}};
    const auto back = table_from_json(to_json("idr", t));
    EXPECT_EQ(to_csv(back), to_csv(t));
    EXPECT_EQ(make_report("idr", back), make_report("idr", t));
}

TEST_F(CliTest, RdExampleRow) {
    const auto r = run(rd_example((dir / "rd").string()));
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto table = from_csv(slurp(dir / "rd" / "results.csv"));
    ASSERT_EQ(table.columns,
              (std::vector<std::string>{"epsilon", "s_or_r", "n", "rate_nats", "distortion", "converged"}));
    ASSERT_EQ(table.rows.size(), 1u);
    EXPECT_NEAR(std::get<double>(table.rows[0][3]), 0.368064, 1e-6);
    EXPECT_TRUE(std::get<bool>(table.rows[0][5]));
    EXPECT_TRUE(fs::exists(dir / "rd" / "config.json"));
    EXPECT_TRUE(fs::exists(dir / "rd" / "report.md"));
    EXPECT_NE(r.out.find("1 rows"), std::string::npos);
}

TEST_F(CliTest, CsvIsBitStable) {
    ASSERT_EQ(run(rd_example((dir / "a").string())).code, kOk);
    ASSERT_EQ(run(rd_example((dir / "b").string())).code, kOk);
    EXPECT_EQ(slurp(dir / "a" / "results.csv"), slurp(dir / "b" / "results.csv"));
    EXPECT_EQ(slurp(dir / "a" / "report.md"), slurp(dir / "b" / "report.md"));
    EXPECT_EQ(slurp(dir / "a" / "config.json"), slurp(dir / "b" / "config.json"));
}

TEST_F(CliTest, JobsDoNotChangeResults) {
    auto base = std::vector<std::string>{"rd", "--system", cfg("full2.json"), "--measure", cfg("bern37.json"),
                                         "--eps", "0.1,0.2,0.3", "--n", "1,2"};
    auto a = base, b = base;
    a.insert(a.end(), {"--jobs", "1", "--out", (dir / "a").string()});
    b.insert(b.end(), {"--jobs", "3", "--out", (dir / "b").string()});
    ASSERT_EQ(run(a).code, kOk);
    ASSERT_EQ(run(b).code, kOk);
    EXPECT_EQ(slurp(dir / "a" / "results.csv"), slurp(dir / "b" / "results.csv"));
}

TEST_F(CliTest, MissingMeasureFileIsConfigError) {
    const auto missing = (dir / "no_such_measure.json").string();
    const auto r = run({"rd", "--system", cfg("full2.json"), "--measure", missing, "--eps", "0.5", "--out",
                        (dir / "x").string()});
    EXPECT_EQ(r.code, kConfigError);
    EXPECT_NE(r.err.find(missing), std::string::npos);
    EXPECT_FALSE(fs::exists(dir / "x"));
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run({}).code, kConfigError);
    const auto bad = run({"rd", "--no-such-flag"});
    EXPECT_EQ(bad.code, kConfigError);
    EXPECT_NE(bad.err.find("Usage"), std::string::npos);
    EXPECT_EQ(run({"rd", "--help"}).code, kOk);
    // invalid computation input: eps outside (0, 1]
    EXPECT_EQ(run({"rd", "--system", cfg("full2.json"), "--measure", cfg("bern55.json"), "--eps", "-1", "--out",
                   (dir / "neg").string()})
                  .code,
              kComputationError);
    // fixed-alphabet measure asked for an information dimension rate
    EXPECT_EQ(run({"idr", "--system", cfg("full2.json"), "--measure", cfg("bern37.json"), "--m", "16,32,64,128",
                   "--out", (dir / "idr").string()})
                  .code,
              kComputationError);
    EXPECT_EQ(run({"entropy", "--estimator", "nonsense", "--eps", "0.1", "--system", cfg("full2.json"), "--measure",
                   cfg("bern55.json"), "--out", (dir / "e").string()})
                  .code,
              kConfigError);
}

TEST_F(CliTest, ConfigFileAndFlagOverride) {
    const auto conf = dir / "rd.json";
    std::ofstream(conf) << R"({"schema_version": 1, "command": "rd", "system": ")" << cfg("full2.json")
                        << R"(", "measure": ")" << cfg("bern55.json") << R"(", "eps": [0.25], "n": [1]})";
    ASSERT_EQ(run({"rd", "--config", conf.string(), "--eps", "0.1", "--out", (dir / "o").string()}).code, kOk);
    const auto t = from_csv(slurp(dir / "o" / "results.csv"));
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_DOUBLE_EQ(std::get<double>(t.rows[0][0]), 0.1);
    EXPECT_EQ(run({"mdim", "--config", conf.string(), "--out", (dir / "p").string()}).code, kConfigError);
}

TEST_F(CliTest, ReportRoundTripCsvAndJson) {
    const auto out = (dir / "mdim").string();
    ASSERT_EQ(run({"mdim", "--m-exponents", "2,3,4,5", "--out", out}).code, kOk);
    const auto again = run({"report", "--input", out + "/results.csv", "--out", (dir / "rep").string()});
    ASSERT_EQ(again.code, kOk) << again.err;
    EXPECT_EQ(slurp(dir / "rep" / "report.md"), slurp(fs::path(out) / "report.md"));
    EXPECT_NE(slurp(fs::path(out) / "report.md").find("slope: lower 1.000000"), std::string::npos);

    const auto jout = (dir / "mdim_json").string();
    ASSERT_EQ(run({"mdim", "--m-exponents", "2,3,4,5", "--format", "json", "--out", jout}).code, kOk);
    ASSERT_EQ(run({"report", "--input", jout + "/results.json", "--out", (dir / "rep2").string()}).code, kOk);
    EXPECT_EQ(slurp(dir / "rep2" / "report.md"), slurp(fs::path(jout) / "report.md"));
}

TEST_F(CliTest, RunDirectoriesDoNotCollide) {
    const auto args = std::vector<std::string>{"mdim", "--m-exponents", "2,3,4,5", "--runs-dir", dir.string()};
    ASSERT_EQ(run(args).code, kOk);
    ASSERT_EQ(run(args).code, kOk);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(dir)) n += e.path().filename().string().find("-mdim") != std::string::npos;
    EXPECT_EQ(n, 2u);
}

TEST_F(CliTest, SweepAddsGridColumns) {
    const auto conf = dir / "sweep.json";
    std::ofstream(conf) << R"({"schema_version": 1, "target": "rd", "base": {"system": ")" << cfg("full2.json")
                        << R"(", "measure": ")" << cfg("bern55.json")
                        << R"(", "eps": [0.1]}, "grid": {"p": [1, 2], "n": [[1], [2]]}})";
    ASSERT_EQ(run({"sweep", "--config", conf.string(), "--out", (dir / "s").string(), "--jobs", "2"}).code, kOk);
    const auto t = from_csv(slurp(dir / "s" / "results.csv"));
    EXPECT_EQ(t.columns.front(), "n");
    EXPECT_EQ(t.columns[1], "p");
    EXPECT_EQ(t.rows.size(), 4u);
}

TEST_F(CliTest, VerifyExitStatus) {
    const auto json_path = (dir / "rep.json").string();
    const auto ok = run({"verify", "--scenario", "hilbert-cube-ex24", "--json", json_path, "--out",
                         (dir / "v").string()});
    EXPECT_EQ(ok.code, kOk) << ok.out;
    EXPECT_TRUE(fs::exists(json_path));
    EXPECT_TRUE(fs::exists(dir / "v" / "results.csv"));

    // an impossible tolerance forces a failing claim
    const auto params = dir / "tight.json";
    std::ofstream(params) << R"({"tolerance": 1e-6, "n": [1], "eps_exponents": [2, 3, 4, 5], "bowen_exponents": [2, 3, 4, 5]})";
    const auto bad = run({"verify", "--scenario", "bernoulli-thm12", "--params", params.string(), "--out",
                          (dir / "w").string()});
    EXPECT_EQ(bad.code, kScenarioFailed) << bad.out;

    EXPECT_EQ(run({"verify", "--scenario", "no-such-scenario", "--out", (dir / "u").string()}).code, kConfigError);
    const auto list = run({"verify", "--list"});
    EXPECT_EQ(list.code, kOk);
    EXPECT_NE(list.out.find("bernoulli-thm12"), std::string::npos);
}
