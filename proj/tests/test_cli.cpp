#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "cli.hpp"

using namespace weakval::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string last_line(const std::string& s) {
    std::istringstream is(s);
    std::string line, last;
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    return last;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class CliFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("weakval_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                           "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    fs::path write_config(const std::string& text) {
        const fs::path p = dir / "run.yaml";
        std::ofstream(p) << text;
        return p;
    }

    fs::path dir;
};

} // namespace

TEST(CliParse, EchoesFig2Inputs) {
    const RunConfig c = parse_config({"fig2", "--angle", "42", "--k-grid", "0.006,0.125,0.5,1", "--seed", "7"});
    EXPECT_EQ(c.subcommand, "fig2");
    EXPECT_EQ(c.angle_deg, 42.0);
    EXPECT_EQ(c.K_grid, (std::vector<double>{0.006, 0.125, 0.5, 1.0}));
    EXPECT_EQ(c.plan.seed, 7u);
    EXPECT_EQ(c.plan.unpostselected_rate, 44.6);
    EXPECT_FALSE(c.K.has_value());
}

TEST(CliParse, ErrorCodes) {
    EXPECT_EQ(run_cli({}).code, usage);
    EXPECT_EQ(run_cli({"frobnicate"}).code, usage);
    EXPECT_EQ(run_cli({"fig2", "--k-grid", "0.1,x"}).code, usage);
    EXPECT_EQ(run_cli({"weak-value", "--K", "0.5", "--k-grid", "0.1"}).code, conflicting_values);
    EXPECT_EQ(run_cli({"weak-value", "--K", "1.5"}).code, out_of_range);
    EXPECT_EQ(run_cli({"weak-value", "--angle", "360"}).code, out_of_range);
    EXPECT_EQ(run_cli({"tomo", "--visibility", "-0.1"}).code, out_of_range);
    EXPECT_EQ(run_cli({"weak-value", "--angle", "42", "--K", "0"}).code, degenerate);
    EXPECT_EQ(run_cli({"fig2", "--help"}).code, ok);
}

TEST(CliRun, WeakValue) {
    const Result r = run_cli({"weak-value", "--angle", "42", "--K", "0.006"});
    ASSERT_EQ(r.code, ok) << r.err;
    EXPECT_NEAR(std::stod(last_line(r.out)), 19.02, 0.005);
    EXPECT_NE(r.out.find("angle_deg=42"), std::string::npos);
    const Result m = run_cli({"weak-value", "--K", "1", "--depol", "0.0186062539"});
    ASSERT_EQ(m.code, ok) << m.err;
    EXPECT_LT(std::stod(last_line(m.out)), 0.104528);
}

TEST(CliRun, Povm) {
    const Result r = run_cli({"povm", "--K", "1"});
    ASSERT_EQ(r.code, ok);
    EXPECT_NE(r.out.find("Pi_H\n1 0\n0 0\nPi_V\n0 0\n0 1\n"), std::string::npos) << r.out;
}

TEST(CliRun, GateVerify) {
    const Result r = run_cli({"gate-verify", "--seed", "3"});
    EXPECT_EQ(r.code, ok) << r.out;
    EXPECT_NE(r.out.find("max_infidelity"), std::string::npos);
}

TEST_F(CliFiles, Fig2IsDeterministicAndCarriesMetadata) {
    const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    ASSERT_EQ(run_cli({"fig2", "--seed", "7", "--out", a}).code, ok);
    ASSERT_EQ(run_cli({"fig2", "--seed", "7", "--workers", "4", "--out", b}).code, ok);
    const std::string csv = slurp(a);
    EXPECT_EQ(csv, slurp(b));
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + static_cast<long>(default_k_grid().size()));
    const auto meta = nlohmann::json::parse(slurp(dir / "a.json"));
    EXPECT_EQ(meta["seed"], 7);
    EXPECT_EQ(meta["angle_deg"], 42.0);
    EXPECT_EQ(meta["plan"]["duration_wv"], 1000.0);
}

TEST_F(CliFiles, ConfigFileWithFlagOverrides) {
    const fs::path cfg = write_config("angle: 30\nk_grid: [0.2, 0.4]\nseed: 11\nvisibility: 0.9\n");
    const RunConfig c = parse_config({"fig2", "--config", cfg.string(), "--seed", "12"});
    EXPECT_EQ(c.angle_deg, 30.0);
    EXPECT_EQ(c.K_grid, (std::vector<double>{0.2, 0.4}));
    EXPECT_EQ(c.plan.seed, 12u);
    EXPECT_EQ(c.params.visibility, 0.9);
}

TEST_F(CliFiles, ConfigFileErrors) {
    EXPECT_EQ(run_cli({"tomo", "--config", write_config("visibility: 1.2\n").string()}).code, out_of_range);
    EXPECT_EQ(run_cli({"tomo", "--config", write_config("colour: blue\n").string()}).code, malformed_config);
    EXPECT_EQ(run_cli({"tomo", "--config", write_config("visibility: [1, 2\n").string()}).code, malformed_config);
    EXPECT_EQ(run_cli({"tomo", "--config", write_config("visibility: high\n").string()}).code, malformed_config);
    EXPECT_EQ(run_cli({"tomo", "--config", (dir / "missing.yaml").string()}).code, io_failure);
    EXPECT_EQ(run_cli({"tomo", "--config", write_config("subcommand: fig2\n").string()}).code, conflicting_values);
}

TEST_F(CliFiles, TomoWritesChiAndRespectsOutputDirectory) {
    ::setenv("WEAKVAL_OUT_DIR", dir.c_str(), 1);
    const Result r = run_cli({"tomo"});
    ::unsetenv("WEAKVAL_OUT_DIR");
    ASSERT_EQ(r.code, ok) << r.err;
    const std::string csv = slurp(dir / "chi.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 16);
    const auto meta = nlohmann::json::parse(slurp(dir / "chi.json"));
    EXPECT_NEAR(meta["trace"].get<double>(), 1.0 / 9.0, 1e-8);
    EXPECT_EQ(meta["rank"], 1);
}

TEST_F(CliFiles, FailuresLeaveNoFiles) {
    EXPECT_EQ(run_cli({"fig2", "--out", (dir / "nope" / "x.csv").string()}).code, io_failure);
    // Postselection onto |A> never succeeds for the |D> input at K = 0.
    const fs::path out = dir / "bad.csv";
    EXPECT_EQ(run_cli({"fig2", "--angle", "45", "--K", "0", "--out", out.string()}).code, degenerate);
    EXPECT_FALSE(fs::exists(out));
    EXPECT_TRUE(fs::is_empty(dir));
}

TEST(CliBinary, ExitCodesThroughProcess) {
    const std::string exe = WEAKVAL_CLI_PATH;
    EXPECT_EQ(WEXITSTATUS(std::system((exe + " weak-value --K 0.006 > /dev/null").c_str())), ok);
    EXPECT_EQ(WEXITSTATUS(std::system((exe + " weak-value --K 0 2> /dev/null").c_str())), degenerate);
    EXPECT_EQ(WEXITSTATUS(std::system((exe + " > /dev/null 2>&1").c_str())), usage);
}
