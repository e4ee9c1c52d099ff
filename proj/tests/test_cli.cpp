// Copyright 2026 The qsdc-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <locale>
#include <regex>
#include <sstream>
#include <string>

#include "commands.hpp"

namespace qsdc::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               fmt::format("qsdc_cli_{}_{}", ::getpid(), ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& body) {
        const fs::path p = dir_ / name;
        std::ofstream(p, std::ios::binary) << body;
        return p.string();
    }

    static std::string read(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    }

    // Runs a command through the same error mapping as the executable.
    int run(int (*cmd)(const Options&, std::ostream&), const Options& o) {
        out_.str("");
        err_.str("");
        return guarded([&] { return cmd(o, out_); }, err_);
    }

    Options with_config(const std::string& ini, std::optional<std::uint64_t> seed = 1) {
        Options o;
        o.config_path = write("run.ini", ini);
        o.seed = seed;
        return o;
    }

    static double extract(const std::string& text, const std::string& pattern) {
        std::smatch m;
        if (!std::regex_search(text, m, std::regex(pattern))) return std::nan("");
        return std::stod(m[1].str());
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

const char kReferenceCountsCsv[] =
    "theta1_deg,theta2_deg,n_ik,n_jl,n_il,n_jk\n"
    "0,11.25,420,378,101,139\n"
    "22.5,11.25,433,390,89,122\n"
    "22.5,33.75,460,421,58,101\n"
    "0,33.75,112,75,403,449\n";

TEST(ParseMessage, BitsAndHex) {
    EXPECT_EQ(parse_message("0110"), (std::vector<int>{0, 1, 1, 0}));
    EXPECT_EQ(parse_message("0xA1"), (std::vector<int>{1, 0, 1, 0, 0, 0, 0, 1}));
    EXPECT_THROW((void)parse_message("012"), ConfigError);
    EXPECT_THROW((void)parse_message("0xZZ"), ConfigError);
}

TEST_F(CliTest, ConfigRejectsUnknownKeysAndSections) {
    Options o = with_config("[source]\nvis_0deg = 0.96\nvisibility = 0.9\n");
    EXPECT_EQ(run(cmd_belltest, o), kConfigError);
    EXPECT_NE(err_.str().find("unknown key 'visibility'"), std::string::npos) << err_.str();

    o = with_config("[detector]\nefficiency = 0.5\n");
    EXPECT_EQ(run(cmd_belltest, o), kConfigError);
    EXPECT_NE(err_.str().find("unknown config section"), std::string::npos);

    o = with_config("[source]\ncar = fifty\n");
    EXPECT_EQ(run(cmd_belltest, o), kConfigError);

    o = with_config("[source]\ncar = 50 Hz\n");
    EXPECT_EQ(run(cmd_belltest, o), kConfigError);
}

TEST_F(CliTest, MissingConfigFileIsConfigError) {
    Options o;
    o.config_path = (dir_ / "absent.ini").string();
    o.seed = 1;
    EXPECT_EQ(run(cmd_belltest, o), kConfigError);
}

TEST_F(CliTest, SimulationRequiresSeed) {
    const Options o = with_config("", std::nullopt);
    EXPECT_EQ(run(cmd_belltest, o), kConfigError);
    EXPECT_EQ(run(cmd_bsmscan, o), kConfigError);
    EXPECT_EQ(run(cmd_session, o), kConfigError);
}

TEST_F(CliTest, BelltestAnalysisOfReferenceCounts) {
    Options o;
    o.counts_path = write("reference.csv", kReferenceCountsCsv);
    o.out_path = (dir_ / "echo.csv").string();
    ASSERT_EQ(run(cmd_belltest, o), kOk) << err_.str();
    EXPECT_NE(out_.str().find("S = 2.4637"), std::string::npos) << out_.str();
    EXPECT_NE(out_.str().find("verdict: accepted"), std::string::npos);
    EXPECT_EQ(read(*o.out_path), kReferenceCountsCsv);
}

TEST_F(CliTest, BelltestMalformedCountsAreDataErrors) {
    const std::string bad[] = {
        "theta1,theta2,n_ik,n_jl,n_il,n_jk\n0,11.25,1,2,3,4\n",
        "theta1_deg,theta2_deg,n_ik,n_jl,n_il,n_jk\n0,11.25,420,378,101\n",
        "theta1_deg,theta2_deg,n_ik,n_jl,n_il,n_jk\n0,11.25,420,378,101,-3\n",
        "theta1_deg,theta2_deg,n_ik,n_jl,n_il,n_jk\n0,11.25,420,378,101,139\n",
        "theta1_deg,theta2_deg,n_ik,n_jl,n_il,n_jk\nx,11.25,1,1,1,1\n0,1,1,1,1,1\n0,1,1,1,1,1\n0,1,1,1,1,1\n",
        std::string(kReferenceCountsCsv) + "0,0,1,1,1,1\n",
        "",
    };
    for (const auto& body : bad) {
        Options o;
        o.counts_path = write("bad.csv", body);
        EXPECT_EQ(run(cmd_belltest, o), kDataError) << body;
        EXPECT_FALSE(err_.str().empty());
    }
}

TEST_F(CliTest, BelltestDegenerateCountsAreDataErrors) {
    Options o;
    o.counts_path = write("zero.csv",
                          "theta1_deg,theta2_deg,n_ik,n_jl,n_il,n_jk\n0,11.25,1,1,1,1\n22.5,11.25,0,0,0,0\n"
                          "22.5,33.75,1,1,1,1\n0,33.75,1,1,1,1\n");
    EXPECT_EQ(run(cmd_belltest, o), kDataError);
    EXPECT_NE(err_.str().find("degenerate"), std::string::npos);
}

TEST_F(CliTest, BelltestIdealSimulationConverges) {
    const Options o = with_config(
        "[source]\nvis_0deg = 1\nvis_45deg = 1\ncar = 1e12\n[belltest]\ncoincidence_rate_hz = 1e6\nduration_s = 100\n", 42);
    ASSERT_EQ(run(cmd_belltest, o), kOk) << err_.str();
    EXPECT_NEAR(extract(out_.str(), R"(S = ([0-9.]+))"), 2.8284, 0.01) << out_.str();
}

TEST_F(CliTest, BsmscanIdealVisibility) {
    Options o = with_config("[source]\nvis_0deg = 1\nvis_45deg = 1\ncar = 1e12\n[bsm]\nflux_hz = 2e6\ndelay_step_ps = 2\n", 3);
    o.out_path = (dir_ / "scan.csv").string();
    ASSERT_EQ(run(cmd_bsmscan, o), kOk) << err_.str() << out_.str();
    EXPECT_GT(extract(out_.str(), R"(visibility = ([0-9.]+))"), 0.99);
    const std::string csv = read(*o.out_path);
    EXPECT_EQ(csv.rfind("delay_ps,counts_psi_minus,counts_psi_plus,fit_psi_minus,fit_psi_plus\n", 0), 0U);
}

TEST_F(CliTest, BsmscanCalibratedSourceApproachesModelCeiling) {
    const Options o = with_config("[source]\ncar = 1e12\n[bsm]\nflux_hz = 2e6\n", 4);
    ASSERT_EQ(run(cmd_bsmscan, o), kOk) << err_.str();
    const TwoPhotonDensity src = source_state(calibrate_source(0.96, 0.90));
    const double model = model_visibility(encode_bit(src, 1), encode_bit(src, 0), BsmSetting::M1);
    EXPECT_NEAR(extract(out_.str(), R"(visibility = ([0-9.]+))"), model, 0.01);
}

TEST_F(CliTest, BsmscanTwoPointsIsFitFailure) {
    Options o = with_config("[bsm]\ndelay_start_ps = 400\ndelay_stop_ps = 466\ndelay_step_ps = 66\n", 5);
    o.out_path = (dir_ / "scan.csv").string();
    EXPECT_EQ(run(cmd_bsmscan, o), kFitFailure);
    EXPECT_NE(out_.str().find("fit psi-: failed"), std::string::npos);
    // Counts are still written, with the fit columns left empty.
    EXPECT_NE(read(*o.out_path).find("\n400,"), std::string::npos);
}

TEST_F(CliTest, BsmscanRejectsBadSetting) {
    EXPECT_EQ(run(cmd_bsmscan, with_config("[bsm]\nsetting = M3\n")), kConfigError);
    EXPECT_EQ(run(cmd_bsmscan, with_config("[bsm]\ndelay_step_ps = 0\n")), kConfigError);
}

TEST_F(CliTest, PerfSinglePoint) {
    Options o = with_config("[perf]\nlt_start_km = 1\nlt_stop_km = 1\np_values = 0.03\nm_values = 1000\n", std::nullopt);
    o.out_path = (dir_ / "perf.csv").string();
    ASSERT_EQ(run(cmd_perf, o), kOk) << err_.str();
    const std::string csv = read(*o.out_path);
    EXPECT_EQ(csv.rfind("lt_km,p,m,t_s,lm_km,rmax_hz\n", 0), 0U);
    EXPECT_NEAR(extract(csv, R"(\n1,0\.03,1000,[^,]+,[^,]+,([0-9.e+]+))"), 1.79e5, 0.01e5) << csv;
}

TEST_F(CliTest, PerfSweepCurvesDecrease) {
    Options o = with_config("", std::nullopt);
    o.out_path = (dir_ / "perf.csv").string();
    ASSERT_EQ(run(cmd_perf, o), kOk);
    std::istringstream csv(read(*o.out_path));
    std::string line;
    std::getline(csv, line);
    double prev_p = -1.0, prev_r = 0.0;
    int rows = 0;
    while (std::getline(csv, line)) {
        double lt = 0, p = 0, m = 0, t = 0, lm = 0, r = 0;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf", &lt, &p, &m, &t, &lm, &r), 6) << line;
        if (p == prev_p) {
            EXPECT_LT(r, prev_r) << line;
        }
        prev_p = p;
        prev_r = r;
        ++rows;
    }
    EXPECT_EQ(rows, 4 * 30);
}

TEST_F(CliTest, PerfEmptyRangeIsConfigError) {
    EXPECT_EQ(run(cmd_perf, with_config("[perf]\nlt_start_km = 5\nlt_stop_km = 1\n")), kConfigError);
    EXPECT_EQ(run(cmd_perf, with_config("[perf]\np_values = \n")), kConfigError);
    EXPECT_EQ(run(cmd_perf, with_config("[perf]\nm_values = 10.5\n")), kConfigError);
}

TEST_F(CliTest, SessionIdealRun) {
    Options o = with_config(
        "[source]\nvis_0deg = 1\nvis_45deg = 1\n[session]\natten_db_per_km = 0\neta_bsm = 1\nrandom_message_bits = 2000\n", 6);
    o.out_path = (dir_ / "bits.csv").string();
    ASSERT_EQ(run(cmd_session, o), kOk) << err_.str();
    EXPECT_NE(out_.str().find("ber = 0\n"), std::string::npos) << out_.str();
    const std::string csv = read(*o.out_path);
    EXPECT_EQ(csv.rfind("index,sent,pattern,decoded\n", 0), 0U);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2001);
}

TEST_F(CliTest, SessionWithEveAborts) {
    const Options o = with_config(
        "[source]\nvis_0deg = 1\nvis_45deg = 1\ncar = 1e12\n[session]\natten_db_per_km = 0\nmemory_km = 5000\n"
        "min_counts_m = 100000\neve = intercept_resend\nmessage = 0x5A\n", 7);
    EXPECT_EQ(run(cmd_session, o), kSecurityAbort);
    EXPECT_NEAR(extract(out_.str(), R"(S = ([0-9.]+))"), 1.414, 0.05) << out_.str();
    EXPECT_NE(out_.str().find("verdict = aborted"), std::string::npos);
}

TEST_F(CliTest, SessionShortMemoryIsConfigError) {
    const Options o = with_config("[session]\nmemory_km = 20\nmessage = 01\n", 8);
    EXPECT_EQ(run(cmd_session, o), kConfigError);
    EXPECT_NE(err_.str().find("storage constraint violated"), std::string::npos) << err_.str();
}

TEST_F(CliTest, SessionMessageValidation) {
    EXPECT_EQ(run(cmd_session, with_config("[session]\nmessage = 01x\n")), kConfigError);
    EXPECT_EQ(run(cmd_session, with_config("[session]\n")), kConfigError);
    EXPECT_EQ(run(cmd_session, with_config("[session]\nmessage = 01\nrandom_message_bits = 4\n")), kConfigError);
    EXPECT_EQ(run(cmd_session, with_config("[session]\neve = sometimes\nmessage = 1\n")), kConfigError);
}

struct CommaDecimal : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};

TEST_F(CliTest, CsvIsLocaleIndependent) {
    const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
    Options o = with_config("[perf]\nlt_start_km = 1.5\nlt_stop_km = 1.5\np_values = 0.03\n", std::nullopt);
    o.out_path = (dir_ / "perf.csv").string();
    const int perf = run(cmd_perf, o);
    Options s = with_config("[source]\nvis_0deg = 1\nvis_45deg = 1\n[session]\natten_db_per_km = 0\neta_bsm = 1\n"
                            "random_message_bits = 8\n", 10);
    const int session = run(cmd_session, s);
    const std::string report = out_.str();
    std::locale::global(previous);
    ASSERT_EQ(perf, kOk);
    ASSERT_EQ(session, kOk) << err_.str();
    EXPECT_NE(read(*o.out_path).find("\n1.5,0.03,1000,"), std::string::npos);
    EXPECT_NE(report.find("security_time_s = 0.000"), std::string::npos) << report;
    EXPECT_EQ(report.find(','), std::string::npos) << report;
}

TEST_F(CliTest, CsvUsesBareLineFeeds) {
    Options o = with_config("[source]\ncar = 1e3\n", 9);
    o.out_path = (dir_ / "bell.csv").string();
    ASSERT_EQ(run(cmd_belltest, o), kOk);
    const std::string csv = read(*o.out_path);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

} // namespace
} // namespace qsdc::cli
