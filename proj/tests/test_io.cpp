#include "cogarch/error.hpp"
#include "cogarch/io.hpp"
#include "cogarch/mc.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

using namespace cogarch;
namespace fs = std::filesystem;

namespace {

pml::ReturnsSeries ingest_text(const std::string& text, io::SeriesMode mode = io::SeriesMode::Prices) {
    std::istringstream in(text);
    return io::ingest(in, mode);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Scratch directory per test, removed afterwards.
class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("cogarch_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args) const {
        const std::string cmd = "cd '" + dir_.string() + "' && '" + COGARCH_CLI_PATH + "' " + args +
                                " > stdout.txt 2> stderr.txt";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    [[nodiscard]] fs::path path(const std::string& name) const { return dir_ / name; }

    fs::path dir_;
};

}  // namespace

TEST(Ingest, EqualPricesGiveZeroReturns) {
    const pml::ReturnsSeries s = ingest_text("time,value\n0,100\n1,100\n2,100\n3,100\n");
    ASSERT_EQ(s.size(), 3u);
    for (double y : s.returns) EXPECT_EQ(y, 0.0);
}

TEST(Ingest, PriceLevelAndReturnModes) {
    const std::string text = "# comment\ntime,value\n10,100\n11,110\n13,99\n14,99.5\n";
    const pml::ReturnsSeries p = ingest_text(text, io::SeriesMode::Prices);
    EXPECT_EQ(p.times, (std::vector<double>{0, 1, 3, 4}));
    EXPECT_DOUBLE_EQ(p.returns[0], std::log(110.0) - std::log(100.0));
    const pml::ReturnsSeries l = ingest_text(text, io::SeriesMode::Levels);
    EXPECT_DOUBLE_EQ(l.returns[1], 99.0 - 110.0);
    const pml::ReturnsSeries r = ingest_text(text, io::SeriesMode::Returns);
    EXPECT_EQ(r.returns, (std::vector<double>{110.0, 99.0, 99.5}));
    EXPECT_THROW(io::parse_series_mode("bogus"), ValidationError);
}

TEST(Ingest, DuplicateTimestampNamesLine) {
    try {
        ingest_text("time,value\n0,100\n1,101\n1,102\n2,103\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(Ingest, Rejections) {
    EXPECT_THROW(ingest_text("time,value\n0,100\n1,101\n2,102\n"), ValidationError);
    EXPECT_THROW(ingest_text("time,value\n0,100\n1,nan\n2,102\n3,1\n"), ValidationError);
    EXPECT_THROW(ingest_text("time,value\n0,100\n1,abc\n2,102\n3,1\n"), ValidationError);
    EXPECT_THROW(ingest_text("time,value\n0,100\n1,-5\n2,102\n3,1\n"), ValidationError);
    EXPECT_THROW(ingest_text("date,value\n0,100\n1,5\n2,102\n3,1\n"), ValidationError);
    try {
        ingest_text("time,value\n0,100\n1,101\n2,oops\n3,1\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    }
}

TEST(FrequencyTable, Examples) {
    pml::ReturnsSeries even{{0, 2, 4, 6, 8}, {0.1, 0.2, 0.3, 0.4}};
    EXPECT_EQ(io::frequency_table(even), (mc::FrequencyTable{{2.0, 4}}));
    pml::ReturnsSeries two{{0, 1, 4, 5, 6, 9}, {1, 1, 1, 1, 1}};
    EXPECT_EQ(io::frequency_table(two), (mc::FrequencyTable{{1.0, 3}, {3.0, 2}}));
}

TEST(FrequencyTable, SyntheticAsxFile) {
    const Grid grid = mc::GridTemplate::frequency(mc::asx_frequency_table()).grid(1, 0);
    std::ostringstream out;
    out << "time,value\n";
    for (std::size_t i = 0; i < grid.times().size(); ++i) out << io::format_double(grid.time(i)) << ",100\n";
    std::istringstream in(out.str());
    const pml::ReturnsSeries s = io::ingest(in, io::SeriesMode::Prices);
    EXPECT_EQ(io::frequency_table(s), (mc::FrequencyTable{{1, 1991}, {2, 13}, {3, 483}, {4, 24}, {5, 17}, {6, 1}}));
}

TEST(Serialization, SeventeenDigitRoundTrip) {
    mc::StudyDesign d;
    d.truth = CogarchParams{1.0, 0.06, 0.0425};
    d.grid = mc::GridTemplate::equally_spaced(500, 1.0);
    const pml::ReturnsSeries s = mc::simulate_returns(d, 0);
    std::ostringstream out;
    out << "time,value\n0,0\n";
    double level = 0.0;
    std::vector<double> levels{0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        level += s.returns[i];
        levels.push_back(level);
        out << io::format_double(s.times[i + 1]) << ',' << io::format_double(level) << '\n';
    }
    std::istringstream in(out.str());
    const pml::ReturnsSeries back = io::ingest(in, io::SeriesMode::Levels);
    const pml::ReturnsSeries direct = pml::ReturnsSeries::from_levels(s.times, levels);
    EXPECT_EQ(back.times, direct.times);
    EXPECT_EQ(back.returns, direct.returns);
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 57.142857142857146}) {
        EXPECT_EQ(std::stod(io::format_double(x)), x);
    }
}

TEST(Config, KeyValuesAndHash) {
    std::istringstream in("# header\nseed = 7\n driver=compound-poisson \n\nrate = 2\n");
    const io::KeyValues kv = io::parse_key_values(in);
    EXPECT_EQ(kv.at("seed"), "7");
    EXPECT_EQ(kv.at("driver"), "compound-poisson");
    std::istringstream again(io::write_key_values(kv));
    EXPECT_EQ(io::parse_key_values(again), kv);
    const std::string h = io::config_hash("seed=1\nrate=2\n");
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(h, io::config_hash("seed=1\nrate=2\n"));
    EXPECT_NE(h, io::config_hash("seed=2\nrate=2\n"));
    // FNV-1a 64 of the empty string is the offset basis.
    EXPECT_EQ(io::config_hash(""), "cbf29ce484222325");
    const levy::LevySpec spec = levy::LevySpec::jump_diffusion(0.5, 2.0, levy::JumpDist::two_point(1.0));
    const levy::LevySpec back = io::levy_spec_from(io::to_key_values(spec));
    EXPECT_EQ(back.diffusion_scale(), spec.diffusion_scale());
    EXPECT_EQ(back.rate(), spec.rate());
}

TEST_F(CliTest, ExitCodes) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("fit"), 1);
    EXPECT_EQ(run("simulate --beta 1 --eta 0.04 --phi 0.05"), 1);
    std::ofstream(path("dup.csv")) << "time,value\n0,1\n1,2\n1,3\n2,4\n";
    EXPECT_EQ(run("fit --input dup.csv"), 1);
    EXPECT_NE(read_file(path("stderr.txt")).find("line 4"), std::string::npos);
    // Four observations cannot pin the parameters: every replication hits the floor.
    EXPECT_EQ(run("mc-study --design custom --cells 4 --replications 1 --restarts 1"), 2);
}

TEST_F(CliTest, SimulateIsReproducibleAndStamped) {
    ASSERT_EQ(run("--seed 5 simulate --horizon 50 --cells 50 --out a.csv"), 0);
    ASSERT_EQ(run("simulate --horizon 50 --cells 50 --out b.csv --seed 5"), 0);
    ASSERT_EQ(run("--seed 6 simulate --horizon 50 --cells 50 --out c.csv"), 0);
    const std::string a = read_file(path("a.csv"));
    EXPECT_EQ(a, read_file(path("b.csv")));
    EXPECT_NE(a, read_file(path("c.csv")));
    EXPECT_EQ(a.rfind("# command=simulate seed=5 config_hash=", 0), 0u);
    EXPECT_NE(a.find("time,G,sigma2,flavor"), std::string::npos);
}

TEST_F(CliTest, ConvergeOneLevelIsMonotone) {
    ASSERT_EQ(run("converge --horizon 20 --ladder 1 --seeds 3 --out-json c.json"), 0);
    const auto j = nlohmann::json::parse(read_file(path("c.json")));
    EXPECT_TRUE(j.at("monotone").get<bool>());
    EXPECT_EQ(j.at("levels").size(), 1u);
}

TEST_F(CliTest, FitReportsLongRunVolatility) {
    ASSERT_EQ(run("generate-asx --out asx.csv"), 0);
    ASSERT_EQ(run("fit --input asx.csv --restarts 3 --out-json fit.json --out-filtered f.csv --out-transform t.txt"), 0);
    const auto j = nlohmann::json::parse(read_file(path("fit.json")));
    const double beta = j["estimates"]["beta"], eta = j["estimates"]["eta"], phi = j["estimates"]["phi"];
    const double lr = j["long_run_volatility"];
    EXPECT_NEAR(lr, std::sqrt(365.0 * beta / (eta - phi)), 1e-15);
    // Simulated from estimates whose long-run volatility is 18.6% p.a.
    EXPECT_GT(lr, 0.10);
    EXPECT_LT(lr, 0.35);
    EXPECT_NE(read_file(path("t.txt")).find("long-run volatility"), std::string::npos);
    EXPECT_NE(read_file(path("f.csv")).find("t,sigma2_hat,annualized_vol"), std::string::npos);

    const std::string first = read_file(path("fit.json"));
    ASSERT_EQ(run("fit --input asx.csv --restarts 3 --out-json fit.json"), 0);
    EXPECT_EQ(read_file(path("fit.json")), first);
}

TEST_F(CliTest, StudySinglePassthrough) {
    ASSERT_EQ(run("mc-study --design custom --cells 5000 --replications 1 --restarts 3 --out-json s.json --out-csv s.csv"),
              0);
    const auto j = nlohmann::json::parse(read_file(path("s.json")));
    const auto& beta = j["params"]["beta"];
    const std::string csv = read_file(path("s.csv"));
    EXPECT_DOUBLE_EQ(beta["mean"].get<double>() - 1.0, beta["bias"].get<double>());
    EXPECT_DOUBLE_EQ(std::abs(beta["bias"].get<double>()), beta["rmse"].get<double>());
    EXPECT_NE(csv.find("replication,beta,phi,eta"), std::string::npos);
}
