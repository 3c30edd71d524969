// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "json.hpp"
#include "qrff/config.hpp"
#include "qrff/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "qrffsim");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = qrffsim::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

void write_text(const fs::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    out << s;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir = fs::temp_directory_path() / (std::string("qrffsim_") + info->name());
        fs::remove_all(dir);
        fs::create_directories(dir);
        unsetenv("QRFF_SEED");
        unsetenv("QRFF_OUT");
    }
    void TearDown() override { fs::remove_all(dir); }

    fs::path config(const std::string& name, const json& j) {
        auto p = dir / name;
        write_text(p, j.dump());
        return p;
    }
    std::string sub(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
};

json small_array() {
    return {{"sub_array", "custom"}, {"rows", 4}, {"cols", 5}, {"serializer_ratio", 5}, {"n_bits", 2000}};
}

}  // namespace

TEST_F(Cli, ZeroBitsGiveHeaderOnlyFile) {
    auto cfg = config("c.json", {{"generate", {{"n_bits", 0}}}});
    auto r = invoke({"generate", "--config", cfg.string(), "--out", sub("g")});
    ASSERT_EQ(r.code, qrffsim::kPass) << r.err;
    auto bits = dir / "g" / "bits.qrfb";
    EXPECT_EQ(fs::file_size(bits), qrff::io::kHeaderSize);
    auto f = qrff::io::read_bit_file(bits);
    EXPECT_EQ(f.bits.size(), 0u);
    ASSERT_TRUE(f.header);
    EXPECT_EQ(f.header->n_bits, 0u);
}

TEST_F(Cli, SameConfigAndSeedGiveIdenticalBytes) {
    auto cfg = config("c.json", {{"generate", {{"n_bits", 50000}}}});
    ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--seed", "9", "--out", sub("a")}).code, 0);
    ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--seed", "9", "--out", sub("b"), "--threads", "4"}).code,
              0);
    ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--seed", "10", "--out", sub("c")}).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "bits.qrfb"), slurp(dir / "b" / "bits.qrfb"));
    EXPECT_NE(slurp(dir / "a" / "bits.qrfb"), slurp(dir / "c" / "bits.qrfb"));
    EXPECT_EQ(slurp(dir / "a" / "generate.json"), slurp(dir / "b" / "generate.json"));
}

TEST_F(Cli, ArrayOutputsDoNotDependOnThreadCount) {
    auto cfg = config("c.json", {{"array", small_array()}});
    auto one = invoke({"array", "--config", cfg.string(), "--out", sub("t1"), "--threads", "1"});
    auto three = invoke({"array", "--config", cfg.string(), "--out", sub("t3"), "--threads", "3"});
    ASSERT_EQ(one.code, 0) << one.err;
    ASSERT_EQ(three.code, 0) << three.err;
    for (const char* f : {"map_bias.csv", "map_a1.csv", "map_count_rate.csv", "map_dcr.csv", "array.json"}) {
        ASSERT_TRUE(fs::exists(dir / "t1" / f)) << f;
        EXPECT_EQ(slurp(dir / "t1" / f), slurp(dir / "t3" / f)) << f;
    }
    EXPECT_TRUE(fs::exists(dir / "t1" / "map_bias.svg"));
    EXPECT_EQ(read_json(dir / "t1" / "array.json")["pixels"], 20);
}

TEST_F(Cli, AllZerosAnalyze) {
    write_text(dir / "zeros.txt", std::string(4096, '0'));
    auto r = invoke({"analyze", sub("zeros.txt"), "--out", sub("a")});
    EXPECT_EQ(r.code, qrffsim::kStatFail);
    auto a = read_json(dir / "a" / "analyze.json")["analysis"];
    EXPECT_DOUBLE_EQ(a["bias"]["b_hat"].get<double>(), -0.5);
    EXPECT_DOUBLE_EQ(a["entropy"].get<double>(), 0.0);
    EXPECT_FALSE(a["compliance"]["pass"].get<bool>());
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST_F(Cli, AsciiAndPackedGiveTheSameReport) {
    ASSERT_EQ(invoke({"generate", "--seed", "4", "--out", sub("p")}).code, 0);
    ASSERT_EQ(invoke({"generate", "--seed", "4", "--out", sub("t"), "--format", "ascii"}).code, 0);
    auto rp = invoke({"analyze", sub("p/bits.qrfb"), "--out", sub("ap")});
    auto rt = invoke({"analyze", sub("t/bits.txt"), "--out", sub("at")});
    ASSERT_NE(rp.code, qrffsim::kUsage) << rp.err;
    EXPECT_EQ(rp.code, rt.code);
    EXPECT_EQ(rp.out, rt.out);
    EXPECT_EQ(read_json(dir / "ap" / "analyze.json")["analysis"], read_json(dir / "at" / "analyze.json")["analysis"]);
}

TEST_F(Cli, GenerateThenAnalyzeRoundTrip) {
    ASSERT_EQ(invoke({"generate", "--seed", "12", "--lambda-d", "80e6", "--out", sub("g")}).code, 0);
    invoke({"analyze", sub("g/bits.qrfb"), "--out", sub("g")});
    auto gen = read_json(dir / "g" / "generate.json");
    auto ana = read_json(dir / "g" / "analyze.json");
    EXPECT_EQ(gen["analysis"], ana["analysis"]);
    EXPECT_EQ(gen["digest"], ana["config_digest"]);
    EXPECT_EQ(gen["config"]["experiment"], "generate");
}

TEST_F(Cli, FlagBeatsEnvironmentBeatsConfig) {
    auto cfg = config("c.json", {{"seed", 3}, {"generate", {{"n_bits", 1000}}}});
    ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--out", sub("cfg")}).code, 0);
    setenv("QRFF_SEED", "5", 1);
    setenv("QRFF_OUT", sub("env").c_str(), 1);
    ASSERT_EQ(invoke({"generate", "--config", cfg.string()}).code, 0);
    ASSERT_EQ(invoke({"generate", "--config", cfg.string(), "--seed", "6", "--out", sub("flag")}).code, 0);
    unsetenv("QRFF_SEED");
    unsetenv("QRFF_OUT");
    EXPECT_EQ(read_json(dir / "cfg" / "generate.json")["config"]["seed"], 3);
    EXPECT_EQ(read_json(dir / "env" / "generate.json")["config"]["seed"], 5);
    EXPECT_EQ(read_json(dir / "flag" / "generate.json")["config"]["seed"], 6);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(invoke({}).code, qrffsim::kUsage);
    EXPECT_EQ(invoke({"nonsense"}).code, qrffsim::kUsage);
    EXPECT_EQ(invoke({"generate", "--help"}).code, qrffsim::kPass);
    EXPECT_EQ(invoke({"generate", "--seed", "minus one"}).code, qrffsim::kUsage);
    EXPECT_EQ(invoke({"generate", "--format", "hex"}).code, qrffsim::kUsage);
    EXPECT_EQ(invoke({"analyze", sub("missing.qrfb")}).code, qrffsim::kUsage);

    write_text(dir / "bad.qrfb", "QRFB\x02");
    auto r = invoke({"analyze", sub("bad.qrfb")});
    EXPECT_EQ(r.code, qrffsim::kUsage);
    EXPECT_NE(r.err.find("header"), std::string::npos) << r.err;

    auto unknown = config("u.json", {{"generate", {{"n_bitz", 5}}}});
    r = invoke({"generate", "--config", unknown.string(), "--out", sub("u")});
    EXPECT_EQ(r.code, qrffsim::kUsage);
    EXPECT_NE(r.err.find("generate.n_bitz"), std::string::npos) << r.err;

    auto other = config("o.json", {{"experiment", "sweep"}});
    EXPECT_EQ(invoke({"generate", "--config", other.string(), "--out", sub("o")}).code, qrffsim::kUsage);
}

TEST_F(Cli, EmptySweepIsAValidationError) {
    auto cfg = config("s.json", {{"sweep", {{"parameter", "eta_global"}, {"values", json::array()}}}});
    auto r = invoke({"sweep", "--config", cfg.string(), "--out", sub("s")});
    EXPECT_EQ(r.code, qrffsim::kUsage);
    EXPECT_NE(r.err.find("values"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(dir / "s" / "sweep.csv"));
}

TEST_F(Cli, SweepWritesTableAndPlots) {
    auto cfg = config("s.json", {{"array", small_array()},
                                 {"sweep", {{"parameter", "eta_global"}, {"values", {0.45, 0.5, 0.55}}, {"n_bits", 2000}}}});
    auto r = invoke({"sweep", "--config", cfg.string(), "--out", sub("s")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto csv = slurp(dir / "s" / "sweep.csv");
    EXPECT_EQ(csv.rfind("parameter,value,mean_bias", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(slurp(dir / "s" / "sweep_bias.svg").rfind("<svg", 0), 0u);
    EXPECT_TRUE(fs::exists(dir / "s" / "sweep_a1.svg"));
}

TEST_F(Cli, CalibrateWritesTrace) {
    auto cfg = config("c.json", {{"calibrate", {{"n_bits", 200000}}},
                                 {"qrff", {{"lambda_d", 80e6}, {"t_r", 2e-9}, {"t_f", 2e-9}, {"eta", 0.3}}}});
    auto r = invoke({"calibrate", "--config", cfg.string(), "--out", sub("c")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = read_json(dir / "c" / "calibrate.json");
    EXPECT_NEAR(j["eta_hat"].get<double>(), 0.5, 0.05);
    EXPECT_GE(j["trace"].size(), 3u);
    auto csv = slurp(dir / "c" / "calibrate_trace.csv");
    EXPECT_EQ(csv.rfind("step,eta,bias\n", 0), 0u);
}

TEST_F(Cli, BiasedBatteryFailsFrequency) {
    std::mt19937_64 rng(7);
    std::bernoulli_distribution coin(0.55);
    std::string text;
    for (int i = 0; i < 1'000'000; ++i) text.push_back(coin(rng) ? '1' : '0');
    write_text(dir / "biased.txt", text);
    auto r = invoke({"battery", sub("biased.txt"), "--strings", "1000", "--length", "1000", "--out", sub("b")});
    EXPECT_EQ(r.code, qrffsim::kStatFail) << r.err;
    auto j = read_json(dir / "b" / "battery.json");
    bool saw_frequency = false;
    for (const auto& t : j["tests"]) {
        EXPECT_EQ(t["min_pass_rate"], 996) << t["name"];
        if (t["name"] == "frequency") {
            saw_frequency = true;
            EXPECT_EQ(t["verdict"], "fail");
        }
    }
    EXPECT_TRUE(saw_frequency);
    EXPECT_NE(r.out.find("996"), std::string::npos);
    EXPECT_EQ(slurp(dir / "b" / "battery.txt"), r.out);
}

TEST_F(Cli, BatteryNeedsEnoughBits) {
    write_text(dir / "short.txt", std::string(500, '1'));
    auto r = invoke({"battery", sub("short.txt"), "--strings", "10", "--length", "100", "--out", sub("b")});
    EXPECT_EQ(r.code, qrffsim::kUsage);
    EXPECT_NE(r.err.find("fewer bits"), std::string::npos) << r.err;
}

TEST(Configs, ShippedExamplesParse) {
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(QRFF_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        EXPECT_NO_THROW(qrff::config::load(e.path())) << e.path();
        ++n;
    }
    EXPECT_GE(n, 6u);
}
