// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "qrff/config.hpp"
#include "qrff/io.hpp"
#include "support.hpp"

using namespace qrff;
using nlohmann::json;
using qrff::testing::error_code;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "qrff_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

BitStream random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    BitStream b(n);
    for (std::size_t i = 0; i < n; ++i) b.set(i, gen() & 1);
    b.f_bg = 25e6;
    return b;
}

std::vector<std::uint8_t> file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& data) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

std::string config_error(const json& doc) {
    try {
        config::parse(doc);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::Config);
        return e.what();
    }
    return "";
}

}  // namespace

TEST(BitFile, PackedRoundTrip) {
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 64u, 1000u}) {
        auto bits = random_bits(n, n);
        auto path = temp_path("rt.qrfb");
        io::write_bit_file(path, bits, io::BitFormat::Packed, 0x1234);
        EXPECT_EQ(std::filesystem::file_size(path), io::kHeaderSize + (n + 7) / 8);
        auto file = io::read_bit_file(path);
        EXPECT_EQ(file.format, io::BitFormat::Packed);
        EXPECT_EQ(file.bits, bits);
        ASSERT_TRUE(file.header);
        EXPECT_EQ(file.header->n_bits, n);
        EXPECT_EQ(file.header->f_bg, 25e6);
        EXPECT_EQ(file.header->config_digest, 0x1234u);
    }
}

TEST(BitFile, HeaderLayoutAndLsbFirstPayload) {
    auto bits = BitStream::from_string("100000001");
    bits.f_bg = 1.0;
    auto path = temp_path("layout.qrfb");
    io::write_bit_file(path, bits, io::BitFormat::Packed, 0x0102030405060708ull);
    auto data = file_bytes(path);
    ASSERT_EQ(data.size(), 34u);
    EXPECT_EQ(std::string(data.begin(), data.begin() + 4), "QRFB");
    EXPECT_EQ(data[4], 1);
    EXPECT_EQ(data[5], 0);
    EXPECT_EQ(data[8], 9);
    EXPECT_EQ(data[23], 0x3f);  // 1.0 little-endian
    EXPECT_EQ(data[24], 0x08);
    EXPECT_EQ(data[31], 0x01);
    EXPECT_EQ(data[32], 0x01);
    EXPECT_EQ(data[33], 0x01);
}

TEST(BitFile, AsciiMatchesPacked) {
    auto bits = random_bits(777, 3);
    auto a = temp_path("bits.txt");
    auto p = temp_path("bits.qrfb");
    io::write_bit_file(a, bits, io::BitFormat::Ascii);
    io::write_bit_file(p, bits, io::BitFormat::Packed);
    auto fa = io::read_bit_file(a);
    EXPECT_EQ(fa.format, io::BitFormat::Ascii);
    EXPECT_FALSE(fa.header);
    EXPECT_EQ(fa.bits, io::read_bit_file(p).bits);
}

TEST(BitFile, Errors) {
    auto path = temp_path("bad.qrfb");
    io::write_bit_file(path, random_bits(100, 1), io::BitFormat::Packed);
    auto good = file_bytes(path);

    auto truncated = good;
    truncated.pop_back();
    write_bytes(path, truncated);
    EXPECT_EQ(error_code([&] { io::read_bit_file(path); }), Errc::TruncatedPayload);

    auto longer = good;
    longer.push_back(0);
    write_bytes(path, longer);
    EXPECT_EQ(error_code([&] { io::read_bit_file(path); }), Errc::TruncatedPayload);

    auto version = good;
    version[4] = 2;
    write_bytes(path, version);
    EXPECT_EQ(error_code([&] { io::read_bit_file(path); }), Errc::MalformedHeader);

    write_bytes(path, std::vector<std::uint8_t>(good.begin(), good.begin() + 20));
    EXPECT_EQ(error_code([&] { io::read_bit_file(path); }), Errc::MalformedHeader);

    write_bytes(path, {'0', '1', 'x'});
    EXPECT_EQ(error_code([&] { io::read_bit_file(path); }), Errc::MalformedHeader);

    EXPECT_EQ(error_code([] { io::read_bit_file(temp_path("missing.qrfb")); }), Errc::Io);
}

TEST(Fnv1a, KnownValues) {
    EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(io::fnv1a64("foobar"), 0x85944171f73967e8ull);
}

TEST(Config, Defaults) {
    auto c = config::parse(json::object());
    EXPECT_EQ(c.experiment, config::Experiment::Generate);
    EXPECT_EQ(c.seed, 1u);
    EXPECT_NEAR(eventsim::expected_detection_rate(c.qrff.detector), 40e6, 1e-3);
    EXPECT_EQ(c.array.array.n_pixels(), 2240u);
}

TEST(Config, ReadsSections) {
    auto c = config::parse(json::parse(R"({
        "experiment": "sweep", "seed": 9, "threads": 2,
        "output": {"dir": "runs", "format": "ascii"},
        "qrff": {"lambda_d": 8e7, "t_r": 7.25e-10, "t_f": 1.25e-10, "eta": 0.3, "dead_time_hold": 1e-11},
        "generate": {"n_bits": 1e7},
        "array": {"sub_array": "A2", "lambda_d": 4e7, "variation": {"breakdown_sigma": 0.15}},
        "sweep": {"parameter": "v_op", "values": [32.8, 33.3], "n_bits": 1000}
    })"));
    EXPECT_EQ(c.experiment, config::Experiment::Sweep);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.threads, 2u);
    EXPECT_EQ(c.out_dir, "runs");
    EXPECT_EQ(c.format, io::BitFormat::Ascii);
    EXPECT_EQ(c.generate.n_bits, 10'000'000u);
    EXPECT_NEAR(eventsim::expected_detection_rate(c.qrff.detector), 8e7, 1e-3);
    EXPECT_EQ(c.array.array.cols, 8u);
    EXPECT_NEAR(c.array.array.i_led * c.array.array.led_gain / (1 + c.array.array.i_led * c.array.array.led_gain * 1e-9),
                4e7, 1e-3);
    EXPECT_EQ(c.array.variation.breakdown_sigma, 0.15);
    EXPECT_EQ(c.sweep.parameter, arraysim::SweepParam::VOp);
    EXPECT_EQ(c.sweep.values.size(), 2u);
}

TEST(Config, RejectsUnknownKeysWithPath) {
    EXPECT_NE(config_error({{"sed", 1}}).find("sed: unknown key"), std::string::npos);
    EXPECT_NE(config_error({{"qrff", {{"t_rr", 1e-10}}}}).find("qrff.t_rr: unknown key"), std::string::npos);
    EXPECT_NE(config_error({{"array", {{"variation", {{"sigma", 1}}}}}}).find("array.variation.sigma"),
              std::string::npos);
}

TEST(Config, ValidationErrors) {
    EXPECT_NE(config_error({{"qrff", {{"eta", "half"}}}}).find("qrff.eta: expected a number"), std::string::npos);
    EXPECT_NE(config_error({{"qrff", {{"eta", 1.5}}}}).find("qrff"), std::string::npos);
    EXPECT_NE(config_error({{"seed", -1}}).find("seed"), std::string::npos);
    EXPECT_NE(config_error({{"experiment", "fly"}}).find("experiment: unknown value"), std::string::npos);
    EXPECT_NE(config_error({{"qrff", {{"lambda_d", 1e6}, {"photon_rate", 1e6}}}}).find("not both"), std::string::npos);
    EXPECT_NE(config_error({{"experiment", "sweep"}, {"sweep", {{"values", json::array()}}}}).find("empty sweep list"),
              std::string::npos);
    EXPECT_NE(config_error({{"battery", {{"tests", {"frequency", "rank"}}}}}).find("unknown test 'rank'"),
              std::string::npos);
    EXPECT_NE(config_error({{"array", {{"sub_array", "A1"}, {"cols", 8}}}}).find("array"), std::string::npos);
    EXPECT_EQ(error_code([] { config::load(temp_path("nope.json")); }), Errc::Io);
}

TEST(Config, DigestTracksMeaningfulFields) {
    json base = {{"qrff", {{"t_r", 7.25e-10}}}};
    auto d0 = config::digest(config::parse(base));
    json same = base;
    same["output"] = {{"dir", "elsewhere"}, {"format", "ascii"}};
    same["threads"] = 8;
    same["qrff"]["eta"] = 0.5;  // the default, spelled out
    EXPECT_EQ(config::digest(config::parse(same)), d0);
    json other = base;
    other["qrff"]["t_r"] = 7.26e-10;
    EXPECT_NE(config::digest(config::parse(other)), d0);
    json seeded = base;
    seeded["seed"] = 2;
    EXPECT_NE(config::digest(config::parse(seeded)), d0);
    json longer = base;
    longer["generate"] = {{"n_bits", 5}};
    EXPECT_NE(config::digest(config::parse(longer)), d0);
}
