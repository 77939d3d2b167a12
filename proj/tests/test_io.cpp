// Number formatting, CSV round trips and the key = value configuration.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "ymflow/io.hpp"
#include "ymflow/run_config.hpp"

using namespace ymflow;
namespace fs = std::filesystem;

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(io::format_number(0.1), "0.1");
    EXPECT_EQ(io::format_number(1.0), "1");
    EXPECT_EQ(io::format_number(-2.5e-300), "-2.5e-300");
    EXPECT_EQ(io::format_number(std::nan("")), "nan");
    EXPECT_EQ(io::format_number(-std::numeric_limits<double>::infinity()), "-inf");
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double v = u(rng) * std::pow(10.0, k % 40 - 20);
        EXPECT_EQ(io::parse_number(io::format_number(v)), v);
    }
}

TEST(Format, ParseErrors) {
    EXPECT_THROW(io::parse_number("1.5x"), InvalidConfig);
    EXPECT_THROW(io::parse_number(""), InvalidConfig);
    EXPECT_THROW(io::parse_integer("3.5"), InvalidConfig);
    EXPECT_EQ(io::parse_integer(" 42 "), 42);
    EXPECT_TRUE(std::isnan(io::parse_number("nan")));
    EXPECT_EQ(io::parse_number_list("0, 1.5,2"), (std::vector<double>{0.0, 1.5, 2.0}));
}

TEST(Csv, RoundTrip) {
    const fs::path dir = fs::temp_directory_path() / "ymflow_test_io";
    fs::create_directories(dir);
    {
        io::CsvWriter w(dir / "t.csv", {"a", "b"});
        w.row({1.0 / 3.0, std::nan("")});
        w.row({-0.0, 1e300});
    }
    const auto t = io::read_csv(dir / "t.csv");
    ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0][0], 1.0 / 3.0);
    EXPECT_TRUE(std::isnan(t.rows[0][1]));
    EXPECT_EQ(t.rows[1][1], 1e300);
    EXPECT_EQ(t.column("b"), 1u);
    EXPECT_THROW(t.column("c"), InvalidConfig);
    EXPECT_THROW(io::read_csv(dir / "missing.csv"), InvalidConfig);
    fs::remove_all(dir);
}

TEST(KeyValue, ParsesCommentsAndWhitespace) {
    std::istringstream in("# header\n n = 7 \ncfl=0.1  # inline\n\ninitial = soliton\n");
    const auto kv = io::parse_key_values(in);
    EXPECT_EQ(kv.at("n"), "7");
    EXPECT_EQ(kv.at("cfl"), "0.1");
    EXPECT_EQ(kv.at("initial"), "soliton");
    std::istringstream bad("n 7\n");
    EXPECT_THROW(io::parse_key_values(bad), InvalidConfig);
}

TEST(RunConfig, ApplyAndValidate) {
    RunConfig c;
    apply_setting(c, "n", "6");
    apply_setting(c, "initial", "soliton");
    apply_setting(c, "t_end", "0.5");
    apply_setting(c, "kernel", "fixed");
    apply_setting(c, "scan_offsets", "0,0.5,1");
    apply_setting(c, "blowup_stop", "1e4");
    EXPECT_NO_THROW(validate_run_config(c));
    const auto f = to_flow_config(c);
    EXPECT_EQ(f.n, 6);
    ASSERT_TRUE(f.kernel.has_value());
    EXPECT_EQ(f.kernel->T, 1.0);
    EXPECT_TRUE(std::holds_alternative<SolitonData>(f.initial));
    EXPECT_EQ(*f.blowup_stop, 1e4);

    EXPECT_THROW(apply_setting(c, "mesh", "3"), InvalidConfig);
    EXPECT_THROW(apply_setting(c, "kernel", "gaussian"), InvalidConfig);
    EXPECT_THROW(apply_setting(c, "emit_records", "maybe"), InvalidConfig);
    EXPECT_THROW(apply_setting(c, "grid_points", "-3"), InvalidConfig);
    apply_setting(c, "cfl", "0");
    EXPECT_THROW(validate_run_config(c), InvalidConfig);
}

TEST(RunConfig, JsonRoundTrip) {
    RunConfig c;
    apply_setting(c, "initial", "bump");
    apply_setting(c, "bump_s", "0.7");
    apply_setting(c, "kernel", "from_fit");
    apply_setting(c, "origin_kappa", "25");
    apply_setting(c, "scan_offsets", "0,2");
    apply_setting(c, "emit_scan", "false");
    const auto j = to_json(c);
    const RunConfig back = from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.bump_s, 0.7);
    EXPECT_EQ(*back.origin_kappa, 25.0);
    EXPECT_FALSE(back.emit_scan);
    for (const auto& key : run_config_keys()) EXPECT_TRUE(j.contains(key)) << key;
}
