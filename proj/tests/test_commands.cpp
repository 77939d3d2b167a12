// Batch commands run in-process: files, exit codes and byte stability.

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ymflow/commands.hpp"

using namespace ymflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ymflow_test_commands" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig short_soliton() {
    RunConfig c;
    c.initial = "soliton";
    c.grid_points = 200;
    c.t_end = 0.5;
    c.record_every = 50;
    return c;
}

}  // namespace

TEST(SolitonCommand, WritesTableAndConstants) {
    const auto dir = scratch("soliton6");
    std::ostringstream log;
    cli::SolitonOptions opt;
    opt.n = 6;
    ASSERT_EQ(cli::cmd_soliton(opt, dir, log), cli::kExitOk);
    const auto j = cli::read_json(dir / "soliton.json");
    EXPECT_NEAR(j["a"].get<double>(), 0.7071067812, 1e-10);
    EXPECT_NEAR(j["b"].get<double>(), 0.6862915010, 1e-10);
    EXPECT_LE(j["max_residual"].get<double>(), 1e-8);
    const auto t = io::read_csv(dir / "soliton.csv");
    EXPECT_EQ(t.rows.size(), 3000u);
    EXPECT_EQ(t.rows.front()[0], 0.01);
    EXPECT_EQ(t.rows.back()[0], 30.0);
}

TEST(SolitonCommand, RejectsDimension) {
    std::ostringstream log;
    cli::SolitonOptions opt;
    opt.n = 10;
    EXPECT_EQ(cli::cmd_soliton(opt, scratch("soliton10"), log), cli::kExitInvalidConfig);
    const std::string text = log.str();
    EXPECT_NE(text.find("b_n <= 0"), std::string::npos);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
}

TEST(SimulateCommand, SolitonRunOutputs) {
    const auto dir = scratch("sim");
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_simulate(short_soliton(), dir, log), cli::kExitOk) << log.str();
    const auto rec = io::read_csv(dir / "records.csv");
    EXPECT_EQ(rec.header, (std::vector<std::string>{"t", "dt", "sup_F", "sup_h", "energy", "Z", "W"}));
    const std::size_t ce = rec.column("energy");
    for (std::size_t k = 1; k < rec.rows.size(); ++k) EXPECT_LE(rec.rows[k][ce], rec.rows[k - 1][ce]);
    EXPECT_TRUE(fs::exists(dir / "snapshots" / "snap_0.csv"));
    EXPECT_TRUE(fs::exists(dir / "snapshots" / "index.csv"));
    const auto s = cli::read_json(dir / "summary.json");
    EXPECT_EQ(s["terminal_reason"], "horizon");
    EXPECT_EQ(s["config"]["initial"], "soliton");
    EXPECT_GT(s["initial_energy"].get<double>(), s["final_energy"].get<double>());
}

TEST(SimulateCommand, ByteStable) {
    const auto a = scratch("stable_a"), b = scratch("stable_b");
    std::ostringstream log;
    auto c = short_soliton();
    c.t_end = 0.1;
    ASSERT_EQ(cli::cmd_simulate(c, a, log), cli::kExitOk);
    ASSERT_EQ(cli::cmd_simulate(c, b, log), cli::kExitOk);
    EXPECT_EQ(slurp(a / "records.csv"), slurp(b / "records.csv"));
    EXPECT_EQ(slurp(a / "snapshots" / "snap_1.csv"), slurp(b / "snapshots" / "snap_1.csv"));
}

TEST(SimulateCommand, InvalidConfigExitCode) {
    auto c = short_soliton();
    c.cfl = 0.0;
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_simulate(c, scratch("bad"), log), cli::kExitInvalidConfig);
    c = short_soliton();
    c.n = 10;
    EXPECT_EQ(cli::cmd_simulate(c, scratch("bad10"), log), cli::kExitInvalidConfig);
}

TEST(SimulateCommand, NumericalFailureExitCode) {
    // A tabulated profile whose cubic reaction term overflows on the first step.
    const auto dir = scratch("nan");
    fs::create_directories(dir);
    {
        io::CsvWriter table(dir / "table.csv", {"r", "h"});
        table.row({0.0, 0.0});
        table.row({1.0, 0.0});
        table.row({2.0, 1e120});
        table.row({8.0, 1e120});
    }
    RunConfig c;
    c.initial = "table";
    c.initial_table = (dir / "table.csv").string();
    c.grid_points = 100;
    c.min_dt = 1e-300;
    c.t_end = 0.5;
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_simulate(c, dir / "out", log), cli::kExitNumericalFailure) << log.str();
    EXPECT_NE(log.str().find("numerical failure"), std::string::npos) << log.str();
    EXPECT_EQ(cli::read_json(dir / "out" / "summary.json")["terminal_reason"], "numerical_failure");
}

TEST(SimulateCommand, MissingTableIsInvalid) {
    RunConfig c;
    c.initial = "table";
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_simulate(c, scratch("notable"), log), cli::kExitInvalidConfig);
    c.initial_table = (scratch("notable") / "absent.csv").string();
    EXPECT_EQ(cli::cmd_simulate(c, scratch("notable"), log), cli::kExitInvalidConfig);
}

TEST(BlowupCommand, SolitonRunRecoversSoliton) {
    const auto dir = scratch("blow");
    RunConfig c;
    c.initial = "soliton";
    c.grid_points = 800;
    c.t_end = 0.999999;
    c.blowup_factor = 1e3;
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_simulate(c, dir, log), cli::kExitOk) << log.str();
    ASSERT_EQ(cli::cmd_blowup(dir, {}, dir, log), cli::kExitOk) << log.str();
    const auto j = cli::read_json(dir / "blowup.json");
    EXPECT_NEAR(j["T_hat"].get<double>(), 1.0, 0.02);
    const auto rescale = io::read_csv(dir / "rescale.csv");
    ASSERT_EQ(rescale.rows.size(), 5u);
    for (const auto& row : rescale.rows) EXPECT_LE(row[rescale.column("distance_sup")], 5e-3);
    const auto prof = io::read_csv(dir / "rescaled" / "0.csv");
    EXPECT_EQ(prof.header, (std::vector<std::string>{"rho", "h", "phi", "h_minus_phi"}));
}

TEST(BlowupCommand, RequiredBlowupAbsent) {
    const auto dir = scratch("flat");
    RunConfig c;
    c.initial = "flat";
    c.grid_points = 100;
    c.t_end = 0.01;
    std::ostringstream log;
    ASSERT_EQ(cli::cmd_simulate(c, dir, log), cli::kExitOk);
    EXPECT_EQ(cli::cmd_blowup(dir, {}, dir, log), cli::kExitOk);
    cli::BlowupOptions opt;
    opt.require_blowup = true;
    EXPECT_EQ(cli::cmd_blowup(dir, opt, dir, log), cli::kExitNoBlowup);
    EXPECT_FALSE(cli::read_json(dir / "blowup.json")["blowup_detected"].get<bool>());
}

TEST(BlowupCommand, MalformedRunDirectory) {
    std::ostringstream log;
    EXPECT_EQ(cli::cmd_blowup(scratch("missing"), {}, scratch("missing_out"), log), cli::kExitInvalidConfig);
}

TEST(VerifyCommand, PassAndInjectedFault) {
    std::ostringstream log;
    const auto ok = scratch("verify5");
    EXPECT_EQ(cli::cmd_verify({5, oracle::Fault::none}, ok, log), cli::kExitOk) << log.str();
    const auto j = cli::read_json(ok / "verify.json");
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["kernel_mass"].size(), 8u);
    EXPECT_EQ(cli::cmd_verify({5, oracle::Fault::c1}, scratch("verify_fault"), log), cli::kExitVerifyFailed);
    EXPECT_EQ(cli::cmd_verify({4, oracle::Fault::none}, scratch("verify4"), log), cli::kExitInvalidConfig);
}

TEST(Jobs, ParallelRunsMatchSerial) {
    std::vector<cli::SimulateJob> jobs;
    for (int k = 0; k < 3; ++k) {
        auto c = short_soliton();
        c.t_end = 0.05 * (k + 1);
        jobs.push_back({c, scratch("job" + std::to_string(k))});
    }
    std::ostringstream log;
    ASSERT_EQ(cli::run_simulate_jobs(jobs, 3, log), cli::kExitOk);
    const auto serial = scratch("job_serial");
    ASSERT_EQ(cli::cmd_simulate(jobs[2].config, serial, log), cli::kExitOk);
    EXPECT_EQ(slurp(jobs[2].out_dir / "records.csv"), slurp(serial / "records.csv"));
    auto bad = jobs;
    bad[1].config.cfl = 0.0;
    EXPECT_EQ(cli::run_simulate_jobs(bad, 2, log), cli::kExitInvalidConfig);
}
