/// @file commands.hpp
/// @brief The soliton / simulate / blowup / verify batch commands. Each
///        returns a process exit code and writes its files under an output
///        directory; diagnostics go to the supplied stream.
#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ymflow/blowup.hpp"
#include "ymflow/bundle_oracle.hpp"
#include "ymflow/errors.hpp"
#include "ymflow/flow.hpp"
#include "ymflow/io.hpp"
#include "ymflow/monotonicity.hpp"
#include "ymflow/radial_core.hpp"
#include "ymflow/run_config.hpp"

namespace ymflow::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

enum ExitCode : int {
    kExitOk = 0,
    kExitInvalidConfig = 2,
    kExitNumericalFailure = 3,
    kExitNoBlowup = 4,
    kExitVerifyFailed = 5,
};

inline void write_json(const fs::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidConfig("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

inline Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(path.string() + ": " + e.what());
    }
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidConfig("cannot create " + dir.string() + ": " + ec.message());
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// ---------------------------------------------------------------------------
// soliton
// ---------------------------------------------------------------------------

struct SolitonOptions {
    int n = 5;
    double rho_min = 0.01;
    double rho_max = 30.0;
    std::size_t samples = 3000;
};

/// Tabulates phi and its ODE residual on `samples` equally spaced rho in
/// [rho_min, rho_max].
inline int cmd_soliton(const SolitonOptions& opt, const fs::path& out_dir, std::ostream& log) {
    SolitonParams params;
    try {
        params = make_soliton_params(opt.n);
        if (!(opt.rho_min > 0.0) || !(opt.rho_max > opt.rho_min)) throw InvalidConfig("need 0 < rho_min < rho_max");
        if (opt.samples < 2) throw InvalidConfig("samples must be >= 2");
        ensure_dir(out_dir);
    } catch (const Error& e) {
        log << "ymflow soliton: " << e.what() << '\n';
        return kExitInvalidConfig;
    }
    double max_res = 0.0;
    io::CsvWriter csv(out_dir / "soliton.csv", {"rho", "phi", "dphi", "d2phi", "ode_residual"});
    const double step = (opt.rho_max - opt.rho_min) / static_cast<double>(opt.samples - 1);
    for (std::size_t k = 0; k < opt.samples; ++k) {
        const double rho = k + 1 == opt.samples ? opt.rho_max : opt.rho_min + static_cast<double>(k) * step;
        const PhiValue v = phi_eval(params, rho);
        const double res = self_similar_residual(params.n, rho, v);
        max_res = std::max(max_res, std::abs(res));
        csv.row({rho, v.phi, v.dphi, v.d2phi, res});
    }
    Json j;
    j["n"] = params.n;
    j["a"] = params.a;
    j["b"] = params.b;
    j["max_residual"] = max_res;
    j["rho_min"] = opt.rho_min;
    j["rho_max"] = opt.rho_max;
    j["samples"] = opt.samples;
    write_json(out_dir / "soliton.json", j);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

inline void write_records(const fs::path& path, const std::vector<TrajectoryRecord>& records) {
    io::CsvWriter csv(path, {"t", "dt", "sup_F", "sup_h", "energy", "Z", "W"});
    for (const auto& r : records) csv.row({r.t, r.dt, r.sup_F, r.sup_h, r.energy, r.Z, r.W});
}

inline void write_snapshots(const fs::path& dir, const std::vector<Snapshot>& snaps) {
    ensure_dir(dir);
    io::CsvWriter index(dir / "index.csv", {"k", "t"});
    for (std::size_t k = 0; k < snaps.size(); ++k) {
        index.row({static_cast<double>(k), snaps[k].t});
        io::CsvWriter csv(dir / ("snap_" + std::to_string(k) + ".csv"), {"r", "h"});
        const auto& p = snaps[k].profile;
        for (std::size_t j = 0; j < p.size(); ++j) csv.row({p.radii[j], p.h[j]});
    }
}

struct SimulationResult {
    Trajectory trajectory;
    std::optional<BlowupDiagnosis> diagnosis;
    std::string blowup_note;
    std::optional<double> kernel_T;
};

/// Runs the flow; for the from_fit kernel source the run is repeated with the
/// kernel centred at the fitted blow-up time.
inline SimulationResult simulate(const RunConfig& rc) {
    FlowConfig fc = to_flow_config(rc);
    SimulationResult res;
    res.trajectory = run_flow(fc);
    BlowupFitOptions fit;
    fit.window = rc.fit_window;
    auto diagnose = [&](const Trajectory& tr) -> std::optional<BlowupDiagnosis> {
        try {
            return detect_blowup(tr, fit);
        } catch (const NoBlowup& e) {
            res.blowup_note = e.what();
            return std::nullopt;
        }
    };
    res.diagnosis = diagnose(res.trajectory);
    if (rc.kernel == KernelSource::fixed) res.kernel_T = rc.kernel_T;
    if (rc.kernel == KernelSource::from_fit && res.diagnosis) {
        fc.kernel = KernelSpec{rc.n, res.diagnosis->T_hat, rc.kernel_offset};
        res.kernel_T = res.diagnosis->T_hat;
        res.trajectory = run_flow(fc);
        res.diagnosis = diagnose(res.trajectory);
    }
    return res;
}

inline int cmd_simulate(const RunConfig& rc, const fs::path& out_dir, std::ostream& log) {
    try {
        validate_run_config(rc);
        ensure_dir(out_dir);
    } catch (const Error& e) {
        log << "ymflow simulate: " << e.what() << '\n';
        return kExitInvalidConfig;
    }
    SimulationResult res;
    try {
        res = simulate(rc);
    } catch (const Error& e) {
        // pre-step validation failures (for example origin regularity)
        log << "ymflow simulate: " << e.what() << '\n';
        return kExitInvalidConfig;
    }
    const Trajectory& tr = res.trajectory;
    if (rc.emit_records) write_records(out_dir / "records.csv", tr.records);
    if (rc.emit_snapshots) write_snapshots(out_dir / "snapshots", tr.snapshots);

    std::optional<double> scan_T;
    if (res.diagnosis) scan_T = res.diagnosis->T_hat;
    else if (res.kernel_T) scan_T = res.kernel_T;
    if (rc.emit_scan && scan_T && !rc.scan_offsets.empty()) {
        io::CsvWriter csv(out_dir / "scan.csv", {"offset", "t", "value"});
        for (const auto& cell : regularity_scan(tr, *scan_T, rc.scan_offsets)) csv.row({cell.offset, cell.t, cell.value});
    }

    if (rc.emit_summary) {
        Json s;
        s["terminal_reason"] = std::string(to_string(tr.terminal_reason));
        s["final_t"] = tr.records.back().t;
        s["records"] = tr.records.size();
        s["snapshots"] = tr.snapshots.size();
        s["initial_energy"] = tr.initial_energy;
        s["final_energy"] = tr.records.back().energy;
        s["initial_sup_F"] = tr.records.front().sup_F;
        s["final_sup_F"] = tr.records.back().sup_F;
        if (res.diagnosis) {
            s["blowup_detected"] = true;
            s["T_hat"] = res.diagnosis->T_hat;
            s["C_hat"] = res.diagnosis->C_hat;
            s["fit_residual"] = res.diagnosis->fit_residual;
            s["rapid_forming"] = res.diagnosis->rapid_forming;
        } else {
            s["blowup_detected"] = false;
            s["T_hat"] = nullptr;
            s["C_hat"] = nullptr;
            s["blowup_note"] = res.blowup_note;
        }
        s["kernel_T"] = res.kernel_T ? Json(*res.kernel_T) : Json(nullptr);
        s["scan_T"] = scan_T ? Json(*scan_T) : Json(nullptr);
        s["config"] = to_json(rc);
        write_json(out_dir / "summary.json", s);
    }

    if (tr.terminal_reason == TerminalReason::numerical_failure) {
        log << "ymflow simulate: numerical failure at t = " << io::format_number(tr.records.back().t) << '\n';
        return kExitNumericalFailure;
    }
    if (rc.require_blowup && !res.diagnosis) {
        log << "ymflow simulate: blow-up required but not detected (" << res.blowup_note << ")\n";
        return kExitNoBlowup;
    }
    return kExitOk;
}

struct SimulateJob {
    RunConfig config;
    fs::path out_dir;
};

/// Runs independent jobs on up to `jobs` worker threads. Logs are buffered
/// per job and flushed in job order; the result is the largest exit code.
inline int run_simulate_jobs(const std::vector<SimulateJob>& list, std::size_t jobs, std::ostream& log) {
    std::vector<int> codes(list.size(), kExitOk);
    std::vector<std::ostringstream> logs(list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < list.size(); i = next++) codes[i] = cmd_simulate(list[i].config, list[i].out_dir, logs[i]);
    };
    const std::size_t count = std::max<std::size_t>(1, std::min(jobs, list.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < count; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    int worst = kExitOk;
    for (std::size_t i = 0; i < list.size(); ++i) {
        log << logs[i].str();
        worst = std::max(worst, codes[i]);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// blowup
// ---------------------------------------------------------------------------

/// Reloads records, snapshots and the resolved config of a simulate run.
inline std::pair<RunConfig, Trajectory> load_run(const fs::path& run_dir) {
    const Json summary = read_json(run_dir / "summary.json");
    if (!summary.contains("config")) throw InvalidConfig("summary.json lacks the config block");
    RunConfig rc = from_json(summary.at("config"));

    Trajectory tr;
    const auto records = io::read_csv(run_dir / "records.csv");
    const std::size_t ct = records.column("t"), cdt = records.column("dt"), cf = records.column("sup_F"),
                      ch = records.column("sup_h"), ce = records.column("energy"), cz = records.column("Z"),
                      cw = records.column("W");
    for (const auto& row : records.rows) tr.records.push_back({row[ct], row[cdt], row[cf], row[ch], row[ce], row[cz], row[cw]});
    if (tr.records.empty()) throw InvalidConfig("records.csv has no rows");
    tr.initial_energy = tr.records.front().energy;

    const auto index = io::read_csv(run_dir / "snapshots" / "index.csv");
    const std::size_t ck = index.column("k"), cts = index.column("t");
    for (const auto& row : index.rows) {
        const auto k = static_cast<std::size_t>(row[ck]);
        const auto snap = io::read_csv(run_dir / "snapshots" / ("snap_" + std::to_string(k) + ".csv"));
        RadialProfile p;
        p.n = rc.n;
        const std::size_t cr = snap.column("r"), chh = snap.column("h");
        for (const auto& s : snap.rows) {
            p.radii.push_back(s[cr]);
            p.h.push_back(s[chh]);
        }
        validate_profile(p);
        tr.snapshots.push_back({row[cts], std::move(p)});
    }
    if (tr.snapshots.empty()) throw InvalidConfig("run directory has no snapshots");
    if (summary.contains("terminal_reason")) {
        const auto reason = summary.at("terminal_reason").get<std::string>();
        if (reason == "blowup_stop") tr.terminal_reason = TerminalReason::blowup_stop;
        else if (reason == "numerical_failure") tr.terminal_reason = TerminalReason::numerical_failure;
    }
    return {rc, tr};
}

struct BlowupOptions {
    std::optional<bool> require_blowup;
    std::optional<std::size_t> lambda_count;
    std::optional<double> lambda_window;
};

inline int cmd_blowup(const fs::path& run_dir, const BlowupOptions& opt, const fs::path& out_dir, std::ostream& log) {
    RunConfig rc;
    Trajectory tr;
    try {
        std::tie(rc, tr) = load_run(run_dir);
        if (opt.require_blowup) rc.require_blowup = *opt.require_blowup;
        if (opt.lambda_count) rc.lambda_count = *opt.lambda_count;
        if (opt.lambda_window) rc.lambda_window = *opt.lambda_window;
        if (!(rc.lambda_window > 0.0)) throw InvalidConfig("lambda_window must be positive");
        make_soliton_params(rc.n);
        ensure_dir(out_dir);
    } catch (const Error& e) {
        log << "ymflow blowup: malformed run directory: " << e.what() << '\n';
        return kExitInvalidConfig;
    } catch (const nlohmann::json::exception& e) {
        log << "ymflow blowup: malformed run directory: " << e.what() << '\n';
        return kExitInvalidConfig;
    }

    BlowupFitOptions fit;
    fit.window = rc.fit_window;
    Json j;
    BlowupDiagnosis diag;
    try {
        diag = detect_blowup(tr, fit);
    } catch (const NoBlowup& e) {
        j["blowup_detected"] = false;
        j["note"] = e.what();
        j["config"] = to_json(rc);
        write_json(out_dir / "blowup.json", j);
        if (rc.require_blowup) {
            log << "ymflow blowup: no blow-up detected: " << e.what() << '\n';
            return kExitNoBlowup;
        }
        return kExitOk;
    }

    auto lambdas = default_lambdas(tr, diag.T_hat);
    if (lambdas.size() > rc.lambda_count) lambdas.resize(rc.lambda_count);
    const ConvergenceReport report = convergence_report(tr, diag, lambdas, rc.lambda_window);
    double rf_constant = std::numeric_limits<double>::quiet_NaN();
    if (diag.T_hat > tr.records.back().t) rf_constant = rapid_forming_constant(rapid_forming_series(tr, diag.T_hat));

    j["blowup_detected"] = true;
    j["T_hat"] = diag.T_hat;
    j["C_hat"] = diag.C_hat;
    j["fit_residual"] = diag.fit_residual;
    j["rapid_forming"] = diag.rapid_forming;
    j["rapid_forming_constant"] = number_or_null(rf_constant);
    j["monotone"] = report.monotone;
    j["lambdas"] = lambdas;
    j["config"] = to_json(rc);
    write_json(out_dir / "blowup.json", j);

    if (rc.emit_rescale) {
        io::CsvWriter csv(out_dir / "rescale.csv", {"index", "lambda", "distance_sup", "distance_L2", "skipped", "monotone"});
        const SolitonParams params = make_soliton_params(rc.n);
        ensure_dir(out_dir / "rescaled");
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < report.steps.size(); ++i) {
            const auto& s = report.steps[i];
            csv.row({static_cast<double>(i), s.lambda, s.skipped ? nan : s.distance_sup, s.skipped ? nan : s.distance_L2,
                     s.skipped ? 1.0 : 0.0, report.monotone ? 1.0 : 0.0});
            if (s.skipped) continue;
            io::CsvWriter prof(out_dir / "rescaled" / (std::to_string(i) + ".csv"), {"rho", "h", "phi", "h_minus_phi"});
            for (std::size_t k = 0; k < s.profile_rho.size(); ++k) {
                const double rho = s.profile_rho.radii[k];
                const double phi = phi_eval(params, rho).phi;
                prof.row({rho, s.profile_rho.h[k], phi, s.profile_rho.h[k] - phi});
            }
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOptions {
    int n = 5;
    oracle::Fault fault = oracle::Fault::none;
};

inline constexpr double kKernelMassTolerance = 1e-8;

struct KernelMassRow {
    double offset = 0.0;
    double tau = 0.0;
    double mass = 0.0;
    bool pass = false;
};

/// Kernel mass on a radial grid wide enough to hold every tested kernel.
inline std::vector<KernelMassRow> kernel_mass_check(int n) {
    const auto radii = uniform_radii(14.0, 5600);
    const std::vector<double> one(radii.size(), 1.0);
    std::vector<KernelMassRow> rows;
    for (double d : {0.0, 0.5, 1.0, 2.0}) {
        for (double tau : {1.0, 0.25}) {
            const KernelSpec spec{n, 1.0, d};
            const auto w = kernel_weights(spec, 1.0 - tau, radii);
            const double mass = kernel_integral(n, radii, one, w);
            rows.push_back({d, tau, mass, std::abs(mass - 1.0) <= kKernelMassTolerance});
        }
    }
    return rows;
}

inline oracle::Fault parse_fault(const std::string& s) {
    if (s == "none") return oracle::Fault::none;
    if (s == "c1") return oracle::Fault::c1;
    if (s == "G") return oracle::Fault::G;
    throw InvalidConfig("inject-fault must be none, c1 or G");
}

inline std::string fault_name(oracle::Fault f) {
    switch (f) {
        case oracle::Fault::none: return "none";
        case oracle::Fault::c1: return "c1";
        case oracle::Fault::G: return "G";
    }
    return "none";
}

inline int cmd_verify(const VerifyOptions& opt, const fs::path& out_dir, std::ostream& log) {
    SolitonParams params;
    try {
        params = make_soliton_params(opt.n);
        ensure_dir(out_dir);
    } catch (const Error& e) {
        log << "ymflow verify: " << e.what() << '\n';
        return kExitInvalidConfig;
    }
    oracle::ReductionOptions ropt;
    ropt.fault = opt.fault;
    const auto report = oracle::verify_reduction(params, ropt);
    const auto mass = kernel_mass_check(opt.n);

    bool pass = report.pass;
    Json j;
    j["n"] = opt.n;
    j["inject_fault"] = fault_name(opt.fault);
    Json rows = Json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"check", r.check}, {"r", r.r}, {"t", r.t}, {"eps", r.eps}, {"residual", r.residual}});
    Json orders = Json::array();
    for (const auto& o : report.orders)
        orders.push_back({{"check", o.check}, {"r", o.r}, {"order", number_or_null(o.order)}, {"pass", o.pass}});
    Json masses = Json::array();
    for (const auto& m : mass) {
        masses.push_back({{"offset", m.offset}, {"tau", m.tau}, {"mass", m.mass}, {"pass", m.pass}});
        pass = pass && m.pass;
    }
    j["pass"] = pass;
    j["residual_floor"] = ropt.residual_floor;
    j["order_range"] = {ropt.order_min, ropt.order_max};
    j["rows"] = rows;
    j["orders"] = orders;
    j["kernel_mass"] = masses;
    write_json(out_dir / "verify.json", j);
    if (!pass) {
        for (const auto& o : report.orders)
            if (!o.pass) log << "ymflow verify: FAIL " << o.check << " at r = " << io::format_number(o.r) << '\n';
        for (const auto& m : mass)
            if (!m.pass) log << "ymflow verify: FAIL kernel mass at offset " << io::format_number(m.offset) << '\n';
        return kExitVerifyFailed;
    }
    return kExitOk;
}

}  // namespace ymflow::cli
