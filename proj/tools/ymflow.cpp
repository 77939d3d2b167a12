// ymflow — batch front end for the equivariant Yang-Mills heat flow toolkit.
//
//   ymflow soliton  --n 5 --rho-max 30 --samples 3000
//   ymflow simulate --config run.cfg [--config other.cfg ...] [--jobs 4] [--<key> value ...]
//   ymflow blowup   --run-dir out/run [--require-blowup]
//   ymflow verify   --n 5 [--inject-fault c1]
//
// Exit codes: 0 ok, 2 invalid config, 3 numerical failure, 4 required blow-up
// absent, 5 verification failure.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ymflow/commands.hpp"

namespace fs = std::filesystem;
using namespace ymflow;

namespace {

fs::path resolve_output(const std::string& flag, const std::string& leaf) {
    if (!flag.empty()) return flag;
    return default_output_root() / leaf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equivariant Yang-Mills heat flow: soliton tables, simulation, blow-up analysis, verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "ymflow 1.0.0");

    // soliton
    cli::SolitonOptions sol;
    std::string sol_out;
    auto* soliton = app.add_subcommand("soliton", "tabulate the shrinking soliton and its ODE residual");
    soliton->add_option("--n", sol.n, "dimension (5..9)");
    soliton->add_option("--rho-min", sol.rho_min, "first sample");
    soliton->add_option("--rho-max", sol.rho_max, "last sample");
    soliton->add_option("--samples", sol.samples, "number of samples");
    soliton->add_option("--output,-o", sol_out, "output directory (default $YMFLOW_OUTPUT_DIR/soliton)");

    // simulate
    std::vector<std::string> configs;
    std::string sim_out;
    std::size_t jobs = 1;
    std::map<std::string, std::string> overrides;
    auto* simulate = app.add_subcommand("simulate", "integrate the radial flow and write records, snapshots, summary");
    simulate->add_option("--config,-c", configs, "key = value config file (repeatable; one run each)");
    simulate->add_option("--output,-o", sim_out, "output directory (single config only)");
    simulate->add_option("--jobs,-j", jobs, "worker threads across configs")->check(CLI::PositiveNumber);
    for (const auto& key : run_config_keys()) {
        std::string dashed = key;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        const std::string names = dashed == key ? "--" + key : "--" + key + ",--" + dashed;
        simulate->add_option_function<std::string>(names, [&overrides, key](const std::string& v) { overrides[key] = v; },
                                                    "override config key " + key);
    }

    // blowup
    std::string run_dir;
    std::string blow_out;
    bool require_blowup = false;
    std::optional<std::size_t> lambda_count;
    std::optional<double> lambda_window;
    auto* blowup = app.add_subcommand("blowup", "fit the blow-up time and compare rescaled profiles with the soliton");
    blowup->add_option("--run-dir", run_dir, "directory written by simulate")->required();
    blowup->add_option("--output,-o", blow_out, "output directory (default: the run directory)");
    blowup->add_flag("--require-blowup", require_blowup, "exit 4 when no blow-up is detected");
    blowup->add_option("--lambda-count", lambda_count, "number of rescaling factors");
    blowup->add_option("--lambda-window", lambda_window, "rescaled window radius P");

    // verify
    int verify_n = 5;
    std::string fault = "none";
    std::string verify_out;
    auto* verify = app.add_subcommand("verify", "check the radial reduction against the full matrix-valued oracle");
    verify->add_option("--n", verify_n, "dimension (5..9)");
    verify->add_option("--inject-fault", fault, "corrupt a coefficient: none, c1 or G");
    verify->add_option("--output,-o", verify_out, "output directory (default $YMFLOW_OUTPUT_DIR/verify)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitInvalidConfig;
    }

    try {
        if (*soliton) return cli::cmd_soliton(sol, resolve_output(sol_out, "soliton"), std::cerr);

        if (*verify) {
            cli::VerifyOptions opt;
            opt.n = verify_n;
            opt.fault = cli::parse_fault(fault);
            return cli::cmd_verify(opt, resolve_output(verify_out, "verify"), std::cerr);
        }

        if (*blowup) {
            cli::BlowupOptions opt;
            if (require_blowup) opt.require_blowup = true;
            opt.lambda_count = lambda_count;
            opt.lambda_window = lambda_window;
            return cli::cmd_blowup(run_dir, opt, blow_out.empty() ? fs::path(run_dir) : fs::path(blow_out), std::cerr);
        }

        if (*simulate) {
            if (!sim_out.empty() && configs.size() > 1)
                throw InvalidConfig("--output applies to a single config; set output_dir per config instead");
            std::vector<cli::SimulateJob> list;
            if (configs.empty()) configs.push_back("");
            for (const auto& path : configs) {
                RunConfig rc;
                if (!path.empty()) apply_settings(rc, io::read_key_values(path));
                apply_settings(rc, overrides);
                fs::path out;
                if (!sim_out.empty()) out = sim_out;
                else if (!rc.output_dir.empty()) out = rc.output_dir;
                else out = default_output_root() / (path.empty() ? std::string("simulate") : fs::path(path).stem().string());
                rc.output_dir = out.string();
                list.push_back({rc, out});
            }
            return cli::run_simulate_jobs(list, jobs, std::cerr);
        }
    } catch (const Error& e) {
        std::cerr << "ymflow: " << e.what() << '\n';
        return cli::kExitInvalidConfig;
    }
    return cli::kExitOk;
}
