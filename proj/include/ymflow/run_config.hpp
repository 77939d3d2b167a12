/// @file run_config.hpp
/// @brief Batch run configuration: FlowConfig plus kernel, rescaling, scan and
///        output settings, read from flat key = value text.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymflow/errors.hpp"
#include "ymflow/flow.hpp"
#include "ymflow/io.hpp"

namespace ymflow {

enum class KernelSource { none, fixed, from_fit };

struct RunConfig {
    // flow
    int n = 5;
    double r_max = 8.0;
    std::size_t grid_points = 800;
    double cfl = 0.2;
    double t_end = 1.0;
    std::optional<double> blowup_stop;
    double blowup_factor = 1e6;
    double min_dt = 1e-14;
    std::size_t record_every = 10;
    std::optional<double> origin_kappa;
    std::string snapshot_rule = "geometric";
    double snapshot_factor = 2.0;
    double snapshot_interval = 0.1;
    std::string initial = "bump";  ///< bump | soliton | flat | table
    double bump_s = 1.0;
    std::string initial_table;  ///< CSV with columns r, h (initial = table)
    double soliton_T = 1.0;
    std::string boundary = "auto";  ///< auto | frozen | soliton_trace
    // kernel
    KernelSource kernel = KernelSource::none;
    double kernel_T = 1.0;
    double kernel_offset = 0.0;
    // rescaling
    std::size_t lambda_count = 5;
    double lambda_window = 8.0;
    std::size_t fit_window = 20;
    // regularity scan
    std::vector<double> scan_offsets{0.0, 1.0};
    // outputs
    std::string output_dir;
    bool emit_records = true;
    bool emit_snapshots = true;
    bool emit_rescale = true;
    bool emit_scan = true;
    bool emit_summary = true;
    bool require_blowup = false;
};

/// Every key accepted in config files and as --key command-line overrides.
inline const std::vector<std::string>& run_config_keys() {
    static const std::vector<std::string> keys{
        "n",              "r_max",           "grid_points",       "cfl",          "t_end",
        "blowup_stop",    "blowup_factor",   "min_dt",            "record_every", "origin_kappa",
        "snapshot_rule",  "snapshot_factor", "snapshot_interval", "initial",      "bump_s",
        "initial_table",  "soliton_T",       "boundary",          "kernel",       "kernel_T",
        "kernel_offset",  "lambda_count",    "lambda_window",     "fit_window",   "scan_offsets",
        "output_dir",     "emit_records",    "emit_snapshots",    "emit_rescale", "emit_scan",
        "emit_summary",   "require_blowup"};
    return keys;
}

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw InvalidConfig(key + ": expected true/false, got '" + v + "'");
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
    const long long x = io::parse_integer(v, key);
    if (x < 0) throw InvalidConfig(key + " must be non-negative");
    return static_cast<std::size_t>(x);
}

inline std::optional<double> parse_optional(const std::string& key, const std::string& v) {
    if (v.empty() || v == "none") return std::nullopt;
    return io::parse_number(v, key);
}

}  // namespace detail

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
    const std::string v = io::trim(raw);
    if (key == "n") c.n = static_cast<int>(io::parse_integer(v, key));
    else if (key == "r_max") c.r_max = io::parse_number(v, key);
    else if (key == "grid_points") c.grid_points = detail::parse_count(key, v);
    else if (key == "cfl") c.cfl = io::parse_number(v, key);
    else if (key == "t_end") c.t_end = io::parse_number(v, key);
    else if (key == "blowup_stop") c.blowup_stop = detail::parse_optional(key, v);
    else if (key == "blowup_factor") c.blowup_factor = io::parse_number(v, key);
    else if (key == "min_dt") c.min_dt = io::parse_number(v, key);
    else if (key == "record_every") c.record_every = detail::parse_count(key, v);
    else if (key == "origin_kappa") c.origin_kappa = detail::parse_optional(key, v);
    else if (key == "snapshot_rule") {
        if (v != "geometric" && v != "fixed_dt") throw InvalidConfig("snapshot_rule must be geometric or fixed_dt");
        c.snapshot_rule = v;
    } else if (key == "snapshot_factor") c.snapshot_factor = io::parse_number(v, key);
    else if (key == "snapshot_interval") c.snapshot_interval = io::parse_number(v, key);
    else if (key == "initial") {
        if (v != "bump" && v != "soliton" && v != "flat" && v != "table")
            throw InvalidConfig("initial must be bump, soliton, flat or table");
        c.initial = v;
    } else if (key == "bump_s") c.bump_s = io::parse_number(v, key);
    else if (key == "initial_table") c.initial_table = v;
    else if (key == "soliton_T") c.soliton_T = io::parse_number(v, key);
    else if (key == "boundary") {
        if (v != "auto" && v != "frozen" && v != "soliton_trace")
            throw InvalidConfig("boundary must be auto, frozen or soliton_trace");
        c.boundary = v;
    } else if (key == "kernel") {
        if (v == "none") c.kernel = KernelSource::none;
        else if (v == "fixed") c.kernel = KernelSource::fixed;
        else if (v == "from_fit") c.kernel = KernelSource::from_fit;
        else throw InvalidConfig("kernel must be none, fixed or from_fit");
    } else if (key == "kernel_T") c.kernel_T = io::parse_number(v, key);
    else if (key == "kernel_offset") c.kernel_offset = io::parse_number(v, key);
    else if (key == "lambda_count") c.lambda_count = detail::parse_count(key, v);
    else if (key == "lambda_window") c.lambda_window = io::parse_number(v, key);
    else if (key == "fit_window") c.fit_window = detail::parse_count(key, v);
    else if (key == "scan_offsets") c.scan_offsets = io::parse_number_list(v, key);
    else if (key == "output_dir") c.output_dir = v;
    else if (key == "emit_records") c.emit_records = detail::parse_bool(key, v);
    else if (key == "emit_snapshots") c.emit_snapshots = detail::parse_bool(key, v);
    else if (key == "emit_rescale") c.emit_rescale = detail::parse_bool(key, v);
    else if (key == "emit_scan") c.emit_scan = detail::parse_bool(key, v);
    else if (key == "emit_summary") c.emit_summary = detail::parse_bool(key, v);
    else if (key == "require_blowup") c.require_blowup = detail::parse_bool(key, v);
    else throw InvalidConfig("unknown config key '" + key + "'");
}

inline void apply_settings(RunConfig& c, const io::KeyValues& kv) {
    for (const auto& [k, v] : kv) apply_setting(c, k, v);
}

inline std::string kernel_source_name(KernelSource k) {
    switch (k) {
        case KernelSource::none: return "none";
        case KernelSource::fixed: return "fixed";
        case KernelSource::from_fit: return "from_fit";
    }
    return "none";
}

/// The FlowConfig described by c; the kernel is attached for the fixed source
/// only (from_fit kernels are attached after the blow-up fit).
inline FlowConfig to_flow_config(const RunConfig& c) {
    FlowConfig f;
    f.n = c.n;
    f.r_max = c.r_max;
    f.grid_points = c.grid_points;
    f.cfl = c.cfl;
    f.t_end = c.t_end;
    f.blowup_stop = c.blowup_stop;
    f.blowup_factor = c.blowup_factor;
    f.min_dt = c.min_dt;
    f.record_every = c.record_every;
    f.origin_kappa = c.origin_kappa;
    f.snapshots.kind = c.snapshot_rule == "fixed_dt" ? SnapshotRule::Kind::fixed_dt : SnapshotRule::Kind::geometric;
    f.snapshots.factor = c.snapshot_factor;
    f.snapshots.interval = c.snapshot_interval;
    if (c.initial == "soliton") f.initial = SolitonData{c.soliton_T};
    else if (c.initial == "flat") f.initial = TabulatedData{{0.0, c.r_max}, {0.0, 0.0}};
    else if (c.initial == "table") {
        if (c.initial_table.empty()) throw InvalidConfig("initial = table requires initial_table");
        const auto t = io::read_csv(c.initial_table);
        TabulatedData d;
        const std::size_t cr = t.column("r"), ch = t.column("h");
        for (const auto& row : t.rows) {
            d.r.push_back(row[cr]);
            d.h.push_back(row[ch]);
        }
        f.initial = std::move(d);
    }
    else f.initial = RationalBump{c.bump_s};
    if (c.boundary == "frozen") f.boundary = BoundaryMode::frozen;
    else if (c.boundary == "soliton_trace") f.boundary = BoundaryMode::soliton_trace;
    if (c.kernel == KernelSource::fixed) f.kernel = KernelSpec{c.n, c.kernel_T, c.kernel_offset};
    return f;
}

inline void validate_run_config(const RunConfig& c) {
    validate_config(to_flow_config(c));
    if (c.kernel != KernelSource::none && !(c.kernel_offset >= 0.0))
        throw InvalidConfig("kernel_offset must be >= 0");
    if (c.kernel == KernelSource::fixed && !(c.kernel_T > 0.0)) throw InvalidConfig("kernel_T must be positive");
    if (!(c.lambda_window > 0.0)) throw InvalidConfig("lambda_window must be positive");
    if (c.fit_window < 2) throw InvalidConfig("fit_window must be >= 2");
    for (double d : c.scan_offsets)
        if (!(d >= 0.0)) throw InvalidConfig("scan_offsets must be >= 0");
}

/// Full resolved configuration for provenance.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["n"] = c.n;
    j["r_max"] = c.r_max;
    j["grid_points"] = c.grid_points;
    j["cfl"] = c.cfl;
    j["t_end"] = c.t_end;
    j["blowup_stop"] = c.blowup_stop ? nlohmann::ordered_json(*c.blowup_stop) : nlohmann::ordered_json("none");
    j["blowup_factor"] = c.blowup_factor;
    j["min_dt"] = c.min_dt;
    j["record_every"] = c.record_every;
    j["origin_kappa"] = c.origin_kappa ? nlohmann::ordered_json(*c.origin_kappa) : nlohmann::ordered_json("none");
    j["snapshot_rule"] = c.snapshot_rule;
    j["snapshot_factor"] = c.snapshot_factor;
    j["snapshot_interval"] = c.snapshot_interval;
    j["initial"] = c.initial;
    j["bump_s"] = c.bump_s;
    j["initial_table"] = c.initial_table;
    j["soliton_T"] = c.soliton_T;
    j["boundary"] = c.boundary;
    j["kernel"] = kernel_source_name(c.kernel);
    j["kernel_T"] = c.kernel_T;
    j["kernel_offset"] = c.kernel_offset;
    j["lambda_count"] = c.lambda_count;
    j["lambda_window"] = c.lambda_window;
    j["fit_window"] = c.fit_window;
    j["scan_offsets"] = c.scan_offsets;
    j["output_dir"] = c.output_dir;
    j["emit_records"] = c.emit_records;
    j["emit_snapshots"] = c.emit_snapshots;
    j["emit_rescale"] = c.emit_rescale;
    j["emit_scan"] = c.emit_scan;
    j["emit_summary"] = c.emit_summary;
    j["require_blowup"] = c.require_blowup;
    return j;
}

/// Rebuilds a RunConfig from to_json output (used to reload a run directory).
inline RunConfig from_json(const nlohmann::ordered_json& j) {
    RunConfig c;
    for (const auto& key : run_config_keys()) {
        if (!j.contains(key)) continue;
        const auto& v = j.at(key);
        std::string text;
        if (v.is_string()) text = v.get<std::string>();
        else if (v.is_boolean()) text = v.get<bool>() ? "true" : "false";
        else if (v.is_number_integer()) text = std::to_string(v.get<long long>());
        else if (v.is_number()) text = io::format_number(v.get<double>());
        else if (v.is_array()) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) text += ",";
                text += io::format_number(v[i].get<double>());
            }
        } else throw InvalidConfig("unsupported JSON value for " + key);
        apply_setting(c, key, text);
    }
    return c;
}

/// Output root: explicit value, else $YMFLOW_OUTPUT_DIR, else "ymflow_out".
inline std::filesystem::path default_output_root() {
    if (const char* env = std::getenv("YMFLOW_OUTPUT_DIR"); env && *env) return env;
    return "ymflow_out";
}

}  // namespace ymflow
