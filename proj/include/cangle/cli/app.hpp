#pragma once

// Subcommands behind the cangle executable: run, sweep, list-checks, export.

#include "cangle/cli/checks.hpp"
#include "cangle/io.hpp"
#include "cangle/parallel.hpp"

#include <filesystem>
#include <iomanip>
#include <iostream>

namespace cangle::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::string out = ".";
    std::vector<std::string> tol;  // name=value
    unsigned threads = 1;
    std::string param;             // sweep only; falls back to sweep.parameter
    std::string values;            // sweep only; falls back to sweep.values
};

inline void validate_keys(const Config& cfg) {
    for (const auto& [key, entry] : cfg.entries()) {
        if (known_keys().count(key)) continue;
        const std::string where = cfg.source() + ":" + std::to_string(entry.line);
        if (key.rfind("tol.", 0) == 0) {
            require_check(key.substr(4), where);
            if (double x; !parse_double(entry.value, x) || !(x >= 0.0)) cfg.bad(key, "a non-negative number");
            continue;
        }
        config_error(where + ": unknown key '" + key + "'");
    }
}

/// Tolerances: registry default, then `tol.<name>` in the config, then --tol.
inline std::map<std::string, double> tolerances(const Config& cfg, const std::vector<std::string>& overrides) {
    std::map<std::string, double> tol;
    for (const auto& c : check_registry()) tol[c.name] = cfg.number("tol." + c.name, c.tolerance);
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) config_error("--tol expects name=value, got '" + o + "'");
        const std::string name = trim(o.substr(0, eq));
        require_check(name, "--tol");
        double x = 0.0;
        if (!parse_double(o.substr(eq + 1), x) || !(x >= 0.0)) {
            config_error("--tol " + name + ": expected a non-negative number, got '" + o.substr(eq + 1) + "'");
        }
        tol[name] = x;
    }
    return tol;
}

inline std::vector<std::string> listed_checks(const Config& cfg) {
    const auto names = cfg.words("checks");
    if (names.empty()) config_error(cfg.source() + ": key 'checks' must list at least one check");
    for (const auto& n : names) require_check(n, cfg.source() + ": key 'checks'");
    return names;
}

/// Errors caused by the values the user supplied count as config errors.
inline bool is_input_error(const GeometryError& e) {
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::BadParams;
}

inline std::filesystem::path prepare_out(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) config_error("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

inline std::string bound_symbol(Bound b) { return b == Bound::upper ? "<=" : ">="; }

inline void write_outputs(const Scenario& sc, const std::filesystem::path& dir, bool csv, bool obj,
                          std::vector<std::string>& written) {
    if (sc.patch) {
        if (csv) {
            std::optional<Grid<double>> defect;
            if (sc.axis) defect = parallel_angle_defect(sc.manifold, *sc.patch, *sc.axis).direct;
            const auto path = dir / (sc.name + "_patch.csv");
            auto os = open_output(path.string());
            write_patch_csv(os, *sc.patch, defect ? &*defect : nullptr);
            written.push_back(path.string());
        }
        if (obj) {
            const auto path = dir / (sc.name + ".obj");
            auto os = open_output(path.string());
            write_patch_obj(os, sc.manifold, *sc.patch);
            written.push_back(path.string());
        }
    }
    if (sc.curve && csv) {
        const auto path = dir / (sc.name + "_curve.csv");
        auto os = open_output(path.string());
        write_frenet_csv(os, sc.curve->frenet);
        written.push_back(path.string());
    }
}

inline void write_report(const std::filesystem::path& file, const std::string& scenario, const std::string& manifold,
                         const std::string& object, const std::string& status, int code, const std::string& error,
                         const std::vector<CheckResult>& results, const std::vector<std::string>& written) {
    auto os = open_output(file.string());
    os << "scenario = " << scenario << '\n';
    os << "manifold = " << manifold << '\n';
    os << "object = " << object << '\n';
    os << "status = " << status << '\n';
    os << "exit_code = " << code << '\n';
    if (!error.empty()) os << "error = " << error << '\n';
    os << "checks = " << results.size() << '\n';
    for (const auto& r : results) {
        const std::string k = "check." + r.name + ".";
        os << k << "pass = " << (r.pass ? "true" : "false") << '\n';
        os << k << "statistic = " << (r.bound == Bound::upper ? "sup" : "min") << '\n';
        os << k << "value = " << format_number(r.statistic) << '\n';
        os << k << "mean = " << format_number(r.mean) << '\n';
        os << k << "tolerance = " << format_number(r.tolerance) << '\n';
        os << k << "condition = " << (r.bound == Bound::upper ? "value <= tolerance" : "value >= tolerance") << '\n';
        os << k << "samples = " << r.count << '\n';
        os << k << "anchor = " << r.anchor << '\n';
        os << k << "seconds = " << std::setprecision(6) << r.seconds << '\n';
        if (!r.error.empty()) os << k << "error = " << r.error << '\n';
    }
    for (const auto& w : written) os << "output = " << w << '\n';
}

inline void print_results(std::ostream& out, const std::vector<CheckResult>& results) {
    for (const auto& r : results) {
        out << (r.pass ? "PASS " : "FAIL ") << std::left << std::setw(30) << r.name << std::right << ' '
            << (r.bound == Bound::upper ? "sup " : "min ") << std::setw(12) << std::setprecision(4) << r.statistic
            << ' ' << bound_symbol(r.bound) << ' ' << r.tolerance;
        if (!r.error.empty()) out << "  (" << r.error << ')';
        out << '\n';
    }
}

inline int cmd_list_checks(std::ostream& out) {
    out << std::left << std::setw(30) << "name" << std::setw(4) << "" << std::setw(10) << "tolerance"
        << std::setw(30) << "applies to" << "anchor\n";
    for (const auto& c : check_registry()) {
        std::ostringstream tol;
        tol << c.tolerance;
        out << std::setw(30) << c.name << std::setw(4) << bound_symbol(c.bound) << std::setw(10) << tol.str()
            << std::setw(30) << c.applies_to << c.anchor << '\n';
    }
    return kExitPass;
}

inline Config load_validated(const Options& opt) {
    if (opt.config.empty()) config_error("--config is required");
    Config cfg = Config::load(opt.config);
    validate_keys(cfg);
    return cfg;
}

inline int cmd_run(const Options& opt, std::ostream& out, std::ostream& err) {
    const Config cfg = load_validated(opt);
    const auto tol = tolerances(cfg, opt.tol);
    const auto names = listed_checks(cfg);
    const auto dir = prepare_out(opt.out);
    const std::string name = cfg.str("scenario.name", "scenario");
    const auto report = dir / "report.txt";

    std::optional<Scenario> sc;
    try {
        sc = build_scenario(cfg);
    } catch (const GeometryError& e) {
        if (is_input_error(e)) throw;
        err << "numerical failure while building the scenario: " << e.what() << '\n';
        write_report(report, name, cfg.str("manifold.kind", ""), cfg.str("object.kind", ""), "numerical-failure",
                     kExitNumerical, e.what(), {}, {});
        return kExitNumerical;
    }

    std::vector<CheckResult> results;
    for (const auto& n : names) results.push_back(run_check(*find_check(n), *sc, cfg, tol.at(n)));
    std::vector<std::string> written;
    write_outputs(*sc, dir, cfg.boolean("output.csv", true), cfg.boolean("output.obj", true), written);

    const bool ok = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
    const int code = ok ? kExitPass : kExitNumerical;
    write_report(report, sc->name, sc->manifold.name(), std::string(to_string(sc->kind)), ok ? "pass" : "fail", code,
                 "", results, written);
    out << sc->name << " on " << sc->manifold.name() << " (" << to_string(sc->kind) << ")\n";
    print_results(out, results);
    out << "report: " << report.string() << '\n';
    return code;
}

inline int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
    const Config base = load_validated(opt);
    const auto tol = tolerances(base, opt.tol);
    const auto names = listed_checks(base);
    const std::string param = !opt.param.empty() ? opt.param : base.str("sweep.parameter", "");
    if (param.empty()) config_error("sweep needs --param or sweep.parameter");
    if (!known_keys().count(param) || param.rfind("sweep.", 0) == 0 || param == "checks") {
        config_error("sweep parameter '" + param + "' is not a numeric scenario key");
    }
    const std::string raw = opt.values.empty() ? base.str("sweep.values", "") : opt.values;
    std::vector<double> values;
    if (!trim(raw).empty()) {
        for (const auto& item : split(raw, ',')) {
            double x = 0.0;
            if (!parse_double(item, x)) config_error("sweep value '" + item + "' is not a number");
            values.push_back(x);
        }
    }
    if (values.empty()) config_error("sweep needs at least one value (--values or sweep.values)");
    if (base.has(param)) {
        if (double x; !parse_double(base.str(param), x)) base.bad(param, "a number (it is the sweep parameter)");
    }
    const auto dir = prepare_out(opt.out);
    const auto csv_path = dir / (base.str("scenario.name", "scenario") + "_sweep.csv");
    auto os = open_output(csv_path.string());
    CsvWriter csv(os);
    csv.header({"parameter", "parameter_value", "check", "statistic", "statistic_value", "mean", "tolerance", "pass", "error"});
    int code = kExitPass;
    for (double v : values) {
        Config cfg = base;
        cfg.set(param, format_number(v));
        std::vector<CheckResult> results;
        try {
            const Scenario sc = build_scenario(cfg);
            for (const auto& n : names) results.push_back(run_check(*find_check(n), sc, cfg, tol.at(n)));
        } catch (const GeometryError& e) {
            if (is_input_error(e)) throw;
            err << param << " = " << v << ": numerical failure: " << e.what() << '\n';
            code = kExitNumerical;
            for (const auto& n : names) {
                CheckResult r;
                r.name = n;
                r.bound = find_check(n)->bound;
                r.tolerance = tol.at(n);
                r.error = e.what();
                results.push_back(r);
            }
        }
        out << param << " = " << format_number(v) << '\n';
        print_results(out, results);
        for (const auto& r : results) {
            csv.row({param, v, r.name, std::string(r.bound == Bound::upper ? "sup" : "min"), r.statistic, r.mean,
                     r.tolerance, std::string(r.pass ? "true" : "false"), r.error});
        }
    }
    out << "sweep table: " << csv_path.string() << '\n';
    return code;
}

inline int cmd_export(const Options& opt, std::ostream& out, std::ostream& err) {
    const Config cfg = load_validated(opt);
    const auto dir = prepare_out(opt.out);
    try {
        const Scenario sc = build_scenario(cfg);
        std::vector<std::string> written;
        write_outputs(sc, dir, true, true, written);
        for (const auto& w : written) out << "wrote " << w << '\n';
    } catch (const GeometryError& e) {
        if (is_input_error(e)) throw;
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitPass;
}

/// Dispatches a subcommand; maps exceptions to exit codes.
inline int dispatch(const std::string& command, const Options& opt, std::ostream& out, std::ostream& err) {
    try {
        set_thread_count(opt.threads);
        if (command == "list-checks") return cmd_list_checks(out);
        if (command == "run") return cmd_run(opt, out, err);
        if (command == "sweep") return cmd_sweep(opt, out, err);
        if (command == "export") return cmd_export(opt, out, err);
        config_error("unknown command '" + command + "'");
    } catch (const GeometryError& e) {
        err << "error: " << e.what() << '\n';
        return is_input_error(e) ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUnexpected;
    }
}

}  // namespace cangle::cli
