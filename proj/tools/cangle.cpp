#include "cangle/cli/app.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
    using namespace cangle::cli;
    CLI::App app{"Constant-angle curves and surfaces: scenario runner"};
    app.require_subcommand(1);
    Options opt;

    auto common = [&](CLI::App* sub, bool with_config) {
        if (with_config) {
            sub->add_option("--config,config", opt.config, "scenario file")->required();
            sub->add_option("--out", opt.out, "output directory");
            sub->add_option("--tol", opt.tol, "tolerance override name=value (repeatable)");
        }
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::Range(1u, 256u));
    };
    auto* run = app.add_subcommand("run", "build the scenario, run its checks, write the report");
    common(run, true);
    auto* sweep = app.add_subcommand("sweep", "rerun the checks for several values of one numeric key");
    common(sweep, true);
    sweep->add_option("--param", opt.param, "numeric key to vary (default: sweep.parameter)");
    sweep->add_option("--values", opt.values, "comma-separated values (default: sweep.values)");
    auto* list = app.add_subcommand("list-checks", "print the check registry");
    common(list, false);
    auto* exp = app.add_subcommand("export", "build the scenario and write CSV and OBJ files");
    common(exp, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    return dispatch(command, opt, std::cout, std::cerr);
}
