// Command-line front end: scenario runs, certification, flow experiments.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "mcflab/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string scenario;
    std::string out_dir;
    long seed = -1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file");
    cmd->add_option("--scenario", args.scenario, "scenario name (see `mcflab list`)");
    cmd->add_option("--seed", args.seed, "RNG seed recorded in every output");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--override", args.overrides,
                    "config override key=value (e.g. flow.dt_safety=0.1)");
}

int run_operation(const CommonArgs& args, const std::string& operation) {
    mcflab::RunConfig cfg;
    if (!args.config_path.empty()) cfg = mcflab::load_config(args.config_path);
    if (!args.scenario.empty()) cfg.scenario = args.scenario;
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    cfg.operation = operation;
    for (const std::string& ov : args.overrides) mcflab::apply_override(cfg, ov);
    if (cfg.scenario.empty())
        throw mcflab::ConfigError("no scenario given (use --scenario or a config file)");

    const mcflab::PipelineResult result = mcflab::run_pipeline(cfg);
    std::cout << result.report;
    std::cout << "outputs written to " << cfg.out_dir << "\n";
    return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mcflab: mean curvature flow laboratory in curved ambient spaces"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string operation;
    for (const char* op :
         {"certify-stability", "certify-barrier", "flow", "uniqueness", "all"}) {
        CLI::App* cmd = app.add_subcommand(
            op, std::string("run the ") + op + " stage of a scenario pipeline");
        add_common(cmd, args);
        cmd->callback([&operation, op] { operation = op; });
    }
    CLI::App* list_cmd = app.add_subcommand("list", "list registered scenarios");
    list_cmd->callback([&operation] { operation = "list"; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (operation == "list") {
            for (const auto& [name, desc] : mcflab::list_scenarios())
                std::cout << name << "  -  " << desc << "\n";
            std::cout << "\nnot executable in this kernel:\n";
            for (const auto& [name, why] : mcflab::aspirational_scenarios())
                std::cout << name << "  -  " << why << "\n";
            return 0;
        }
        return run_operation(args, operation);
    } catch (const mcflab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mcflab::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
