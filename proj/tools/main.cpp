#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsee/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Restless-bandit DSEE simulator"};
    app.require_subcommand(1);

    std::string config_path, config_b, out_path = "out.csv", param;
    std::vector<double> values, t_list;
    dsee::cli_detail::RunOverrides ov;
    std::uint64_t seed_arg = 0;
    std::size_t runs_arg = 0;
    long long horizon_arg = -1;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("--config", config_path, "experiment config file")->required();
        if (with_out) sub->add_option("--out", out_path, "output table path");
        sub->add_option("--seed", seed_arg, "override base_seed");
        sub->add_option("--runs", runs_arg, "override Monte Carlo runs");
        sub->add_option("--horizon", horizon_arg, "override horizon");
        sub->add_option("--threads", ov.threads, "worker threads (0 = hardware)");
        sub->add_flag("--trace", ov.trace, "emit a per-slot trace for the first run");
    };

    auto* validate = app.add_subcommand("validate", "validate a config and report chain properties");
    validate->add_option("--config", config_path)->required();

    auto* run = app.add_subcommand("run", "run the experiment and write the regret table");
    add_common(run, true);

    auto* compare = app.add_subcommand("compare", "run two configs over the same arms and merge");
    add_common(compare, true);
    compare->add_option("--config-b", config_b, "second config")->required();

    auto* bound = app.add_subcommand("bound", "evaluate the closed-form regret bound");
    bound->add_option("--config", config_path)->required();
    bound->add_option("--t", t_list, "times to evaluate at")->required();

    auto* sweep = app.add_subcommand("sweep", "run one curve per parameter value");
    add_common(sweep, true);
    sweep->add_option("--param", param, "one of D, L, runs, horizon, players")->required();
    sweep->add_option("--values", values, "parameter values")->required();

    CLI11_PARSE(app, argc, argv);

    for (auto* sub : {run, compare, sweep}) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) ov.seed = seed_arg;
        if (sub->count("--runs")) ov.runs = runs_arg;
        if (sub->count("--horizon")) ov.horizon = horizon_arg;
    }

    try {
        if (validate->parsed()) return dsee::cmd_validate(config_path, std::cout);
        if (run->parsed()) return dsee::cmd_run(config_path, out_path, ov);
        if (compare->parsed()) return dsee::cmd_compare(config_path, config_b, out_path, ov);
        if (bound->parsed()) return dsee::cmd_bound(config_path, t_list, std::cout);
        if (sweep->parsed()) return dsee::cmd_sweep(config_path, param, values, out_path, ov);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
