#include "regsel/pipeline.hpp"
#include "regsel/synthetic.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct StageArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> exclude_rows;
    std::optional<std::string> out;
    std::optional<std::size_t> workers;
    std::vector<std::string> overrides;
};

regsel::RunConfig resolve_config(const StageArgs& a) {
    auto config = regsel::load_run_config(a.config);
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw regsel::ArgumentError("--set expects key=value, got '" + kv + "'");
        regsel::apply_config_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    regsel::apply_environment(config);
    if (a.seed) config.seed = *a.seed;
    if (a.exclude_rows) regsel::apply_config_override(config, "exclude_rows", *a.exclude_rows);
    if (a.workers) config.workers = *a.workers;
    if (a.out) config.out_dir = *a.out;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regression feature selection and diagnostics pipeline"};
    app.require_subcommand(1);

    StageArgs args;
    const std::vector<std::pair<regsel::Stage, std::string>> stages{
        {regsel::Stage::prep, "Load, clean, merge and encode the input tables"},
        {regsel::Stage::prune, "Drop numeric predictors by variance inflation"},
        {regsel::Stage::select, "Run forward, backward and stepwise AIC selection"},
        {regsel::Stage::diagnose, "Comparison table and influence diagnostics"},
        {regsel::Stage::cv, "Monte Carlo cross-validation of the selected models"},
        {regsel::Stage::report, "Final model report, residual and added-variable data"},
        {regsel::Stage::all, "Run every stage in order"},
    };
    std::vector<std::pair<CLI::App*, regsel::Stage>> stage_commands;
    for (const auto& [stage, help] : stages) {
        auto* cmd = app.add_subcommand(std::string(regsel::to_string(stage)), help);
        cmd->add_option("--config", args.config, "key = value run configuration")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", args.seed, "Cross-validation seed");
        cmd->add_option("--exclude-rows", args.exclude_rows, "Comma-separated 1-based rows for the exclusion rerun");
        cmd->add_option("--out", args.out, "Output directory");
        cmd->add_option("--workers", args.workers, "Worker threads (0 = all cores)");
        cmd->add_option("--set", args.overrides, "Extra key=value config override")->take_all();
        stage_commands.emplace_back(cmd, stage);
    }

    std::string gen_out;
    regsel::SyntheticOptions gen;
    auto* generate = app.add_subcommand("generate", "Write the synthetic example dataset and its run config");
    generate->add_option("--out", gen_out, "Target directory")->required();
    generate->add_option("--seed", gen.seed, "Generator seed");
    generate->add_option("--rows", gen.rows, "Rows left after merging and NA omission");

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            const auto data = regsel::make_synthetic(gen);
            regsel::write_synthetic(data, gen_out);
            std::cout << "wrote " << data.files.size() << " files to " << gen_out << " (outlier row "
                      << data.outlier_position << " of " << data.analysis_rows << ")\n";
            return 0;
        }
        for (const auto& [cmd, stage] : stage_commands) {
            if (!cmd->parsed()) continue;
            const auto config = resolve_config(args);
            const auto bundle = regsel::run_stage(config, stage);
            std::cout << "wrote " << bundle.files.size() << " files to " << config.out_dir.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "regsel: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
