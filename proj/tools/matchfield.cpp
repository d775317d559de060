// Command-line front end: validate a scenario, run the mean-field recursion,
// build transition matrices, simulate finite populations, compare them.

#include "matchfield/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

using namespace matchfield;

namespace {

void add_run_options(CLI::App *cmd, RunOptions &options, bool with_dump)
{
    cmd->add_option("--scenario", options.scenario, "Scenario file (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", options.out, "Output directory")->default_val(".");
    cmd->add_option("--seed", options.seed, "Master seed (overrides the file)");
    cmd->add_option("--replications", options.replications, "Replication count (overrides the file)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--periods", options.periods, "Horizon (overrides the file)")->check(CLI::PositiveNumber);
    const std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}};
    cmd->add_option("--format", options.format, "Output format")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
        ->type_name("{csv,json}")
        ->default_str("csv");
    if (with_dump)
        cmd->add_flag("--dump-population", options.dump_population,
                      "Write the final population of each replication as a binary dump");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"matchfield: random matching dynamics with mutation, matching and break-up"};
    app.require_subcommand(1);

    std::filesystem::path validate_path;
    auto *validate = app.add_subcommand("validate", "Parse and validate a scenario");
    validate->add_option("--scenario", validate_path, "Scenario file (JSON)")->required();

    RunOptions meanfield_opts, transition_opts, simulate_opts, compare_opts;
    auto *meanfield = app.add_subcommand("meanfield", "Iterate the mean-field map, write trajectory");
    add_run_options(meanfield, meanfield_opts, false);
    auto *transition = app.add_subcommand("transition", "Write per-period transition matrices and residuals");
    add_run_options(transition, transition_opts, false);
    auto *simulate = app.add_subcommand("simulate", "Simulate finite populations, write snapshots");
    add_run_options(simulate, simulate_opts, true);
    auto *compare = app.add_subcommand("compare", "Compare simulation against the mean-field trajectory");
    add_run_options(compare, compare_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitValidation;
    }

    if (*validate)
        return cmd_validate(validate_path, std::cout);
    if (*meanfield)
        return cmd_meanfield(meanfield_opts, std::cerr);
    if (*transition)
        return cmd_transition(transition_opts, std::cerr);
    if (*simulate)
        return cmd_simulate(simulate_opts, std::cerr);
    return cmd_compare(compare_opts, std::cerr);
}
