// coulomb_cli: allocate | sweep | simulate on a scenario file.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "coulomb/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Charge and thrust allocation for hybrid Coulomb spacecraft formations"};
    app.require_subcommand(1);

    coulomb::CliOptions opt;
    std::string scenario;
    std::string epsilon_list;
    int epsilon_count = 0;
    double tol = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("scenario", scenario, "Scenario JSON file")->required();
        sub->add_option("--epsilon-count", epsilon_count, "Linear ε grid with this many points");
        sub->add_option("--epsilon-list", epsilon_list, "Comma-separated ε values (N)");
        sub->add_flag("--dump-normalized", opt.dump_normalized, "Print the normalized scenario and exit");
        sub->add_option("--tol", tol, "Relative SDP tolerance");
    };

    auto* allocate = app.add_subcommand("allocate", "Single allocation, JSON on stdout");
    auto* sweep = app.add_subcommand("sweep", "Per-ε diagnostics, CSV on stdout");
    auto* simulate = app.add_subcommand("simulate", "Maneuver simulation, trajectory.csv and summary.json");
    add_common(allocate);
    add_common(sweep);
    add_common(simulate);
    simulate->add_option("--out", opt.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : coulomb::kExitInvalid;
    }

    auto* active = app.get_subcommands().front();
    if (active->count("--epsilon-count") > 0) opt.epsilon_count = epsilon_count;
    if (active->count("--tol") > 0) opt.tol = tol;
    if (active->count("--epsilon-list") > 0) {
        try {
            opt.epsilon_list = coulomb::parse_epsilon_list(epsilon_list);
        } catch (const coulomb::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return coulomb::kExitInvalid;
        }
    }

    if (active == allocate) return coulomb::cmd_allocate(scenario, opt, std::cout, std::cerr);
    if (active == sweep) return coulomb::cmd_sweep(scenario, opt, std::cout, std::cerr);
    return coulomb::cmd_simulate(scenario, opt, std::cout, std::cerr);
}
