// lab: batch experiment runner. Subcommands: run, gen, suite, validate.
// Exit codes: 0 success, 2 parse failure, 3 numerical solver failure,
// 4 guard violation, 1 anything else.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rewardlab/errors.hpp"
#include "rewardlab/harness.hpp"
#include "rewardlab/io.hpp"

int main(int argc, char** argv) {
    CLI::App app{"reward design experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "Execute an experiment config");
    run->add_option("config", config_path, "experiment config JSON")->required();

    std::string gen_spec_path, gen_output;
    CLI::App* gen = app.add_subcommand("gen", "Generate a random MOMDP instance");
    gen->add_option("spec", gen_spec_path, "instance spec JSON")->required();
    gen->add_option("-o,--output", gen_output, "output MOMDP file")->required();

    std::string suite_name, suite_output;
    std::uint64_t suite_seed = 0;
    int suite_count = 50;
    CLI::App* suite = app.add_subcommand("suite", "Run a named experiment suite");
    suite->add_option("name", suite_name, "suite name (corollaries)")->required();
    suite->add_option("--seed", suite_seed, "suite seed")->required();
    suite->add_option("--count", suite_count, "instances per row");
    suite->add_option("-o,--output", suite_output, "output directory")->required();

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Validate a JSON document");
    validate->add_option("file", validate_path, "document to validate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            const rewardlab::ExperimentConfig config =
                rewardlab::load_experiment_config(config_path);
            rewardlab::run_experiment(config);
            std::cout << "wrote " << config.output << "\n";
        } else if (gen->parsed()) {
            const rewardlab::RandomInstanceSpec spec =
                rewardlab::instance_spec_from_json(rewardlab::read_file(gen_spec_path));
            const rewardlab::Momdp momdp = rewardlab::generate_random_instance(spec);
            rewardlab::write_file_atomic(gen_output, rewardlab::momdp_to_json(momdp) + "\n");
            std::cout << "wrote " << gen_output << "\n";
        } else if (suite->parsed()) {
            if (suite_name != "corollaries")
                throw rewardlab::ParseError("unknown suite: " + suite_name);
            const rewardlab::SuiteSummary summary =
                rewardlab::corollary_suite(suite_seed, suite_count, suite_output);
            std::cout << summary.csv;
        } else if (validate->parsed()) {
            std::cout << rewardlab::validate_document(rewardlab::read_file(validate_path)) << "\n";
        }
    } catch (const rewardlab::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const rewardlab::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 3;
    } catch (const rewardlab::GuardError& e) {
        std::cerr << "guard violation: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
