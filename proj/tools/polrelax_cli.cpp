// polrelax - command-line driver: `run` computes the configured tasks and
// writes CSV/JSON artifacts, `validate` checks a configuration and prints
// derived quantities.
//
// Exit codes: 0 success, 1 I/O or internal error, 2 configuration error,
// 3 numerical failure.

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <iostream>
#include <stdexcept>
#include <string>

#include "polrelax/config.hpp"
#include "polrelax/run.hpp"
#include "polrelax/spectral.hpp"

#ifndef POLRELAX_VERSION
#define POLRELAX_VERSION "0.0.0"
#endif

int main(int argc, char** argv) {
    CLI::App app{"Molecular polariton relaxation rates"};
    app.set_version_flag("--version", std::string("polrelax ") + POLRELAX_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    unsigned threads = 1;

    auto* run = app.add_subcommand("run", "Run the configured tasks and write artifacts");
    run->add_option("config", config_path, "YAML configuration file")->required();
    run->add_option("--output-dir", output_dir, "Override output.directory");
    run->add_option("--threads", threads, "Worker threads for sweep points")->check(CLI::Range(1u, 256u));

    auto* validate = app.add_subcommand("validate", "Check a configuration without computing");
    validate->add_option("config", config_path, "YAML configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        auto config = polrelax::load_config(config_path);
        if (!output_dir.empty()) config.output_directory = output_dir;
        if (validate->parsed()) {
            for (const auto& line : polrelax::describe(config)) std::cout << line << '\n';
            std::cout << "ok\n";
            return 0;
        }
        const auto artifacts = polrelax::execute(config, threads);
        polrelax::write_artifacts(artifacts, config.output_directory);
        for (const auto& a : artifacts.files) std::cout << config.output_directory << '/' << a.name << '\n';
        return 0;
    } catch (const polrelax::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
        return 2;
    } catch (const polrelax::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
