#include "torusflow/experiments.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

int main(int argc, char** argv) {
    if (const char* threads = std::getenv("TORUSFLOW_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }

    CLI::App app{"torusflow: spectral experiments for time-periodic flow problems"};
    app.require_subcommand(1);
    std::string config_path;
    for (const auto& name : torusflow::experiment_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->allow_extras();
    }
    CLI11_PARSE(app, argc, argv);

    auto* sub = app.get_subcommands().front();
    std::map<std::string, std::string> overrides;
    const auto extras = sub->remaining();
    for (std::size_t i = 0; i < extras.size(); i += 2) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0 || i + 1 >= extras.size()) {
            std::cerr << "config error: overrides must come as --key value pairs\n";
            return 2;
        }
        overrides[key.substr(2)] = extras[i + 1];
    }

    try {
        std::map<std::string, std::string> file_values;
        if (!config_path.empty()) file_values = torusflow::load_config_file(config_path);
        const auto cfg = torusflow::build_config(sub->get_name(), file_values, overrides);
        const auto report = torusflow::run(cfg);
        for (const auto& [name, ok] : report.json["flags"].items())
            std::cout << (ok.get<bool>() ? "[PASS] " : "[FAIL] ") << name << "\n";
        std::cout << "report written to " << cfg.output_dir << "/report.json\n";
        return report.exit_code;
    } catch (const torusflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
