#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "nilcorr/error.hpp"
#include "runner.hpp"

using namespace nilcorr::cli;

namespace {

json load_config(const std::string& path, const std::string& experiment) {
    if (!experiment.empty()) {
        const auto it = catalog().find(experiment);
        if (it == catalog().end()) throw nilcorr::ConfigError("unknown experiment id '" + experiment + "'");
        return it->second.config;
    }
    if (path.empty()) throw nilcorr::ConfigError("give --config PATH or --experiment ID");
    std::ifstream in(path);
    if (!in) throw nilcorr::ConfigError("cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw nilcorr::ConfigError(path + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nilcorr: experiments on multicorrelation sequences, nilsequences and Gowers norms"};
    app.require_subcommand(1);

    std::string config_path, experiment, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<double> budget;

    auto* run = app.add_subcommand("run", "run an experiment and write report.json and series.csv");
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--experiment", experiment, "shipped experiment id (see 'list')");
    run->add_option("--out", out_dir, "output directory (overrides out_dir)");
    run->add_option("--seed", seed, "RNG seed (overrides seed)");
    run->add_option("--threads", threads, "worker threads, 0 = available parallelism");
    run->add_option("--budget", budget, "operation budget for exact computations");

    auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled in");
    validate->add_option("--config", config_path, "JSON config file");
    validate->add_option("--experiment", experiment, "shipped experiment id");

    bool as_json = false;
    auto* list = app.add_subcommand("list", "list the shipped acceptance experiments");
    list->add_flag("--json", as_json, "print the full catalog with configs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            if (as_json) {
                json out = json::object();
                for (const auto& [id, entry] : catalog())
                    out[id] = {{"criterion", entry.criterion}, {"description", entry.description},
                               {"config", entry.config}};
                std::cout << out.dump(2) << '\n';
            } else {
                for (const auto& [id, entry] : catalog())
                    std::cout << id << '\t' << entry.criterion << '\t' << entry.description << '\n';
            }
            return 0;
        }
        json cfg = load_config(config_path, experiment);
        if (*validate) {
            std::cout << normalize(cfg).dump(2) << '\n';
            return 0;
        }
        if (cfg.is_object()) {
            if (seed) cfg["seed"] = *seed;
            if (threads) cfg["threads"] = *threads;
            if (budget) cfg["budget"] = *budget;
        }
        const Artifacts a = run_experiment(cfg);
        const std::string dir = out_dir.empty() ? a.report["config"]["out_dir"].get<std::string>() : out_dir;
        write_artifacts(a, dir);
        std::cout << a.report["results"].dump(2) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}
