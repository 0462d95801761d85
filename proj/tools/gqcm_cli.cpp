#include <cstdint>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"

#include "gqcm/experiments.hpp"
#include "gqcm/types.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int threads = 0;
};

// Exit codes: 0 success, 2 configuration/schema problem, 3 numerical failure,
// 1 anything else.
int run(const std::string& subcommand, const SubArgs& args) {
    static const std::map<std::string, std::set<std::string>> accepted{
        {"reconstruct", {"reconstruct"}},
        {"spectrum", {"spectrum"}},
        {"multistate", {"multistate"}},
        {"symmetries", {"symmetries"}},
        {"perturb", {"perturb"}},
        {"hoe", {"hoe-steady", "hoe-timedep", "hoe-lindblad"}},
        {"roundtrip", {"roundtrip"}},
    };

    gqcm::json config;
    try {
        config = gqcm::read_json_file(args.config_path);
    } catch (const std::exception& e) {
        std::cerr << "cannot read configuration: " << e.what() << "\n";
        return 2;
    }

    const std::vector<std::string> problems = gqcm::validate_config(config);
    if (!problems.empty()) {
        std::cerr << "configuration rejected:\n";
        for (const std::string& p : problems) std::cerr << "  " << p << "\n";
        return 2;
    }

    const std::string experiment = config.at("experiment").get<std::string>();
    if (!accepted.at(subcommand).count(experiment)) {
        std::cerr << "experiment '" << experiment << "' does not belong to the '" << subcommand
                  << "' subcommand\n";
        return 2;
    }

    std::string out = args.out_dir;
    if (out.empty() && config.contains("output"))
        out = config["output"].value("directory", std::string{});
    if (out.empty()) {
        std::cerr << "no output directory: pass --out or set output.directory\n";
        return 2;
    }

    if (args.seed >= 0)
        config = gqcm::apply_seed_override(std::move(config),
                                           static_cast<std::uint64_t>(args.seed));
    if (args.threads > 0) Eigen::setNbThreads(args.threads);

    try {
        const gqcm::json report = gqcm::run_experiment(config, out);
        std::cout << experiment << ": wrote " << out << "/report.json (config "
                  << report.at("config").get<std::string>() << ")\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const gqcm::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local Hamiltonian reconstruction from eigenstate data"};
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> subs{
        {"reconstruct", "Recover Hamiltonian coefficients from one eigenstate pair"},
        {"spectrum", "Diagonalize the configured model and save its spectrum"},
        {"multistate", "Reconstruction from an ensemble of eigenstate pairs"},
        {"symmetries", "List operators sharing all selected eigenstates"},
        {"perturb", "Error response of the reconstruction to state noise"},
        {"hoe", "Operator recovery from dynamics (steady, driven, or with jumps)"},
        {"roundtrip", "Random model generation/reconstruction consistency sweep"},
    };

    std::map<std::string, SubArgs> sub_args;
    std::vector<CLI::App*> sub_apps;
    for (const auto& [name, help] : subs) {
        CLI::App* sub = app.add_subcommand(name, help);
        SubArgs& a = sub_args[name];
        sub->add_option("--config", a.config_path, "JSON configuration file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", a.out_dir, "Output directory (overrides output.directory)");
        sub->add_option("--seed", a.seed, "Override the experiment's primary seed");
        sub->add_option("--threads", a.threads, "Eigen thread count");
        sub_apps.push_back(sub);
    }
    CLI::App* schema = app.add_subcommand("schema", "Print the configuration schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (schema->parsed()) {
        std::cout << gqcm::config_schema().dump(2) << "\n";
        return 0;
    }
    for (std::size_t i = 0; i < sub_apps.size(); ++i)
        if (sub_apps[i]->parsed()) return run(subs[i].first, sub_args.at(subs[i].first));
    return 1;
}
