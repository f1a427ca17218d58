#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conelab/cli.hpp"

namespace {

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw conelab::ConfigError(std::string(flag) + ": not a number: '" + item + "'");
        }
    }
    if (out.empty()) throw conelab::ConfigError(std::string(flag) + ": empty list");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral laboratory for the conformal Laplacian on minimal cones"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, lambda_text, eps_text, grid_text, out_dir;
    std::vector<std::string> cones;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--cone", cones, "Cone label (repeatable or comma separated)")->delimiter(',');
    app.add_option("--lambda", lambda_text, "Comma-separated lambda values");
    app.add_option("--eps", eps_text, "Comma-separated eps ladder");
    app.add_option("--grid", grid_text, "N,RIN,ROUT");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed");
    app.add_option("--out", out_dir, "Output directory");

    for (const auto& name : conelab::known_commands()) {
        app.add_subcommand(name, "Run the " + name + " stage");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return conelab::kExitConfig;
    }

    try {
        conelab::RunConfig config;
        if (!config_path.empty()) config = conelab::load_config_file(config_path);
        config.command = app.get_subcommands().front()->get_name();
        if (!cones.empty()) config.cones = cones;
        if (!lambda_text.empty()) config.lambdas = parse_list(lambda_text, "--lambda");
        if (!eps_text.empty()) config.eps = parse_list(eps_text, "--eps");
        if (!grid_text.empty()) {
            const auto g = parse_list(grid_text, "--grid");
            if (g.size() != 3) throw conelab::ConfigError("--grid expects N,RIN,ROUT");
            config.grid_n = static_cast<int>(g[0]);
            if (static_cast<double>(config.grid_n) != g[0]) throw conelab::ConfigError("--grid: N must be an integer");
            config.r_in = g[1];
            config.r_out = g[2];
        }
        if (*seed_opt) config.seed = seed;
        if (!out_dir.empty()) config.out_dir = out_dir;
        return conelab::run(config);
    } catch (const conelab::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return conelab::kExitConfig;
    }
}
