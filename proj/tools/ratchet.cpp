#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratchet/config.hpp"
#include "ratchet/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Classical and quantum simulator of a dissipative driven ratchet"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::optional<std::uint64_t> seed;

    for (const char* mode : {"classical", "quantum", "spectrum", "sweep"}) {
        auto* sub = app.add_subcommand(mode);
        sub->add_option("--config", config_path, "key=value configuration file");
        sub->add_option("--set", overrides, "override one key (key=value); repeatable, last wins")
            ->allow_extra_args(false);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "master random seed");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string mode_name = app.get_subcommands().front()->get_name();

    try {
        if (seed) overrides.push_back("seed=" + std::to_string(*seed));
        const auto cfg = ratchet::load_config(
            config_path.empty() ? std::nullopt : std::optional<std::string>(config_path), overrides,
            ratchet::parse_mode(mode_name));
        ratchet::run(cfg, out_dir);
    } catch (const ratchet::Error& e) {
        std::cerr << "error [" << e.category() << "]: " << e.what() << "\n";
        return ratchet::exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
