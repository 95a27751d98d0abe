#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bslab/bslab.h"

namespace {

const std::vector<std::string> kCommands{"validate",      "lap-probe",  "resonance-locate", "resonance-track",
                                         "riesz",         "resonance-index", "stone-check", "stone-split",
                                         "select-k",      "stability-scan"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for coupling resonances and singular spectrum stability", "bslab"};
    app.set_version_flag("--version", std::string(bslab_version()));

    std::string command;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    int threads = 1;

    app.add_option("command", command, "Command to run")->required()->check(CLI::IsMember(kCommands));
    app.add_option("--config", config_path, "Experiment config (JSON object or array of objects)")->required();
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");
    auto* seed_opt = app.add_option("--seed", seed, "Overrides the config seed");
    app.add_option("--threads", threads, "Worker threads for grid loops")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return BSLAB_INVALID_CONFIG;
    }

    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "bslab: cannot read config " << config_path << "\n";
        return BSLAB_IO_ERROR;
    }
    std::stringstream text;
    text << in.rdbuf();

    const std::string base_dir = std::filesystem::path(config_path).parent_path().string();
    char* manifest = nullptr;
    const bslab_status status =
        bslab_run(command.c_str(), text.str().c_str(), base_dir.empty() ? "." : base_dir.c_str(),
                  out_opt->count() ? out_dir.c_str() : nullptr, seed_opt->count() ? 1 : 0, seed, threads, &manifest);

    if (status != BSLAB_OK) {
        std::cerr << "bslab: " << bslab_last_error_code() << ": " << bslab_last_error() << "\n";
    }
    if (manifest) {
        std::cout << manifest << "\n";
        bslab_string_free(manifest);
    }
    return status == BSLAB_INVALID_HANDLE ? BSLAB_COMPUTE_ERROR : status;
}
