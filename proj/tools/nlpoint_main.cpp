#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "nlpoint/run.hpp"

namespace {

int run_from_file(const std::string& config_path, nlpoint::Command expected) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "error: cannot read config file \"%s\"\n",
                     config_path.c_str());
        return 1;
    }
    std::ostringstream text;
    text << in.rdbuf();

    nlpoint::RunConfig cfg;
    try {
        cfg = nlpoint::parse_config(text.str());
    } catch (const nlpoint::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    if (cfg.command != expected) {
        std::fprintf(stderr,
                     "error: config names command \"%s\" but the \"%s\" subcommand was"
                     " invoked\n",
                     nlpoint::command_name(cfg.command), nlpoint::command_name(expected));
        return 1;
    }
    std::string message;
    const int code = nlpoint::run_command(cfg, &message);
    if (code != 0) std::fprintf(stderr, "error: %s\n", message.c_str());
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fixed-center point interactions: spectra, resolvent fields, merge"
                 " scans, critical couplings, boundary form probes"};
    app.set_version_flag("--version", nlpoint::kVersion);
    app.require_subcommand(1);
    app.footer("Environment: NLPOINT_THREADS caps the Monte Carlo worker threads;\n"
               "results are identical for every thread count.");

    const std::vector<std::pair<const char*, nlpoint::Command>> commands{
        {"spectrum", nlpoint::Command::spectrum},
        {"resolvent", nlpoint::Command::resolvent},
        {"merge-scan", nlpoint::Command::merge_scan},
        {"critical", nlpoint::Command::critical},
        {"form-probe", nlpoint::Command::form_probe},
        {"verify", nlpoint::Command::verify},
    };
    const char* blurbs[] = {
        "bound states and charge vectors of a center configuration",
        "resolvent field of a Gaussian source at sample points",
        "two centers merging, against the effective-strength prediction",
        "critical coupling tables over particle count and mass ratio",
        "Monte Carlo positivity probe of the many-body boundary form",
        "closed-form identity suite and invariant spot checks",
    };

    std::string config_path;
    nlpoint::Command chosen = nlpoint::Command::spectrum;
    for (std::size_t k = 0; k < commands.size(); ++k) {
        CLI::App* sub = app.add_subcommand(commands[k].first, blurbs[k]);
        sub->add_option("--config", config_path, "path to a JSON run configuration")
            ->required();
        const nlpoint::Command command = commands[k].second;
        sub->callback([&chosen, command] { chosen = command; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    return run_from_file(config_path, chosen);
}
