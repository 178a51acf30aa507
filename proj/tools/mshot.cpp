// Command-line front end: argument parsing and signal handling around
// mshot::cli::run.
#include <mshot/cli.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <map>

namespace {

mshot::CancelToken interrupt_token;

extern "C" void on_sigint(int /*signal*/) { interrupt_token.cancel(); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mshot: multi-shot answer set solving"};
    app.set_version_flag("--version", "mshot 0.1.0");

    mshot::cli::Config config;
    std::string        mode = "default";
    std::vector<std::string> consts;
    std::string        enum_mode;
    std::string        istop;

    app.add_option("files", config.files, "Program files (- for standard input)");
    app.add_option("--mode", mode, "Solving mode")->check(CLI::IsMember({"default", "inc"}));
    app.add_option("--script", config.script, "Control script to execute");
    app.add_option("--const", consts, "Constant override name=term")->take_all();
    app.add_option("--models", config.models, "Number of models (0 for all)");
    app.add_option("--enum", enum_mode, "Enumeration mode")->check(CLI::IsMember({"first", "all", "intersection", "union"}));
    app.add_option("--seed", config.seed, "Seed for decision heuristic tie-breaking");
    app.add_option("--istop", istop, "Incremental stop criterion")->check(CLI::IsMember({"sat", "unsat"}, CLI::ignore_case));
    app.add_option("--iinit", config.iinit, "First incremental step");
    app.add_option("--imax", config.imax, "Last incremental step");
    app.add_flag("--dump-ground", config.dump_ground, "Print the ground program before solving");
    app.add_flag("-v,--verbose", config.verbosity, "Print statistics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : mshot::cli::exit_input_error;
    }

    for (const auto& c : consts) {
        auto eq = c.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "error: --const expects name=term, got " << c << '\n';
            return mshot::cli::exit_input_error;
        }
        config.consts.emplace_back(c.substr(0, eq), c.substr(eq + 1));
    }
    if (!enum_mode.empty()) {
        static const std::map<std::string, mshot::SolveMode> modes{{"first", mshot::SolveMode::First},
                                                                   {"all", mshot::SolveMode::All},
                                                                   {"intersection", mshot::SolveMode::Intersection},
                                                                   {"union", mshot::SolveMode::Union}};
        config.enum_mode = modes.at(enum_mode);
    }
    if (!istop.empty()) {
        config.istop = (istop == "sat" || istop == "SAT") ? mshot::SolveStatus::Sat : mshot::SolveStatus::Unsat;
    }
    if (!config.script.empty()) {
        if (mode == "inc") {
            std::cerr << "error: --script and --mode=inc are exclusive\n";
            return mshot::cli::exit_input_error;
        }
        config.mode = mshot::cli::Mode::Script;
    } else if (mode == "inc") {
        config.mode = mshot::cli::Mode::Inc;
    }

    std::signal(SIGINT, on_sigint);
    return mshot::cli::run(config, std::cout, std::cerr, interrupt_token);
}
