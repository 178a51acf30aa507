#pragma once

#include <mshot/control.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mshot::cli {

enum class Mode { Default, Script, Inc };

inline constexpr int exit_sat         = 10;
inline constexpr int exit_unsat       = 20;
inline constexpr int exit_unknown     = 0;
inline constexpr int exit_input_error = 65;

struct Config {
    /// Program files; "-" reads standard input.
    std::vector<std::string>                         files;
    Mode                                             mode{Mode::Default};
    std::string                                      script;
    /// `name=term` overrides, applied in order (later ones win).
    std::vector<std::pair<std::string, std::string>> consts;
    std::optional<std::size_t>                       models;
    std::optional<SolveMode>                         enum_mode;
    std::optional<std::uint64_t>                     seed;
    /// Incremental mode: stop when a step's status equals this.
    std::optional<SolveStatus>                       istop;
    std::optional<std::int64_t>                      iinit;
    std::optional<std::int64_t>                      imax;
    bool                                             dump_ground{false};
    int                                              verbosity{0};
};

/// Prints models and the final status of solve calls in the standard format.
class Printer {
public:
    Printer(const Engine& engine, std::ostream& out) : engine_(engine), out_(out) {}

    void model(const Model& m);
    /// Prints the terminal status line and returns the matching exit code.
    int finish(const SolveResult& result);
    void statistics(const Statistics& stats, bool with_time);

private:
    const Engine& engine_;
    std::ostream& out_;
};

/// Grounds `base` and solves once.
int run_default(const Config& config, Engine& engine, std::ostream& out, const CancelToken& interrupt = {});

/// Executes control-script commands read from `script` against `engine`.
int run_script(const Config& config, Engine& engine, std::istream& script, std::ostream& out,
               const CancelToken& interrupt = {});

/// Incremental driver: grounds `base`, then `cumulative(k)` for k = iinit, ...
/// and solves with `query(k)` assigned true until the stop status is reached.
int run_inc(const Config& config, Engine& engine, std::ostream& out, const CancelToken& interrupt = {});

/// Full driver: loads the files, applies overrides and dispatches on the mode.
/// Errors are reported on `err` with exit code 65.
int run(const Config& config, std::ostream& out, std::ostream& err, const CancelToken& interrupt = {});

} // namespace mshot::cli
