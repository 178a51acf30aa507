#include <mshot/cli.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace mshot::cli {

namespace {

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) { return {}; }
    auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split_words(std::string_view s) {
    std::istringstream       in{std::string(s)};
    std::vector<std::string> out;
    for (std::string w; in >> w;) { out.push_back(w); }
    return out;
}

std::optional<SolveMode> parse_mode(std::string_view s) {
    static const std::map<std::string, SolveMode, std::less<>> modes{
        {"first", SolveMode::First}, {"all", SolveMode::All}, {"intersection", SolveMode::Intersection}, {"union", SolveMode::Union}};
    if (auto it = modes.find(s); it != modes.end()) { return it->second; }
    return std::nullopt;
}

std::optional<std::uint64_t> parse_count(std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) { return std::nullopt; }
    return v;
}

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw Error(ErrorCode::ScriptError, "cannot read " + path); }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Splits `name(arg, ...)` into the name and the evaluated ground arguments.
std::pair<std::string, std::vector<Value>> parse_call(std::string_view text) {
    Value v = evaluate_ground(parse_term(text));
    if (v.kind() != Value::Kind::Fun || v.name().empty()) {
        throw Error(ErrorCode::ScriptError, "expected a subprogram name, got " + std::string(text));
    }
    return {v.name(), std::vector<Value>(v.args().begin(), v.args().end())};
}

Value parse_atom(std::string_view text) {
    Value v = evaluate_ground(parse_term(text));
    if (v.kind() != Value::Kind::Fun || v.name().empty()) {
        throw Error(ErrorCode::ScriptError, "expected an atom, got " + std::string(text));
    }
    return v;
}

[[noreturn]] void script_error(std::size_t line, const std::string& message) {
    throw Error(ErrorCode::ScriptError, "line " + std::to_string(line) + ": " + message);
}

SolveResult solve_and_print(Engine& engine, Printer& printer, SolveRequest request, int& code) {
    SolveResult result = engine.solve([&](const Model& m) {
        printer.model(m);
        return true;
    }, std::move(request));
    code = printer.finish(result);
    return result;
}

} // namespace

// {{{ Printer

void Printer::model(const Model& m) {
    std::vector<std::string> atoms;
    atoms.reserve(m.shown.size());
    for (AtomId a : m.shown) { atoms.push_back(engine_.symbol(a).to_string()); }
    std::sort(atoms.begin(), atoms.end());
    out_ << "Answer: " << m.index << '\n';
    for (std::size_t i = 0; i < atoms.size(); ++i) { out_ << (i > 0 ? " " : "") << atoms[i]; }
    out_ << '\n';
    if (!m.cost.empty()) {
        out_ << "Optimization:";
        for (const auto& [priority, value] : m.cost.levels()) { out_ << ' ' << value; }
        out_ << '\n';
    }
    out_.flush();
}

int Printer::finish(const SolveResult& result) {
    switch (result.status) {
        case SolveStatus::Interrupted: out_ << "UNKNOWN\n"; return exit_unknown;
        case SolveStatus::Unsat: out_ << "UNSATISFIABLE\n"; return exit_unsat;
        case SolveStatus::Sat:
            out_ << (result.optimum_proven ? "OPTIMUM FOUND" : "SATISFIABLE") << '\n';
            return exit_sat;
    }
    return exit_unknown;
}

void Printer::statistics(const Statistics& s, bool with_time) {
    out_ << "Models       : " << s.models_found << '\n'
         << "Calls        : " << s.solve_calls << '\n'
         << "Choices      : " << s.choices << '\n'
         << "Conflicts    : " << s.conflicts << '\n'
         << "Restarts     : " << s.restarts << '\n'
         << "Rules        : " << s.rules_ground << '\n'
         << "Atoms        : " << s.atoms << '\n';
    if (with_time) { out_ << "Time         : " << s.last_solve_time << "s\n"; }
}

// }}}
// {{{ Modes

int run_default(const Config& config, Engine& engine, std::ostream& out, const CancelToken& interrupt) {
    Printer printer(engine, out);
    engine.ground("base");
    if (config.dump_ground) {
        engine.flush();
        out << engine.dump_ground();
    }
    SolveRequest request;
    request.cancel = interrupt;
    int code       = exit_unknown;
    solve_and_print(engine, printer, std::move(request), code);
    return code;
}

int run_script(const Config& config, Engine& engine, std::istream& script, std::ostream& out, const CancelToken& interrupt) {
    Printer     printer(engine, out);
    int         code = exit_unknown;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(script, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line.front() == '#') { continue; }
        auto        space = line.find_first_of(" \t");
        std::string cmd   = line.substr(0, space);
        std::string rest  = space == std::string::npos ? std::string{} : trim(line.substr(space));
        try {
            if (cmd == "ground") {
                if (rest.empty()) { script_error(line_no, "ground needs a subprogram"); }
                auto [name, args] = parse_call(rest);
                engine.ground(name, args);
            } else if (cmd == "assign") {
                auto words = split_words(rest);
                if (words.size() < 2 || (words.back() != "true" && words.back() != "false")) {
                    script_error(line_no, "usage: assign <atom> <true|false>");
                }
                std::string atom = trim(rest.substr(0, rest.rfind(words.back())));
                engine.assign_external(parse_atom(atom), words.back() == "true");
            } else if (cmd == "release") {
                if (rest.empty()) { script_error(line_no, "release needs an atom"); }
                engine.release_external(parse_atom(rest));
            } else if (cmd == "solve") {
                SolveRequest request;
                request.cancel = interrupt;
                for (const auto& w : split_words(rest)) {
                    auto eq = w.find('=');
                    std::string key = w.substr(0, eq);
                    std::string val = eq == std::string::npos ? std::string{} : w.substr(eq + 1);
                    if (key == "models") {
                        auto n = parse_count(val);
                        if (!n) { script_error(line_no, "bad models value " + val); }
                        request.limit = *n;
                    } else if (key == "enum") {
                        request.mode = parse_mode(val);
                        if (!request.mode) { script_error(line_no, "bad enum value " + val); }
                    } else {
                        script_error(line_no, "unknown solve option " + w);
                    }
                }
                if (request.limit && !request.mode && !engine.config().enum_mode) {
                    request.mode = *request.limit == 1 ? SolveMode::First : SolveMode::All;
                }
                if (config.dump_ground) {
                    engine.flush();
                    out << engine.dump_ground();
                }
                auto result = solve_and_print(engine, printer, std::move(request), code);
                if (result.status == SolveStatus::Interrupted) { return code; }
            } else if (cmd == "add") {
                auto marker = rest.find("<<");
                if (marker == std::string::npos) { script_error(line_no, "usage: add <name>[(<params>)] <<END"); }
                std::string header = trim(rest.substr(0, marker));
                std::string term   = trim(rest.substr(marker + 2));
                if (term.empty()) { script_error(line_no, "missing terminator after <<"); }
                std::string name = header;
                std::vector<std::string> params;
                if (auto open = header.find('('); open != std::string::npos) {
                    if (header.back() != ')') { script_error(line_no, "unbalanced parameter list"); }
                    name = trim(header.substr(0, open));
                    std::istringstream plist(header.substr(open + 1, header.size() - open - 2));
                    for (std::string p; std::getline(plist, p, ',');) { params.push_back(trim(p)); }
                }
                if (name.empty()) { script_error(line_no, "add needs a subprogram name"); }
                std::string body;
                bool        closed = false;
                std::size_t start  = line_no;
                while (std::getline(script, raw)) {
                    ++line_no;
                    if (trim(raw) == term) {
                        closed = true;
                        break;
                    }
                    body += raw;
                    body += '\n';
                }
                if (!closed) { script_error(start, "missing " + term); }
                engine.add(name, params, body);
            } else if (cmd == "conf") {
                auto words   = split_words(rest);
                bool replace = !words.empty() && words.back() == "replace";
                if (replace) { words.pop_back(); }
                std::string options;
                for (const auto& w : words) { options += w + ' '; }
                engine.set_conf(options, replace);
            } else if (cmd == "stats") {
                printer.statistics(engine.get_stats(), false);
            } else {
                script_error(line_no, "unknown command " + cmd);
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ScriptError) { throw; }
            script_error(line_no, e.what());
        }
    }
    return code;
}

int run_inc(const Config& config, Engine& engine, std::ostream& out, const CancelToken& interrupt) {
    if (!engine.has_subprogram("cumulative", 1)) { throw Error(ErrorCode::MissingSubprogram, "cumulative/1"); }
    const SolveStatus  stop  = config.istop.value_or(SolveStatus::Sat);
    const std::int64_t first = config.iinit.value_or(1);
    Printer printer(engine, out);
    int     code = exit_unknown;
    engine.ground("base");
    for (std::int64_t step = first; !config.imax || step <= *config.imax; ++step) {
        engine.ground("cumulative", {Value::integer(step)});
        engine.flush();
        const Value query = Value::function("query", {Value::integer(step)});
        engine.assign_external(query, true);
        out << "Step: " << step << '\n';
        SolveRequest request;
        request.cancel = interrupt;
        auto result    = solve_and_print(engine, printer, std::move(request), code);
        if (result.status == SolveStatus::Interrupted || result.status == stop) { return code; }
        engine.release_external(query);
    }
    return code;
}

int run(const Config& config, std::ostream& out, std::ostream& err, const CancelToken& interrupt) {
    try {
        Engine engine([&err](const std::string& w) { err << "warning: " << w << '\n'; });
        for (const auto& file : config.files) { engine.load(read_file(file)); }

        Config effective = config;
        for (const auto& [name, text] : config.consts) {
            Term value = parse_term(text);
            engine.set_const(name, value);
            // The incremental controls may also arrive as constants.
            if (name == "istop" && !config.istop) {
                std::string v = to_string(value);
                std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
                if (v == "sat") {
                    effective.istop = SolveStatus::Sat;
                } else if (v == "unsat") {
                    effective.istop = SolveStatus::Unsat;
                } else {
                    throw Error(ErrorCode::UnknownOption, "istop=" + v);
                }
            }
            if ((name == "iinit" || name == "imax") && value.kind == Term::Kind::Integer) {
                if (name == "iinit" && !config.iinit) { effective.iinit = value.integer; }
                if (name == "imax" && !config.imax) { effective.imax = value.integer; }
            }
        }
        std::string conf;
        if (config.models) { conf += "models=" + std::to_string(*config.models) + ' '; }
        if (config.seed) { conf += "seed=" + std::to_string(*config.seed) + ' '; }
        if (config.enum_mode) { conf += "enum-mode=" + std::string(to_string(*config.enum_mode)) + ' '; }
        engine.set_conf(conf, false);

        int code = exit_unknown;
        switch (config.mode) {
            case Mode::Default: code = run_default(effective, engine, out, interrupt); break;
            case Mode::Inc: code = run_inc(effective, engine, out, interrupt); break;
            case Mode::Script: {
                std::ifstream script(config.script);
                if (!script) { throw Error(ErrorCode::ScriptError, "cannot read " + config.script); }
                code = run_script(effective, engine, script, out, interrupt);
                break;
            }
        }
        if (config.verbosity > 0) { Printer(engine, out).statistics(engine.get_stats(), true); }
        return code;
    } catch (const std::exception& e) {
        out.flush();
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    }
}

// }}}

} // namespace mshot::cli
