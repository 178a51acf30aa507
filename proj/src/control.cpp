#include <mshot/control.hpp>

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace mshot {

// {{{ SolveHandle

SolveResult SolveHandle::wait() {
    std::unique_lock lock(state_->mutex);
    state_->finished_cv.wait(lock, [&] { return state_->finished; });
    if (state_->error) { std::rethrow_exception(state_->error); }
    return state_->result;
}

void SolveHandle::cancel() const { state_->cancel.cancel(); }

bool SolveHandle::done() const {
    std::lock_guard lock(state_->mutex);
    return state_->finished;
}

std::optional<SolveResult> SolveHandle::result() const {
    std::lock_guard lock(state_->mutex);
    if (!state_->finished || state_->error) { return std::nullopt; }
    return state_->result;
}

// }}}
// {{{ Engine

Engine::Engine(WarningSink warn) : warn_(std::move(warn)), store_(warn_) {
    subprograms_.emplace(Key{"base", 0}, SubprogramDef{"base", {}, {}});
}

Engine::~Engine() {
    if (background_) {
        background_->cancel.cancel();
        if (background_->thread.joinable()) { background_->thread.join(); }
    }
}

void Engine::collect_background() {
    if (!background_) { return; }
    {
        std::lock_guard lock(background_->mutex);
        if (!background_->finished) { return; }
    }
    if (background_->thread.joinable()) { background_->thread.join(); }
    if (!background_->error) { record(background_->result.stats); }
    background_.reset();
}

void Engine::ensure_idle(std::string_view operation) {
    collect_background();
    if (background_) { throw Error(ErrorCode::SolveAlreadyRunning, std::string(operation) + " while a background solve is running"); }
}

void Engine::merge(std::vector<SubprogramDef> defs) {
    for (auto& def : defs) {
        for (const auto& stmt : def.statements) {
            if (const auto* c = std::get_if<Const>(&stmt)) {
                auto it = std::find_if(program_consts_.begin(), program_consts_.end(), [&](const auto& p) { return p.first == c->name; });
                if (it == program_consts_.end()) {
                    program_consts_.emplace_back(c->name, c->value);
                } else if (it->second != c->value && warn_) {
                    warn_("constant " + c->name + " redefined; keeping " + to_string(it->second));
                }
            }
        }
        Key key{def.name, def.params.size()};
        auto it = subprograms_.find(key);
        if (it == subprograms_.end()) {
            subprograms_.emplace(key, std::move(def));
            continue;
        }
        // Reopened subprogram: rename the new parameter names to the existing ones.
        std::map<std::string, Term> rename;
        for (std::size_t i = 0; i < def.params.size(); ++i) {
            if (def.params[i] != it->second.params[i]) { rename[def.params[i]] = Term::make_symbol(it->second.params[i]); }
        }
        for (auto& stmt : def.statements) {
            it->second.statements.push_back(rename.empty() ? std::move(stmt) : substitute(stmt, rename));
        }
    }
}

void Engine::load(std::string_view text) {
    ensure_idle("load");
    merge(parse_program(text));
}

void Engine::add(const std::string& name, const std::vector<std::string>& params, std::string_view text) {
    ensure_idle("add");
    std::set<std::string> seen;
    for (const auto& p : params) {
        if (!seen.insert(p).second) { throw Error(ErrorCode::DuplicateParam, p + " in " + name); }
    }
    auto defs = parse_program(text);
    // The leading part of the text belongs to the named subprogram.
    defs.front().name   = name;
    defs.front().params = params;
    merge(std::move(defs));
}

void Engine::set_const(const std::string& name, const Term& value) {
    ensure_idle("set_const");
    const_overrides_[name] = value;
}

bool Engine::has_subprogram(const std::string& name, std::size_t arity) const {
    return subprograms_.count(Key{name, arity}) > 0;
}

void Engine::ground(const std::string& name, const std::vector<Value>& args) {
    ensure_idle("ground");
    if (!has_subprogram(name, args.size())) {
        throw Error(ErrorCode::UnknownSubprogram, name + "/" + std::to_string(args.size()));
    }
    pending_.emplace_back(name, args);
}

std::map<std::string, Term> Engine::constants() const {
    std::map<std::string, Term> out;
    for (const auto& [name, value] : program_consts_) { out[name] = value; }
    for (const auto& [name, value] : const_overrides_) { out[name] = value; }
    // Constants may refer to each other; resolve until nothing changes.
    for (std::size_t round = 0; round < out.size(); ++round) {
        bool changed = false;
        for (auto& [name, value] : out) {
            std::map<std::string, Term> others = out;
            others.erase(name);
            Term next = substitute(value, others);
            if (next != value) {
                value   = std::move(next);
                changed = true;
            }
        }
        if (!changed) { break; }
    }
    return out;
}

void Engine::flush() {
    ensure_idle("flush");
    if (pending_.empty()) { return; }
    auto queue = std::move(pending_);
    pending_.clear();
    auto deferred = std::move(deferred_);
    deferred_.clear();

    const auto consts = constants();
    std::vector<SubprogramDef> defs;
    defs.reserve(queue.size());
    for (const auto& [name, args] : queue) {
        const SubprogramDef& def = subprograms_.at(Key{name, args.size()});
        for (const auto& p : def.params) {
            if (consts.count(p) > 0 && warn_) { warn_("parameter " + p + " of " + name + " shadows a constant"); }
        }
        SubprogramDef inst = substitute_params(def, args);
        if (!consts.empty()) {
            for (auto& stmt : inst.statements) { stmt = substitute(stmt, consts); }
        }
        defs.push_back(std::move(inst));
    }
    auto units = instantiate(defs, store_.domain(), store_.atoms(), store_.next_tag(), warn_);
    for (auto& unit : units) { store_.join_module(std::move(unit)); }
    for (const auto& [atom, value] : deferred) {
        if (value) {
            store_.assign_external(atom, *value);
        } else {
            store_.release_external(atom);
        }
    }
}

SolverProgram Engine::prepare(const SolveRequest& request) {
    flush();
    std::vector<std::pair<AtomId, bool>> extra;
    for (const auto& [atom, value] : request.assumptions) {
        auto state = store_.external_state(atom);
        if (!state || state->status == ExternalStatus::Defined) {
            throw Error(ErrorCode::NotExternal, atom.to_string() + " is not a declared external");
        }
        if (state->status == ExternalStatus::Released) { throw Error(ErrorCode::AlreadyReleased, atom.to_string()); }
        extra.emplace_back(*store_.atoms().find(atom), value);
    }
    return store_.snapshot(extra);
}

SolveOptions Engine::options_for(const SolveRequest& request) const {
    SolveOptions o;
    o.seed         = config_.seed;
    o.restart_unit = config_.restarts;
    o.limit        = request.limit.value_or(config_.models);
    if (request.mode) {
        o.mode = *request.mode;
    } else if (config_.enum_mode) {
        o.mode = *config_.enum_mode;
    } else {
        o.mode = o.limit == 1 ? SolveMode::First : SolveMode::All;
    }
    return o;
}

void Engine::record(const Statistics& s) {
    stats_.choices += s.choices;
    stats_.conflicts += s.conflicts;
    stats_.restarts += s.restarts;
    stats_.models_found += s.models_found;
    stats_.rules_ground    = s.rules_ground;
    stats_.atoms           = s.atoms;
    stats_.solve_calls += s.solve_calls;
    stats_.last_solve_time = s.last_solve_time;
}

SolveResult Engine::solve(const ModelCallback& on_model, SolveRequest request) {
    ensure_idle("solve");
    SolverProgram program = prepare(request);
    SolveResult   result  = mshot::solve(program, on_model, options_for(request), request.cancel);
    record(result.stats);
    return result;
}

SolveHandle Engine::asolve(ModelCallback on_model, SolveRequest request) {
    ensure_idle("asolve");
    SolverProgram program = prepare(request);
    SolveOptions  options = options_for(request);
    auto state    = std::make_shared<SolveHandle::State>();
    state->cancel = request.cancel;
    state->thread = std::thread([state, program = std::move(program), options, on_model = std::move(on_model)] {
        SolveResult        result;
        std::exception_ptr error;
        try {
            result = mshot::solve(program, on_model, options, state->cancel);
        } catch (...) {
            error = std::current_exception();
        }
        std::lock_guard lock(state->mutex);
        state->result   = std::move(result);
        state->error    = error;
        state->finished = true;
        state->finished_cv.notify_all();
    });
    background_ = state;
    return SolveHandle(state);
}

void Engine::assign_external(const Value& atom, bool value) {
    ensure_idle("assign_external");
    if (!pending_.empty()) {
        deferred_.emplace_back(atom, value);
        return;
    }
    store_.assign_external(atom, value);
}

void Engine::release_external(const Value& atom) {
    ensure_idle("release_external");
    if (!pending_.empty()) {
        deferred_.emplace_back(atom, std::nullopt);
        return;
    }
    store_.release_external(atom);
}

void Engine::set_conf(std::string_view options, bool replace) {
    ensure_idle("set_conf");
    Config next = replace ? Config{} : config_;
    std::istringstream in{std::string(options)};
    std::string item;
    auto number = [](const std::string& key, std::string_view text) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw Error(ErrorCode::UnknownOption, key + "=" + std::string(text) + " (expected a non-negative integer)");
        }
        return v;
    };
    while (in >> item) {
        auto eq = item.find('=');
        if (eq == std::string::npos) { throw Error(ErrorCode::UnknownOption, item + " (expected key=value)"); }
        std::string key = item.substr(0, eq);
        std::string val = item.substr(eq + 1);
        if (key == "models") {
            next.models = number(key, val);
        } else if (key == "restarts") {
            next.restarts = static_cast<std::uint32_t>(number(key, val));
        } else if (key == "seed") {
            next.seed = number(key, val);
        } else if (key == "enum-mode") {
            static const std::map<std::string, SolveMode, std::less<>> modes{
                {"first", SolveMode::First}, {"all", SolveMode::All},
                {"intersection", SolveMode::Intersection}, {"union", SolveMode::Union}};
            if (val == "auto") {
                next.enum_mode.reset();
            } else if (auto it = modes.find(val); it != modes.end()) {
                next.enum_mode = it->second;
            } else {
                throw Error(ErrorCode::UnknownOption, key + "=" + val);
            }
        } else {
            throw Error(ErrorCode::UnknownOption, key);
        }
    }
    config_ = next;
}

Statistics Engine::get_stats() {
    collect_background();
    return stats_;
}

std::string Engine::dump_ground() const { return mshot::dump_ground(store_.units(), store_.atoms()); }

// }}}

} // namespace mshot
