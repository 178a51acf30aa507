#include <mshot/store.hpp>

#include <algorithm>

namespace mshot {

Store::Store(WarningSink warn) : warn_(std::move(warn)) {}

void Store::join_module(GroundUnit unit) {
    const std::uint32_t tag = next_tag();
    unit.increment_tag      = tag;

    // Definitions must stay local to one increment.
    std::vector<AtomId> defined;
    for (const auto& r : unit.rules) {
        for (AtomId a : r.head_atoms()) {
            if (auto it = defined_in_.find(a); it != defined_in_.end()) {
                throw Error(ErrorCode::Redefinition,
                            atoms_.symbol(a).to_string() + " already defined in increment " + std::to_string(it->second));
            }
            if (auto it = externals_.find(a); it != externals_.end() && it->second.status == ExternalStatus::Released) {
                throw Error(ErrorCode::Redefinition, atoms_.symbol(a).to_string() + " was released and cannot be defined");
            }
            if (std::find(defined.begin(), defined.end(), a) == defined.end()) { defined.push_back(a); }
        }
    }
    check_cycles(unit, tag);

    IncrementRecord rec;
    rec.tag        = tag;
    rec.defined    = defined;
    rec.first_rule = rules_.size();
    for (const auto& r : unit.rules) {
        rules_.push_back(r);
        rule_tags_.push_back(tag);
    }
    rec.end_rule = rules_.size();
    for (AtomId a : defined) {
        defined_in_.emplace(a, tag);
        if (auto it = externals_.find(a); it != externals_.end() && it->second.status == ExternalStatus::Free) {
            if (warn_) {
                warn_("external " + atoms_.symbol(a).to_string() + " is now defined by rules; its assignment (" +
                      (it->second.value ? "true" : "false") + ") is discarded");
            }
            it->second.status = ExternalStatus::Defined;
        }
    }
    for (AtomId a : unit.external_decls) {
        if (defined_in_.count(a) > 0) {
            if (warn_) { warn_("#external " + atoms_.symbol(a).to_string() + " ignored: atom is defined by rules"); }
            continue;
        }
        auto [it, inserted] = externals_.try_emplace(a, ExternalState{});
        if (!inserted && it->second.status == ExternalStatus::Released) {
            if (warn_) { warn_("#external " + atoms_.symbol(a).to_string() + " ignored: atom was released"); }
            continue;
        }
        rec.external_decls.push_back(a);
    }
    for (const auto& m : unit.minimize_entries) {
        auto key = std::make_pair(m.priority, m.tuple);
        if (auto it = objective_index_.find(key); it != objective_index_.end()) {
            auto& conds = objective_[it->second].conditions;
            if (std::find(conds.begin(), conds.end(), m.condition) == conds.end()) { conds.push_back(m.condition); }
        } else {
            objective_index_.emplace(std::move(key), objective_.size());
            objective_.push_back(ObjectiveTerm{m.weight, m.priority, m.tuple, {m.condition}});
        }
    }
    shown_.insert(unit.shown.begin(), unit.shown.end());
    increments_.push_back(std::move(rec));
    units_.push_back(std::move(unit));
}

// Positive dependency graph over all rules; any strongly connected component
// whose atoms stem from different increments is rejected.
void Store::check_cycles(const GroundUnit& unit, std::uint32_t tag) const {
    const std::size_t n = atoms_.next_id();
    std::vector<std::vector<AtomId>> succ(n);
    std::vector<std::int64_t>        owner(n, -1);
    bool touches_old = false;
    auto add_rule = [&](const GroundRule& r, std::uint32_t t) {
        for (AtomId h : r.head_atoms()) {
            owner[h] = t;
            for (AtomId b : r.pos) { succ[h].push_back(b); }
        }
    };
    for (std::size_t i = 0; i < rules_.size(); ++i) { add_rule(rules_[i], rule_tags_[i]); }
    for (const auto& r : unit.rules) { add_rule(r, tag); }
    // A cross-increment cycle needs an old rule depending on a new head.
    for (std::size_t i = 0; i < rules_.size() && !touches_old; ++i) {
        for (AtomId b : rules_[i].pos) {
            if (owner[b] == tag) {
                touches_old = true;
                break;
            }
        }
    }
    if (!touches_old) { return; }

    // Iterative Tarjan.
    std::vector<std::int64_t> index(n, -1);
    std::vector<std::int64_t> low(n, 0);
    std::vector<bool>         on_stack(n, false);
    std::vector<AtomId>       stack;
    std::int64_t              counter = 0;
    for (AtomId root = 1; root < n; ++root) {
        if (index[root] >= 0 || succ[root].empty()) { continue; }
        std::vector<std::pair<AtomId, std::size_t>> frames{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next < succ[v].size()) {
                AtomId w = succ[v][next++];
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            AtomId done = v;
            frames.pop_back();
            if (!frames.empty()) { low[frames.back().first] = std::min(low[frames.back().first], low[done]); }
            if (low[done] != index[done]) { continue; }
            std::vector<AtomId> scc;
            AtomId              w = 0;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                scc.push_back(w);
            } while (w != done);
            if (scc.size() < 2) { continue; }
            std::set<std::int64_t> owners;
            for (AtomId a : scc) { owners.insert(owner[a]); }
            if (owners.size() > 1) {
                std::vector<std::string> names;
                for (AtomId a : scc) { names.push_back(atoms_.symbol(a).to_string()); }
                std::sort(names.begin(), names.end());
                std::string witness = "[";
                for (std::size_t i = 0; i < names.size(); ++i) { witness += (i > 0 ? "," : "") + names[i]; }
                throw Error(ErrorCode::CrossIncrementPositiveCycle, witness + "]");
            }
        }
    }
}

AtomId Store::resolve(const Value& atom) const {
    auto id = atoms_.find(atom);
    if (!id) { throw Error(ErrorCode::NotExternal, atom.to_string() + " was never declared external"); }
    return *id;
}

void Store::assign_external(const Value& atom, bool value) { assign_external(resolve(atom), value); }

void Store::assign_external(AtomId atom, bool value) {
    auto it = externals_.find(atom);
    if (it != externals_.end() && it->second.status == ExternalStatus::Released) {
        throw Error(ErrorCode::AlreadyReleased, atoms_.symbol(atom).to_string());
    }
    if (defined_in_.count(atom) > 0) { throw Error(ErrorCode::AlreadyDefined, atoms_.symbol(atom).to_string()); }
    if (it == externals_.end()) {
        throw Error(ErrorCode::NotExternal, atoms_.symbol(atom).to_string() + " was never declared external");
    }
    it->second.value = value;
}

void Store::release_external(const Value& atom) { release_external(resolve(atom)); }

void Store::release_external(AtomId atom) {
    auto it = externals_.find(atom);
    if (it != externals_.end() && it->second.status == ExternalStatus::Released) {
        throw Error(ErrorCode::AlreadyReleased, atoms_.symbol(atom).to_string());
    }
    if (defined_in_.count(atom) > 0) { throw Error(ErrorCode::AlreadyDefined, atoms_.symbol(atom).to_string()); }
    if (it == externals_.end()) {
        throw Error(ErrorCode::NotExternal, atoms_.symbol(atom).to_string() + " was never declared external");
    }
    it->second = ExternalState{ExternalStatus::Released, false};
}

std::optional<ExternalState> Store::external_state(const Value& atom) const {
    auto id = atoms_.find(atom);
    if (!id) { return std::nullopt; }
    auto it = externals_.find(*id);
    if (it == externals_.end()) { return std::nullopt; }
    return it->second;
}

bool Store::is_external(AtomId atom) const { return externals_.count(atom) > 0; }

SolverProgram Store::snapshot(std::span<const std::pair<AtomId, bool>> extra) const {
    SolverProgram p;
    p.rules      = rules_;
    p.atom_count = atoms_.next_id();
    for (const auto& [atom, state] : externals_) {
        if (state.status == ExternalStatus::Defined) { continue; }
        p.inputs.push_back(atom);
        p.assumptions.emplace_back(atom, state.status == ExternalStatus::Free && state.value);
    }
    for (const auto& [atom, value] : extra) {
        if (auto ext = externals_.find(atom); ext != externals_.end() && ext->second.status == ExternalStatus::Released) {
            continue;
        }
        auto it = std::find_if(p.assumptions.begin(), p.assumptions.end(), [a = atom](const auto& x) { return x.first == a; });
        if (it != p.assumptions.end()) {
            it->second = value;
        } else {
            p.assumptions.emplace_back(atom, value);
        }
    }
    p.objective = objective_;
    p.show_all  = shown_.empty();
    if (!p.show_all) {
        for (AtomId id = 1; id < p.atom_count; ++id) {
            const Value& sym = atoms_.symbol(id);
            if (shown_.count(Signature{sym.name(), sym.arity()}) > 0) { p.shown.push_back(id); }
        }
    }
    return p;
}

} // namespace mshot
