#include <mshot/solver.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

namespace mshot {

std::string_view to_string(SolveMode mode) {
    switch (mode) {
        case SolveMode::First: return "first";
        case SolveMode::All: return "all";
        case SolveMode::Intersection: return "intersection";
        case SolveMode::Union: return "union";
    }
    return "?";
}

std::string_view to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Sat: return "SAT";
        case SolveStatus::Unsat: return "UNSAT";
        case SolveStatus::Interrupted: return "INTERRUPTED";
    }
    return "?";
}

bool Model::contains(AtomId atom) const { return std::binary_search(atoms.begin(), atoms.end(), atom); }

namespace {

using Var = std::uint32_t;
using Lit = std::uint32_t;

constexpr Lit  pos_lit(Var v) { return v << 1U; }
constexpr Lit  neg_lit(Var v) { return (v << 1U) | 1U; }
constexpr Var  var_of(Lit l) { return l >> 1U; }
constexpr bool is_neg(Lit l) { return (l & 1U) != 0; }
constexpr Lit  negate(Lit l) { return l ^ 1U; }

// Atom 0 is the constant false atom.
constexpr Lit false_lit = pos_lit(0);
constexpr Lit true_lit  = neg_lit(0);

constexpr std::int8_t l_true  = 1;
constexpr std::int8_t l_false = -1;
constexpr std::int8_t l_undef = 0;

constexpr int no_reason = -1;

double luby(double y, std::uint64_t x) {
    std::uint64_t size = 1;
    int           seq  = 0;
    while (size < x + 1) {
        ++seq;
        size = 2 * size + 1;
    }
    while (size - 1 != x) {
        size = (size - 1) >> 1U;
        --seq;
        x = x % size;
    }
    return std::pow(y, seq);
}

/// Binary max-heap of variables ordered by activity.
class VarOrder {
public:
    explicit VarOrder(const std::vector<double>& activity) : activity_(activity) {}

    void grow(Var n) { pos_.resize(n, -1); }
    [[nodiscard]] bool empty() const { return heap_.empty(); }
    [[nodiscard]] bool contains(Var v) const { return pos_[v] >= 0; }

    void insert(Var v) {
        if (contains(v)) { return; }
        pos_[v] = static_cast<int>(heap_.size());
        heap_.push_back(v);
        up(heap_.size() - 1);
    }

    void increased(Var v) {
        if (contains(v)) { up(static_cast<std::size_t>(pos_[v])); }
    }

    Var pop() {
        Var top = heap_.front();
        heap_.front() = heap_.back();
        pos_[heap_.front()] = 0;
        heap_.pop_back();
        pos_[top] = -1;
        if (!heap_.empty()) { down(0); }
        return top;
    }

private:
    bool before(Var a, Var b) const { return activity_[a] > activity_[b] || (activity_[a] == activity_[b] && a < b); }

    void up(std::size_t i) {
        Var v = heap_[i];
        while (i > 0) {
            std::size_t parent = (i - 1) / 2;
            if (!before(v, heap_[parent])) { break; }
            heap_[i]       = heap_[parent];
            pos_[heap_[i]] = static_cast<int>(i);
            i              = parent;
        }
        heap_[i] = v;
        pos_[v]  = static_cast<int>(i);
    }

    void down(std::size_t i) {
        Var v = heap_[i];
        while (true) {
            std::size_t child = 2 * i + 1;
            if (child >= heap_.size()) { break; }
            if (child + 1 < heap_.size() && before(heap_[child + 1], heap_[child])) { ++child; }
            if (!before(heap_[child], v)) { break; }
            heap_[i]       = heap_[child];
            pos_[heap_[i]] = static_cast<int>(i);
            i              = child;
        }
        heap_[i] = v;
        pos_[v]  = static_cast<int>(i);
    }

    const std::vector<double>& activity_;
    std::vector<Var>           heap_;
    std::vector<int>           pos_;
};

struct Body {
    Lit                 lit{true_lit};
    std::vector<AtomId> pos;
};

struct CostEntry {
    Lit          lit{true_lit};
    std::int64_t weight{0};
    std::size_t  level{0};
};

/// CDCL search over the completion of a normal program with choice rules.
class Search {
public:
    Search(const SolverProgram& program, const SolveOptions& options, const CancelToken& cancel)
        : program_(program), options_(options), cancel_(cancel), order_(activity_) {
        translate();
    }

    SolveResult run(const ModelCallback& on_model);

private:
    enum class Outcome { None, Propagated, Conflict, Unsat };

    // {{{ assignment

    [[nodiscard]] std::int8_t value(Lit l) const {
        std::int8_t v = assign_[var_of(l)];
        return is_neg(l) ? static_cast<std::int8_t>(-v) : v;
    }
    [[nodiscard]] int decision_level() const { return static_cast<int>(trail_lim_.size()); }

    Var new_var() {
        Var v = static_cast<Var>(assign_.size());
        assign_.push_back(l_undef);
        level_.push_back(0);
        reason_.push_back(no_reason);
        activity_.push_back(0.0);
        phase_.push_back(true);
        seen_.push_back(false);
        watches_.emplace_back();
        watches_.emplace_back();
        order_.grow(v + 1);
        return v;
    }

    void enqueue(Lit l, int reason) {
        Var v       = var_of(l);
        assign_[v]  = is_neg(l) ? l_false : l_true;
        level_[v]   = decision_level();
        reason_[v]  = reason;
        trail_.push_back(l);
    }

    void backtrack(int level) {
        if (decision_level() <= level) { return; }
        for (std::size_t i = trail_.size(); i-- > trail_lim_[static_cast<std::size_t>(level)];) {
            Var v      = var_of(trail_[i]);
            phase_[v]  = is_neg(trail_[i]);
            assign_[v] = l_undef;
            reason_[v] = no_reason;
            order_.insert(v);
        }
        trail_.resize(trail_lim_[static_cast<std::size_t>(level)]);
        trail_lim_.resize(static_cast<std::size_t>(level));
        qhead_ = trail_.size();
    }

    // }}}
    // {{{ clauses

    void attach(std::size_t ci) {
        const auto& c = clauses_[ci];
        watches_[c[0]].push_back(static_cast<std::uint32_t>(ci));
        watches_[c[1]].push_back(static_cast<std::uint32_t>(ci));
    }

    /// Adds a clause at decision level 0. Returns false if it is violated there.
    bool add_root_clause(std::vector<Lit> lits) {
        std::sort(lits.begin(), lits.end());
        lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
        std::vector<Lit> kept;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (i + 1 < lits.size() && lits[i + 1] == negate(lits[i])) { return true; }
            std::int8_t v = value(lits[i]);
            if (v == l_true) { return true; }
            if (v == l_undef) { kept.push_back(lits[i]); }
        }
        if (kept.empty()) { return false; }
        if (kept.size() == 1) {
            enqueue(kept[0], no_reason);
            return true;
        }
        clauses_.push_back(std::move(kept));
        attach(clauses_.size() - 1);
        return true;
    }

    /// Adds a clause derived during search whose literals, except possibly the
    /// first, are all false. Either propagates the first literal or reports
    /// the clause as conflicting.
    Outcome add_derived_clause(std::vector<Lit> lits, int& conflict) {
        std::erase_if(lits, [&](Lit l) { return value(l) == l_false && level_[var_of(l)] == 0; });
        if (lits.empty()) { return Outcome::Unsat; }
        std::stable_sort(lits.begin(), lits.end(), [&](Lit a, Lit b) {
            auto rank = [&](Lit l) { return value(l) == l_false ? level_[var_of(l)] : 1 << 30; };
            return rank(a) > rank(b);
        });
        clauses_.push_back(lits);
        int ci = static_cast<int>(clauses_.size() - 1);
        if (lits.size() >= 2) { attach(static_cast<std::size_t>(ci)); }
        std::int8_t first = value(lits[0]);
        if (first == l_false) {
            conflict = ci;
            return Outcome::Conflict;
        }
        if (first == l_undef) {
            enqueue(lits[0], lits.size() == 1 && decision_level() == 0 ? no_reason : ci);
            return Outcome::Propagated;
        }
        return Outcome::None;
    }

    int propagate_clauses() {
        while (qhead_ < trail_.size()) {
            Lit   falsified = negate(trail_[qhead_++]);
            auto& ws        = watches_[falsified];
            std::size_t i   = 0;
            std::size_t j   = 0;
            while (i < ws.size()) {
                std::uint32_t ci = ws[i++];
                auto&         c  = clauses_[ci];
                if (c[0] == falsified) { std::swap(c[0], c[1]); }
                if (value(c[0]) == l_true) {
                    ws[j++] = ci;
                    continue;
                }
                bool moved = false;
                for (std::size_t k = 2; k < c.size(); ++k) {
                    if (value(c[k]) != l_false) {
                        std::swap(c[1], c[k]);
                        watches_[c[1]].push_back(ci);
                        moved = true;
                        break;
                    }
                }
                if (moved) { continue; }
                ws[j++] = ci;
                if (value(c[0]) == l_false) {
                    while (i < ws.size()) { ws[j++] = ws[i++]; }
                    ws.resize(j);
                    qhead_ = trail_.size();
                    return static_cast<int>(ci);
                }
                enqueue(c[0], static_cast<int>(ci));
            }
            ws.resize(j);
        }
        return no_reason;
    }

    // }}}
    // {{{ translation

    Lit body_lit(std::vector<AtomId> pos, std::vector<AtomId> neg) {
        std::sort(pos.begin(), pos.end());
        pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
        std::sort(neg.begin(), neg.end());
        neg.erase(std::unique(neg.begin(), neg.end()), neg.end());
        auto key = std::make_pair(pos, neg);
        if (auto it = body_index_.find(key); it != body_index_.end()) { return bodies_[it->second].lit; }
        if (pos.empty() && neg.empty()) {
            // Facts still need a body entry so the unfounded check sees their support.
            body_by_lit_.emplace(true_lit, bodies_.size());
            body_index_.emplace(std::move(key), bodies_.size());
            bodies_.push_back(Body{true_lit, {}});
            return true_lit;
        }
        Lit b = pos_lit(new_var());
        std::vector<Lit> all{b};
        for (AtomId a : pos) {
            pending_.push_back({negate(b), pos_lit(a)});
            all.push_back(neg_lit(a));
        }
        for (AtomId a : neg) {
            pending_.push_back({negate(b), neg_lit(a)});
            all.push_back(pos_lit(a));
        }
        pending_.push_back(std::move(all));
        body_by_lit_.emplace(b, bodies_.size());
        body_index_.emplace(std::move(key), bodies_.size());
        bodies_.push_back(Body{b, std::move(pos)});
        return b;
    }

    std::size_t body_id(Lit lit) const {
        auto it = body_by_lit_.find(lit);
        return it == body_by_lit_.end() ? bodies_.size() : it->second;
    }

    // Counting chain: returns literals meaning "at least j of xs are true" for j = 0..max.
    std::vector<Lit> at_least(const std::vector<AtomId>& xs, std::size_t max) {
        std::vector<Lit> prev(max + 1, false_lit);
        prev[0] = true_lit;
        for (AtomId x : xs) {
            std::vector<Lit> cur(max + 1, false_lit);
            cur[0] = true_lit;
            for (std::size_t j = 1; j <= max; ++j) {
                Lit a = prev[j];
                Lit c = prev[j - 1];
                Lit s = pos_lit(new_var());
                cur[j] = s;
                // s <-> a | (c & x)
                pending_.push_back({negate(a), s});
                pending_.push_back({negate(c), neg_lit(x), s});
                pending_.push_back({negate(s), a, c});
                pending_.push_back({negate(s), a, pos_lit(x)});
            }
            prev = std::move(cur);
        }
        return prev;
    }

    void translate() {
        const AtomId n = std::max<AtomId>(program_.atom_count, 1);
        for (AtomId a = 0; a < n; ++a) { new_var(); }

        std::vector<std::vector<Lit>> support(n);
        std::vector<std::vector<std::size_t>> support_bodies(n);
        std::vector<bool> is_input(n, false);
        for (AtomId a : program_.inputs) {
            if (a < n) { is_input[a] = true; }
        }

        for (const auto& r : program_.rules) {
            Lit b = body_lit(r.pos, r.neg);
            if (r.is_constraint()) {
                pending_.push_back({negate(b)});
            } else if (const auto* h = std::get_if<AtomId>(&r.head)) {
                pending_.push_back({negate(b), pos_lit(*h)});
                support[*h].push_back(b);
            } else {
                const auto& ch = std::get<GroundChoice>(r.head);
                std::vector<AtomId> xs = ch.atoms;
                std::sort(xs.begin(), xs.end());
                xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
                for (AtomId x : xs) { support[x].push_back(b); }
                const auto k = static_cast<std::int64_t>(xs.size());
                std::int64_t lower = ch.lower.value_or(0);
                std::int64_t upper = ch.upper.value_or(k);
                if (lower > k || upper < 0 || lower > upper) {
                    pending_.push_back({negate(b)});
                    continue;
                }
                if (lower <= 0 && upper >= k) { continue; }
                auto need   = static_cast<std::size_t>(std::max<std::int64_t>(lower, upper < k ? upper + 1 : 0));
                auto counts = at_least(xs, need);
                if (lower > 0) { pending_.push_back({negate(b), counts[static_cast<std::size_t>(lower)]}); }
                if (upper < k) { pending_.push_back({negate(b), negate(counts[static_cast<std::size_t>(upper + 1)])}); }
            }
        }
        // Completion: a true atom needs a true supporting body.
        for (AtomId a = 1; a < n; ++a) {
            if (is_input[a]) { continue; }
            std::vector<Lit> c{neg_lit(a)};
            c.insert(c.end(), support[a].begin(), support[a].end());
            pending_.push_back(std::move(c));
        }
        pending_.push_back({neg_lit(0)});

        build_unfounded_check(support, is_input);

        // Objective.
        std::map<std::int64_t, std::size_t, std::greater<>> levels;
        for (const auto& t : program_.objective) { levels.emplace(t.priority, 0); }
        for (auto& [prio, idx] : levels) {
            idx = priorities_.size();
            priorities_.push_back(prio);
        }
        for (const auto& t : program_.objective) {
            std::vector<Lit> conds;
            for (const auto& cond : t.conditions) {
                std::vector<AtomId> pos;
                std::vector<AtomId> neg;
                for (const auto& l : cond) { (l.negated ? neg : pos).push_back(l.atom); }
                conds.push_back(body_lit(pos, neg));
            }
            Lit e = false_lit;
            if (conds.size() == 1) {
                e = conds[0];
            } else if (!conds.empty()) {
                e = pos_lit(new_var());
                std::vector<Lit> any{negate(e)};
                for (Lit c : conds) {
                    pending_.push_back({negate(c), e});
                    any.push_back(c);
                }
                pending_.push_back(std::move(any));
            }
            if (t.weight != 0) { costs_.push_back(CostEntry{e, t.weight, levels[t.priority]}); }
        }

        for (AtomId a : program_.shown) {
            if (a < n) { shown_.push_back(a); }
        }
        if (program_.show_all) {
            shown_.clear();
            for (AtomId a = 1; a < n; ++a) { shown_.push_back(a); }
        }
        for (const auto& [atom, val] : program_.assumptions) {
            if (atom < n) { assumptions_.push_back(val ? pos_lit(atom) : neg_lit(atom)); }
        }

        if (options_.seed != 0) {
            std::mt19937_64 rng(options_.seed);
            std::uniform_real_distribution<double> jitter(0.0, 1e-5);
            for (auto& a : activity_) { a = jitter(rng); }
        }
        for (Var v = 1; v < assign_.size(); ++v) { order_.insert(v); }

        for (auto& c : pending_) {
            if (!add_root_clause(std::move(c))) {
                ok_ = false;
                break;
            }
        }
        pending_.clear();
    }

    void build_unfounded_check(const std::vector<std::vector<Lit>>& support, const std::vector<bool>& is_input) {
        const auto n = static_cast<AtomId>(support.size());
        std::vector<std::vector<AtomId>> succ(n);
        supports_.assign(n, {});
        for (AtomId a = 1; a < n; ++a) {
            if (is_input[a]) { continue; }
            for (Lit b : support[a]) {
                std::size_t id = body_id(b);
                if (id == bodies_.size()) { continue; }
                supports_[a].push_back(id);
                for (AtomId p : bodies_[id].pos) { succ[a].push_back(p); }
            }
        }
        // Tarjan (iterative) to find non-trivial strongly connected components.
        std::vector<int> index(n, -1);
        std::vector<int> low(n, 0);
        std::vector<bool> on_stack(n, false);
        std::vector<AtomId> stack;
        int counter = 0;
        scc_of_.assign(n, -1);
        for (AtomId root = 1; root < n; ++root) {
            if (index[root] >= 0) { continue; }
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
                AtomId w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    scc.push_back(w);
                } while (w != done);
                bool loop = scc.size() > 1 || std::find(succ[done].begin(), succ[done].end(), done) != succ[done].end();
                if (!loop) { continue; }
                for (AtomId a : scc) { scc_of_[a] = static_cast<int>(sccs_.size()); }
                std::sort(scc.begin(), scc.end());
                sccs_.push_back(std::move(scc));
            }
        }
        founded_.assign(n, 0);
    }

    // }}}
    // {{{ propagators

    // Atoms of a cyclic component that cannot be derived from outside the
    // component must be false (loop nogoods).
    Outcome check_unfounded(int& conflict) {
        enum : std::uint8_t { unknown = 0, founded = 1, excluded = 2 };
        for (std::size_t s = 0; s < sccs_.size(); ++s) {
            const auto& atoms = sccs_[s];
            for (AtomId a : atoms) { founded_[a] = value(pos_lit(a)) == l_false ? excluded : unknown; }
            bool changed = true;
            while (changed) {
                changed = false;
                for (AtomId a : atoms) {
                    if (founded_[a] != unknown) { continue; }
                    for (std::size_t b : supports_[a]) {
                        if (value(bodies_[b].lit) == l_false) { continue; }
                        bool ok = std::all_of(bodies_[b].pos.begin(), bodies_[b].pos.end(), [&](AtomId p) {
                            return scc_of_[p] != static_cast<int>(s) || founded_[p] == founded;
                        });
                        if (ok) {
                            founded_[a] = founded;
                            changed     = true;
                            break;
                        }
                    }
                }
            }
            std::vector<AtomId> unfounded;
            for (AtomId a : atoms) {
                if (founded_[a] == unknown) { unfounded.push_back(a); }
            }
            if (unfounded.empty()) { continue; }
            std::vector<Lit> external;
            for (AtomId a : unfounded) {
                for (std::size_t b : supports_[a]) {
                    bool inside = std::any_of(bodies_[b].pos.begin(), bodies_[b].pos.end(), [&](AtomId p) {
                        return scc_of_[p] == static_cast<int>(s) && founded_[p] == unknown;
                    });
                    if (!inside && std::find(external.begin(), external.end(), bodies_[b].lit) == external.end()) {
                        external.push_back(bodies_[b].lit);
                    }
                }
            }
            // True atoms first so that a conflict is found before propagating the rest.
            std::stable_sort(unfounded.begin(), unfounded.end(),
                             [&](AtomId x, AtomId y) { return value(pos_lit(x)) == l_true && value(pos_lit(y)) != l_true; });
            for (AtomId a : unfounded) {
                if (value(pos_lit(a)) == l_false) { continue; }
                std::vector<Lit> clause{neg_lit(a)};
                clause.insert(clause.end(), external.begin(), external.end());
                Outcome o = add_derived_clause(std::move(clause), conflict);
                if (o == Outcome::Conflict || o == Outcome::Unsat) { return o; }
            }
            return Outcome::Propagated;
        }
        return Outcome::None;
    }

    // Lower bound of the cost under the current assignment, per level.
    Outcome check_bound(int& conflict) {
        if (!bound_) { return Outcome::None; }
        const std::size_t levels = priorities_.size();
        std::vector<std::int64_t> lower(levels, 0);
        for (const auto& e : costs_) {
            std::int8_t v = value(e.lit);
            if ((e.weight > 0 && v == l_true) || (e.weight < 0 && v != l_false)) { lower[e.level] += e.weight; }
        }
        std::size_t upto = levels;
        for (std::size_t l = 0; l < levels; ++l) {
            if (lower[l] < (*bound_)[l]) { return Outcome::None; }
            if (lower[l] > (*bound_)[l]) {
                upto = l + 1;
                break;
            }
        }
        std::vector<Lit> clause;
        for (const auto& e : costs_) {
            if (e.level >= upto) { continue; }
            std::int8_t v = value(e.lit);
            if (e.weight > 0 && v == l_true) { clause.push_back(negate(e.lit)); }
            if (e.weight < 0 && v == l_false) { clause.push_back(e.lit); }
        }
        std::erase_if(clause, [&](Lit l) { return value(l) == l_false && level_[var_of(l)] == 0; });
        if (clause.empty()) { return Outcome::Unsat; }
        clauses_.push_back(clause);
        conflict = static_cast<int>(clauses_.size() - 1);
        return Outcome::Conflict;
    }

    Outcome propagate(int& conflict) {
        while (true) {
            conflict = propagate_clauses();
            if (conflict != no_reason) { return Outcome::Conflict; }
            Outcome o = check_unfounded(conflict);
            if (o == Outcome::Propagated) { continue; }
            if (o != Outcome::None) { return o; }
            return check_bound(conflict);
        }
    }

    // }}}
    // {{{ conflict analysis

    void bump(Var v) {
        activity_[v] += var_inc_;
        if (activity_[v] > 1e100) {
            for (auto& a : activity_) { a *= 1e-100; }
            var_inc_ *= 1e-100;
        }
        order_.increased(v);
    }

    /// Returns false if the conflict is at the root.
    bool resolve_conflict(int ci) {
        ++stats_.conflicts;
        ++conflicts_since_restart_;
        int max_level = 0;
        for (Lit l : clauses_[static_cast<std::size_t>(ci)]) { max_level = std::max(max_level, level_[var_of(l)]); }
        if (max_level == 0) { return false; }
        backtrack(max_level);

        std::vector<Lit> learnt{0};
        int   path  = 0;
        Lit   p     = 0;
        bool  first = true;
        std::size_t idx = trail_.size();
        int   reason    = ci;
        do {
            const auto& c = clauses_[static_cast<std::size_t>(reason)];
            for (std::size_t k = first ? 0 : 1; k < c.size(); ++k) {
                Lit q = c[k];
                Var v = var_of(q);
                if (seen_[v] || level_[v] == 0) { continue; }
                seen_[v] = true;
                bump(v);
                if (level_[v] >= decision_level()) {
                    ++path;
                } else {
                    learnt.push_back(q);
                }
            }
            first = false;
            while (!seen_[var_of(trail_[--idx])]) {}
            p        = trail_[idx];
            reason   = reason_[var_of(p)];
            seen_[var_of(p)] = false;
            --path;
        } while (path > 0);
        learnt[0] = negate(p);

        // Drop literals implied by the rest of the clause.
        std::vector<Lit> kept{learnt[0]};
        for (std::size_t k = 1; k < learnt.size(); ++k) {
            Var v = var_of(learnt[k]);
            int r = reason_[v];
            bool redundant = r != no_reason;
            if (redundant) {
                const auto& c = clauses_[static_cast<std::size_t>(r)];
                for (std::size_t m = 1; m < c.size() && redundant; ++m) {
                    Var u = var_of(c[m]);
                    redundant = seen_[u] || level_[u] == 0;
                }
            }
            if (!redundant) { kept.push_back(learnt[k]); }
        }
        for (std::size_t k = 1; k < learnt.size(); ++k) { seen_[var_of(learnt[k])] = false; }
        learnt = std::move(kept);

        int back = 0;
        if (learnt.size() > 1) {
            std::size_t best = 1;
            for (std::size_t k = 2; k < learnt.size(); ++k) {
                if (level_[var_of(learnt[k])] > level_[var_of(learnt[best])]) { best = k; }
            }
            std::swap(learnt[1], learnt[best]);
            back = level_[var_of(learnt[1])];
        }
        backtrack(back);
        if (learnt.size() == 1) {
            enqueue(learnt[0], no_reason);
        } else {
            clauses_.push_back(learnt);
            attach(clauses_.size() - 1);
            enqueue(learnt[0], static_cast<int>(clauses_.size() - 1));
        }
        var_inc_ /= 0.95;
        return true;
    }

    // }}}

    Model extract_model() {
        Model m;
        for (AtomId a = 1; a < program_.atom_count; ++a) {
            if (assign_[a] == l_true) { m.atoms.push_back(a); }
        }
        for (AtomId a : shown_) {
            if (assign_[a] == l_true) { m.shown.push_back(a); }
        }
        if (!priorities_.empty()) {
            std::vector<std::int64_t> totals(priorities_.size(), 0);
            for (const auto& e : costs_) {
                if (value(e.lit) == l_true) { totals[e.level] += e.weight; }
            }
            for (std::size_t l = 0; l < priorities_.size(); ++l) { m.cost.set(priorities_[l], totals[l]); }
        }
        return m;
    }

    const SolverProgram& program_;
    const SolveOptions&  options_;
    const CancelToken&   cancel_;

    std::vector<std::int8_t>                  assign_;
    std::vector<int>                          level_;
    std::vector<int>                          reason_;
    std::vector<double>                       activity_;
    std::vector<bool>                         phase_;
    std::vector<bool>                         seen_;
    std::vector<Lit>                          trail_;
    std::vector<std::size_t>                  trail_lim_;
    std::size_t                               qhead_{0};
    std::vector<std::vector<Lit>>             clauses_;
    std::vector<std::vector<std::uint32_t>>   watches_;
    VarOrder                                  order_;
    double                                    var_inc_{1.0};
    std::uint64_t                             conflicts_since_restart_{0};

    std::vector<std::vector<Lit>>             pending_;
    std::map<std::pair<std::vector<AtomId>, std::vector<AtomId>>, std::size_t> body_index_;
    std::vector<Body>                         bodies_;
    std::unordered_map<Lit, std::size_t>      body_by_lit_;
    std::vector<std::vector<std::size_t>>     supports_;
    std::vector<int>                          scc_of_;
    std::vector<std::vector<AtomId>>          sccs_;
    std::vector<std::uint8_t>                 founded_;

    std::vector<std::int64_t>                 priorities_;
    std::vector<CostEntry>                    costs_;
    std::optional<std::vector<std::int64_t>>  bound_;

    std::vector<AtomId> shown_;
    std::vector<Lit>    assumptions_;
    bool                ok_{true};
    Statistics          stats_;
};

SolveResult Search::run(const ModelCallback& on_model) {
    SolveResult result;
    const bool optimize = !costs_.empty() || !program_.objective.empty();
    const bool combine  = !optimize && (options_.mode == SolveMode::Intersection || options_.mode == SolveMode::Union);
    std::optional<std::vector<AtomId>> combined;
    std::size_t found        = 0;
    bool        interrupted  = false;
    bool        exhausted    = false;
    std::uint64_t restart_no = 0;
    double        restart_at = options_.restart_unit > 0 ? luby(2, 0) * options_.restart_unit : 0;

    auto deliver = [&](const Model& m) -> bool {
        ++stats_.models_found;
        return on_model ? on_model(m) : true;
    };

    if (cancel_.cancelled()) {
        interrupted = true;
    } else if (!ok_) {
        exhausted = true;
    }
    while (!interrupted && !exhausted) {
        int     conflict = no_reason;
        Outcome o        = propagate(conflict);
        if (o == Outcome::Unsat) {
            exhausted = true;
            break;
        }
        if (o == Outcome::Conflict) {
            if (!resolve_conflict(conflict)) {
                exhausted = true;
                break;
            }
            if (restart_at > 0 && static_cast<double>(conflicts_since_restart_) >= restart_at) {
                backtrack(0);
                ++stats_.restarts;
                conflicts_since_restart_ = 0;
                restart_at = luby(2, ++restart_no) * options_.restart_unit;
            }
            if (cancel_.cancelled()) { interrupted = true; }
            continue;
        }
        if (cancel_.cancelled()) {
            interrupted = true;
            break;
        }

        // Assumptions occupy the first decision levels.
        Lit next = 0;
        bool have_next = false;
        while (decision_level() < static_cast<int>(assumptions_.size())) {
            Lit a = assumptions_[static_cast<std::size_t>(decision_level())];
            std::int8_t v = value(a);
            if (v == l_true) {
                trail_lim_.push_back(trail_.size());
                continue;
            }
            if (v == l_false) {
                exhausted = true;
                break;
            }
            next      = a;
            have_next = true;
            break;
        }
        if (exhausted) { break; }
        if (!have_next) {
            while (!order_.empty()) {
                Var v = order_.pop();
                if (assign_[v] == l_undef) {
                    next      = phase_[v] ? neg_lit(v) : pos_lit(v);
                    have_next = true;
                    ++stats_.choices;
                    break;
                }
            }
        }
        if (have_next) {
            trail_lim_.push_back(trail_.size());
            enqueue(next, no_reason);
            continue;
        }

        // Total assignment: a stable model.
        Model m = extract_model();
        m.index = ++found;
        if (optimize) {
            std::vector<std::int64_t> totals;
            for (auto prio : priorities_) { totals.push_back(m.cost.at(prio)); }
            bound_ = totals;
            result.optimum = m.cost;
            if (!deliver(m)) { break; }
            backtrack(0);
            continue;
        }
        if (combine) {
            if (!combined) {
                combined = m.shown;
            } else if (options_.mode == SolveMode::Intersection) {
                std::vector<AtomId> out;
                std::set_intersection(combined->begin(), combined->end(), m.shown.begin(), m.shown.end(), std::back_inserter(out));
                combined = std::move(out);
            } else {
                std::vector<AtomId> out;
                std::set_union(combined->begin(), combined->end(), m.shown.begin(), m.shown.end(), std::back_inserter(out));
                combined = std::move(out);
            }
        } else {
            bool more = deliver(m);
            if (!more || options_.mode == SolveMode::First) { break; }
        }
        if (options_.limit > 0 && found >= options_.limit) { break; }
        // Block the shown projection of this model.
        std::vector<Lit> block;
        for (AtomId a : shown_) { block.push_back(assign_[a] == l_true ? neg_lit(a) : pos_lit(a)); }
        backtrack(0);
        if (!add_root_clause(std::move(block))) {
            exhausted = true;
            break;
        }
    }

    if (combine && combined) {
        Model m;
        m.atoms = *combined;
        m.shown = *combined;
        m.index = 1;
        deliver(m);
    }
    result.models          = found;
    result.optimum_proven  = optimize && exhausted && found > 0;
    if (interrupted) {
        result.status = SolveStatus::Interrupted;
    } else {
        result.status = found > 0 ? SolveStatus::Sat : SolveStatus::Unsat;
    }
    result.stats = stats_;
    return result;
}

} // namespace

SolveResult solve(const SolverProgram& program, const ModelCallback& on_model, const SolveOptions& options, const CancelToken& cancel) {
    auto start = std::chrono::steady_clock::now();
    Search search(program, options, cancel);
    SolveResult result = search.run(on_model);
    result.stats.solve_calls     = 1;
    result.stats.rules_ground    = program.rules.size();
    result.stats.atoms           = program.atom_count > 0 ? program.atom_count - 1 : 0;
    result.stats.last_solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// {{{ Oracles

bool check_stable(const SolverProgram& program, const std::vector<AtomId>& candidate) {
    const AtomId n = program.atom_count;
    std::vector<bool> in(n, false);
    for (AtomId a : candidate) {
        if (a == 0 || a >= n) { return false; }
        in[a] = true;
    }
    for (const auto& [atom, val] : program.assumptions) {
        if (atom < n && in[atom] != val) { return false; }
        if (atom == 0 && val) { return false; }
    }
    auto holds = [&](const GroundRule& r) {
        return std::all_of(r.pos.begin(), r.pos.end(), [&](AtomId a) { return in[a]; }) &&
               std::none_of(r.neg.begin(), r.neg.end(), [&](AtomId a) { return in[a]; });
    };
    // Reduct: rules whose negative body is satisfied, negation removed. Choice
    // rules contribute `a :- pos` for their chosen atoms.
    std::vector<std::pair<AtomId, const std::vector<AtomId>*>> reduct;
    for (const auto& r : program.rules) {
        bool body = holds(r);
        if (r.is_constraint()) {
            if (body) { return false; }
            continue;
        }
        if (const auto* c = std::get_if<GroundChoice>(&r.head)) {
            if (body) {
                std::vector<AtomId> xs = c->atoms;
                std::sort(xs.begin(), xs.end());
                xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
                auto count = static_cast<std::int64_t>(std::count_if(xs.begin(), xs.end(), [&](AtomId a) { return in[a]; }));
                if ((c->lower && count < *c->lower) || (c->upper && count > *c->upper)) { return false; }
            }
        }
        bool neg_ok = std::none_of(r.neg.begin(), r.neg.end(), [&](AtomId a) { return in[a]; });
        if (!neg_ok) { continue; }
        for (AtomId h : r.head_atoms()) {
            if (r.is_choice() && !in[h]) { continue; }
            reduct.emplace_back(h, &r.pos);
        }
    }
    std::vector<bool> least(n, false);
    for (AtomId a : program.inputs) {
        if (a < n && in[a]) { least[a] = true; }
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [head, pos] : reduct) {
            if (least[head]) { continue; }
            if (std::all_of(pos->begin(), pos->end(), [&](AtomId a) { return least[a]; })) {
                least[head] = true;
                changed     = true;
            }
        }
    }
    return least == in;
}

std::vector<std::vector<AtomId>> brute_force_models(const SolverProgram& program) {
    const AtomId n = program.atom_count;
    if (n > 21) { throw Error(ErrorCode::TooLarge, std::to_string(n - 1) + " atoms (limit 20)"); }
    std::vector<std::vector<AtomId>> out;
    const std::uint32_t atoms = n > 0 ? n - 1 : 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << atoms); ++mask) {
        std::vector<AtomId> cand;
        for (std::uint32_t i = 0; i < atoms; ++i) {
            if ((mask >> i) & 1U) { cand.push_back(i + 1); }
        }
        if (check_stable(program, cand)) { out.push_back(std::move(cand)); }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// }}}

} // namespace mshot
