#include <mshot/grounder.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

namespace mshot {

// {{{ GroundRule / Domain

std::vector<AtomId> GroundRule::head_atoms() const {
    if (const auto* a = std::get_if<AtomId>(&head)) { return {*a}; }
    if (const auto* c = std::get_if<GroundChoice>(&head)) { return c->atoms; }
    return {};
}

namespace {

Signature signature_of(const Value& atom) { return {atom.name(), atom.arity()}; }

} // namespace

bool Domain::add_possible(const Value& atom) {
    auto& vec              = by_sig_[signature_of(atom)];
    auto [it, inserted]    = index_.try_emplace(atom, vec.size());
    if (inserted) { vec.push_back(atom); }
    return inserted;
}

void Domain::add_certain(const Value& atom) {
    add_possible(atom);
    certain_.insert(atom);
}

std::span<const Value> Domain::atoms(const Signature& sig) const {
    if (auto it = by_sig_.find(sig); it != by_sig_.end()) { return it->second; }
    return {};
}

std::optional<std::size_t> Domain::position(const Value& atom) const {
    if (auto it = index_.find(atom); it != index_.end()) { return it->second; }
    return std::nullopt;
}

std::vector<Signature> Domain::signatures() const {
    std::vector<Signature> out;
    for (const auto& [sig, vec] : by_sig_) { out.push_back(sig); }
    return out;
}

// }}}
// {{{ Evaluation

namespace {

class Binding {
public:
    [[nodiscard]] const Value* find(const std::string& name) const {
        for (auto it = vars_.rbegin(); it != vars_.rend(); ++it) {
            if (it->first == name) { return &it->second; }
        }
        return nullptr;
    }
    void push(const std::string& name, Value v) { vars_.emplace_back(name, std::move(v)); }
    [[nodiscard]] std::size_t mark() const { return vars_.size(); }
    void restore(std::size_t mark) { vars_.resize(mark); }

private:
    std::vector<std::pair<std::string, Value>> vars_;
};

[[noreturn]] void arithmetic_error(const std::string& msg) { throw Error(ErrorCode::ArithmeticError, msg); }

std::int64_t apply(char op, std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    bool overflow  = false;
    switch (op) {
        case '+': overflow = __builtin_add_overflow(a, b, &r); break;
        case '-': overflow = __builtin_sub_overflow(a, b, &r); break;
        case '*': overflow = __builtin_mul_overflow(a, b, &r); break;
        case '/':
            if (b == 0) { arithmetic_error("division by zero"); }
            if (a == INT64_MIN && b == -1) {
                overflow = true;
                break;
            }
            r = a / b;
            break;
        default: arithmetic_error(std::string("unknown operator ") + op);
    }
    if (overflow) { arithmetic_error("integer overflow in " + std::to_string(a) + op + std::to_string(b)); }
    return r;
}

bool is_bound(const Term& t, const Binding& b) {
    if (t.kind == Term::Kind::Variable) { return b.find(t.name) != nullptr; }
    return std::all_of(t.args.begin(), t.args.end(), [&](const Term& a) { return is_bound(a, b); });
}

// Matching can proceed once every variable below arithmetic or an interval is bound.
bool is_matchable(const Term& t, const Binding& b) {
    switch (t.kind) {
        case Term::Kind::Function:
            return std::all_of(t.args.begin(), t.args.end(), [&](const Term& a) { return is_matchable(a, b); });
        case Term::Kind::BinOp:
        case Term::Kind::Interval: return is_bound(t, b);
        default: return true;
    }
}

void cartesian(const std::vector<std::vector<Value>>& sets, const std::function<void(std::vector<Value>&)>& f) {
    std::vector<Value> cur;
    cur.reserve(sets.size());
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == sets.size()) {
            f(cur);
            return;
        }
        for (const auto& v : sets[i]) {
            cur.push_back(v);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

// All values of a bound term (intervals expand).
void evaluate(const Term& t, const Binding& b, std::vector<Value>& out) {
    switch (t.kind) {
        case Term::Kind::Integer: out.push_back(Value::integer(t.integer)); return;
        case Term::Kind::Symbol: out.push_back(t.quoted ? Value::string(t.name) : Value::function(t.name)); return;
        case Term::Kind::Variable: {
            const Value* v = b.find(t.name);
            if (v == nullptr) { throw Error(ErrorCode::UnsafeVariable, t.name); }
            out.push_back(*v);
            return;
        }
        case Term::Kind::Function: {
            std::vector<std::vector<Value>> sets(t.args.size());
            for (std::size_t i = 0; i < t.args.size(); ++i) { evaluate(t.args[i], b, sets[i]); }
            cartesian(sets, [&](std::vector<Value>& args) { out.push_back(Value::function(t.name, args)); });
            return;
        }
        case Term::Kind::BinOp:
        case Term::Kind::Interval: {
            std::vector<Value> lhs;
            std::vector<Value> rhs;
            evaluate(t.args[0], b, lhs);
            evaluate(t.args[1], b, rhs);
            for (const auto& l : lhs) {
                for (const auto& r : rhs) {
                    if (!l.is_int() || !r.is_int()) {
                        arithmetic_error("non-integer operand in " + to_string(t));
                    }
                    if (t.kind == Term::Kind::BinOp) {
                        out.push_back(Value::integer(apply(t.op, l.as_int(), r.as_int())));
                    } else {
                        for (std::int64_t k = l.as_int(); k <= r.as_int(); ++k) {
                            out.push_back(Value::integer(k));
                            if (k == INT64_MAX) { break; }
                        }
                    }
                }
            }
            return;
        }
    }
}

std::vector<Value> evaluate(const Term& t, const Binding& b) {
    std::vector<Value> out;
    evaluate(t, b, out);
    return out;
}

std::vector<Value> evaluate(const Atom& a, const Binding& b) {
    std::vector<std::vector<Value>> sets(a.args.size());
    for (std::size_t i = 0; i < a.args.size(); ++i) { evaluate(a.args[i], b, sets[i]); }
    std::vector<Value> out;
    cartesian(sets, [&](std::vector<Value>& args) { out.push_back(Value::function(a.name, args)); });
    return out;
}

std::int64_t evaluate_int(const Term& t, const Binding& b, const char* what) {
    auto vals = evaluate(t, b);
    if (vals.size() != 1 || !vals.front().is_int()) {
        arithmetic_error(std::string(what) + " must be an integer, got " + to_string(t));
    }
    return vals.front().as_int();
}

bool match(const Term& pat, const Value& v, Binding& b) {
    switch (pat.kind) {
        case Term::Kind::Integer: return v.is_int() && v.as_int() == pat.integer;
        case Term::Kind::Symbol:
            if (pat.quoted) { return v.kind() == Value::Kind::Str && v.name() == pat.name; }
            return v.kind() == Value::Kind::Fun && v.arity() == 0 && v.name() == pat.name;
        case Term::Kind::Variable:
            if (const Value* bound = b.find(pat.name)) { return *bound == v; }
            b.push(pat.name, v);
            return true;
        case Term::Kind::Function: {
            if (v.kind() != Value::Kind::Fun || v.name() != pat.name || v.arity() != pat.args.size()) { return false; }
            auto args = v.args();
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (!match(pat.args[i], args[i], b)) { return false; }
            }
            return true;
        }
        case Term::Kind::BinOp:
        case Term::Kind::Interval: {
            auto vals = evaluate(pat, b);
            return std::find(vals.begin(), vals.end(), v) != vals.end();
        }
    }
    return false;
}

bool match(const Atom& pat, const Value& v, Binding& b) {
    if (v.name() != pat.name || v.arity() != pat.args.size()) { return false; }
    auto args = v.args();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!match(pat.args[i], args[i], b)) { return false; }
    }
    return true;
}

bool compare(const Value& l, Relop op, const Value& r) {
    auto c = l <=> r;
    switch (op) {
        case Relop::Eq: return c == 0;
        case Relop::Ne: return c != 0;
        case Relop::Lt: return c < 0;
        case Relop::Le: return c <= 0;
        case Relop::Gt: return c > 0;
        case Relop::Ge: return c >= 0;
    }
    return false;
}

} // namespace

Value evaluate_ground(const Term& term) {
    Binding b;
    auto vals = evaluate(term, b);
    if (term.kind == Term::Kind::Interval || vals.size() != 1) {
        throw Error(ErrorCode::NonGroundTerm, "expected a single ground value: " + to_string(term));
    }
    return vals.front();
}

// }}}
// {{{ Join

namespace {

constexpr std::size_t unbounded = static_cast<std::size_t>(-1);

struct Range {
    std::size_t lo{0};
    std::size_t hi{unbounded};
};

/// Enumerates bindings satisfying the positive atoms and comparisons of a
/// literal list. Negative literals are left to the caller.
class Joiner {
public:
    using Callback = std::function<void(Binding&, const std::vector<Value>&)>;

    Joiner(const Domain& domain, bool certain_only) : domain_(domain), certain_only_(certain_only) {}

    void run(const std::vector<Literal>& lits, std::span<const Range> ranges, Binding& b, const Callback& cb) {
        lits_   = &lits;
        ranges_ = ranges;
        cb_     = &cb;
        done_.assign(lits.size(), false);
        matched_.assign(lits.size(), Value{});
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (const auto* a = std::get_if<AtomLiteral>(&lits[i]); a && a->negated) { done_[i] = true; }
        }
        step(b);
    }

private:
    [[nodiscard]] Range range(std::size_t i) const { return i < ranges_.size() ? ranges_[i] : Range{}; }

    bool admissible(const Value& atom, std::size_t i) const {
        auto pos = domain_.position(atom);
        if (!pos) { return false; }
        Range r = range(i);
        if (*pos < r.lo || *pos >= r.hi) { return false; }
        return !certain_only_ || domain_.is_certain(atom);
    }

    // Picks the next literal: bound tests first, then fully bound atoms,
    // assignments, and finally the first matchable atom.
    std::optional<std::size_t> select(const Binding& b) const {
        const auto& lits = *lits_;
        std::optional<std::size_t> assignment;
        std::optional<std::size_t> ground_atom;
        std::optional<std::size_t> open_atom;
        for (std::size_t i = 0; i < lits.size(); ++i) {
            if (done_[i]) { continue; }
            if (const auto* c = std::get_if<Comparison>(&lits[i])) {
                if (is_bound(c->lhs, b) && is_bound(c->rhs, b)) { return i; }
                if (!assignment && c->op == Relop::Eq &&
                    ((c->lhs.kind == Term::Kind::Variable && is_bound(c->rhs, b)) ||
                     (c->rhs.kind == Term::Kind::Variable && is_bound(c->lhs, b)))) {
                    assignment = i;
                }
                continue;
            }
            const auto& atom = std::get<AtomLiteral>(lits[i]).atom;
            bool bound       = std::all_of(atom.args.begin(), atom.args.end(), [&](const Term& t) { return is_bound(t, b); });
            if (bound && !ground_atom) { ground_atom = i; }
            if (!open_atom && std::all_of(atom.args.begin(), atom.args.end(), [&](const Term& t) { return is_matchable(t, b); })) {
                open_atom = i;
            }
        }
        if (ground_atom) { return ground_atom; }
        if (assignment) { return assignment; }
        return open_atom;
    }

    void step(Binding& b) {
        auto next = select(b);
        if (!next) {
            for (std::size_t i = 0; i < done_.size(); ++i) {
                if (!done_[i]) { throw Error(ErrorCode::UnsafeVariable, "cannot bind variables of " + to_string((*lits_)[i])); }
            }
            (*cb_)(b, matched_);
            return;
        }
        std::size_t i = *next;
        done_[i]      = true;
        std::size_t m = b.mark();
        if (const auto* c = std::get_if<Comparison>(&(*lits_)[i])) {
            if (is_bound(c->lhs, b) && is_bound(c->rhs, b)) {
                auto lhs = evaluate(c->lhs, b);
                auto rhs = evaluate(c->rhs, b);
                bool ok  = false;
                for (const auto& l : lhs) {
                    for (const auto& r : rhs) { ok = ok || compare(l, c->op, r); }
                }
                if (ok) { step(b); }
            } else {
                bool left_var     = c->lhs.kind == Term::Kind::Variable && !is_bound(c->lhs, b);
                const Term& var   = left_var ? c->lhs : c->rhs;
                const Term& value = left_var ? c->rhs : c->lhs;
                for (const auto& v : evaluate(value, b)) {
                    b.push(var.name, v);
                    step(b);
                    b.restore(m);
                }
            }
        } else {
            const auto& atom = std::get<AtomLiteral>((*lits_)[i]).atom;
            bool bound = std::all_of(atom.args.begin(), atom.args.end(), [&](const Term& t) { return is_bound(t, b); });
            if (bound) {
                for (const auto& v : evaluate(atom, b)) {
                    if (admissible(v, i)) {
                        matched_[i] = v;
                        step(b);
                    }
                }
            } else {
                auto  candidates = domain_.atoms(atom.signature());
                Range r          = range(i);
                std::size_t hi   = std::min(r.hi, candidates.size());
                for (std::size_t k = r.lo; k < hi; ++k) {
                    const Value& v = candidates[k];
                    if (certain_only_ && !domain_.is_certain(v)) { continue; }
                    if (match(atom, v, b)) {
                        matched_[i] = v;
                        step(b);
                    }
                    b.restore(m);
                }
            }
        }
        b.restore(m);
        done_[i] = false;
    }

    const Domain&               domain_;
    bool                        certain_only_;
    const std::vector<Literal>* lits_{nullptr};
    std::span<const Range>      ranges_;
    const Callback*             cb_{nullptr};
    std::vector<bool>           done_;
    std::vector<Value>          matched_;
};

// }}}
// {{{ Instantiation

/// A head-producing view of a statement used to compute possible atoms.
struct Projection {
    const Atom*          head{nullptr};
    std::vector<Literal> body;
    bool                 definite{false}; // normal rule without negation
};

std::vector<Projection> projections(const Statement& stmt) {
    std::vector<Projection> out;
    if (const auto* r = std::get_if<Rule>(&stmt)) {
        if (const auto* a = std::get_if<Atom>(&r->head)) {
            bool definite = std::none_of(r->body.begin(), r->body.end(), [](const Literal& l) {
                const auto* al = std::get_if<AtomLiteral>(&l);
                return al != nullptr && al->negated;
            });
            out.push_back({a, r->body, definite});
        } else if (const auto* ch = std::get_if<ChoiceHead>(&r->head)) {
            for (const auto& e : ch->elements) {
                Projection p{&e.atom, r->body, false};
                p.body.insert(p.body.end(), e.condition.begin(), e.condition.end());
                out.push_back(std::move(p));
            }
        }
    } else if (const auto* e = std::get_if<External>(&stmt)) {
        out.push_back({&e->atom, e->condition, false});
    }
    return out;
}

std::vector<std::size_t> positive_literals(const std::vector<Literal>& lits) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < lits.size(); ++i) {
        if (const auto* a = std::get_if<AtomLiteral>(&lits[i]); a && !a->negated) { out.push_back(i); }
    }
    return out;
}

// Semi-naive fixpoint over the projections; extends the domain's possible atoms.
void compute_possible(const std::vector<Projection>& projs, Domain& domain) {
    std::map<Signature, std::size_t> old_end;
    std::map<Signature, std::size_t> new_end;
    auto sizes = [&] {
        std::map<Signature, std::size_t> s;
        for (const auto& sig : domain.signatures()) { s[sig] = domain.size(sig); }
        return s;
    };
    auto lookup = [](const std::map<Signature, std::size_t>& m, const Signature& sig) {
        auto it = m.find(sig);
        return it == m.end() ? std::size_t{0} : it->second;
    };

    Joiner joiner(domain, false);
    std::vector<Value> derived;
    auto collect = [&derived](const Projection& p) {
        return [&derived, head = p.head](Binding& b, const std::vector<Value>&) {
            for (auto& v : evaluate(*head, b)) { derived.push_back(std::move(v)); }
        };
    };

    new_end = sizes();
    for (const auto& p : projs) {
        Binding b;
        joiner.run(p.body, {}, b, collect(p));
    }
    while (true) {
        bool grew = false;
        for (const auto& v : derived) { grew = domain.add_possible(v) || grew; }
        derived.clear();
        if (!grew) { break; }
        old_end = new_end;
        new_end = sizes();
        for (const auto& p : projs) {
            auto pos = positive_literals(p.body);
            for (std::size_t k = 0; k < pos.size(); ++k) {
                const Signature sig = std::get<AtomLiteral>(p.body[pos[k]]).atom.signature();
                std::size_t lo      = lookup(old_end, sig);
                std::size_t hi      = lookup(new_end, sig);
                if (lo == hi) { continue; }
                std::vector<Range> ranges(p.body.size());
                for (std::size_t j = 0; j < k; ++j) {
                    const Signature sj = std::get<AtomLiteral>(p.body[pos[j]]).atom.signature();
                    ranges[pos[j]]     = Range{0, lookup(old_end, sj)};
                }
                ranges[pos[k]] = Range{lo, hi};
                Binding b;
                joiner.run(p.body, ranges, b, collect(p));
            }
        }
    }
}

// Naive fixpoint of definite rules restricted to certain atoms.
void compute_certain(const std::vector<Projection>& projs, Domain& domain) {
    Joiner joiner(domain, true);
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Value> derived;
        for (const auto& p : projs) {
            if (!p.definite) { continue; }
            Binding b;
            joiner.run(p.body, {}, b, [&](Binding& bb, const std::vector<Value>&) {
                for (auto& v : evaluate(*p.head, bb)) {
                    if (!domain.is_certain(v)) { derived.push_back(std::move(v)); }
                }
            });
        }
        for (const auto& v : derived) {
            if (!domain.is_certain(v)) {
                domain.add_certain(v);
                grew = true;
            }
        }
    }
}

template <class T>
void push_unique(std::vector<T>& vec, const T& x) {
    if (std::find(vec.begin(), vec.end(), x) == vec.end()) { vec.push_back(x); }
}

class UnitBuilder {
public:
    UnitBuilder(const Domain& domain, AtomTable& atoms, const WarningSink& warn, GroundUnit& unit)
        : domain_(domain), atoms_(atoms), warn_(warn), unit_(unit), joiner_(domain, false) {}

    void add(const Statement& stmt) {
        if (const auto* r = std::get_if<Rule>(&stmt)) {
            rule(*r, stmt);
        } else if (const auto* e = std::get_if<External>(&stmt)) {
            external(*e, stmt);
        } else if (const auto* m = std::get_if<Minimize>(&stmt)) {
            minimize(*m, stmt);
        } else if (const auto* s = std::get_if<Show>(&stmt)) {
            unit_.shown.insert(s->sig);
        }
    }

private:
    // Positive body ids from the join, negative ids for possible atoms only.
    // Returns false if the body is contradictory.
    bool body(const std::vector<Literal>& lits, const Binding& b, const std::vector<Value>& matched,
              std::vector<AtomId>& pos, std::vector<AtomId>& neg) {
        for (std::size_t i = 0; i < lits.size(); ++i) {
            const auto* a = std::get_if<AtomLiteral>(&lits[i]);
            if (a == nullptr) { continue; }
            if (!a->negated) {
                push_unique(pos, atoms_.intern(matched[i]));
                continue;
            }
            for (const auto& v : evaluate(a->atom, b)) {
                if (domain_.is_possible(v)) { push_unique(neg, atoms_.intern(v)); }
            }
        }
        return std::none_of(pos.begin(), pos.end(), [&](AtomId id) { return std::find(neg.begin(), neg.end(), id) != neg.end(); });
    }

    void emit(GroundRule r) {
        std::vector<std::int64_t> key;
        if (const auto* a = std::get_if<AtomId>(&r.head)) {
            key.push_back(1);
            key.push_back(*a);
        } else if (const auto* c = std::get_if<GroundChoice>(&r.head)) {
            key.push_back(2);
            key.push_back(c->lower.value_or(INT64_MIN));
            key.push_back(c->upper.value_or(INT64_MAX));
            key.insert(key.end(), c->atoms.begin(), c->atoms.end());
        } else {
            key.push_back(0);
        }
        key.push_back(-1);
        key.insert(key.end(), r.pos.begin(), r.pos.end());
        key.push_back(-2);
        key.insert(key.end(), r.neg.begin(), r.neg.end());
        if (seen_rules_.insert(std::move(key)).second) { unit_.rules.push_back(std::move(r)); }
    }

    void warn_condition(const Statement& stmt, const std::vector<Literal>& cond, const std::vector<Value>& matched) {
        if (warned_) { return; }
        for (std::size_t i = 0; i < cond.size(); ++i) {
            const auto* a = std::get_if<AtomLiteral>(&cond[i]);
            if (a != nullptr && !a->negated && !domain_.is_certain(matched[i])) {
                warned_ = true;
                if (warn_) {
                    warn_("ConditionNotDomain: condition atom " + matched[i].to_string() + " of '" + to_string(stmt) +
                          "' is not fixed by grounding; using possible atoms");
                }
                return;
            }
        }
    }

    void rule(const Rule& r, const Statement& stmt) {
        Binding b;
        joiner_.run(r.body, {}, b, [&](Binding& bb, const std::vector<Value>& matched) {
            GroundRule g;
            if (!body(r.body, bb, matched, g.pos, g.neg)) { return; }
            if (const auto* head = std::get_if<Atom>(&r.head)) {
                for (const auto& v : evaluate(*head, bb)) {
                    GroundRule copy = g;
                    copy.head       = atoms_.intern(v);
                    emit(std::move(copy));
                }
            } else if (const auto* ch = std::get_if<ChoiceHead>(&r.head)) {
                GroundChoice choice;
                if (ch->lower) { choice.lower = evaluate_int(*ch->lower, bb, "choice bound"); }
                if (ch->upper) { choice.upper = evaluate_int(*ch->upper, bb, "choice bound"); }
                for (const auto& e : ch->elements) { element(e, bb, stmt, choice.atoms); }
                g.head = std::move(choice);
                emit(std::move(g));
            } else {
                emit(std::move(g));
            }
        });
    }

    void element(const ChoiceElement& e, Binding& b, const Statement& stmt, std::vector<AtomId>& out) {
        Joiner inner(domain_, false);
        inner.run(e.condition, {}, b, [&](Binding& bb, const std::vector<Value>& matched) {
            warn_condition(stmt, e.condition, matched);
            for (const auto& lit : e.condition) {
                const auto* a = std::get_if<AtomLiteral>(&lit);
                if (a == nullptr || !a->negated) { continue; }
                for (const auto& v : evaluate(a->atom, bb)) {
                    if (domain_.is_certain(v)) { return; }
                }
            }
            for (const auto& v : evaluate(e.atom, bb)) { push_unique(out, atoms_.intern(v)); }
        });
    }

    void external(const External& e, const Statement& stmt) {
        Binding b;
        joiner_.run(e.condition, {}, b, [&](Binding& bb, const std::vector<Value>& matched) {
            warn_condition(stmt, e.condition, matched);
            for (const auto& lit : e.condition) {
                const auto* a = std::get_if<AtomLiteral>(&lit);
                if (a == nullptr || !a->negated) { continue; }
                for (const auto& v : evaluate(a->atom, bb)) {
                    if (domain_.is_certain(v)) { return; }
                }
            }
            for (const auto& v : evaluate(e.atom, bb)) { push_unique(unit_.external_decls, atoms_.intern(v)); }
        });
    }

    void minimize(const Minimize& m, const Statement& stmt) {
        (void)stmt;
        for (const auto& e : m.elements) {
            Binding b;
            joiner_.run(e.condition, {}, b, [&](Binding& bb, const std::vector<Value>& matched) {
                std::vector<AtomId> pos;
                std::vector<AtomId> neg;
                if (!body(e.condition, bb, matched, pos, neg)) { return; }
                MinimizeEntry entry;
                entry.weight   = evaluate_int(e.weight, bb, "minimize weight");
                entry.priority = evaluate_int(e.priority, bb, "minimize priority");
                entry.tuple.push_back(Value::integer(entry.weight));
                entry.tuple.push_back(Value::integer(entry.priority));
                for (const auto& t : e.terms) {
                    auto vals = evaluate(t, bb);
                    if (vals.size() != 1) { arithmetic_error("interval in minimize tuple: " + to_string(t)); }
                    entry.tuple.push_back(vals.front());
                }
                for (AtomId id : pos) { entry.condition.push_back({id, false}); }
                for (AtomId id : neg) { entry.condition.push_back({id, true}); }
                push_unique(unit_.minimize_entries, entry);
            });
        }
    }

    const Domain&                        domain_;
    AtomTable&                           atoms_;
    const WarningSink&                   warn_;
    GroundUnit&                          unit_;
    Joiner                               joiner_;
    std::set<std::vector<std::int64_t>>  seen_rules_;
    bool                                 warned_{false};
};

} // namespace

SubprogramDef substitute_params(const SubprogramDef& def, std::span<const Value> args) {
    if (args.size() != def.params.size()) {
        throw Error(ErrorCode::ArityMismatch, def.name + " expects " + std::to_string(def.params.size()) + " argument(s), got " +
                                                  std::to_string(args.size()));
    }
    SubprogramDef out{def.name, {}, {}};
    if (args.empty()) {
        out.statements = def.statements;
        return out;
    }
    std::map<std::string, Term> subst;
    for (std::size_t i = 0; i < args.size(); ++i) { subst[def.params[i]] = Term::from_value(args[i]); }
    out.statements.reserve(def.statements.size());
    for (const auto& stmt : def.statements) { out.statements.push_back(substitute(stmt, subst)); }
    return out;
}

std::vector<GroundUnit> instantiate(std::span<const SubprogramDef> defs, Domain& domain, AtomTable& atoms,
                                    std::uint32_t first_tag, const WarningSink& warn) {
    std::vector<std::vector<Statement>> prepared(defs.size());
    std::vector<Projection>             projs;
    for (std::size_t i = 0; i < defs.size(); ++i) {
        if (!defs[i].params.empty()) {
            throw Error(ErrorCode::ArityMismatch, defs[i].name + " still has unsubstituted parameters");
        }
        for (const auto& stmt : defs[i].statements) {
            check_safety(stmt);
            prepared[i].push_back(make_anonymous_unique(stmt));
        }
    }
    for (const auto& stmts : prepared) {
        for (const auto& stmt : stmts) {
            auto p = projections(stmt);
            projs.insert(projs.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
        }
    }
    compute_possible(projs, domain);
    compute_certain(projs, domain);

    std::vector<GroundUnit> units(defs.size());
    for (std::size_t i = 0; i < defs.size(); ++i) {
        units[i].increment_tag = first_tag + static_cast<std::uint32_t>(i);
        UnitBuilder builder(domain, atoms, warn, units[i]);
        for (const auto& stmt : prepared[i]) { builder.add(stmt); }
    }
    return units;
}

GroundUnit instantiate(const SubprogramDef& def, Domain& domain, AtomTable& atoms, std::uint32_t tag, const WarningSink& warn) {
    auto units = instantiate(std::span<const SubprogramDef>(&def, 1), domain, atoms, tag, warn);
    return std::move(units.front());
}

// }}}
// {{{ Dump

namespace {

std::string body_text(const GroundRule& r, const AtomTable& atoms) {
    std::vector<std::string> pos;
    std::vector<std::string> neg;
    for (AtomId id : r.pos) { pos.push_back(atoms.symbol(id).to_string()); }
    for (AtomId id : r.neg) { neg.push_back("not " + atoms.symbol(id).to_string()); }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::string out;
    for (const auto* part : {&pos, &neg}) {
        for (const auto& s : *part) {
            if (!out.empty()) { out += ", "; }
            out += s;
        }
    }
    return out;
}

std::string condition_text(const std::vector<GroundLiteral>& cond, const AtomTable& atoms) {
    std::vector<std::string> pos;
    std::vector<std::string> neg;
    for (const auto& l : cond) {
        (l.negated ? neg : pos).push_back((l.negated ? "not " : "") + atoms.symbol(l.atom).to_string());
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    std::string out;
    for (const auto* part : {&pos, &neg}) {
        for (const auto& s : *part) {
            if (!out.empty()) { out += ", "; }
            out += s;
        }
    }
    return out;
}

} // namespace

std::string dump_ground(std::span<const GroundUnit> units, const AtomTable& atoms) {
    std::vector<const GroundUnit*> order;
    for (const auto& u : units) { order.push_back(&u); }
    std::stable_sort(order.begin(), order.end(), [](const GroundUnit* a, const GroundUnit* b) { return a->increment_tag < b->increment_tag; });
    std::ostringstream out;
    for (const GroundUnit* u : order) {
        out << "% inc " << u->increment_tag << '\n';
        for (const auto& r : u->rules) {
            if (const auto* a = std::get_if<AtomId>(&r.head)) {
                out << atoms.symbol(*a);
            } else if (const auto* c = std::get_if<GroundChoice>(&r.head)) {
                if (c->lower) { out << *c->lower << ' '; }
                out << '{';
                for (std::size_t i = 0; i < c->atoms.size(); ++i) {
                    if (i > 0) { out << "; "; }
                    out << atoms.symbol(c->atoms[i]);
                }
                out << '}';
                if (c->upper) { out << ' ' << *c->upper; }
            }
            std::string body = body_text(r, atoms);
            if (r.is_constraint()) {
                out << ":- " << body;
            } else if (!body.empty()) {
                out << " :- " << body;
            }
            out << ".\n";
        }
        for (AtomId id : u->external_decls) { out << "#external " << atoms.symbol(id) << ".\n"; }
        for (const auto& m : u->minimize_entries) {
            out << "#minimize{" << m.weight << '@' << m.priority;
            for (std::size_t i = 2; i < m.tuple.size(); ++i) { out << ',' << m.tuple[i]; }
            if (!m.condition.empty()) { out << " : " << condition_text(m.condition, atoms); }
            out << "}.\n";
        }
    }
    return out.str();
}

// }}}

} // namespace mshot
