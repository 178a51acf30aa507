#include <doctest.h>

#include "support.hpp"

#include <mshot/grounder.hpp>
#include <mshot/syntax.hpp>

#include <map>
#include <random>

using namespace mshot;

namespace {

struct Grounded {
    AtomTable               atoms;
    Domain                  domain;
    std::vector<GroundUnit> units;

    void add(const std::string& text, const std::vector<Value>& args = {}, std::size_t which = 0) {
        auto defs = parse_program(text);
        auto def  = substitute_params(defs.at(which), args);
        units.push_back(instantiate(def, domain, atoms, static_cast<std::uint32_t>(units.size())));
    }
    std::string dump() const { return dump_ground(units, atoms); }
    std::string rule(std::size_t unit, std::size_t i) const {
        GroundUnit one = units.at(unit);
        one.rules      = {units.at(unit).rules.at(i)};
        one.external_decls.clear();
        one.minimize_entries.clear();
        std::string text = dump_ground(std::span<const GroundUnit>(&one, 1), atoms);
        return text.substr(text.find('\n') + 1, text.size() - text.find('\n') - 2);
    }
};

} // namespace

TEST_CASE("substitute_params") {
    auto defs = parse_program("a(1). #program acid(k). b(k). #program cumulative(t). on(D,P,t) :- move(D,P,t).");
    auto acid = substitute_params(defs[1], std::vector<Value>{Value::integer(42)});
    CHECK(acid.params.empty());
    CHECK(to_string(acid.statements.at(0)) == "b(42).");
    CHECK(substitute_params(defs[0], {}).statements == defs[0].statements);
    auto cumulative = substitute_params(defs[2], std::vector<Value>{Value::integer(3)});
    CHECK(to_string(cumulative.statements.at(0)) == "on(D,P,3) :- move(D,P,3).");
    CHECK_THROWS_AS((void)substitute_params(defs[1], {}), Error);
}

TEST_CASE("facts ground to themselves") {
    Grounded g;
    g.add("a(1). a(2).");
    REQUIRE(g.units[0].rules.size() == 2);
    CHECK(g.dump() == "% inc 0\na(1).\na(2).\n");
}

TEST_CASE("external declarations join their condition") {
    Grounded g;
    g.add("q(1,2). r(2,3).");
    g.add("#external p(X,Y) : q(X,Z), r(Z,Y).");
    CHECK(g.units[1].rules.empty());
    REQUIRE(g.units[1].external_decls.size() == 1);
    CHECK(g.atoms.symbol(g.units[1].external_decls[0]).to_string() == "p(1,3)");
    CHECK(g.dump() == "% inc 0\nq(1,2).\nr(2,3).\n% inc 1\n#external p(1,3).\n");
}

TEST_CASE("minimize entries carry weight, priority and terms") {
    Grounded g;
    g.add("move(a,2,1). #minimize{W@P,X : move(X,W,P)}.");
    REQUIRE(g.units[0].minimize_entries.size() == 1);
    const auto& e = g.units[0].minimize_entries[0];
    CHECK(e.weight == 2);
    CHECK(e.priority == 1);
    CHECK(e.tuple == std::vector<Value>{Value::integer(2), Value::integer(1), Value::function("a")});
    REQUIRE(e.condition.size() == 1);
    CHECK(g.atoms.symbol(e.condition[0].atom).to_string() == "move(a,2,1)");
    CHECK_FALSE(e.condition[0].negated);
}

TEST_CASE("comparisons filter instances") {
    Grounded g;
    g.add("q(1). q(5). p(X) :- q(X), X < 3.");
    REQUIRE(g.units[0].rules.size() == 3);
    CHECK(g.rule(0, 2) == "p(1) :- q(1).");
}

TEST_CASE("dump lists units in tag order") {
    Grounded g;
    g.add("a(1).");
    g.add("b.");
    CHECK(g.dump() == "% inc 0\na(1).\n% inc 1\nb.\n");
}

TEST_CASE("recursion reaches a fixpoint") {
    Grounded g;
    g.add("e(1,2). e(2,3). e(3,1). t(X,Y) :- e(X,Y). t(X,Z) :- t(X,Y), e(Y,Z).");
    std::size_t t_atoms = g.domain.size(Signature{"t", 2});
    CHECK(t_atoms == 9);
}

TEST_CASE("intervals and arithmetic") {
    Grounded g;
    g.add("n(1..4). s(X*2+1) :- n(X), X / 2 * 2 = X.");
    std::string d = g.dump();
    CHECK(d.find("s(5) :- n(2).") != std::string::npos);
    CHECK(d.find("s(9) :- n(4).") != std::string::npos);
    CHECK(d.find("s(3)") == std::string::npos);
}

TEST_CASE("arithmetic errors are reported") {
    Grounded g;
    CHECK_THROWS_AS(g.add("p(X/0) :- q(X). q(1)."), Error);
    try {
        Grounded h;
        h.add("p(9223372036854775807+1).");
        FAIL("overflow accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ArithmeticError);
    }
}

TEST_CASE("negative literals over impossible atoms are dropped") {
    Grounded g;
    g.add("p :- not q. r :- not p.");
    CHECK(g.dump() == "% inc 0\np.\nr :- not p.\n");
}

TEST_CASE("choice elements expand their conditions") {
    Grounded g;
    g.add("d(1..3). 1 { pick(X) : d(X), X != 2 } 1.");
    CHECK(g.dump().find("1 {pick(1); pick(3)} 1.") != std::string::npos);
}

TEST_CASE("joint instantiation shares possible atoms") {
    AtomTable atoms;
    Domain    domain;
    auto defs = parse_program("#program a. p :- q. #program b. q.");
    std::vector<SubprogramDef> batch{substitute_params(defs[1], {}), substitute_params(defs[2], {})};
    auto units = instantiate(batch, domain, atoms, 0);
    REQUIRE(units.size() == 2);
    CHECK(units[0].rules.size() == 1);
    CHECK(units[0].increment_tag == 0);
    CHECK(units[1].increment_tag == 1);
}

TEST_CASE("non-domain conditions warn") {
    AtomTable atoms;
    Domain    domain;
    std::vector<std::string> warnings;
    auto defs = parse_program("c(1). c(2) :- not x. x :- not c(2). #external e(X) : c(X).");
    (void)instantiate(substitute_params(defs[0], {}), domain, atoms, 0,
                      [&](const std::string& w) { warnings.push_back(w); });
    CHECK_FALSE(warnings.empty());
}

TEST_CASE("grounding is deterministic") {
    const char* text = "n(1..5). e(X,Y) :- n(X), n(Y), X < Y. { s(X) : n(X) }. t(Y) :- s(X), e(X,Y). :- t(3), not s(1).";
    std::string first;
    for (int i = 0; i < 3; ++i) {
        Grounded g;
        g.add(text);
        if (i == 0) {
            first = g.dump();
        } else {
            CHECK(g.dump() == first);
        }
    }
}

// {{{ Oracle: naive instantiation over the constant universe

namespace {

using Binding = std::map<std::string, std::int64_t>;

std::optional<std::int64_t> eval(const Term& t, const Binding& b) {
    switch (t.kind) {
        case Term::Kind::Integer: return t.integer;
        case Term::Kind::Variable: return b.at(t.name);
        case Term::Kind::BinOp: {
            auto l = eval(t.args[0], b);
            auto r = eval(t.args[1], b);
            if (!l || !r) { return std::nullopt; }
            if (t.op == '+') { return *l + *r; }
            if (t.op == '-') { return *l - *r; }
            if (t.op == '*') { return *l * *r; }
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

std::string ground_atom(const Atom& a, const Binding& b) {
    std::string out = a.name;
    if (!a.args.empty()) {
        out += "(";
        for (std::size_t i = 0; i < a.args.size(); ++i) { out += (i > 0 ? "," : "") + std::to_string(*eval(a.args[i], b)); }
        out += ")";
    }
    return out;
}

bool compare(std::int64_t l, Relop op, std::int64_t r) {
    switch (op) {
        case Relop::Lt: return l < r;
        case Relop::Le: return l <= r;
        case Relop::Eq: return l == r;
        case Relop::Ne: return l != r;
        case Relop::Gt: return l > r;
        case Relop::Ge: return l >= r;
    }
    return false;
}

void vars_of(const Term& t, std::set<std::string>& out) {
    if (t.kind == Term::Kind::Variable) { out.insert(t.name); }
    for (const auto& a : t.args) { vars_of(a, out); }
}

/// Instantiates every rule for every assignment of its variables to
/// `universe`, keeping all instances whose comparisons hold.
SolverProgram naive_ground(const SubprogramDef& def, const std::vector<std::int64_t>& universe, std::map<std::string, AtomId>& ids) {
    SolverProgram p;
    auto id = [&](const std::string& s) {
        auto [it, inserted] = ids.try_emplace(s, static_cast<AtomId>(ids.size() + 1));
        return it->second;
    };
    for (const auto& stmt : def.statements) {
        const auto& rule = std::get<Rule>(stmt);
        std::set<std::string> vars;
        if (const auto* h = std::get_if<Atom>(&rule.head)) {
            for (const auto& t : h->args) { vars_of(t, vars); }
        }
        for (const auto& l : rule.body) {
            if (const auto* a = std::get_if<AtomLiteral>(&l)) {
                for (const auto& t : a->atom.args) { vars_of(t, vars); }
            } else {
                vars_of(std::get<Comparison>(l).lhs, vars);
                vars_of(std::get<Comparison>(l).rhs, vars);
            }
        }
        std::vector<std::string> order(vars.begin(), vars.end());
        std::vector<std::size_t> idx(order.size(), 0);
        while (true) {
            Binding b;
            for (std::size_t i = 0; i < order.size(); ++i) { b[order[i]] = universe[idx[i]]; }
            GroundRule g;
            bool ok = true;
            for (const auto& l : rule.body) {
                if (const auto* a = std::get_if<AtomLiteral>(&l)) {
                    (a->negated ? g.neg : g.pos).push_back(id(ground_atom(a->atom, b)));
                } else {
                    const auto& c = std::get<Comparison>(l);
                    ok = ok && compare(*eval(c.lhs, b), c.op, *eval(c.rhs, b));
                }
            }
            if (ok) {
                if (const auto* h = std::get_if<Atom>(&rule.head)) { g.head = id(ground_atom(*h, b)); }
                p.rules.push_back(std::move(g));
            }
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] == universe.size()) { idx[k++] = 0; }
            if (k == idx.size()) { break; }
        }
    }
    p.atom_count = static_cast<AtomId>(ids.size() + 1);
    return p;
}

std::string random_rule(std::mt19937& rng) {
    auto pick  = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto cst   = [&] { return std::to_string(pick(1, 3)); };
    auto vname = [&] { return pick(0, 1) == 0 ? std::string("X") : std::string("Y"); };
    auto atom  = [&](bool allow_vars) {
        static const char* preds[] = {"p", "q", "r"};
        std::string name = preds[pick(0, 2)];
        auto arg = [&] { return allow_vars && pick(0, 2) > 0 ? vname() : cst(); };
        if (name == "r") { return name + "(" + arg() + "," + arg() + ")"; }
        return name + "(" + arg() + ")";
    };
    if (pick(0, 3) == 0) { return atom(false) + "."; }
    // Bind X and Y through a positive literal first so that the rule is safe.
    std::string body = "r(X,Y)";
    if (pick(0, 1) == 0) { body = "p(X), q(Y)"; }
    for (int i = pick(0, 2); i > 0; --i) {
        switch (pick(0, 2)) {
            case 0: body += ", not " + atom(true); break;
            case 1: body += ", X " + std::string(pick(0, 1) == 0 ? "<" : "!=") + " Y"; break;
            default: body += ", " + atom(true); break;
        }
    }
    if (pick(0, 4) == 0) { return ":- " + body + "."; }
    return atom(true) + " :- " + body + ".";
}

} // namespace

TEST_CASE("semi-naive grounding agrees with naive instantiation") {
    std::mt19937 rng(2024);
    for (int round = 0; round < 200; ++round) {
        std::string text;
        int rules = std::uniform_int_distribution<int>(2, 8)(rng);
        for (int i = 0; i < rules; ++i) { text += random_rule(rng) + "\n"; }
        CAPTURE(text);
        auto defs = parse_program(text);

        std::map<std::string, AtomId> ids;
        SolverProgram naive = naive_ground(defs[0], {1, 2, 3}, ids);
        std::vector<std::string> names(ids.size() + 1);
        for (const auto& [name, id] : ids) { names[id] = name; }
        std::set<std::set<std::string>> expected;
        solve(naive, [&](const Model& m) {
            std::set<std::string> s;
            for (AtomId a : m.atoms) { s.insert(names[a]); }
            expected.insert(s);
            return true;
        }, SolveOptions{SolveMode::All, 0, 0, 100});

        Engine engine;
        engine.load(text);
        engine.ground("base");
        CHECK(testing::solve_text(engine) == expected);
    }
}

// }}}
