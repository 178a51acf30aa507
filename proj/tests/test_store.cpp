#include <doctest.h>

#include "support.hpp"

#include <mshot/store.hpp>
#include <mshot/syntax.hpp>

using namespace mshot;

namespace {

/// Grounds `text` (base part) against the store's domain and joins it.
void join(Store& store, const std::string& text) {
    auto defs = parse_program(text);
    store.join_module(instantiate(substitute_params(defs[0], {}), store.domain(), store.atoms(), store.next_tag()));
}

Value atom(const std::string& text) { return evaluate_ground(parse_term(text)); }

ErrorCode error_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::SyntaxError;
}

} // namespace

TEST_CASE("redefinition across increments") {
    Store store;
    join(store, "a.");
    try {
        join(store, "a :- b. b.");
        FAIL("redefinition accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Redefinition);
        CHECK(e.detail().find("a") == 0);
        CHECK(e.detail().find("increment 0") != std::string::npos);
    }
    // The failed join left the store unchanged.
    CHECK(store.increments().size() == 1);
    CHECK(store.rule_count() == 1);
}

TEST_CASE("cross-increment positive cycle") {
    Store store;
    join(store, "#external e. a :- e.");
    try {
        join(store, "e :- a.");
        FAIL("cycle accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::CrossIncrementPositiveCycle);
        CHECK(e.detail() == "[a,e]");
    }
    CHECK(store.external_state(atom("e"))->status == ExternalStatus::Free);
}

TEST_CASE("acyclic definition of an external") {
    std::vector<std::string> warnings;
    Store store([&](const std::string& w) { warnings.push_back(w); });
    join(store, "#external e. a :- e.");
    join(store, "e :- b. b.");
    CHECK(store.external_state(atom("e"))->status == ExternalStatus::Defined);
    CHECK_FALSE(store.is_external(*store.atoms().find(atom("b"))));
    CHECK(warnings.size() == 1);
    auto p = store.snapshot();
    CHECK(p.inputs.empty());
}

TEST_CASE("assign_external") {
    Store store;
    join(store, "#external query(3). a.");
    store.assign_external(atom("query(3)"), true);
    CHECK(*store.external_state(atom("query(3)")) == ExternalState{ExternalStatus::Free, true});
    CHECK(error_of([&] { store.assign_external(atom("a"), true); }) == ErrorCode::AlreadyDefined);
    store.assign_external(atom("query(3)"), false);
    store.assign_external(atom("query(3)"), false);
    CHECK(*store.external_state(atom("query(3)")) == ExternalState{ExternalStatus::Free, false});
    CHECK(error_of([&] { store.assign_external(atom("zzz"), true); }) == ErrorCode::NotExternal);
}

TEST_CASE("release_external") {
    Store store;
    join(store, "#external query(2).");
    store.release_external(atom("query(2)"));
    CHECK(store.external_state(atom("query(2)"))->status == ExternalStatus::Released);
    CHECK(error_of([&] { store.assign_external(atom("query(2)"), true); }) == ErrorCode::AlreadyReleased);
    CHECK(error_of([&] { store.release_external(atom("query(2)")); }) == ErrorCode::AlreadyReleased);
    CHECK(error_of([&] { store.release_external(atom("never")); }) == ErrorCode::NotExternal);
    // Released atoms can never gain rules.
    CHECK(error_of([&] { join(store, "query(2)."); }) == ErrorCode::Redefinition);
}

TEST_CASE("release matches an added integrity constraint") {
    const std::string program = "#external q(2). a :- q(2). b :- not a. { c; d }.";
    Store released;
    join(released, program);
    released.assign_external(atom("q(2)"), true);
    released.release_external(atom("q(2)"));

    Engine fresh;
    fresh.load(program + " :- q(2).");
    fresh.ground("base");

    auto snap = released.snapshot();
    std::set<std::set<std::string>> got;
    solve(snap, [&](const Model& m) {
        std::set<std::string> s;
        for (AtomId a : m.shown) { s.insert(released.atoms().symbol(a).to_string()); }
        got.insert(s);
        return true;
    }, SolveOptions{SolveMode::All, 0, 0, 100});
    CHECK(got == testing::solve_text(fresh));
    CHECK(got.size() == 4);
}

TEST_CASE("snapshot reflects external assignments") {
    Store store;
    join(store, "a(1). #external e.");
    AtomId e = *store.atoms().find(atom("e"));
    auto off = store.snapshot();
    REQUIRE(off.assumptions.size() == 1);
    CHECK(off.assumptions[0] == std::pair<AtomId, bool>{e, false});
    store.assign_external(atom("e"), true);
    auto on = store.snapshot();
    CHECK(on.assumptions[0] == std::pair<AtomId, bool>{e, true});
    // Per-call overrides win over the stored value.
    std::vector<std::pair<AtomId, bool>> extra{{e, false}};
    CHECK(store.snapshot(extra).assumptions[0].second == false);
    CHECK(store.snapshot().assumptions[0].second == true);
}

TEST_CASE("objective terms conditioned on a false external contribute nothing") {
    Store store;
    join(store, "move(a,b,3,1,1). #external activateObjective(1). #minimize{ W@P,X,Y,1 : move(X,Y,W,P,1), activateObjective(1) }.");
    auto p = store.snapshot();
    REQUIRE(p.objective.size() == 1);
    SolveResult r = solve(p, {});
    REQUIRE(r.optimum);
    CHECK(r.optimum->at(1) == 0);
    store.assign_external(atom("activateObjective(1)"), true);
    r = solve(store.snapshot(), {});
    CHECK(r.optimum->at(1) == 3);
}

TEST_CASE("minimize entries with the same tuple merge across increments") {
    Store store;
    join(store, "{x}. #minimize{ 2@1,t : x }.");
    join(store, "{y}. #minimize{ 2@1,t : y }.");
    auto p = store.snapshot();
    REQUIRE(p.objective.size() == 1);
    CHECK(p.objective[0].conditions.size() == 2);
    // Both true still counts once.
    std::vector<AtomId> both{*store.atoms().find(atom("x")), *store.atoms().find(atom("y"))};
    std::sort(both.begin(), both.end());
    CHECK(evaluate_cost(p, both).at(1) == 2);
}

TEST_CASE("show directives select atoms by signature") {
    Store store;
    join(store, "p(1). p(2). q(1). #show p/1.");
    auto snap = store.snapshot();
    CHECK_FALSE(snap.show_all);
    CHECK(snap.shown.size() == 2);
}

TEST_CASE("increment records") {
    Store store;
    join(store, "a.");
    join(store, "b :- a.");
    REQUIRE(store.increments().size() == 2);
    CHECK(store.increments()[1].tag == 1);
    CHECK(store.increments()[1].first_rule == 1);
    CHECK(store.increments()[1].end_rule == 2);
    CHECK(store.units().size() == 2);
}
